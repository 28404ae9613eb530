"""
Command-line interface for Sheaf Invariants
"""

import asyncio
import os
import sys
from typing import Any, Callable, Dict, List, Optional

import click

# Add src directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from atlas import TABLE1_SPACES, Atlas
from bundles import class_from_source
from formulas import delta_genfun, genfun, hilbert_closed_form, moduli_dim, taylor_coeffs
from invariants import gamma_full, hilbert, pencil_profile
from models import (
    CechSettings,
    ClaimVerificationError,
    ClassKind,
    OutputFormat,
    SheafInvariantsError,
    UsageError,
)
from series_algebra import GRAMMAR_HINT
from spaces import FLOP, parse_conormal, parse_space
from utils import (
    __description__,
    __version__,
    dict_rows,
    format_scalar,
    load_config,
    parse_int_list,
    parse_scalar,
    render,
)


FORMATS = click.Choice([f.value for f in OutputFormat])

format_option = click.option('--format', 'fmt', type=FORMATS, default='json', help='Output format')
samples_option = click.option('--samples', type=int, default=None, help='Random classes per splitting type')
seed_option = click.option('--seed', type=int, default=None, help='First seed of the sample schedule')


@click.group()
@click.option('--config', default='config/config.yaml', help='Configuration file path')
@click.option('--cache', default=None, help='JSON-lines results cache (SHEAF_CACHE takes precedence)')
@click.option('--workers', type=int, default=None, help='Worker processes for sweeps (0 runs inline)')
@click.option('--debug', is_flag=True, help='Debug logging and coboundary matrix dumps')
@click.pass_context
def cli(ctx, config, cache, workers, debug):
    """Sheaf Invariants - local invariants of rank-2 bundles on Z_k and W_1"""
    ctx.ensure_object(dict)
    ctx.obj['config'] = config
    ctx.obj['cache'] = cache
    ctx.obj['workers'] = workers
    ctx.obj['debug'] = debug


def _load(ctx) -> Dict:
    config = load_config(ctx.obj['config'])
    if ctx.obj.get('cache') and not os.environ.get("SHEAF_CACHE"):
        config['cache']['path'] = ctx.obj['cache']
        config['cache']['enabled'] = True
    if ctx.obj.get('workers') is not None:
        config['sweep']['workers'] = ctx.obj['workers']
    if ctx.obj.get('debug'):
        config['logging']['level'] = 'DEBUG'
        config['cech']['debug_dump'] = True
    return config


def _fail(e: Exception):
    code = e.exit_code if isinstance(e, SheafInvariantsError) else 1
    click.echo(f"✗ Error: {e}", err=True)
    sys.exit(code)


def _with_atlas(ctx, body: Callable) -> Any:
    """Run body(atlas) inside an initialized atlas and map failures to exit codes"""

    async def run():
        atlas = Atlas(config=_load(ctx))
        try:
            await atlas.initialize()
            return await body(atlas)
        except Exception as e:
            _fail(e)
        finally:
            await atlas.stop()

    return asyncio.run(run())


def _emit(payload: Any, rows: List[Dict[str, Any]], fmt: str,
          columns: Optional[List[str]] = None, title: str = ""):
    click.echo(render(payload, rows, OutputFormat(fmt), columns, title))


@cli.command()
@click.option('--space', required=True, help="Space: 'zk:<k>' or 'w1'")
@click.option('--j', 'j', type=int, required=True, help='Splitting type')
@click.option('--class', 'class_source', default='split',
              help="'split', 'random:<seed>' or a polynomial such as 'u*z^-1 + 3/2*u^2*z^-4'")
@format_option
@click.pass_context
def invariants(ctx, space, j, class_source, fmt):
    """Width, height, chi, h1(End) and Delta of one bundle"""

    async def run_invariants(atlas):
        try:
            E, seed = class_from_source(parse_space(space), j, class_source, atlas.coeff_bound)
        except UsageError as e:
            if class_source.strip().lower() == "split" or class_source.lower().startswith("random:"):
                raise
            raise UsageError(f"{e}\n  grammar: {GRAMMAR_HINT}")
        built = await atlas.compute_report(E, claim="invariants", seed=seed)
        payload = built.to_dict()
        payload["seed"] = seed
        row = {k: v for k, v in payload.items() if k != "certificate"}
        _emit(payload, [row], fmt, ["space", "j", "class", "w", "h", "chi", "h1End", "delta", "seed"])

    _with_atlas(ctx, run_invariants)


@cli.command()
@click.option('--space', 'spaces', multiple=True, type=click.Choice(list(TABLE1_SPACES)),
              help='Restrict to some rows (repeatable)')
@samples_option
@seed_option
@format_option
@click.pass_context
def table1(ctx, spaces, samples, seed, fmt):
    """Reproduce the width / height / h1(End) table at j = 3"""

    async def run_table1(atlas):
        rows = await atlas.table1(samples=samples, seed=seed, spaces=spaces or TABLE1_SPACES)
        data = dict_rows(rows)
        _emit({"rows": data}, data, fmt, ["space", "kind", "w", "h", "h1end"]
              if fmt == OutputFormat.CSV.value else ["space", "kind", "w", "h", "h1end", "expected", "status"],
              title="Width, height and h1(End), j = 3")

        mismatched = [r for r in rows if r.status == "mismatch"]
        unconverged = [r for r in rows if r.status == "unconverged"]
        for r in unconverged:
            click.echo(f"⚠ {r.space} {r.kind.value}: {r.values} above expected {tuple(r.expected)} "
                       f"after {r.samples} samples", err=True)
        if mismatched:
            diff = "; ".join(f"{r.space} {r.kind.value}: got {r.values}, expected {tuple(r.expected)}"
                             for r in mismatched)
            raise ClaimVerificationError(f"table mismatch: {diff}")

    _with_atlas(ctx, run_table1)


@cli.command()
@click.option('--space', required=True, help="Space: 'zk:<k>' or 'w1'")
@click.option('--jmax', type=int, default=6, help='Largest splitting type')
@samples_option
@seed_option
@format_option
@click.pass_context
def sweep(ctx, space, jmax, samples, seed, fmt):
    """Check sampled and split bundles against the closed-form bounds"""

    async def run_sweep(atlas):
        rows = await atlas.sweep_bounds(parse_space(space), jmax, samples=samples, seed=seed)
        data = dict_rows(rows)
        _emit({"space": parse_space(space).label, "rows": data}, data, fmt, title=f"Bounds sweep on {space}")
        violations = [v for r in rows for v in r.violations]
        if violations:
            raise ClaimVerificationError(f"{len(violations)} bound violations, first: {violations[0]}")

    _with_atlas(ctx, run_sweep)


@cli.command(name='genfun')
@click.option('--space', required=True, help="Space: 'zk:<k>' or 'w1'")
@click.option('--kind', type=click.Choice(['split', 'generic', 'delta']), default='split')
@click.option('--jmax', type=int, default=10, help='Last coefficient to extract')
@format_option
@click.pass_context
def genfun_command(ctx, space, kind, jmax, fmt):
    """Taylor coefficients of the h1(End) generating functions"""
    try:
        target = parse_space(space)
        f = delta_genfun(target) if kind == 'delta' else genfun(target, ClassKind(kind))
        coeffs = taylor_coeffs(f, jmax)
        rows = [{"j": j, "a_j": a} for j, a in enumerate(coeffs) if j >= 1]
        payload = {
            "space": target.label,
            "kind": kind,
            "numerator": list(f.numerator),
            "denominator": list(f.denominator),
            "coefficients": rows,
        }
        _emit(payload, rows, fmt, ["j", "a_j"], title=f"h1(End) generating function, {target.label} {kind}")
    except Exception as e:
        _fail(e)


@cli.command(name='hilbert')
@click.option('--space', required=True, help="Space: 'zk:<k>' or 'w1'")
@click.option('--m', 'm', type=int, required=True, help='Order of the infinitesimal neighbourhood')
@click.option('--j', 'j', type=int, default=1, help='Splitting type')
@click.option('--class', 'class_source', default='split', help="'split', 'random:<seed>' or a polynomial")
@click.option('--end', 'endomorphism', is_flag=True, help='Hilbert polynomial of End E')
@click.option('--n', 'n_values', default='0,1,2', help='Comma-separated twists to sample')
@format_option
@click.pass_context
def hilbert_command(ctx, space, m, j, class_source, endomorphism, n_values, fmt):
    """Interpolate phi(E^(m), n) and compare it with the closed form"""
    try:
        config = _load(ctx)
        target = parse_space(space)
        E, seed = class_from_source(target, j, class_source, int(config['sampling']['coeff_bound']))
        fitted = hilbert(E, m, parse_int_list(n_values), endomorphism, CechSettings.from_config(config))
        expected = hilbert_closed_form(target, m, endomorphism)
        payload = dict(fitted.to_dict(), space=target.label, j=j, **{"class": E.class_text},
                       seed=seed, closedForm=[format_scalar(c) for c in expected.coefficients],
                       matches=fitted.coefficients == expected.coefficients)
        row = {"space": target.label, "m": m, "j": j, "end": endomorphism,
               "constant": fitted.coefficients[0], "linear": fitted.coefficients[1],
               "matches": payload["matches"]}
        _emit(payload, [row], fmt, title="Hilbert polynomial phi(E^(m), n) = constant + linear*n")
        if not payload["matches"]:
            raise ClaimVerificationError(
                f"Hilbert polynomial {payload['coefficients']} differs from the closed form {payload['closedForm']}"
            )
    except Exception as e:
        _fail(e)


@cli.command()
@click.option('--j', 'j', type=int, required=True, help='Splitting type')
@click.option('--conormal', default='w1', help='Conormal type: w1, w2 or w3')
@format_option
@click.pass_context
def moduli(ctx, j, conormal, fmt):
    """Moduli dimension and first-order deformation counts"""
    try:
        dims = moduli_dim(j)
        deformations = gamma_full(j, parse_conormal(conormal))
        payload = dict(dims.to_dict(), conormal=parse_conormal(conormal).label,
                       gamma1=deformations.gamma1,
                       gammaFull=deformations.to_dict()["gammaFull"])
        _emit(payload, [payload], fmt, ["j", "conormal", "gamma1", "projDim", "chi", "gammaFull"])
    except Exception as e:
        _fail(e)


@cli.command()
@click.option('--k', 'k', type=int, required=True, help='Surface Z_k')
@click.option('--jmax', type=int, required=True, help='Largest splitting type (multiples of k are used)')
@samples_option
@seed_option
@format_option
@click.pass_context
def gap(ctx, k, jmax, samples, seed, fmt):
    """Minimal instanton charge among splitting types j = 0 mod k"""

    async def run_gap(atlas):
        spectrum = await atlas.instanton_gap(k, jmax, samples=samples, seed=seed)
        payload = spectrum.to_dict()
        rows = [{"k": k, "j": j, "achieved": values} for j, values in sorted(spectrum.achieved.items())]
        _emit(payload, rows, fmt, ["k", "j", "achieved"],
              title=f"Charge spectrum on Z_{k}: min chi {spectrum.min_chi}, {spectrum.verdict.value}")

    _with_atlas(ctx, run_gap)


@cli.command()
@click.option('--j', 'j', type=int, required=True, help='Splitting type')
@click.option('--class', 'class_source', default='split', help="'split', 'random:<seed>' or a polynomial in z, u, v")
@click.option('--c', 'cs', default='0,1,inf', help="Comma-separated pencil parameters (rationals or 'inf')")
@format_option
@click.pass_context
def pencil(ctx, j, class_source, cs, fmt):
    """(w, h) of the restrictions to the pencil of Z_1 divisors in W_1"""
    try:
        config = _load(ctx)
        E, seed = class_from_source(FLOP, j, class_source, int(config['sampling']['coeff_bound']))
        points = pencil_profile(E, [parse_scalar(c) for c in cs.split(",") if c.strip()],
                                CechSettings.from_config(config))
        rows = dict_rows(points)
        _emit({"j": j, "class": E.class_text, "seed": seed, "points": rows}, rows, fmt, ["c", "w", "h"])
    except Exception as e:
        _fail(e)


@cli.command()
@click.option('--k', 'k', type=int, required=True, help='Surface Z_k')
@click.option('--j', 'j', type=int, required=True, help='Splitting type')
@click.option('--pairs', is_flag=True, help='Report (w, h) pairs with multiplicities instead of chi values')
@samples_option
@seed_option
@format_option
@click.pass_context
def scan(ctx, k, j, pairs, samples, seed, fmt):
    """Which chi values between the bounds are reached by sampled bundles"""

    async def run_scan(atlas):
        if pairs:
            data = await atlas.stratification_pairs(k, j, samples=samples, seed=seed)
            _emit({"k": k, "j": j, "pairs": data}, data, fmt, ["w", "h", "count"])
            return
        result = await atlas.intermediate_value_scan(k, j, samples=samples, seed=seed)
        _emit(result.to_dict(), [result.to_dict()], fmt,
              ["k", "j", "lower", "upper", "achieved", "not_observed"])

    _with_atlas(ctx, run_scan)


@cli.command()
@click.option('--claim', type=click.Choice(['nonempty', 'flop']), default='nonempty')
@click.option('--n', 'n', type=int, default=None, help='Charge for the non-emptiness witness')
@click.option('--k', 'k', type=int, default=None, help='Surface Z_k for the non-emptiness witness')
@click.option('--j', 'j', type=int, default=None, help='Splitting type for the flop family witness')
@samples_option
@seed_option
@format_option
@click.pass_context
def witness(ctx, claim, n, k, j, samples, seed, fmt):
    """Construct a bundle witnessing an existence statement"""

    async def run_witness(atlas):
        if claim == 'nonempty':
            if n is None or k is None:
                raise click.UsageError("--n and --k are required for the nonempty claim")
            record = await atlas.witness_nonempty(n, k, samples=samples, seed=seed)
        else:
            if j is None:
                raise click.UsageError("--j is required for the flop claim")
            record = await atlas.witness_flop_family(j, samples=samples, seed=seed)
        payload = record.to_dict()
        row = {"claim": record.claim, "space": record.space, "j": record.j, "class": record.class_text,
               "chi": record.report.chi if record.report else None,
               "seed": record.seed, "verdict": record.verdict.value}
        _emit(payload, [row], fmt)
        if record.verdict.value == "fail":
            raise ClaimVerificationError(f"witness for {record.claim} failed")

    _with_atlas(ctx, run_witness)


@cli.command()
@click.pass_context
def version(ctx):
    """Show version information"""
    click.echo(f"Sheaf Invariants v{__version__}")
    click.echo(__description__)


if __name__ == '__main__':
    cli()
