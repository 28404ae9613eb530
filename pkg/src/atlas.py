"""
Atlas - exploration harness over the invariants of extension bundles
Runs witness constructions, charge-gap checks, bound sweeps and the
reference table, fanning independent computations out to worker processes
"""

import asyncio
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from bundles import ExtensionBundle, canonical_class, make_split, random_class
from formulas import chi_bounds, chi_bounds_surface, h1end_bounds_w1, moduli_dim
from invariants import gamma1, height, report, width
from models import (
    BoundsSweepRow,
    CechSettings,
    ChargeSpectrum,
    ClassKind,
    InvariantReport,
    ScanReport,
    SheafInvariantsError,
    Table1Row,
    UsageError,
    Verdict,
    WitnessRecord,
)
from results_cache import ResultsCache
from spaces import FLOP, W1_CONORMAL, SpaceDescriptor, Surface
from utils import load_config, setup_logging


def _report_task(E: ExtensionBundle, settings: CechSettings) -> InvariantReport:
    return report(E, settings)


def _width_height_task(E: ExtensionBundle, settings: CechSettings) -> Tuple[int, int]:
    return width(E, settings), height(E, settings)


TABLE1_SPACES = ("Z1", "Z2", "Z3", "W1")


def _table_space(name: str) -> SpaceDescriptor:
    return FLOP if name == "W1" else Surface(int(name[1:]))


class Atlas:
    """Orchestrates sampled invariant computations, the results cache and sweep statistics"""

    def __init__(self, config_path: str = "config/config.yaml", config: Optional[Dict] = None):
        self.config = config if config is not None else load_config(config_path)
        self.logger = setup_logging(self.config.get("logging", {}))

        self.settings = CechSettings.from_config(self.config)
        sampling = self.config.get("sampling", {})
        self.samples = int(sampling.get("samples", 20))
        self.coeff_bound = int(sampling.get("coeff_bound", 1000000))
        self.base_seed = int(sampling.get("base_seed", 0))
        self.workers = int(self.config.get("sweep", {}).get("workers", 0))

        self.results_cache = ResultsCache(self.config.get("cache", {}))
        self.executor: Optional[ProcessPoolExecutor] = None

        self.stats = {
            "reports_computed": 0,
            "cache_hits": 0,
            "bundles_sampled": 0,
            "errors": 0,
        }

        self.logger.info("Atlas initialized")

    async def initialize(self):
        try:
            await self.results_cache.initialize()
            if self.workers > 0:
                self.executor = ProcessPoolExecutor(max_workers=self.workers)
            self.logger.info(f"Atlas ready (workers={self.workers}, samples={self.samples})")

        except Exception as e:
            self.logger.error(f"Failed to initialize Atlas: {e}")
            raise

    async def stop(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None
        await self.results_cache.close()
        self.logger.info("Atlas stopped")

    # -- scheduling -----------------------------------------------------

    def seed_schedule(self, samples: Optional[int] = None, seed: Optional[int] = None) -> List[int]:
        count = self.samples if samples is None else samples
        if count < 0:
            raise UsageError("sample count must be >= 0")
        start = self.base_seed if seed is None else seed
        return list(range(start, start + count))

    async def _run(self, fn: Callable, *args) -> Any:
        if self.executor is None:
            return fn(*args)
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.executor, fn, *args)

    async def _gather(self, fn: Callable, bundles: Sequence[ExtensionBundle]) -> List[Any]:
        results = await asyncio.gather(*(self._run(fn, E, self.settings) for E in bundles),
                                       return_exceptions=True)
        for result in results:
            if isinstance(result, Exception):
                self.stats["errors"] += 1
                self.logger.error(f"Error computing invariants: {result}")
                raise result
        return list(results)

    def sample_bundles(self, space: SpaceDescriptor, j: int, seeds: Sequence[int]) -> List[ExtensionBundle]:
        self.stats["bundles_sampled"] += len(seeds)
        return [random_class(space, j, seed, self.coeff_bound) for seed in seeds]

    # -- reports --------------------------------------------------------

    async def compute_report(self, E: ExtensionBundle, claim: str = "",
                             seed: Optional[int] = None) -> InvariantReport:
        """Full invariant report, served from the results cache when possible"""
        try:
            key = self.results_cache.make_key(E.space.label, E.j, canonical_class(E).digest,
                                              self.settings.cache_key())
            cached = self.results_cache.get_report(key)
            if cached is not None:
                self.stats["cache_hits"] += 1
                return cached
            built = await self._run(_report_task, E, self.settings)
            self.stats["reports_computed"] += 1
            await self.results_cache.save_report(key, built, claim=claim, seed=seed)
            return built

        except SheafInvariantsError:
            self.stats["errors"] += 1
            raise
        except Exception as e:
            self.stats["errors"] += 1
            self.logger.error(f"Error computing report for {E.class_text} on {E.space}: {e}")
            raise

    async def compute_reports(self, bundles: Sequence[ExtensionBundle], claim: str = "",
                              seeds: Optional[Sequence[Optional[int]]] = None) -> List[InvariantReport]:
        seeds = list(seeds) if seeds is not None else [None] * len(bundles)
        return list(await asyncio.gather(*(
            self.compute_report(E, claim, seed) for E, seed in zip(bundles, seeds)
        )))

    async def width_heights(self, bundles: Sequence[ExtensionBundle]) -> List[Tuple[int, int]]:
        return await self._gather(_width_height_task, bundles)

    async def generic_values(self, space: SpaceDescriptor, j: int, samples: Optional[int] = None,
                             seed: Optional[int] = None) -> Dict[str, Any]:
        """Minimum of each invariant over the seeded samples"""
        seeds = self.seed_schedule(samples, seed)
        if not seeds:
            raise UsageError("generic values need at least one sample")
        reports = await self.compute_reports(self.sample_bundles(space, j, seeds), "generic", seeds)
        return {
            "w": min(r.width for r in reports),
            "h": min(r.height for r in reports),
            "h1End": min(r.h1_end for r in reports),
            "chi": min(r.chi for r in reports),
            "seeds": seeds,
            "reports": reports,
        }

    # -- existence witnesses --------------------------------------------

    async def witness_nonempty(self, n: int, k: int, samples: Optional[int] = None,
                               seed: Optional[int] = None) -> WitnessRecord:
        """A reflexive sheaf on X_k with chi = n, from a bundle attaining the lower bound"""
        if n < 0 or k < 1:
            raise UsageError(f"witness needs n >= 0 and k >= 1, got n={n}, k={k}")
        claim = f"nonempty:n={n}:k={k}"
        space = Surface(k)
        if n == 0:
            # j = 1 is split and has chi = 0 when k >= 2; on Z_1 only the trivial bundle does
            E = make_split(space, 1 if k >= 2 else 0)
            built = await self.compute_report(E, claim)
            verdict = Verdict.PASS if built.chi == 0 else Verdict.FAIL
            return WitnessRecord(claim, space.label, E.j, E.class_text, built, verdict)

        j = n + 1
        seeds = self.seed_schedule(samples, seed)
        for s in seeds:
            E = random_class(space, j, s, self.coeff_bound)
            self.stats["bundles_sampled"] += 1
            w, h = (await self.width_heights([E]))[0]
            if w + h < n:
                built = await self.compute_report(E, claim, s)
                return WitnessRecord(claim, space.label, j, canonical_class(E).text, built,
                                     Verdict.FAIL, seed=s, details={"reason": "chi below j - 1"})
            if w + h == n:
                built = await self.compute_report(E, claim, s)
                verdict = Verdict.PASS if built.chi == n else Verdict.FAIL
                return WitnessRecord(claim, space.label, j, canonical_class(E).text, built, verdict, seed=s)
        self.logger.warning(f"No sampled bundle reached chi = {n} on {space} in {len(seeds)} samples")
        return WitnessRecord(claim, space.label, j, "", None, Verdict.INCONCLUSIVE,
                             details={"samples": len(seeds), "seeds": seeds})

    async def witness_flop_family(self, j: int, samples: Optional[int] = None,
                                  seed: Optional[int] = None) -> WitnessRecord:
        """Generic W_1 bundle with chi = j - 1 plus the (4j - 5)-dimensional family count"""
        if j < 2:
            raise UsageError("the flop family exists for splitting type j >= 2")
        claim = f"flop-family:j={j}"
        moduli = moduli_dim(j)
        deformations = gamma1(j, W1_CONORMAL)
        details = {"projDim": moduli.dim, "gamma1": deformations.gamma1}
        for s in self.seed_schedule(samples, seed):
            E = random_class(FLOP, j, s, self.coeff_bound)
            self.stats["bundles_sampled"] += 1
            built = await self.compute_report(E, claim, s)
            if built.chi == j - 1:
                ok = moduli.dim == 4 * j - 5 and deformations.gamma1 == 4 * j - 4
                return WitnessRecord(claim, FLOP.label, j, canonical_class(E).text, built,
                                     Verdict.PASS if ok else Verdict.FAIL, seed=s, details=details)
            if built.chi < j - 1:
                return WitnessRecord(claim, FLOP.label, j, canonical_class(E).text, built,
                                     Verdict.FAIL, seed=s, details=dict(details, reason="chi below j - 1"))
        return WitnessRecord(claim, FLOP.label, j, "", None, Verdict.INCONCLUSIVE, details=details)

    # -- charge spectrum ------------------------------------------------

    async def _achieved_chi(self, space: SpaceDescriptor, j: int,
                            seeds: Sequence[int]) -> List[int]:
        bundles = [make_split(space, j)] + self.sample_bundles(space, j, seeds)
        return sorted({w + h for w, h in await self.width_heights(bundles)})

    async def instanton_gap(self, k: int, jmax: int, samples: Optional[int] = None,
                            seed: Optional[int] = None) -> ChargeSpectrum:
        """Minimal charge k - 1 among splitting types j = 0 mod k"""
        if k < 2:
            raise UsageError("Z_1 has no charge gap; instanton_gap needs k >= 2")
        if jmax < k:
            raise UsageError(f"jmax must be at least k={k}")
        space = Surface(k)
        seeds = self.seed_schedule(samples, seed)
        achieved: Dict[int, List[int]] = {}
        for j in range(k, jmax + 1, k):
            achieved[j] = await self._achieved_chi(space, j, seeds)

        min_chi = min(v for values in achieved.values() for v in values)
        # chi >= j - 1 >= k - 1 whenever j = 0 mod k and j > 0
        bound_certified = all(chi_bounds_surface(j, k).lower >= k - 1 for j in achieved)
        if min_chi < k - 1 or not bound_certified:
            verdict = Verdict.FAIL
        elif min_chi == k - 1:
            verdict = Verdict.PASS
        else:
            verdict = Verdict.INCONCLUSIVE
        self.logger.info(f"Charge spectrum on Z_{k}: min chi {min_chi}, verdict {verdict.value}")
        return ChargeSpectrum(k=k, achieved=achieved, samples=len(seeds), min_chi=min_chi,
                              bound_certified=bound_certified, verdict=verdict)

    async def intermediate_value_scan(self, k: int, j: int, samples: Optional[int] = None,
                                      seed: Optional[int] = None) -> ScanReport:
        seeds = self.seed_schedule(samples, seed)
        bounds = chi_bounds_surface(j, k)
        achieved = await self._achieved_chi(Surface(k), j, seeds)
        not_observed = [v for v in range(bounds.lower, bounds.upper + 1) if v not in achieved]
        return ScanReport(k=k, j=j, lower=bounds.lower, upper=bounds.upper,
                          achieved=achieved, not_observed=not_observed, seeds=list(seeds))

    async def stratification_pairs(self, k: int, j: int, samples: Optional[int] = None,
                                   seed: Optional[int] = None) -> List[Dict[str, int]]:
        """Distinct (w, h) pairs with their multiplicity, the split bundle included"""
        if j < 1 or j % k:
            raise UsageError(f"stratification pairs need j a positive multiple of k={k}, got {j}")
        space = Surface(k)
        seeds = self.seed_schedule(samples, seed)
        bundles = [make_split(space, j)] + self.sample_bundles(space, j, seeds)
        counts = Counter(await self.width_heights(bundles))
        return [{"w": w, "h": h, "count": counts[(w, h)]} for (w, h) in sorted(counts)]

    # -- sweeps ---------------------------------------------------------

    async def sweep_bounds(self, space: SpaceDescriptor, jmax: int, samples: Optional[int] = None,
                           seed: Optional[int] = None) -> List[BoundsSweepRow]:
        """Split and sampled invariants against the closed-form bounds for 1 <= j <= jmax"""
        if jmax < 1:
            raise UsageError("jmax must be >= 1")
        seeds = self.seed_schedule(samples, seed)
        rows = []
        for j in range(1, jmax + 1):
            bounds = chi_bounds(space, j)
            split = await self.compute_report(make_split(space, j), "sweep")
            sampled = await self.compute_reports(self.sample_bundles(space, j, seeds), "sweep", seeds)
            everything = [split] + sampled
            violations = []
            for r in everything:
                if not bounds.contains(r.chi):
                    violations.append(f"chi={r.chi} outside [{bounds.lower}, {bounds.upper}] for {r.class_text}")
                if r.chi > split.chi:
                    violations.append(f"chi={r.chi} above the split value for {r.class_text}")
                if r.h1_end > split.h1_end:
                    violations.append(f"h1End={r.h1_end} above the split value for {r.class_text}")
                if not space.is_surface:
                    end_bounds = h1end_bounds_w1(j)
                    if r.width != 0:
                        violations.append(f"w={r.width} on the flop for {r.class_text}")
                    if not end_bounds.contains(r.h1_end):
                        violations.append(f"h1End={r.h1_end} outside [{end_bounds.lower}, "
                                          f"{end_bounds.upper}] for {r.class_text}")
            if split.chi != bounds.upper:
                violations.append(f"split chi={split.chi} differs from the upper bound {bounds.upper}")
            non_split_at_upper = any(r.chi == bounds.upper and r.class_text != "split" for r in sampled)
            rows.append(BoundsSweepRow(
                space=space.label,
                j=j,
                lower=bounds.lower,
                upper=bounds.upper,
                split_chi=split.chi,
                sampled_min_chi=min((r.chi for r in sampled), default=split.chi),
                sampled_max_chi=max((r.chi for r in sampled), default=split.chi),
                sampled_min_h1_end=min((r.h1_end for r in sampled), default=split.h1_end),
                split_h1_end=split.h1_end,
                violations=violations,
                non_split_at_upper=non_split_at_upper,
            ))
            if violations:
                self.logger.warning(f"Bound violations on {space} at j={j}: {violations}")
        return rows

    async def table1(self, samples: Optional[int] = None, seed: Optional[int] = None,
                     spaces: Sequence[str] = TABLE1_SPACES) -> List[Table1Row]:
        """Width, height and h1(End) of the split and generic bundles at the reference j"""
        table = self.config.get("table1", {})
        j = int(table.get("j", 3))
        expected_all = table.get("expected", {})
        rows = []
        for name in spaces:
            space = _table_space(name)
            expected = expected_all.get(name, {})

            split = await self.compute_report(make_split(space, j), "table1")
            split_values = (split.width, split.height, split.h1_end)
            split_expected = tuple(expected.get("split", split_values))
            rows.append(Table1Row(
                space=name, kind=ClassKind.SPLIT,
                width=split.width, height=split.height, h1_end=split.h1_end,
                expected=split_expected,
                status="ok" if split_values == split_expected else "mismatch",
            ))

            generic = await self.generic_values(space, j, samples, seed)
            generic_values = (generic["w"], generic["h"], generic["h1End"])
            generic_expected = tuple(expected.get("generic", generic_values))
            rows.append(Table1Row(
                space=name, kind=ClassKind.GENERIC,
                width=generic["w"], height=generic["h"], h1_end=generic["h1End"],
                expected=generic_expected,
                status=_generic_status(generic_values, generic_expected),
                samples=len(generic["seeds"]), seeds=generic["seeds"],
            ))
        return rows

    async def get_stats(self) -> Dict[str, Any]:
        stats = dict(self.stats)
        stats["cache"] = await self.results_cache.get_cache_info()
        return stats


def _generic_status(values: Tuple[int, ...], expected: Tuple[int, ...]) -> str:
    """A minimum over finitely many samples can only overshoot the generic value"""
    if values == expected:
        return "ok"
    if all(v >= e for v, e in zip(values, expected)):
        return "unconverged"
    return "mismatch"

