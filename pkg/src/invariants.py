"""
Invariants - width, height, Euler characteristic, h^1(End), psi/Delta,
Hilbert polynomials and deformation counts of extension bundles
"""

import logging
import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol, interpolate

from bundles import ExtensionBundle, canonical_class, restrict_to_pencil_divisor
from cech import CechProblem, TransitionMatrix, cohomology, h0_sections_with_u_poles, stabilized_h1
from models import (
    CechSettings,
    ClaimVerificationError,
    CohomologyResult,
    DeformationCount,
    HilbertPolynomial,
    InvariantReport,
    PencilPoint,
    TruncationCertificate,
    TruncationOverflowError,
    UsageError,
)
from spaces import ConormalType


logger = logging.getLogger(__name__)

_n = Symbol("n")


def _settings(settings: Optional[CechSettings]) -> CechSettings:
    return settings or CechSettings()


def height_result(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> CohomologyResult:
    return stabilized_h1(E.space, E.transition(), _settings(settings))


def height(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    """h^0(R^1 pi_* E): stable h^1 over the neighbourhoods of the zero section"""
    return height_result(E, settings).h1


def width_result(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> Tuple[int, int]:
    """(width, pole bound at which it stabilized)"""
    settings = _settings(settings)
    if not E.space.is_surface:
        # the exceptional curve has codimension 2 on W_1, so the reflexive hull adds nothing
        return 0, 0
    T = E.transition()
    pole_bound = math.ceil(E.j / E.space.k) + settings.pole_start_offset
    last = h0_sections_with_u_poles(E.space, T, pole_bound, settings).extra
    for _ in range(max(1, settings.max_rounds)):
        pole_bound += 1
        current = h0_sections_with_u_poles(E.space, T, pole_bound, settings).extra
        if current == last:
            return last, pole_bound - 1
        last = current
    raise TruncationOverflowError(f"width of {E.class_text} on {E.space} did not stabilize in the pole order",
                                  previous=last, current=current)


def width(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    return width_result(E, settings)[0]


def chi(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    return width(E, settings) + height(E, settings)


def h1_end(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    """h^1 of the endomorphisms preserving O(-j) ⊂ E, the tabulated h1End

    Equal to h1_end_full for split bundles. From j = 3 on a non-split
    class can have a smaller h1_end_full.
    """
    return stabilized_h1(E.space, E.flag_end_transition(), _settings(settings)).h1


def h1_end_full(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    """h^1 of the whole sheaf End E"""
    return stabilized_h1(E.space, E.end_transition(), _settings(settings)).h1


def end_delta(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> int:
    return h1_end(E.split_partner(), settings) - h1_end(E, settings)


def psi(E: ExtensionBundle, i: int, m: int, settings: Optional[CechSettings] = None) -> int:
    if i not in (0, 1):
        raise UsageError(f"psi is defined for i in {{0, 1}}, got {i}")
    result = cohomology(CechProblem(E.space, E.transition(), m), _settings(settings))
    return result.h0 if i == 0 else result.h1


def delta_pair(E: ExtensionBundle, settings: Optional[CechSettings] = None) -> Tuple[int, int]:
    """(Delta_0, Delta_1) on a shared schedule of neighbourhood orders"""
    settings = _settings(settings)
    split_T, T = E.split_partner().transition(), E.transition()
    m = T.safe_order()
    last: Optional[Tuple[int, int]] = None
    for _ in range(max(1, settings.max_rounds) + 1):
        split = cohomology(CechProblem(E.space, split_T, m), settings)
        ours = cohomology(CechProblem(E.space, T, m), settings)
        current = (split.h0 - ours.h0, split.h1 - ours.h1)
        if current == last:
            return current
        last = current
        m += 1
    raise TruncationOverflowError(f"Delta of {E.class_text} on {E.space} did not stabilize",
                                  previous=last, current=current)


def delta(E: ExtensionBundle, i: int, settings: Optional[CechSettings] = None) -> int:
    if i not in (0, 1):
        raise UsageError(f"Delta is defined for i in {{0, 1}}, got {i}")
    return delta_pair(E, settings)[i]


def euler_characteristic(space, T: TransitionMatrix, m: int,
                         settings: Optional[CechSettings] = None) -> int:
    result = cohomology(CechProblem(space, T, m), _settings(settings))
    return result.h0 - result.h1


def hilbert(E: ExtensionBundle, m: int, n_values: Sequence[int] = (0, 1, 2),
            endomorphism: bool = False, settings: Optional[CechSettings] = None) -> HilbertPolynomial:
    """phi(E^(m), n) = chi(l^(m), E(n)), fitted through two twists and checked on the rest

    l^(m) is one-dimensional, so phi is linear in n.
    """
    points = list(dict.fromkeys(n_values))
    if len(points) < 3:
        raise UsageError("hilbert needs at least 3 distinct twists")
    if m < 0:
        raise UsageError("neighbourhood order m must be >= 0")
    T = E.end_transition() if endomorphism else E.transition()
    samples = [(n, euler_characteristic(E.space, T.twisted(n), m, settings)) for n in points]
    poly = Poly(interpolate(samples[:2], _n), _n)
    for n, value in samples[2:]:
        fitted = poly.eval(n)
        if fitted != value:
            raise ClaimVerificationError(
                f"Hilbert function of {E.class_text} on {E.space} is not linear: "
                f"phi({n}) = {value}, fit predicts {fitted}"
            )
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    while len(coeffs) < 2:
        coeffs.append(Fraction(0))
    return HilbertPolynomial(m=m, coefficients=tuple(coeffs), endomorphism=endomorphism)


def _h1_p1(q: int) -> int:
    return max(0, -q - 1)


def _end_twists(j: int) -> Tuple[int, ...]:
    return (-2 * j, 0, 0, 2 * j)


def _gamma1(j: int, conormal: ConormalType) -> int:
    return sum(_h1_p1(p + a) for p in _end_twists(j) for a in conormal.twists)


def _gamma_full(j: int, conormal: ConormalType) -> Optional[int]:
    if not conormal.is_ample:
        return None
    total, order = 0, 0
    step = min(conormal.twists)
    while -2 * j + order * step <= -2:
        for weights in _symmetric_power(conormal.twists, order):
            total += sum(_h1_p1(p + weights) for p in _end_twists(j))
        order += 1
    return total


def _symmetric_power(twists: Tuple[int, ...], order: int) -> List[int]:
    """Line-bundle degrees of Sym^order(O(a) + O(b))"""
    if len(twists) == 1:
        return [order * twists[0]]
    a, b = twists
    return [i * a + (order - i) * b for i in range(order + 1)]


def gamma1(j: int, conormal: ConormalType) -> DeformationCount:
    """First-order deformations h^1(l; End(E|l) x conormal)"""
    if j < 1:
        raise UsageError("gamma1 needs splitting type j >= 1")
    g1 = _gamma1(j, conormal)
    return DeformationCount(j=j, conormal=conormal.twists, gamma1=g1,
                            gamma_full=_gamma_full(j, conormal), proj_dim=g1 - 1)


def gamma_full(j: int, conormal: ConormalType) -> DeformationCount:
    if j < 0:
        raise UsageError("splitting type must be >= 0")
    g1 = _gamma1(j, conormal)
    return DeformationCount(j=j, conormal=conormal.twists, gamma1=g1,
                            gamma_full=_gamma_full(j, conormal), proj_dim=g1 - 1)


def pencil_profile(E: ExtensionBundle, cs: Iterable[Optional[Fraction]],
                   settings: Optional[CechSettings] = None) -> List[PencilPoint]:
    points = []
    for c in cs:
        restricted = restrict_to_pencil_divisor(E, c)
        points.append(PencilPoint(c=c, width=width(restricted, settings),
                                  height=height(restricted, settings)))
    return points


def report(E: ExtensionBundle, settings: Optional[CechSettings] = None,
           class_text: Optional[str] = None) -> InvariantReport:
    """Every invariant of E in one pass, with the consistency identities checked"""
    settings = _settings(settings)
    canonical = canonical_class(E)
    height_res = height_result(E, settings)
    w, pole_bound = width_result(E, settings)
    h1e = h1_end(E, settings)
    d0, d1 = delta_pair(E, settings)

    built = InvariantReport(
        space=E.space.label,
        j=E.j,
        class_text=class_text or E.class_text,
        width=w,
        height=height_res.h1,
        chi=w + height_res.h1,
        h1_end=h1e,
        delta0=d0,
        delta1=d1,
        certificate=TruncationCertificate(
            m=height_res.certificate.m,
            z_window=height_res.certificate.z_window,
            pole_bound=pole_bound,
            rounds=height_res.certificate.rounds,
        ),
        class_digest=canonical.digest,
    )
    _check_identities(E, built)
    logger.debug("report %s j=%s %s: w=%s h=%s h1End=%s", built.space, built.j,
                 built.class_text, built.width, built.height, built.h1_end)
    return built


def _check_identities(E: ExtensionBundle, built: InvariantReport):
    if built.chi != built.width + built.height:
        raise ClaimVerificationError(f"chi != w + h for {built.class_text}")
    if not E.space.is_surface and built.width != 0:
        raise ClaimVerificationError(f"non-zero width {built.width} on {E.space}")
    if built.delta0 != built.delta1:
        raise ClaimVerificationError(
            f"Delta_0 = {built.delta0} differs from Delta_1 = {built.delta1} for {built.class_text}"
        )
    if E.is_split and built.delta1 != 0:
        raise ClaimVerificationError(f"split bundle has Delta = {built.delta1}")
