"""
Spaces - the two-chart geometries Z_k = Tot(O(-k)) and W_1 = Tot(O(-1) + O(-1))

Chart U has coordinates (z, u[, v]); chart V has (1/z, z^k u) on Z_k and
(1/z, z u, z v) on W_1. A section of O(p) given by a(z, u) on U reads
z^-p * a in the V trivialization.
"""

import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from models import SpaceKind, UsageError
from series_algebra import Monomial


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: SpaceKind
    k: int = 1

    def __post_init__(self):
        if self.kind is SpaceKind.SURFACE and self.k < 1:
            raise UsageError(f"Z_k needs k >= 1, got {self.k}")
        if self.kind is SpaceKind.FLOP_THREEFOLD and self.k != 1:
            raise UsageError("the flop threefold takes no k parameter")

    @property
    def is_surface(self) -> bool:
        return self.kind is SpaceKind.SURFACE

    @property
    def arity(self) -> int:
        return 2 if self.is_surface else 3

    @property
    def label(self) -> str:
        return f"zk:{self.k}" if self.is_surface else "w1"

    @property
    def pretty_name(self) -> str:
        return f"Z{self.k}" if self.is_surface else "W1"

    def weight(self, m: Monomial) -> int:
        """z-exponent shift picked up by u^r v^t under the chart change"""
        if self.is_surface:
            return self.k * m.r
        return m.r + m.t

    def degree_weight(self, degree: int) -> int:
        return self.k * degree if self.is_surface else degree

    def normal_monomials(self, degree: int) -> List[Tuple[int, int]]:
        """(r, t) exponent pairs of u/v-degree `degree`, canonical order"""
        if self.is_surface:
            return [(degree, 0)]
        if degree < 0:
            raise UsageError("negative normal degrees only exist on surfaces")
        return [(degree - t, t) for t in range(degree + 1)]

    def conormal(self) -> "ConormalType":
        if self.is_surface:
            return ConormalType(self.k, None)
        return W1_CONORMAL

    def __str__(self) -> str:
        return self.label


def Surface(k: int) -> SpaceDescriptor:
    return SpaceDescriptor(SpaceKind.SURFACE, k)


FLOP = SpaceDescriptor(SpaceKind.FLOP_THREEFOLD)


@dataclass(frozen=True)
class ConormalType:
    """Twists (a, b) of the conormal bundle of the zero section, O(a) + O(b)"""
    a: int
    b: Optional[int] = None

    @property
    def rank(self) -> int:
        return 1 if self.b is None else 2

    @property
    def twists(self) -> Tuple[int, ...]:
        return (self.a,) if self.b is None else (self.a, self.b)

    @property
    def is_ample(self) -> bool:
        return all(x > 0 for x in self.twists)

    @property
    def is_calabi_yau(self) -> bool:
        return self.b is not None and self.a + self.b == 2

    @property
    def label(self) -> str:
        return {(1, 1): "w1", (2, 0): "w2", (3, -1): "w3"}.get(self.twists, f"O({self.a})")


W1_CONORMAL = ConormalType(1, 1)
W2_CONORMAL = ConormalType(2, 0)
W3_CONORMAL = ConormalType(3, -1)
CALABI_YAU_CONORMALS = {"w1": W1_CONORMAL, "w2": W2_CONORMAL, "w3": W3_CONORMAL}


def parse_conormal(text: str) -> ConormalType:
    try:
        return CALABI_YAU_CONORMALS[text.strip().lower()]
    except KeyError:
        raise UsageError(f"unknown conormal type {text!r}; expected one of w1, w2, w3")


@dataclass(frozen=True)
class TwistedMonomialTest:
    space: SpaceDescriptor
    p: int

    def extends_to_u(self, m: Monomial) -> bool:
        return m.s >= 0

    def extends_to_v(self, m: Monomial) -> bool:
        return m.s - self.p <= self.space.weight(m)

    def is_cohomology_class(self, m: Monomial) -> bool:
        return not self.extends_to_u(m) and not self.extends_to_v(m)


def transition_map(space: SpaceDescriptor, m: Monomial) -> Monomial:
    """Exponents of z^s u^r v^t rewritten in the V chart: s -> weight - s"""
    return Monomial(m.r, m.t, space.weight(m) - m.s)


def _degrees(max_degree: Optional[int], stop: int) -> Iterator[int]:
    upper = stop if max_degree is None else min(max_degree, stop)
    return iter(range(0, upper + 1))


def h0_monomials(space: SpaceDescriptor, p: int, m: int) -> List[Monomial]:
    """Monomial basis of H^0(l^(m); O(p)): 0 <= s <= weight + p"""
    if m < 0:
        raise UsageError("neighbourhood order m must be >= 0")
    basis = []
    for degree in range(m + 1):
        for r, t in space.normal_monomials(degree):
            top = space.degree_weight(degree) + p
            basis.extend(Monomial(r, t, s) for s in range(0, top + 1))
    return sorted(basis)


def h1_monomials(space: SpaceDescriptor, p: int, m: Optional[int] = None) -> List[Monomial]:
    """Monomial basis of H^1(O(p)) truncated at order m (None = whole space)

    Classes are s <= -1 with s > weight + p, so only degrees with
    weight <= -p - 2 contribute and the list is always finite.
    """
    if p >= -1:
        return []
    last = (-p - 2) // space.degree_weight(1)
    basis = []
    for degree in _degrees(m, last):
        for r, t in space.normal_monomials(degree):
            low = space.degree_weight(degree) + p
            basis.extend(Monomial(r, t, s) for s in range(low + 1, 0))
    return sorted(basis)


_SPACE_PATTERN = re.compile(r"^(?:zk:(\d+)|w1)$")


def parse_space(text: str) -> SpaceDescriptor:
    """CLI notation: 'zk:<k>' or 'w1'"""
    match = _SPACE_PATTERN.match((text or "").strip().lower())
    if not match:
        raise UsageError(f"unknown space {text!r}; expected 'zk:<k>' or 'w1'")
    if match.group(1) is not None:
        return Surface(int(match.group(1)))
    return FLOP
