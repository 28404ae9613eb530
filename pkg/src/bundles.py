"""
Bundles - rank-2 bundles as extensions 0 -> O(-j) -> E -> O(j) -> 0

An extension is stored as its splitting type j and a class representative p
supported on ext_basis(space, j). In the line-bundle convention of `spaces`
the transition matrix (U frame -> V frame) is

    T = [[z^j, z^j * p], [0, z^-j]]

so p is reduced modulo Γ(U) and Γ(V) exactly like a class of H^1(O(-2j)).
"""

import hashlib
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from cech import TransitionMatrix
from models import UsageError
from series_algebra import LaurentSection, Monomial, parse_section, substitute_v_with_cu
from spaces import FLOP, SpaceDescriptor, Surface, TwistedMonomialTest, h1_monomials


logger = logging.getLogger(__name__)


def splitting_type(j: int) -> int:
    if not isinstance(j, int) or isinstance(j, bool) or j < 0:
        raise UsageError(f"splitting type must be a non-negative integer, got {j!r}")
    return j


def ext_basis(space: SpaceDescriptor, j: int) -> List[Monomial]:
    """Classes of H^1(O(-2j)) with u/v-degree >= 1, in canonical order"""
    splitting_type(j)
    if j == 0:
        return []
    return [m for m in h1_monomials(space, -2 * j) if m.degree >= 1]


@dataclass(frozen=True)
class ExtensionBundle:
    space: SpaceDescriptor
    j: int
    cls: LaurentSection

    def __post_init__(self):
        splitting_type(self.j)
        if self.cls.arity != self.space.arity:
            raise UsageError(f"class has arity {self.cls.arity} but {self.space} needs {self.space.arity}")
        allowed = set(ext_basis(self.space, self.j))
        for mono in self.cls.support():
            if mono in allowed:
                continue
            if mono.degree == 0:
                raise UsageError(f"monomial {mono.to_text(self.cls.arity)} has u/v-degree 0; "
                                 f"it changes the restriction to the zero section")
            raise UsageError(f"monomial {mono.to_text(self.cls.arity)} is not a class of "
                             f"Ext^1(O({self.j}), O({-self.j})) on {self.space}; reduce the class first")

    @property
    def is_split(self) -> bool:
        return self.cls.is_zero()

    @property
    def class_text(self) -> str:
        return "split" if self.is_split else self.cls.to_text()

    def transition(self) -> TransitionMatrix:
        arity = self.space.arity
        zero = LaurentSection.zero(arity)
        return TransitionMatrix(
            (
                (LaurentSection.monomial(self.j, arity=arity), self.cls.shift_z(self.j)),
                (zero, LaurentSection.monomial(-self.j, arity=arity)),
            ),
            self.j,
        )

    def end_transition(self) -> TransitionMatrix:
        return end_transition(self)

    def flag_end_transition(self) -> TransitionMatrix:
        return flag_end_transition(self)

    def scaled(self, c) -> "ExtensionBundle":
        c = Fraction(c)
        if not c:
            raise UsageError("scaling an extension class by zero changes the bundle")
        return ExtensionBundle(self.space, self.j, self.cls.scale(c))

    def split_partner(self) -> "ExtensionBundle":
        return make_split(self.space, self.j)


def make_split(space: SpaceDescriptor, j: int) -> ExtensionBundle:
    return ExtensionBundle(space, splitting_type(j), LaurentSection.zero(space.arity))


def reduce_class(space: SpaceDescriptor, j: int, p: LaurentSection) -> LaurentSection:
    """Drop the monomials that extend to U or V; keep the class part"""
    splitting_type(j)
    if p.arity != space.arity:
        raise UsageError(f"class has arity {p.arity} but {space} needs {space.arity}")
    test = TwistedMonomialTest(space, -2 * j)
    kept = {}
    for mono, coeff in p.items():
        if not test.is_cohomology_class(mono):
            continue
        if mono.degree == 0:
            raise UsageError(f"monomial {mono.to_text(p.arity)} has u/v-degree 0; "
                             f"it changes the restriction to the zero section")
        kept[mono] = coeff
    return LaurentSection(kept, p.arity)


def make_from_class(space: SpaceDescriptor, j: int, p: LaurentSection) -> ExtensionBundle:
    return ExtensionBundle(space, splitting_type(j), p)


def random_class(space: SpaceDescriptor, j: int, seed: int, coeff_bound: int = 10 ** 6) -> ExtensionBundle:
    """Extension with uniform non-zero integer coefficients in [-coeff_bound, coeff_bound]"""
    if j < 1:
        raise UsageError("random classes need splitting type j >= 1")
    if coeff_bound < 1:
        raise UsageError("coeff_bound must be >= 1")
    rng = random.Random(seed)
    terms = {}
    for mono in ext_basis(space, j):
        terms[mono] = rng.randint(1, coeff_bound) * rng.choice((1, -1))
    return ExtensionBundle(space, j, LaurentSection(terms, space.arity))


_END_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))
_FLAG_PAIRS = ((0, 0), (0, 1), (1, 1))


def _conjugation(E: ExtensionBundle, pairs: Tuple[Tuple[int, int], ...]) -> TransitionMatrix:
    """M -> T M T^-1 on the matrix entries listed in pairs"""
    T = E.transition().entries
    arity = E.space.arity
    inverse = (
        (LaurentSection.monomial(-E.j, arity=arity), -E.cls.shift_z(E.j)),
        (LaurentSection.zero(arity), LaurentSection.monomial(E.j, arity=arity)),
    )
    entries = tuple(
        tuple(T[c][a] * inverse[b][d] for (a, b) in pairs)
        for (c, d) in pairs
    )
    return TransitionMatrix(entries, 2 * E.j)


def end_transition(E: ExtensionBundle) -> TransitionMatrix:
    """Transition of End E acting on (m11, m12, m21, m22) by M -> T M T^-1"""
    return _conjugation(E, _END_PAIRS)


def flag_end_transition(E: ExtensionBundle) -> TransitionMatrix:
    """Endomorphisms preserving the sub-line bundle O(-j), on (m11, m12, m22)

    Upper-triangular matrices are stable under conjugation by T, so this is
    the m21 = 0 sub-bundle of End E, with twists (0, 2j, 0). Its h^1 equals
    h^1(End E) for split bundles; for a non-split class it leaves out the
    relations that sections of O(2j) in the m21 slot add to End E.
    """
    return _conjugation(E, _FLAG_PAIRS)


def restrict_to_pencil_divisor(E: ExtensionBundle, c: Optional[Fraction]) -> ExtensionBundle:
    """Restriction to the divisor v = c*u of W_1 (c=None is u = 0), a copy of Z_1"""
    if E.space != FLOP:
        raise UsageError("pencil restriction needs a bundle on the flop threefold")
    cls = E.cls
    if c is None:
        cls, c = cls.swap_uv(), Fraction(0)
    target = Surface(1)
    reduced = reduce_class(target, E.j, substitute_v_with_cu(cls, c))
    return ExtensionBundle(target, E.j, reduced)


@dataclass(frozen=True)
class CanonicalClass:
    bundle: ExtensionBundle
    digest: str

    @property
    def text(self) -> str:
        return self.bundle.class_text


def canonical_class(E: ExtensionBundle) -> CanonicalClass:
    """Reduced class with its first coefficient (canonical order) scaled to 1"""
    cls = reduce_class(E.space, E.j, E.cls)
    if not cls.is_zero():
        _, lead = next(cls.items())
        cls = cls.scale(1 / lead)
    bundle = ExtensionBundle(E.space, E.j, cls)
    key = f"{E.space.label}|{E.j}|{bundle.class_text}"
    return CanonicalClass(bundle, hashlib.sha256(key.encode("utf-8")).hexdigest())


def class_from_source(space: SpaceDescriptor, j: int, source: str,
                      coeff_bound: int = 10 ** 6) -> Tuple[ExtensionBundle, Optional[int]]:
    """Resolve the CLI class notation: 'split', 'random:<seed>' or a polynomial"""
    text = (source or "").strip()
    if text.lower() == "split":
        return make_split(space, j), None
    if text.lower().startswith("random:"):
        try:
            seed = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad seed in {source!r}; expected random:<integer>")
        return random_class(space, j, seed, coeff_bound), seed
    return make_from_class(space, j, parse_section(text, space.arity)), None
