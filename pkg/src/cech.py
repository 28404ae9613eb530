"""
Cech - cohomology of bundles on the neighbourhoods l^(m) via the two-chart cover

A bundle is given by its transition matrix T (U frame -> V frame) over the
overlap U ∩ V, written in the U coordinates. The Čech complex is

    C^0 = Γ(U) ⊕ Γ(V)  --d-->  C^1 = Γ(U ∩ V),   d(a, b) = T·a − b,

with C^1 taken in the V frame. Modulo Γ(V) every monomial z^s x e_i of C^1
(x a u/v monomial of weight w) is one of

    V-monomial      s <= w               (killed by Γ(V))
    class monomial  w < s < d_i          (the finite set B)
    pivot monomial  s >= d_i and s > w   (leading term of T·z^(s-d_i) x e_i)

where z^(d_i) is the degree-zero part of T[i][i]. Pivots are eliminated by
triangular reduction in the normal direction, leaving a finite matrix: the
rows are the reduced images of the non-pivot U-monomials (0 <= s <= w - d_i),
the columns are B. With rho its rank and N the number of rows,

    h^0 = N − rho,    h^1 = |B| − rho.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from models import CechSettings, CohomologyResult, TruncationCertificate, TruncationOverflowError, UsageError
from series_algebra import DegreeWindow, LaurentSection, Monomial
from spaces import SpaceDescriptor


logger = logging.getLogger(__name__)

Key = Tuple[int, Monomial]   # (component, monomial)


class _WindowExceeded(Exception):
    pass


@dataclass(frozen=True)
class TransitionMatrix:
    """Square matrix of Laurent sections whose degree-zero part is diag(c_i z^(d_i))"""
    entries: Tuple[Tuple[LaurentSection, ...], ...]
    splitting_type: int = 0
    twists: Tuple[int, ...] = field(init=False)
    leading: Tuple[Fraction, ...] = field(init=False)

    def __post_init__(self):
        size = len(self.entries)
        if size not in (1, 2, 3, 4) or any(len(row) != size for row in self.entries):
            raise UsageError(f"transition matrix must be square of size 1 to 4, got {size}")
        twists, leading = [], []
        for i in range(size):
            for j in range(size):
                base = self.entries[i][j].degree_part(0)
                if i != j and not base.is_zero():
                    raise UsageError("off-diagonal entry has a degree-zero part; "
                                     "it changes the restriction to the zero section")
                if i == j:
                    if len(base) != 1:
                        raise UsageError(f"diagonal entry {i} must restrict to a single z-monomial")
                    (mono, coeff), = base.items()
                    twists.append(mono.s)
                    leading.append(coeff)
        object.__setattr__(self, "twists", tuple(twists))
        object.__setattr__(self, "leading", tuple(leading))
        det = determinant(self)
        if len(det) != 1 or det.min_degree() != 0:
            raise UsageError(f"transition matrix is not invertible on the overlap (det = {det})")

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def arity(self) -> int:
        return self.entries[0][0].arity

    def max_abs_z(self) -> int:
        return max(e.max_abs_z() for row in self.entries for e in row)

    def safe_order(self) -> int:
        """Starting order for stabilization: 2j for a type-j bundle and for its End"""
        if self.size == 2:
            return max(1, max(self.twists) - min(self.twists))
        return max(1, max(abs(d) for d in self.twists))

    def twisted(self, n: int) -> "TransitionMatrix":
        """Transition matrix of the bundle tensored with O(n)"""
        return TransitionMatrix(
            tuple(tuple(e.shift_z(-n) for e in row) for row in self.entries),
            self.splitting_type,
        )

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j].is_zero()
                   for i in range(self.size) for j in range(self.size) if i != j)


def determinant(T: TransitionMatrix) -> LaurentSection:
    """Laplace expansion along the first row"""
    rows = T.entries
    return _det([list(row) for row in rows])


def _det(rows: List[List[LaurentSection]]) -> LaurentSection:
    if len(rows) == 1:
        return rows[0][0]
    total = LaurentSection.zero(rows[0][0].arity)
    for col, entry in enumerate(rows[0]):
        if entry.is_zero():
            continue
        minor = [row[:col] + row[col + 1:] for row in rows[1:]]
        term = entry * _det(minor)
        total = total + term if col % 2 == 0 else total - term
    return total


def line_bundle(space: SpaceDescriptor, p: int) -> TransitionMatrix:
    """O(p): a section a on U reads z^-p a on V"""
    return TransitionMatrix(((LaurentSection.monomial(-p, arity=space.arity),),), abs(p))


def split_transition(space: SpaceDescriptor, degrees: Sequence[int]) -> TransitionMatrix:
    """O(p_1) ⊕ ... ⊕ O(p_n)"""
    n = len(degrees)
    zero = LaurentSection.zero(space.arity)
    entries = tuple(
        tuple(LaurentSection.monomial(-degrees[i], arity=space.arity) if i == j else zero
              for j in range(n))
        for i in range(n)
    )
    return TransitionMatrix(entries, max(abs(p) for p in degrees))


@dataclass(frozen=True)
class CechProblem:
    space: SpaceDescriptor
    T: TransitionMatrix
    m: int
    window: Optional[DegreeWindow] = None
    degree_min: int = 0

    def __post_init__(self):
        if self.m is None or self.m < 0:
            raise UsageError("cohomology needs a finite neighbourhood order m >= 0")
        if self.T.arity != self.space.arity:
            raise UsageError(f"transition matrix arity {self.T.arity} does not match {self.space}")
        if self.degree_min < 0 and not self.space.is_surface:
            raise UsageError("sections with poles along the zero section are only modelled on surfaces")
        if self.window is not None and self.window.u_max < self.m:
            raise UsageError(f"window u_max={self.window.u_max} below neighbourhood order m={self.m}")

    def effective_window(self) -> DegreeWindow:
        return self.window or default_window(self.space, self.T, self.m, self.degree_min)


def default_window(space: SpaceDescriptor, T: TransitionMatrix, m: int,
                   degree_min: int = 0) -> DegreeWindow:
    span = m - min(0, degree_min)
    reach = 2 * T.safe_order() + space.degree_weight(1) * span + T.max_abs_z()
    v_max = 0 if space.is_surface else m
    return DegreeWindow(-reach, reach, m, v_max)


def class_degree_bound(space: SpaceDescriptor, T: TransitionMatrix) -> int:
    """Largest normal degree carrying class monomials (w < s < d_i)"""
    unit = space.degree_weight(1)
    return max((d - 2) // unit for d in T.twists)


def _column_terms(T: TransitionMatrix) -> List[List[Tuple[int, Monomial, Fraction]]]:
    """Column i of T as (row, monomial, coefficient) triples"""
    columns = []
    for i in range(T.size):
        col = []
        for row in range(T.size):
            for mono, coeff in T.entries[row][i].items():
                col.append((row, mono, coeff))
        columns.append(col)
    return columns


class _Reducer:
    """Normal form of C^1 monomials modulo Γ(V) and the pivot images of Γ(U)"""

    def __init__(self, space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                 degree_max: int, window: DegreeWindow):
        self.space = space
        self.T = T
        self.degree_min = degree_min
        self.degree_max = degree_max
        self.window = window
        self.columns = _column_terms(T)
        self.basis: Dict[Key, int] = {}
        for degree in range(degree_min, degree_max + 1):
            weight = space.degree_weight(degree)
            for r, t in space.normal_monomials(degree):
                for i, d in enumerate(T.twists):
                    for s in range(weight + 1, d):
                        self.basis[(i, Monomial(r, t, s))] = len(self.basis)
        self._memo: Dict[Key, Dict[int, Fraction]] = {}

    def image(self, i: int, mono: Monomial) -> Dict[Key, Fraction]:
        """T applied to the U-monomial mono·e_i"""
        out: Dict[Key, Fraction] = {}
        for row, tm, coeff in self.columns[i]:
            key = (row, Monomial(mono.r + tm.r, mono.t + tm.t, mono.s + tm.s))
            out[key] = out.get(key, 0) + coeff
        return out

    def reduce(self, vector: Dict[Key, Fraction]) -> Dict[int, Fraction]:
        result: Dict[int, Fraction] = {}
        for key, coeff in vector.items():
            if not coeff:
                continue
            for idx, value in self._normal_form(key).items():
                result[idx] = result.get(idx, 0) + coeff * value
        return {idx: c for idx, c in result.items() if c}

    def _normal_form(self, key: Key) -> Dict[int, Fraction]:
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        i, mono = key
        if mono.degree > self.degree_max:
            form: Dict[int, Fraction] = {}
        elif not self.window.contains_z(mono.s):
            raise _WindowExceeded(mono)
        elif mono.s <= self.space.weight(mono):
            form = {}
        elif mono.s < self.T.twists[i]:
            form = {self.basis[key]: Fraction(1)}
        else:
            # pivot: z^s x e_i = (1/c_i) T(z^(s-d_i) x e_i) - tail
            source = Monomial(mono.r, mono.t, mono.s - self.T.twists[i])
            tail = self.image(i, source)
            lead = tail.pop(key)
            scale = -1 / lead
            form = {}
            for tkey, tcoeff in tail.items():
                if not tcoeff:
                    continue
                if tkey[1].degree <= mono.degree:
                    raise UsageError("transition matrix is not triangular in the normal degree")
                for idx, value in self._normal_form(tkey).items():
                    form[idx] = form.get(idx, 0) + scale * tcoeff * value
            form = {idx: c for idx, c in form.items() if c}
        self._memo[key] = form
        return form


def _generators(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                degree_max: int) -> List[Tuple[int, Monomial]]:
    """Non-pivot U-monomials: 0 <= s <= w - d_i"""
    gens = []
    for degree in range(degree_min, degree_max + 1):
        weight = space.degree_weight(degree)
        for r, t in space.normal_monomials(degree):
            for i, d in enumerate(T.twists):
                gens.extend((i, Monomial(r, t, s)) for s in range(0, weight - d + 1))
    return gens


def count_generators(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                     degree_max: int) -> int:
    total = 0
    for degree in range(degree_min, degree_max + 1):
        weight = space.degree_weight(degree)
        multiplicity = len(space.normal_monomials(degree))
        total += multiplicity * sum(max(0, weight - d + 1) for d in T.twists)
    return total


def count_classes(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                  degree_max: int) -> int:
    total = 0
    for degree in range(degree_min, degree_max + 1):
        weight = space.degree_weight(degree)
        multiplicity = len(space.normal_monomials(degree))
        total += multiplicity * sum(max(0, d - weight - 1) for d in T.twists)
    return total


@dataclass
class RelationMatrix:
    """Reduced images of the non-pivot generators, one sparse row per generator"""
    rows: List[Dict[int, Fraction]]
    n_columns: int
    generators: List[Tuple[int, Monomial]]

    def to_domain_matrix(self) -> DomainMatrix:
        data = {}
        for i, row in enumerate(self.rows):
            if row:
                data[i] = {j: QQ(c.numerator, c.denominator) for j, c in row.items()}
        return DomainMatrix(data, (len(self.rows), self.n_columns), QQ)

    def content_key(self) -> Tuple:
        return (self.n_columns, tuple(tuple(sorted(row.items())) for row in self.rows))

    def rank(self) -> int:
        if not self.n_columns or not any(self.rows):
            return 0
        return _matrix_rank(self.content_key(), self)

    def dump(self) -> str:
        """Plain-text sparse format: header 'rows cols', then 'i j value' lines"""
        lines = [f"{len(self.rows)} {self.n_columns}"]
        for i, row in enumerate(self.rows):
            for j in sorted(row):
                c = row[j]
                value = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
                lines.append(f"{i} {j} {value}")
        return "\n".join(lines)


_RANKS: Dict[Tuple, int] = {}


def _matrix_rank(key: Tuple, matrix: RelationMatrix) -> int:
    rank = _RANKS.get(key)
    if rank is None:
        rank = matrix.to_domain_matrix().rank()
        if len(_RANKS) > 4096:
            _RANKS.clear()
        _RANKS[key] = rank
    return rank


def relation_matrix(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                    degree_max: int, window: DegreeWindow) -> RelationMatrix:
    reducer = _Reducer(space, T, degree_min, degree_max, window)
    gens = _generators(space, T, degree_min, degree_max)
    rows = [reducer.reduce(reducer.image(i, mono)) for i, mono in gens]
    return RelationMatrix(rows, len(reducer.basis), gens)


@lru_cache(maxsize=4096)
def _relation_rank(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int,
                   degree_max: int, window: DegreeWindow, debug_dump: bool) -> int:
    if degree_max < degree_min:
        return 0
    matrix = relation_matrix(space, T, degree_min, degree_max, window)
    rank = matrix.rank()
    logger.debug("relation matrix %s x %s on degrees [%s, %s], window %s: rank %s",
                 len(matrix.rows), matrix.n_columns, degree_min, degree_max,
                 window.as_tuple(), rank)
    if debug_dump:
        logger.debug("coboundary matrix for %s:\n%s", space.label, matrix.dump())
    return rank


def _attempt(space: SpaceDescriptor, T: TransitionMatrix, degree_min: int, m: int,
             window: DegreeWindow, debug_dump: bool) -> Tuple[int, int]:
    # rows above the last class degree are zero, so the rank only needs degrees <= top
    top = min(m, class_degree_bound(space, T))
    rho = _relation_rank(space, T, degree_min, top, window, debug_dump)
    n_gen = count_generators(space, T, degree_min, m)
    n_cls = count_classes(space, T, degree_min, m)
    return n_gen - rho, n_cls - rho


def cohomology(problem: CechProblem, settings: Optional[CechSettings] = None) -> CohomologyResult:
    """(h^0, h^1) on l^(m), certified stable under window doubling"""
    settings = settings or CechSettings()
    window = problem.effective_window()
    previous: Optional[Tuple[int, int]] = None
    previous_window: Optional[DegreeWindow] = None
    current: Optional[Tuple[int, int]] = None
    for round_no in range(1, max(1, settings.max_rounds) + 1):
        try:
            current = _attempt(problem.space, problem.T, problem.degree_min, problem.m,
                               window, settings.debug_dump)
        except _WindowExceeded as exc:
            logger.debug("window %s exceeded at %s; enlarging", window.as_tuple(), exc)
            current = None
        if current is not None and (not settings.certify or current == previous):
            certified = previous_window if settings.certify else window
            h0, h1 = current
            return CohomologyResult(
                h0=h0,
                h1=h1,
                certificate=TruncationCertificate(
                    m=problem.m,
                    z_window=certified.as_tuple(),
                    pole_bound=max(0, -problem.degree_min),
                    rounds=round_no,
                ),
            )
        previous, previous_window = current, window
        window = window.doubled()
    raise TruncationOverflowError(
        f"no stable Čech result for {problem.space} within {settings.max_rounds} window rounds",
        previous=previous,
        current=current,
    )


def stabilized_h1(space: SpaceDescriptor, T: TransitionMatrix,
                  settings: Optional[CechSettings] = None) -> CohomologyResult:
    """h^1 on the whole space: h^1(l^(m)) at increasing m until consecutive orders agree"""
    settings = settings or CechSettings()
    m = T.safe_order()
    last = cohomology(CechProblem(space, T, m), settings)
    for _ in range(max(1, settings.max_rounds)):
        m += 1
        current = cohomology(CechProblem(space, T, m), settings)
        if current.h1 == last.h1:
            return last
        last = current
    raise TruncationOverflowError(
        f"h^1 on {space} did not stabilize in the normal direction",
        previous=last.h1, current=current.h1,
    )


@dataclass(frozen=True)
class PoleSections:
    """Sections over the complement of the zero section modulo Γ(Z)"""
    pole_bound: int
    extra: int
    certificate: TruncationCertificate
    polar_parts: Tuple[Tuple[LaurentSection, ...], ...] = ()


def h0_sections_with_u_poles(space: SpaceDescriptor, T: TransitionMatrix, pole_bound: int,
                             settings: Optional[CechSettings] = None,
                             with_basis: bool = False) -> PoleSections:
    """Sections on Z minus the zero section with u-poles of order <= pole_bound, modulo Γ(Z)

    A section is determined by its non-pivot coefficients and its polar part
    vanishes exactly when its negative-degree generator coefficients do, so
    the quotient has dimension (#polar generators) - (rank gained by adding them).
    With with_basis the polar parts themselves are returned, in reduced
    echelon form over the polar generators.
    """
    if not space.is_surface:
        raise UsageError("pole sections are only modelled on surfaces")
    if pole_bound < 0:
        raise UsageError("pole bound must be >= 0")
    settings = settings or CechSettings()
    top = max(class_degree_bound(space, T), 0)
    if pole_bound == 0:
        regular = cohomology(CechProblem(space, T, top), settings)
        return PoleSections(0, 0, regular.certificate)

    with_poles = cohomology(CechProblem(space, T, top, degree_min=-pole_bound), settings)
    regular = cohomology(CechProblem(space, T, top), settings)
    extra = with_poles.h0 - regular.h0
    parts: Tuple[Tuple[LaurentSection, ...], ...] = ()
    if with_basis:
        window = DegreeWindow(*with_poles.certificate.z_window, top, 0)
        parts = _polar_parts(space, T, pole_bound, top, window)
        if len(parts) != extra:
            raise TruncationOverflowError("polar-part basis disagrees with the section count",
                                          previous=extra, current=len(parts))
    return PoleSections(pole_bound, extra, with_poles.certificate, parts)


def _polar_parts(space: SpaceDescriptor, T: TransitionMatrix, pole_bound: int, top: int,
                 window: DegreeWindow) -> Tuple[Tuple[LaurentSection, ...], ...]:
    matrix = relation_matrix(space, T, -pole_bound, top, window)
    polar = [idx for idx, (_, mono) in enumerate(matrix.generators) if mono.r < 0]
    if not polar:
        return ()
    if matrix.n_columns:
        kernel = matrix.to_domain_matrix().transpose().nullspace().to_Matrix()
        kernel_rows = [list(kernel.row(i)) for i in range(kernel.rows)]
    else:
        n = len(matrix.rows)
        kernel_rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    if not kernel_rows:
        return ()
    projected = Matrix([[row[idx] for idx in polar] for row in kernel_rows])
    echelon, _ = projected.rref()
    parts = []
    for i in range(echelon.rows):
        row = [Fraction(int(x.p), int(x.q)) for x in echelon.row(i)]
        if not any(row):
            continue
        components: List[Dict[Monomial, Fraction]] = [{} for _ in range(T.size)]
        for coeff, idx in zip(row, polar):
            if coeff:
                comp, mono = matrix.generators[idx]
                components[comp][mono] = coeff
        parts.append(tuple(LaurentSection._raw(c, space.arity) for c in components))
    return tuple(parts)
