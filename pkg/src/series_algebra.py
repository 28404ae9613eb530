"""
Series Algebra - exact arithmetic on truncated Laurent sections

Sections, cocycles and extension classes are all finite sums of monomials
z^s u^r v^t with exact rational coefficients. Surfaces use arity 2 (t = 0),
the flop threefold uses arity 3.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from models import UsageError


Scalar = Fraction
ScalarLike = Union[int, Fraction]


class Monomial(NamedTuple):
    """Exponent triple; tuple order (r, t, s) is the canonical order"""
    r: int
    t: int
    s: int

    @classmethod
    def of(cls, s: int, r: int = 0, t: int = 0) -> "Monomial":
        if r < 0 or t < 0:
            raise UsageError(f"negative u/v exponent in monomial (s={s}, r={r}, t={t})")
        return cls(r, t, s)

    @property
    def degree(self) -> int:
        return self.r + self.t

    def shift(self, ds: int) -> "Monomial":
        return Monomial(self.r, self.t, self.s + ds)

    def to_text(self, arity: int = 3) -> str:
        factors = []
        if self.s:
            factors.append("z" if self.s == 1 else f"z^{self.s}")
        if self.r:
            factors.append("u" if self.r == 1 else f"u^{self.r}")
        if self.t and arity == 3:
            factors.append("v" if self.t == 1 else f"v^{self.t}")
        return "*".join(factors) if factors else "1"


@dataclass(frozen=True)
class DegreeWindow:
    """Truncation box for sections: z in [z_min, z_max], u^r with r <= u_max, v^t with t <= v_max"""
    z_min: int
    z_max: int
    u_max: int
    v_max: int = 0

    def __post_init__(self):
        if self.z_min > self.z_max:
            raise UsageError(f"degenerate window: z_min={self.z_min} > z_max={self.z_max}")
        if self.u_max < 0 or self.v_max < 0:
            raise UsageError("window u/v bounds must be non-negative")

    def contains(self, m: Monomial) -> bool:
        return self.z_min <= m.s <= self.z_max and m.r <= self.u_max and m.t <= self.v_max

    def contains_z(self, s: int) -> bool:
        return self.z_min <= s <= self.z_max

    def doubled(self) -> "DegreeWindow":
        grow = max(1, self.z_max - self.z_min)
        return DegreeWindow(
            self.z_min - grow,
            self.z_max + grow,
            max(1, 2 * self.u_max),
            2 * self.v_max,
        )

    def as_tuple(self) -> Tuple[int, int]:
        return (self.z_min, self.z_max)


class LaurentSection:
    """Immutable finite map Monomial -> exact rational, without stored zeros"""

    __slots__ = ("_terms", "arity", "_hash")

    def __init__(self, terms: Optional[Dict[Monomial, ScalarLike]] = None, arity: int = 2):
        if arity not in (2, 3):
            raise UsageError(f"unsupported arity {arity}; expected 2 or 3")
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            if mono.r < 0 or mono.t < 0:
                raise UsageError(f"negative u/v exponent in {mono}")
            if arity == 2 and mono.t != 0:
                raise UsageError("v appears in a section of arity 2")
            value = Fraction(coeff)
            if value:
                clean[mono] = value
        self._terms = clean
        self.arity = arity
        self._hash = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, arity: int = 2) -> "LaurentSection":
        return cls({}, arity)

    @classmethod
    def monomial(cls, s: int, r: int = 0, t: int = 0, coeff: ScalarLike = 1,
                 arity: int = 2) -> "LaurentSection":
        return cls({Monomial.of(s, r, t): coeff}, arity)

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction], arity: int) -> "LaurentSection":
        obj = cls.__new__(cls)
        obj._terms = {m: c for m, c in terms.items() if c}
        obj.arity = arity
        obj._hash = None
        return obj

    # -- inspection ---------------------------------------------------

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items()))

    def support(self) -> List[Monomial]:
        return sorted(self._terms)

    def coefficient(self, m: Monomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def max_abs_z(self) -> int:
        return max((abs(m.s) for m in self._terms), default=0)

    def min_degree(self) -> Optional[int]:
        return min((m.degree for m in self._terms), default=None)

    def degree_part(self, degree: int) -> "LaurentSection":
        return LaurentSection._raw({m: c for m, c in self._terms.items() if m.degree == degree},
                                   self.arity)

    # -- arithmetic ---------------------------------------------------

    def _check_arity(self, other: "LaurentSection"):
        if self.arity != other.arity:
            raise UsageError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "LaurentSection") -> "LaurentSection":
        self._check_arity(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0) + c
        return LaurentSection._raw(terms, self.arity)

    def __neg__(self) -> "LaurentSection":
        return LaurentSection._raw({m: -c for m, c in self._terms.items()}, self.arity)

    def __sub__(self, other: "LaurentSection") -> "LaurentSection":
        return self + (-other)

    def __mul__(self, other: Union["LaurentSection", ScalarLike]) -> "LaurentSection":
        if isinstance(other, LaurentSection):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other: ScalarLike) -> "LaurentSection":
        return self.scale(other)

    def scale(self, c: ScalarLike) -> "LaurentSection":
        c = Fraction(c)
        return LaurentSection._raw({m: c * v for m, v in self._terms.items()}, self.arity)

    def shift_z(self, ds: int) -> "LaurentSection":
        """Multiply by z^ds"""
        return LaurentSection._raw({m.shift(ds): c for m, c in self._terms.items()}, self.arity)

    def filter(self, window: DegreeWindow) -> "LaurentSection":
        return LaurentSection._raw({m: c for m, c in self._terms.items() if window.contains(m)},
                                   self.arity)

    def swap_uv(self) -> "LaurentSection":
        if self.arity != 3:
            raise UsageError("swapping u and v needs arity 3")
        return LaurentSection._raw({Monomial(m.t, m.r, m.s): c for m, c in self._terms.items()}, 3)

    # -- comparison / hashing -----------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSection):
            return NotImplemented
        return self.arity == other.arity and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def __getstate__(self):
        return (self._terms, self.arity)

    def __setstate__(self, state):
        self._terms, self.arity = state
        self._hash = None

    # -- text ----------------------------------------------------------

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for mono, coeff in sorted(self._terms.items()):
            sign = "-" if coeff < 0 else "+"
            mag = abs(coeff)
            body = mono.to_text(self.arity)
            if mag == 1:
                text = body
            else:
                num = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
                text = num if body == "1" else f"{num}*{body}"
            pieces.append((sign, text))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in pieces[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self) -> str:
        return f"LaurentSection({self.to_text()!r}, arity={self.arity})"

    def __str__(self) -> str:
        return self.to_text()


def multiply(a: LaurentSection, b: LaurentSection) -> LaurentSection:
    """Exact product; exponents add componentwise"""
    a._check_arity(b)
    terms: Dict[Monomial, Fraction] = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            key = Monomial(ma.r + mb.r, ma.t + mb.t, ma.s + mb.s)
            terms[key] = terms.get(key, 0) + ca * cb
    return LaurentSection._raw(terms, a.arity)


def substitute_v_with_cu(a: LaurentSection, c: ScalarLike) -> LaurentSection:
    """Replace every v^t by (c*u)^t; the result has arity 2"""
    if a.arity != 3:
        raise UsageError("substitute_v_with_cu needs a section of arity 3")
    c = Fraction(c)
    terms: Dict[Monomial, Fraction] = {}
    for m, coeff in a._terms.items():
        key = Monomial(m.r + m.t, 0, m.s)
        terms[key] = terms.get(key, 0) + coeff * c ** m.t
    return LaurentSection._raw(terms, 2)


def sum_sections(sections: Iterable[LaurentSection], arity: int) -> LaurentSection:
    total = LaurentSection.zero(arity)
    for section in sections:
        total = total + section
    return total


# -- polynomial text grammar -------------------------------------------

_NUMBER = re.compile(r"^\d+(/\d+)?$")
_FACTOR = re.compile(r"^([zuv])(?:\^(-?\d+))?$")

GRAMMAR_HINT = ("terms 'coeff*z^a*u^b*v^c' joined by + or -, coeff an integer or p/q, "
                "exponent optional when 1, e.g. 'u*z^-1 + 3/2*u^2*z^-4'")


_TERM_SIGN = re.compile(r"(?<!\^)([+-])")


def _split_terms(text: str) -> List[Tuple[int, str]]:
    tokens = _TERM_SIGN.split(text)
    # tokens alternate body, sign, body, ...; a leading sign leaves an empty first body
    terms = []
    if tokens[0]:
        terms.append((1, tokens[0]))
    for i in range(1, len(tokens), 2):
        body = tokens[i + 1] if i + 1 < len(tokens) else ""
        if not body:
            raise UsageError(f"malformed polynomial {text!r}: {GRAMMAR_HINT}")
        terms.append((-1 if tokens[i] == "-" else 1, body))
    if not terms:
        raise UsageError(f"malformed polynomial {text!r}: {GRAMMAR_HINT}")
    return terms


def parse_section(text: str, arity: int = 2) -> LaurentSection:
    """Parse the CLI/test polynomial grammar into a LaurentSection"""
    compact = re.sub(r"\s+", "", text or "")
    if not compact:
        raise UsageError(f"empty polynomial: {GRAMMAR_HINT}")
    if compact == "0":
        return LaurentSection.zero(arity)
    terms: Dict[Monomial, Fraction] = {}
    for sign, body in _split_terms(compact):
        coeff = Fraction(sign)
        exps = {"z": 0, "u": 0, "v": 0}
        for factor in body.split("*"):
            if not factor:
                raise UsageError(f"malformed term {body!r}: {GRAMMAR_HINT}")
            if _NUMBER.match(factor):
                coeff *= Fraction(factor)
                continue
            match = _FACTOR.match(factor)
            if not match:
                raise UsageError(f"malformed factor {factor!r}: {GRAMMAR_HINT}")
            var, exp = match.group(1), int(match.group(2) or 1)
            if var in "uv" and exp < 0:
                raise UsageError(f"negative {var} exponent in {body!r}")
            if var == "v" and arity == 2:
                raise UsageError(f"v is not a coordinate on a surface: {body!r}")
            exps[var] += exp
        mono = Monomial(exps["u"], exps["v"], exps["z"])
        terms[mono] = terms.get(mono, 0) + coeff
    return LaurentSection(terms, arity)
