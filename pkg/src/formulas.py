"""
Formulas - closed forms for bounds, moduli dimensions, Hilbert functions
and the generating functions of h^1(End)
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple

from sympy import Poly, Symbol, cancel, fraction, sympify, together

from models import BoundsResult, ClassKind, HilbertPolynomial, ModuliDimension, UsageError
from spaces import SpaceDescriptor


z = Symbol("z")


@dataclass(frozen=True)
class RationalGenFun:
    """numerator / denominator, integer coefficients in ascending powers of z"""
    numerator: Tuple[int, ...]
    denominator: Tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        if not self.denominator or self.denominator[0] == 0:
            raise UsageError(f"generating function {self.label or '?'} has denominator vanishing at 0")

    @classmethod
    def from_expression(cls, expression: str, label: str = "") -> "RationalGenFun":
        num, den = fraction(together(sympify(expression, locals={"z": z})))
        return cls(_ascending(num), _ascending(den), label)

    def minus(self, other: "RationalGenFun", label: str = "") -> "RationalGenFun":
        num, den = fraction(cancel(self.as_expr() - other.as_expr()))
        return RationalGenFun(_ascending(num), _ascending(den), label)

    def as_expr(self):
        return _poly(self.numerator).as_expr() / _poly(self.denominator).as_expr()


def _poly(coefficients: Tuple[int, ...]) -> Poly:
    return Poly(list(reversed(coefficients)) or [0], z)


def _ascending(expr) -> Tuple[int, ...]:
    coeffs = Poly(expr, z).all_coeffs()
    values = []
    for c in reversed(coeffs):
        if not c.is_integer:
            raise UsageError(f"non-integer coefficient {c} in generating function")
        values.append(int(c))
    return tuple(values)


def taylor_coeffs(f: RationalGenFun, N: int) -> List[int]:
    """First N+1 Taylor coefficients from the recurrence D * a = numerator"""
    if N < 0:
        raise UsageError("N must be >= 0")
    d0 = f.denominator[0]
    if d0 == 0:
        raise UsageError("denominator has zero constant term")
    coeffs: List[Fraction] = []
    for n in range(N + 1):
        value = Fraction(f.numerator[n] if n < len(f.numerator) else 0)
        for i in range(1, min(n, len(f.denominator) - 1) + 1):
            value -= f.denominator[i] * coeffs[n - i]
        coeffs.append(value / d0)
    if any(c.denominator != 1 for c in coeffs):
        raise UsageError(f"generating function {f.label} has non-integral Taylor coefficients")
    return [int(c) for c in coeffs]


def genfun(space: SpaceDescriptor, kind: ClassKind) -> RationalGenFun:
    """h^1(End) of split / generic bundles as a function of j"""
    if kind not in (ClassKind.SPLIT, ClassKind.GENERIC):
        raise UsageError(f"generating functions exist for split and generic bundles, not {kind.value}")
    label = f"{space.label}/{kind.value}"
    if not space.is_surface:
        if kind is ClassKind.SPLIT:
            return RationalGenFun.from_expression("z*(z**2 + 6*z + 1)/(z - 1)**4", label)
        return RationalGenFun.from_expression("z*(-z**2 + 2*z + 1)/(z - 1)**4", label)
    k = space.k
    if kind is ClassKind.GENERIC:
        return RationalGenFun.from_expression(
            f"(z**{k + 2} - z**3 - z**2 - z)/((z - 1)**2*(z**{k} - 1))", label)
    n, odd = divmod(k, 2)
    if odd:
        expression = f"-z*(2*z**{n + 1} + z + 1)/((z - 1)**2*(z**{k} - 1))"
    else:
        expression = f"-z*(z**{n + 1} + z**{n} + z + 1)/((z - 1)**2*(z**{k} - 1))"
    return RationalGenFun.from_expression(expression, label)


def genfun_coefficient(space: SpaceDescriptor, kind: ClassKind, j: int) -> int:
    return taylor_coeffs(genfun(space, kind), j)[j]


def delta_genfun(space: SpaceDescriptor) -> RationalGenFun:
    """h^1(End E_split) - h^1(End G_j), valid where the generic entry is"""
    split, generic = genfun(space, ClassKind.SPLIT), genfun(space, ClassKind.GENERIC)
    return split.minus(generic, f"{space.label}/delta")


def chi_bounds_surface(j: int, k: int) -> BoundsResult:
    """j - 1 <= chi <= q^2 k (r = 0) or q^2 k + (2q + 1) r - 1, where j = qk + r"""
    if j < 1 or k < 1:
        raise UsageError(f"surface bounds need j >= 1 and k >= 1, got j={j}, k={k}")
    q, r = divmod(j, k)
    upper = q * q * k if r == 0 else q * q * k + (2 * q + 1) * r - 1
    return BoundsResult(lower=j - 1, upper=upper)


def chi_bounds_w1(j: int) -> BoundsResult:
    if j < 1:
        raise UsageError(f"bounds need j >= 1, got {j}")
    return BoundsResult(lower=j - 1, upper=_exact_div((j * j + j) * (j - 1), 6))


def h1end_bounds_w1(j: int) -> BoundsResult:
    if j < 1:
        raise UsageError(f"bounds need j >= 1, got {j}")
    return BoundsResult(lower=_exact_div(j ** 3 + 3 * j ** 2 - j, 3),
                        upper=_exact_div(4 * j ** 3 - j, 3))


def chi_bounds(space: SpaceDescriptor, j: int) -> BoundsResult:
    return chi_bounds_surface(j, space.k) if space.is_surface else chi_bounds_w1(j)


def _exact_div(a: int, b: int) -> int:
    q, r = divmod(a, b)
    if r:
        raise ArithmeticError(f"{a} is not divisible by {b}")
    return q


def moduli_dim(j: int) -> ModuliDimension:
    """Dimension 4j - 5 of the family of reflexive sheaves with chi = j - 1 on the flop"""
    if j < 0:
        raise UsageError(f"splitting type must be >= 0, got {j}")
    gamma1 = max(0, 4 * j - 4)
    if j < 2:
        # only the direct images of the split sheaves, both with chi = 0
        return ModuliDimension(j=j, dim=None, chi=0, gamma1=gamma1)
    return ModuliDimension(j=j, dim=4 * j - 5, chi=j - 1, gamma1=gamma1)


def phi_line(space: SpaceDescriptor, p: int, m: int) -> int:
    """chi(l^(m), O(p))"""
    if m < 0:
        raise UsageError("neighbourhood order m must be >= 0")
    if space.is_surface:
        return _exact_div((m + 1) * (space.k * m + 2 + 2 * p), 2)
    return _exact_div((m + 2) * (m + 1) * (2 * m + 3 * p + 3), 6)


def hilbert_closed_form(space: SpaceDescriptor, m: int, endomorphism: bool = False) -> HilbertPolynomial:
    """phi(E^(m), n) for any rank-2 bundle with c_1 = 0, doubled for End E"""
    if m < 0:
        raise UsageError("neighbourhood order m must be >= 0")
    scale = 2 if endomorphism else 1
    if space.is_surface:
        constant = Fraction((m + 1) * (space.k * m + 2))
        linear = Fraction(2 * (m + 1))
    else:
        constant = Fraction((m + 2) * (m + 1) * (2 * m + 3), 3)
        linear = Fraction((m + 2) * (m + 1))
    return HilbertPolynomial(m=m, coefficients=(scale * constant, scale * linear), endomorphism=endomorphism)
