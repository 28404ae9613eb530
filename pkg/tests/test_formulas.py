import pytest

from bundles import make_split, random_class
from formulas import (
    RationalGenFun,
    chi_bounds,
    chi_bounds_surface,
    chi_bounds_w1,
    delta_genfun,
    genfun,
    genfun_coefficient,
    h1end_bounds_w1,
    hilbert_closed_form,
    moduli_dim,
    phi_line,
    taylor_coeffs,
)
from invariants import chi, h1_end
from models import ClassKind, UsageError
from spaces import FLOP, Surface, h0_monomials, h1_monomials


class TestBounds:
    @pytest.mark.parametrize("j,k,expected", [
        (3, 1, (2, 9)),
        (3, 2, (2, 4)),
        (3, 3, (2, 3)),
        (4, 2, (3, 8)),
        (5, 2, (4, 12)),
        (2, 5, (1, 1)),
    ])
    def test_surface(self, j, k, expected):
        bounds = chi_bounds_surface(j, k)
        assert (bounds.lower, bounds.upper) == expected

    def test_flop(self):
        assert (chi_bounds_w1(3).lower, chi_bounds_w1(3).upper) == (2, 4)
        assert chi_bounds_w1(1).upper == 0

    def test_flop_endomorphisms(self):
        bounds = h1end_bounds_w1(3)
        assert (bounds.lower, bounds.upper) == (17, 35)

    def test_split_attains_upper(self):
        for space in (Surface(1), Surface(2), Surface(3), FLOP):
            E = make_split(space, 3)
            assert chi(E) == chi_bounds(space, 3).upper

    def test_contains(self):
        bounds = chi_bounds_surface(4, 2)
        assert bounds.contains(3) and bounds.contains(8)
        assert not bounds.contains(9)
        assert bounds.to_dict()["attainedBy"] == {"lower": "generic", "upper": "split"}

    @pytest.mark.parametrize("j,k", [(0, 2), (2, 0)])
    def test_rejected(self, j, k):
        with pytest.raises(UsageError):
            chi_bounds_surface(j, k)


class TestTaylor:
    def test_geometric_series(self):
        assert taylor_coeffs(RationalGenFun((1,), (1, -1)), 5) == [1] * 6

    def test_zero_denominator_rejected(self):
        with pytest.raises(UsageError):
            RationalGenFun((1,), (0, 1))

    def test_non_integral_rejected(self):
        with pytest.raises(UsageError):
            taylor_coeffs(RationalGenFun((1,), (2,)), 2)

    def test_from_expression(self):
        f = RationalGenFun.from_expression("z/(1 - z)**2")
        assert taylor_coeffs(f, 4) == [0, 1, 2, 3, 4]


class TestGenFun:
    def test_flop_split(self):
        for j in range(1, 8):
            assert genfun_coefficient(FLOP, ClassKind.SPLIT, j) == (4 * j ** 3 - j) // 3

    def test_flop_generic(self):
        for j in range(1, 8):
            assert genfun_coefficient(FLOP, ClassKind.GENERIC, j) == (j ** 3 + 3 * j ** 2 - j) // 3

    def test_z1_split(self):
        for j in range(1, 8):
            assert genfun_coefficient(Surface(1), ClassKind.SPLIT, j) == 2 * j * j - j

    @pytest.mark.parametrize("space,kind,value", [
        (Surface(1), ClassKind.GENERIC, 9),
        (Surface(2), ClassKind.SPLIT, 9),
        (Surface(2), ClassKind.GENERIC, 7),
        (Surface(3), ClassKind.SPLIT, 7),
        (Surface(3), ClassKind.GENERIC, 6),
    ])
    def test_type_three(self, space, kind, value):
        assert genfun_coefficient(space, kind, 3) == value

    @pytest.mark.parametrize("space", [Surface(1), Surface(2), Surface(3), Surface(4), FLOP])
    def test_coefficients_non_negative(self, space):
        for kind in (ClassKind.SPLIT, ClassKind.GENERIC):
            coeffs = taylor_coeffs(genfun(space, kind), 12)
            assert coeffs[0] == 0
            assert all(c >= 0 for c in coeffs)

    def test_explicit_kind_rejected(self):
        with pytest.raises(UsageError):
            genfun(Surface(1), ClassKind.EXPLICIT)

    def test_delta(self):
        assert taylor_coeffs(delta_genfun(FLOP), 3)[3] == 18
        assert taylor_coeffs(delta_genfun(Surface(1)), 3)[3] == 6

    @pytest.mark.parametrize("space", [Surface(1), Surface(2), Surface(3), FLOP])
    def test_split_matches_computation(self, space):
        for j in range(1, 4):
            assert h1_end(make_split(space, j)) == genfun_coefficient(space, ClassKind.SPLIT, j)

    @pytest.mark.slow
    @pytest.mark.parametrize("space", [Surface(1), Surface(2), Surface(3), FLOP])
    def test_generic_matches_computation(self, space):
        for j in range(1, 4):
            sampled = min(h1_end(random_class(space, j, seed)) for seed in range(5))
            assert sampled == genfun_coefficient(space, ClassKind.GENERIC, j)


class TestModuli:
    def test_type_four(self):
        moduli = moduli_dim(4)
        assert (moduli.dim, moduli.chi, moduli.gamma1) == (11, 3, 12)
        assert moduli.to_dict()["projDim"] == 11

    @pytest.mark.parametrize("j", [0, 1])
    def test_degenerate(self, j):
        moduli = moduli_dim(j)
        assert moduli.degenerate
        assert moduli.chi == 0
        assert moduli.to_dict()["projDim"] == "degenerate"

    def test_negative_rejected(self):
        with pytest.raises(UsageError):
            moduli_dim(-1)


class TestPhiLine:
    @pytest.mark.parametrize("space", [Surface(1), Surface(2), Surface(3), FLOP])
    def test_matches_monomial_counts(self, space):
        for p in range(-6, 5):
            for m in range(0, 4):
                expected = len(h0_monomials(space, p, m)) - len(h1_monomials(space, p, m))
                assert phi_line(space, p, m) == expected

    def test_negative_twist(self):
        assert phi_line(Surface(1), -5, 1) == -7


class TestHilbertClosedForm:
    def test_flop_second_neighbourhood(self):
        poly = hilbert_closed_form(FLOP, 2)
        assert poly.coefficients == (28, 12)

    def test_surface(self):
        assert hilbert_closed_form(Surface(2), 1).coefficients == (8, 4)

    def test_sum_of_line_bundles(self):
        for space in (Surface(1), Surface(3), FLOP):
            for m in range(0, 4):
                poly = hilbert_closed_form(space, m)
                for n in range(-2, 3):
                    assert poly.evaluate(n) == phi_line(space, n, m) + phi_line(space, n, m)

    def test_endomorphisms_double(self):
        plain = hilbert_closed_form(FLOP, 1)
        end = hilbert_closed_form(FLOP, 1, endomorphism=True)
        assert end.coefficients == tuple(2 * c for c in plain.coefficients)
