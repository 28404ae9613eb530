from fractions import Fraction

import pytest

from bundles import (
    canonical_class,
    class_from_source,
    ext_basis,
    make_from_class,
    make_split,
    random_class,
    reduce_class,
    restrict_to_pencil_divisor,
)
from cech import determinant
from models import UsageError
from series_algebra import LaurentSection, Monomial, parse_section
from spaces import FLOP, Surface, h1_monomials


class TestMakeSplit:
    def test_diagonal_transition(self):
        T = make_split(Surface(1), 3).transition()
        assert T.is_diagonal()
        assert T.entries[0][0] == LaurentSection.monomial(3)
        assert T.entries[1][1] == LaurentSection.monomial(-3)

    def test_trivial_bundle(self):
        E = make_split(FLOP, 0)
        assert E.is_split
        assert E.transition().twists == (0, 0)

    def test_negative_type_rejected(self):
        with pytest.raises(UsageError):
            make_split(Surface(2), -1)


class TestMakeFromClass:
    def test_surface_class(self):
        E = make_from_class(Surface(1), 2, parse_section("u*z^-1"))
        assert not E.is_split
        assert E.transition().entries[0][1] == parse_section("u*z")

    def test_flop_class(self):
        E = make_from_class(FLOP, 2, parse_section("u*z^-1 + v*z^-2", arity=3))
        assert len(E.cls) == 2

    def test_no_class_for_type_one_on_z1(self):
        with pytest.raises(UsageError):
            make_from_class(Surface(1), 1, parse_section("u*z^-1"))

    def test_degree_zero_rejected(self):
        with pytest.raises(UsageError, match="restriction"):
            make_from_class(Surface(1), 2, parse_section("z^-1"))

    def test_arity_mismatch(self):
        with pytest.raises(UsageError):
            make_from_class(Surface(1), 2, parse_section("u*z^-1", arity=3))


class TestExtBasis:
    def test_z1_type_two(self):
        assert ext_basis(Surface(1), 2) == [Monomial.of(-2, 1), Monomial.of(-1, 1), Monomial.of(-1, 2)]

    @pytest.mark.parametrize("j", range(2, 6))
    def test_flop_first_order_part(self, j):
        first_order = [m for m in ext_basis(FLOP, j) if m.degree == 1]
        assert len(first_order) == 2 * (2 * j - 2) == 4 * j - 4

    def test_type_zero(self):
        assert ext_basis(Surface(3), 0) == []
        assert ext_basis(FLOP, 0) == []

    @pytest.mark.parametrize("space", [Surface(1), Surface(2), Surface(3), FLOP])
    def test_sizes_match_class_counting(self, space):
        for j in range(1, 7):
            # the degree-zero part of H^1(O(-2j)) has 2j - 1 monomials
            assert len(ext_basis(space, j)) == len(h1_monomials(space, -2 * j)) - (2 * j - 1)


class TestRandomClass:
    def test_deterministic(self):
        assert random_class(FLOP, 3, 7) == random_class(FLOP, 3, 7)

    def test_seeds_differ(self):
        assert random_class(Surface(1), 3, 1).cls != random_class(Surface(1), 3, 2).cls

    def test_full_support_within_bound(self):
        E = random_class(Surface(2), 4, 3, coeff_bound=50)
        assert E.cls.support() == ext_basis(Surface(2), 4)
        assert all(c != 0 and abs(c) <= 50 for _, c in E.cls.items())

    def test_type_zero_rejected(self):
        with pytest.raises(UsageError):
            random_class(Surface(1), 0, 1)


class TestReduceClass:
    def test_extendable_monomials_dropped(self):
        reduced = reduce_class(Surface(1), 2, parse_section("u*z^-1 + u*z + u^5*z^-1"))
        assert reduced == parse_section("u*z^-1")

    def test_degree_zero_class_rejected(self):
        with pytest.raises(UsageError):
            reduce_class(Surface(1), 2, parse_section("z^-1 + u*z^-1"))

    def test_extendable_degree_zero_is_harmless(self):
        assert reduce_class(Surface(1), 2, parse_section("z^2")).is_zero()


class TestEndTransition:
    def test_split_is_diagonal(self):
        T = make_split(Surface(2), 3).end_transition()
        assert T.is_diagonal()
        assert sorted(T.twists) == [-6, 0, 0, 6]

    def test_size_and_unit_determinant(self):
        T = random_class(FLOP, 2, 4).end_transition()
        assert T.size == 4
        assert T.arity == 3

    def test_flag_split_is_diagonal(self):
        T = make_split(Surface(1), 3).flag_end_transition()
        assert T.size == 3
        assert T.is_diagonal()
        assert T.twists == (0, 6, 0)

    def test_flag_determinant(self):
        T = random_class(Surface(1), 3, 2).flag_end_transition()
        assert not T.is_diagonal()
        assert determinant(T) == LaurentSection.monomial(6, arity=2)


class TestPencilRestriction:
    def test_split_stays_split(self):
        for c in (Fraction(0), Fraction(5, 2), None):
            restricted = restrict_to_pencil_divisor(make_split(FLOP, 3), c)
            assert restricted == make_split(Surface(1), 3)

    def test_v_free_class(self):
        E = make_from_class(FLOP, 2, parse_section("u*z^-1", arity=3))
        restricted = restrict_to_pencil_divisor(E, Fraction(0))
        assert restricted.space == Surface(1)
        assert restricted.cls == parse_section("u*z^-1")

    def test_substitution(self):
        E = make_from_class(FLOP, 2, parse_section("u*z^-1 + v*z^-2", arity=3))
        assert restrict_to_pencil_divisor(E, Fraction(0)).cls == parse_section("u*z^-1")
        assert restrict_to_pencil_divisor(E, Fraction(2)).cls == parse_section("u*z^-1 + 2*u*z^-2")

    def test_divisor_at_infinity(self):
        E = make_from_class(FLOP, 2, parse_section("v*z^-1", arity=3))
        assert restrict_to_pencil_divisor(E, None).cls == parse_section("u*z^-1")

    def test_surface_rejected(self):
        with pytest.raises(UsageError):
            restrict_to_pencil_divisor(make_split(Surface(1), 2), Fraction(0))


class TestCanonicalClass:
    def test_proportional_classes_agree(self):
        E = make_from_class(Surface(1), 2, parse_section("2*u*z^-1 + 4*u^2*z^-1"))
        a, b = canonical_class(E), canonical_class(E.scaled(Fraction(7, 3)))
        assert a.digest == b.digest
        assert a.bundle.cls.coefficient(Monomial.of(-1, 1)) == 1
        assert a.bundle.cls.coefficient(Monomial.of(-1, 2)) == 2

    def test_different_classes_differ(self):
        a = canonical_class(make_from_class(Surface(1), 2, parse_section("u*z^-1")))
        b = canonical_class(make_from_class(Surface(1), 2, parse_section("u*z^-2")))
        assert a.digest != b.digest

    def test_split(self):
        assert canonical_class(make_split(FLOP, 2)).text == "split"

    def test_scaling_by_zero_rejected(self):
        with pytest.raises(UsageError):
            make_from_class(Surface(1), 2, parse_section("u*z^-1")).scaled(0)


class TestClassFromSource:
    def test_split(self):
        E, seed = class_from_source(Surface(2), 3, "split")
        assert E.is_split and seed is None

    def test_random(self):
        E, seed = class_from_source(FLOP, 3, "random:7")
        assert seed == 7
        assert E == random_class(FLOP, 3, 7)

    def test_polynomial(self):
        E, seed = class_from_source(Surface(1), 2, "u*z^-1 + 3/2*u*z^-2")
        assert seed is None
        assert E.cls.coefficient(Monomial.of(-2, 1)) == Fraction(3, 2)

    @pytest.mark.parametrize("source", ["random:x", "u*z^", "u^-1"])
    def test_bad_sources(self, source):
        with pytest.raises(UsageError):
            class_from_source(Surface(1), 2, source)
