"""Membership oracles on worked instances plus structural properties."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polyevp.geometry import (
    ConeGen,
    DimensionMismatchError,
    InvalidConfigurationError,
    Polytope,
    VPolyhedralUnion,
    cone_contains,
    dual_cone_contains,
    scaled_H_minus_K_contains,
    scaled_H_plus_K_contains,
    triangle_property_check,
    union_disjoint_from,
    validate_cone,
    zero_notin_H_plus_K,
)
from polyevp.rational import dot

from conftest import rand_cone_polytope, rand_point_in_cone, rand_vector


class TestConeMembership:
    def test_positive_combination(self, orthant2):
        assert cone_contains(orthant2, (1, 2))

    def test_outside_orthant(self, orthant2):
        assert not cone_contains(orthant2, (-1, 0))

    def test_zero_vector(self, orthant2):
        assert cone_contains(orthant2, (0, 0))

    def test_every_generator_is_inside(self):
        rng = random.Random(5)
        for _ in range(20):
            K, _, _ = rand_cone_polytope(rng, rng.randint(2, 3), rng.randint(1, 4), 1)
            for g in K.generators:
                assert cone_contains(K, g)

    def test_dimension_mismatch(self, orthant2):
        with pytest.raises(DimensionMismatchError):
            cone_contains(orthant2, (1, 2, 3))


class TestDualCone:
    def test_diagonal_functional(self, orthant2):
        assert dual_cone_contains(orthant2, (1, 1))

    def test_negative_on_generator(self, orthant2):
        assert not dual_cone_contains(orthant2, (-1, 0))

    def test_zero_functional(self, orthant2):
        assert dual_cone_contains(orthant2, (0, 0))


class TestScaledMembership:
    def test_at_threshold(self, diagonal_segment, orthant2):
        assert scaled_H_minus_K_contains(diagonal_segment, orthant2, (1, 1), 1)

    def test_just_below_threshold(self, diagonal_segment, orthant2):
        # independent route: t * s * (1,1) with s in [1/2, 1] never covers
        # (1, 1) when t < 1, since t * s < 1 forces a positive remainder
        assert not scaled_H_minus_K_contains(
            diagonal_segment, orthant2, (1, 1), Fraction(99, 100)
        )

    def test_negative_scale(self, diagonal_segment, orthant2):
        assert scaled_H_minus_K_contains(diagonal_segment, orthant2, (-1, -1), -2)


class TestOriginSeparation:
    def test_segment_off_origin(self, diagonal_segment, orthant2):
        assert zero_notin_H_plus_K(diagonal_segment, orthant2)

    def test_origin_vertex(self, orthant2):
        assert not zero_notin_H_plus_K(Polytope(2, ((0, 0),)), orthant2)

    def test_slanted_segment(self, slanted_segment, orthant2):
        assert zero_notin_H_plus_K(slanted_segment, orthant2)


class TestTriangleProperty:
    def test_diagonal_segment_unit_scales(self, diagonal_segment, orthant2):
        assert triangle_property_check(diagonal_segment, orthant2, 1, 1)

    def test_zero_scale(self, diagonal_segment, orthant2):
        assert triangle_property_check(diagonal_segment, orthant2, 0, 1)

    def test_slanted_segment_mixed_scales(self, slanted_segment, orthant2):
        assert triangle_property_check(slanted_segment, orthant2, 1, 2)

    def test_negative_scales_rejected(self, diagonal_segment, orthant2):
        with pytest.raises(ValueError):
            triangle_property_check(diagonal_segment, orthant2, -1, 1)

    def test_holds_on_random_instances(self):
        # guaranteed whenever H sits inside a convex K
        rng = random.Random(11)
        for _ in range(25):
            K, H, _ = rand_cone_polytope(
                rng, rng.randint(2, 3), rng.randint(1, 4), rng.randint(1, 3)
            )
            d1 = Fraction(rng.randint(0, 5), rng.randint(1, 3))
            d2 = Fraction(rng.randint(0, 5), rng.randint(1, 3))
            assert triangle_property_check(H, K, d1, d2)


class TestUnionDisjointness:
    def test_axis_cross_escapes_unit_translate(self, axis_cross_range, slanted_segment, orthant2):
        assert union_disjoint_from(
            axis_cross_range, (0, 0), 1, slanted_segment, orthant2
        )

    def test_explicit_intersection_point(self, slanted_segment, orthant2):
        inside = VPolyhedralUnion(2, ((((-1, -1),), ()),))  # -1 * (1,1) vertex
        assert not union_disjoint_from(inside, (0, 0), 1, slanted_segment, orthant2)

    def test_vee_escapes_unit_translate(self, vee_range, simplex_segment, orthant2):
        assert union_disjoint_from(vee_range, (0, 0), 1, simplex_segment, orthant2)

    def test_eps_must_be_positive(self, vee_range, simplex_segment, orthant2):
        with pytest.raises(ValueError):
            union_disjoint_from(vee_range, (0, 0), 0, simplex_segment, orthant2)


@st.composite
def instance_point_scales(draw):
    seed = draw(st.integers(0, 10_000))
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    K, H, _ = rand_cone_polytope(rng, n, rng.randint(1, 3), rng.randint(1, 3))
    y = rand_vector(rng, n)
    t1 = Fraction(draw(st.integers(-8, 8)), draw(st.integers(1, 3)))
    dt = Fraction(draw(st.integers(1, 8)), draw(st.integers(1, 3)))
    return K, H, y, t1, t1 + dt


@given(instance_point_scales())
@settings(max_examples=40, deadline=None)
def test_feasibility_is_monotone_in_the_scale(data):
    # H inside K makes the feasible scale set upward closed
    K, H, y, t1, t2 = data
    if scaled_H_minus_K_contains(H, K, y, t1):
        assert scaled_H_minus_K_contains(H, K, y, t2)


def test_plus_cone_membership_matches_hand_check(orthant2):
    H = Polytope(2, ((1, 1),))
    assert scaled_H_plus_K_contains(H, orthant2, (2, 2), 1)
    assert not scaled_H_plus_K_contains(H, orthant2, (2, 2), 5)
    assert scaled_H_plus_K_contains(H, orthant2, (0, 0), 0)


class TestValidation:
    def test_orthant_is_pointed_nontrivial(self, orthant2):
        v = validate_cone(orthant2)
        assert v.pointed and v.nontrivial and not v.full_space

    def test_line_is_not_pointed(self):
        assert not validate_cone(ConeGen(2, ((1, 0), (-1, 0)))).pointed

    def test_full_plane_is_trivial(self):
        v = validate_cone(ConeGen(2, ((1, 0), (-1, 0), (0, 1), (0, -1))))
        assert v.full_space and not v.nontrivial

    def test_zero_generator_rejected(self):
        with pytest.raises(InvalidConfigurationError):
            ConeGen(2, ((0, 0),))

    def test_empty_polytope_rejected(self):
        with pytest.raises(InvalidConfigurationError):
            Polytope(2, ())

    def test_union_needs_vertices(self):
        with pytest.raises(InvalidConfigurationError):
            VPolyhedralUnion(2, (((), ((1, 0),)),))


def test_random_cone_points_are_members():
    rng = random.Random(23)
    for _ in range(20):
        K, _, l = rand_cone_polytope(rng, 3, 3, 1)
        p = rand_point_in_cone(rng, K)
        assert cone_contains(K, p)
        assert dot(l, p) >= 0
