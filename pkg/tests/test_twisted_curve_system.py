import itertools
import random
from fractions import Fraction

import pytest

from orbifold_gw.InertiaSystem import Weights, denominator_bound_check, one_dim, point_0, point_inf
from orbifold_gw.TwistedCurveSystem import (
    Football,
    MapSpec,
    PicClass,
    SheafClass,
    direct_sum,
    euler_char,
    h0_genus0,
    line_bundle_class,
    map_degree,
    pic_canonical,
    pic_degree,
    pic_from_json,
    pic_to_json,
    root_stack_section_count,
    serre_dual_p1,
    solve_map_picard,
    structure_sheaf,
    target_line_degree,
    torsion_class,
    validate_h0_closed_form,
    virtual_dim,
)
from orbifold_gw.errors import ConfigError, DivisibilityError, MarkingMismatchError, ParseError


@pytest.mark.parametrize("genus", range(6))
def test_structure_sheaf_euler_characteristic(genus):
    curve = Football(genus)
    assert euler_char(structure_sheaf(curve), curve) == 1 - genus


@pytest.mark.parametrize("r", range(2, 13))
def test_torsion_sheaves(r):
    curve = Football(0, (r,))
    untwisted = torsion_class(r, 0)
    assert untwisted.ages == (Fraction(-(r - 1), r),)
    assert euler_char(untwisted, curve) == 1
    for k in range(1, r):
        twisted = torsion_class(r, k)
        assert twisted.ages == (Fraction(1, r),)
        assert euler_char(twisted, curve) == 0


def test_torsion_class_range():
    with pytest.raises(MarkingMismatchError):
        torsion_class(3, 3)
    with pytest.raises(MarkingMismatchError):
        torsion_class(0, 0)


def test_euler_char_is_additive():
    rng = random.Random(7)
    curve = Football(0, (4, 6, 2))
    for _ in range(50):
        s1 = SheafClass(rng.randint(0, 3), Fraction(rng.randint(-9, 9), 12), tuple(Fraction(rng.randint(0, 5), 6) for _ in range(3)))
        s2 = SheafClass(rng.randint(0, 3), Fraction(rng.randint(-9, 9), 12), tuple(Fraction(rng.randint(0, 5), 6) for _ in range(3)))
        assert euler_char(direct_sum(s1, s2), curve) == euler_char(s1, curve) + euler_char(s2, curve)
        assert s1 + s2 == direct_sum(s1, s2)


def test_euler_char_marking_mismatch():
    with pytest.raises(MarkingMismatchError):
        euler_char(SheafClass(1, Fraction(0), (Fraction(0),)), Football.two_marked(4, 6))
    with pytest.raises(MarkingMismatchError):
        direct_sum(SheafClass(1, Fraction(0), ()), SheafClass(1, Fraction(0), (Fraction(0),)))
    with pytest.raises(ConfigError):
        Football(-1)


def test_picard_relation():
    assert pic_canonical(PicClass(4, -4), 4, 6) == PicClass(0, 2)
    assert pic_canonical(PicClass(6, -6), 4, 6) == PicClass(2, 0)
    p = PicClass(5, 0)
    canonical = pic_canonical(p, 4, 6)
    assert canonical == PicClass(1, 6)
    assert pic_degree(canonical, 4, 6) == pic_degree(p, 4, 6) == Fraction(5, 4)
    with_torsion = pic_canonical(PicClass(0, 0, (3,)), 4, 6, (2,))
    assert with_torsion == PicClass(0, 6, (1,))
    assert pic_degree(with_torsion, 4, 6, (2,)) == Fraction(3, 2)
    with pytest.raises(MarkingMismatchError):
        pic_canonical(PicClass(0, 0, (1,)), 4, 6)


def test_picard_group_operations():
    p = PicClass(1, -1)
    assert p.power(4) == PicClass(4, -4)
    assert p + PicClass(2, 3) == PicClass(3, 2)
    with pytest.raises(MarkingMismatchError):
        p + PicClass(0, 0, (1,))
    assert pic_to_json(PicClass(1, -1, (1,))) == {"z0": 1, "zinf": -1, "torsion": [1]}
    assert pic_from_json({"z0": 4, "zinf": -4}) == PicClass(4, -4)
    with pytest.raises(ParseError):
        pic_from_json({"z0": 1})


def test_line_bundle_ages():
    sheaf = line_bundle_class(PicClass(1, -1), 4, 6)
    assert sheaf.ages == (Fraction(1, 4), Fraction(5, 6))
    assert sheaf.degree == Fraction(1, 12)
    # deg - Σ ages + 1
    assert euler_char(sheaf, Football.two_marked(4, 6)) == Fraction(1, 12) - Fraction(13, 12) + 1


@pytest.mark.parametrize(
    "z0, z_inf, expected",
    [
        (4, -4, 1),
        (6, -6, 1),
        (1, -1, 0),
        (0, 0, 1),
        (8, 0, 3),
        (-1, 5, 0),
    ],
)
def test_h0_on_p46(z0, z_inf, expected):
    assert h0_genus0(PicClass(z0, z_inf), 4, 6) == expected


@pytest.mark.parametrize("a, b", [(4, 6), (2, 3), (6, 10)])
def test_h0_closed_form_matches_section_oracle(a, b):
    assert validate_h0_closed_form(a, b, bound=20) == []


def test_h0_invariant_under_relation():
    for z0, z_inf in itertools.product(range(-8, 9), repeat=2):
        p = PicClass(z0, z_inf)
        assert h0_genus0(pic_canonical(p, 4, 6), 4, 6) == h0_genus0(p, 4, 6)


def test_section_oracle_rejects_torsion():
    with pytest.raises(MarkingMismatchError):
        root_stack_section_count(PicClass(0, 0, (1,)), 4, 6)


def test_riemann_roch_with_serre_duality_on_p1():
    curve = Football(0, (1, 1))
    for z0, z_inf in itertools.product(range(-6, 7), repeat=2):
        p = PicClass(z0, z_inf)
        h1 = h0_genus0(serre_dual_p1(p), 1, 1)
        assert h0_genus0(p, 1, 1) - h1 == euler_char(line_bundle_class(p, 1, 1), curve)


@pytest.mark.parametrize("a, b", list(itertools.product(range(1, 13), repeat=2)))
def test_degrees_have_bounded_denominators(a, b):
    w = Weights(a, b)
    for z0, z_inf in itertools.product(range(-20, 21), repeat=2):
        assert denominator_bound_check(pic_degree(PicClass(z0, z_inf), a, b), w)
    for k in range(1, 4):
        assert denominator_bound_check(map_degree(w, k, a + b), w)


def test_target_degrees():
    w = Weights(4, 6)
    assert target_line_degree(w) == Fraction(1, 24)
    assert map_degree(w, 1) == Fraction(1, 12)
    assert map_degree(w, 1, w.a + w.b) == Fraction(5, 6)


@pytest.mark.parametrize(
    "weights, k, sectors, expected",
    [
        ((1, 1), 1, (one_dim(0),) * 3, 3),
        ((4, 6), 1, (point_0(1), point_inf(5), one_dim(0)), 1),
        ((4, 6), 0, (one_dim(0),) * 3, 1),
        ((2, 3), 0, (one_dim(0),) * 3, 1),
    ],
)
def test_virtual_dimension(weights, k, sectors, expected):
    spec = MapSpec.build(Weights(*weights), k, sectors)
    assert virtual_dim(spec) == expected


def test_map_spec_validation():
    w = Weights(4, 6)
    with pytest.raises(MarkingMismatchError):
        MapSpec(w, Football(0, (6,)), 1, (point_0(1),))
    with pytest.raises(MarkingMismatchError):
        MapSpec(w, Football(0, (4, 6)), 1, (point_0(1),))
    with pytest.raises(ConfigError):
        MapSpec.build(w, -1, ())
    with pytest.raises(ConfigError):
        virtual_dim(MapSpec(w, Football(1, ()), 1, ()))


def test_solve_minimal_map_p46():
    w = Weights(4, 6)
    solutions = solve_map_picard(w, 1, 1)
    assert solutions == [PicClass(1, -1)]
    bundle = solutions[0]
    assert pic_degree(bundle, 4, 6) == Fraction(1, 12)
    assert h0_genus0(bundle.power(w.a), 4, 6) == 1
    assert h0_genus0(bundle.power(w.b), 4, 6) == 1
    assert solve_map_picard(w, 1, 2) == []


def test_solve_map_p1():
    solutions = solve_map_picard(Weights(1, 1), 1, 1)
    assert len(solutions) == 1
    assert pic_degree(solutions[0], 1, 1) == 1


def test_solve_map_errors():
    w = Weights(4, 6)
    with pytest.raises(DivisibilityError):
        solve_map_picard(w, 1, 3)
    with pytest.raises(ConfigError):
        solve_map_picard(w, 0, 1)


@pytest.mark.parametrize(
    "a, b",
    [(a, b) for a, b in itertools.product(range(1, 13), repeat=2) if not Weights(a, b).degenerate],
)
def test_no_maps_through_twisted_third_marking(a, b):
    w = Weights(a, b)
    assert len(solve_map_picard(w, 1, 1)) == 1
    for D in range(2, w.d + 1):
        if w.d % D == 0:
            assert solve_map_picard(w, 1, D) == []
