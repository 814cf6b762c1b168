import itertools
from fractions import Fraction

import pytest

from orbifold_gw.InertiaSystem import ClassKind, Weights, involution_sector, one_dim, point_0, point_inf
from orbifold_gw.PolynomialAlgebra import ONE, Q, X, Y, Monomial, Polynomial, ideal_contains
from orbifold_gw.QuantumRing import (
    QuantumRing,
    classical_presentation,
    formal_sector,
    hyperplane_class,
    monomial_sector,
    pairing_matrix,
    point_monomial,
    quantum_presentation,
    rewrite_system,
    sector_consistency,
    structure_constants,
    three_point_xy,
    uncompleted_rewrite_system,
    verify_bezout_independence,
    verify_ring,
    xy_q_coefficients,
)
from orbifold_gw.errors import ConfigError, ConfluenceError, NonNormalMonomialError, RingVerificationError

SMALL_WEIGHTS = list(itertools.product(range(1, 13), repeat=2))
NONDEGENERATE = [(a, b) for a, b in SMALL_WEIGHTS if not Weights(a, b).degenerate]


def test_presentation_p46():
    relations = quantum_presentation(Weights(4, 6)).relations
    assert relations[0] == Polynomial({X * Y: 1, Q: -1})
    # (n - m) mod d = 2 mod 2，ζ 因子约化为 1
    assert relations[1] == Polynomial.parse("2 * x^2 - 3 * y^3")
    assert relations[2] == Polynomial.parse("zeta^2 - 1")
    classical = classical_presentation(Weights(4, 6)).relations
    assert classical[0] == Polynomial.monomial(X * Y)
    assert classical[1:] == relations[1:]


def test_presentation_with_nontrivial_zeta_factor():
    relations = quantum_presentation(Weights(6, 10)).relations
    assert relations[1] == Polynomial.parse("3 * x^3 - 5 * zeta y^5")
    assert quantum_presentation(Weights(6, 10), include_zeta_factor=False).relations[1] == Polynomial.parse(
        "3 * x^3 - 5 * y^5"
    )
    alternate = quantum_presentation(Weights(4, 6, bezout_n=3)).relations
    assert alternate[1] == Polynomial.parse("2 * x^2 - 3 * zeta y^3")


def test_presentation_p1_and_p23():
    assert quantum_presentation(Weights(1, 1)).relations == (
        Polynomial.parse("x y - q"),
        Polynomial.parse("x - y"),
        Polynomial.parse("zeta - 1"),
    )
    assert quantum_presentation(Weights(2, 3)).relations[1] == Polynomial.parse("2 * x^2 - 3 * y^3")
    data = quantum_presentation(Weights(2, 3)).to_json()
    assert data["bezout"] == {"m": -1, "n": 1}
    assert data["grading"] == {"zeta": "0/1", "x": "1/2", "y": "1/3", "q": "5/6"}


@pytest.mark.parametrize("weights", [(4, 6), (6, 10), (2, 3), (1, 1), (5, 3)])
def test_rewrite_rules_lie_in_the_ideal(weights):
    w = Weights(*weights)
    relations = quantum_presentation(w).relations
    for rule in rewrite_system(w).rules:
        assert ideal_contains(relations, Polynomial.monomial(rule.pattern) - rule.replacement)


def test_products_p46():
    ring = QuantumRing(Weights(4, 6))
    assert ring.multiply(X, Y) == Polynomial.monomial(Q)
    assert ring.multiply(X, X) == Polynomial.parse("x^2")
    assert ring.multiply("x^2", X) == Polynomial.parse("3/2 * q y^2")
    assert ring.multiply(Y, "y^2") == Polynomial.parse("2/3 * x^2")
    assert ring.element("zeta^3 x") == Polynomial.parse("zeta x")
    assert ring.multiply(1, "y") == Polynomial.monomial(Y)


def test_basis_p46():
    ring = QuantumRing(Weights(4, 6))
    assert [m.to_text() for m in ring.basis()] == [
        "1", "x", "x^2", "y", "y^2",
        "zeta", "zeta x", "zeta x^2", "zeta y", "zeta y^2",
    ]


def test_truncation_drops_high_q_powers():
    ring = QuantumRing(Weights(1, 1), q_truncation=2)
    assert ring.multiply("x", "x") == Polynomial.monomial(Q)
    # q^2 x^2 = q^3，超出 N = 2
    assert ring.multiply("q x", "q x").is_zero()
    assert ring.multiply("q", "x") == Polynomial.parse("q x")


def test_p1_quantum_cohomology():
    ring = QuantumRing(Weights(1, 1))
    assert ring.basis() == [ONE, X]
    assert ring.multiply(X, X) == Polynomial.monomial(Q)
    assert ring.element(Y) == Polynomial.monomial(X)
    sc = ring.structure_constants()
    pairing = pairing_matrix(sc)
    assert pairing.matrix == ((0, 1), (1, 0))


@pytest.mark.parametrize(
    "mono, sector, kind",
    [
        (X, point_0(1), ClassKind.FUNDAMENTAL),
        (Y, point_inf(5), ClassKind.FUNDAMENTAL),
        (Monomial(e_x=2), one_dim(1), ClassKind.POINT),
        (Monomial(e_zeta=1, e_x=2), one_dim(0), ClassKind.POINT),
        (Monomial(e_zeta=1, e_x=1), point_0(3), ClassKind.FUNDAMENTAL),
        (Monomial(e_zeta=1), one_dim(1), ClassKind.FUNDAMENTAL),
        (Monomial(e_y=2), point_inf(4), ClassKind.FUNDAMENTAL),
    ],
)
def test_monomial_sector_p46(mono, sector, kind):
    cls = monomial_sector(Weights(4, 6), mono)
    assert (cls.sector, cls.kind) == (sector, kind)


def test_monomial_sector_rejects_reducible_monomials():
    w = Weights(4, 6)
    for mono in (X * Y, Monomial(e_x=3), Monomial(e_y=3), Monomial(e_zeta=2), Q):
        with pytest.raises(NonNormalMonomialError):
            monomial_sector(w, mono)
    assert formal_sector(w, X * Y) is None


def test_point_class_and_hyperplane():
    w = Weights(4, 6)
    assert point_monomial(w) == Monomial(e_zeta=1, e_x=2)
    assert hyperplane_class(w) == Polynomial.parse("2 * zeta x^2")


def test_structure_constants_p46():
    sc = structure_constants(Weights(4, 6), 6)
    assert sc.rank == 10
    one, x, y = sc.index(ONE), sc.index(X), sc.index(Y)
    assert sc.c(x, y, one) == (0, 1, 0, 0, 0, 0, 0)
    assert sc.c(x, y, x) == (0,) * 7
    x2 = sc.index(Monomial(e_x=2))
    y2 = sc.index(Monomial(e_y=2))
    assert sc.c(x2, x, y2) == (0, Fraction(3, 2), 0, 0, 0, 0, 0)
    entry = next(e for e in sc.sparse_entries() if (e["i"], e["j"]) == (x, y))
    assert entry == {"i": x, "j": y, "k": one, "series": [{"qpow": 1, "coeff": "1/1"}]}
    assert sc.to_json()["basis"][:3] == ["1", "x", "x^2"]


def test_structure_constants_parallel_matches_serial():
    w = Weights(6, 10)
    serial = structure_constants(w, 4)
    parallel = structure_constants(w, 4, workers=4)
    assert serial.products == parallel.products


def test_structure_constants_guards():
    with pytest.raises(ConfigError):
        structure_constants(Weights(4, 6), 0)
    with pytest.raises(NonNormalMonomialError):
        structure_constants(Weights(4, 6), 2).index(X * Y)


def test_confluence_guard_reports_persistent_error():
    ring = QuantumRing(Weights(4, 6))
    ring.rewrite = uncompleted_rewrite_system(ring.weights)
    reported = []
    ring.set_persistent_error_callback(lambda code, detail, exc: reported.append(code))
    with pytest.raises(ConfluenceError):
        ring.structure_constants(samples=5)
    assert reported == ["ALG03"]


def test_pairing_p46():
    w = Weights(4, 6)
    sc = structure_constants(w, 2)
    pairing = pairing_matrix(sc)
    assert pairing.is_symmetric()
    assert pairing.determinant() != 0
    x = sc.index(X)
    partners = [j for j in range(sc.rank) if pairing.value(x, j) != 0]
    assert [sc.basis[j] for j in partners] == [Monomial(e_zeta=1, e_x=1)]
    assert pairing.value(x, partners[0]) == Fraction(1, 4)
    assert pairing.value(sc.index(ONE), sc.index(point_monomial(w))) == Fraction(1, 4)
    classes = [monomial_sector(w, mono) for mono in sc.basis]
    for i, j in itertools.product(range(sc.rank), repeat=2):
        if pairing.value(i, j):
            assert classes[j].sector == involution_sector(w, classes[i].sector)
    inverse = pairing.inverse()
    for i, k in itertools.product(range(sc.rank), repeat=2):
        total = sum(pairing.value(i, j) * inverse[j][k] for j in range(sc.rank))
        assert total == (1 if i == k else 0)


@pytest.mark.parametrize("weights", [(4, 6), (1, 1), (2, 3), (6, 10)])
def test_verify_ring_examples(weights):
    report = verify_ring(Weights(*weights), 6)
    assert report.passed, report.failed_checks()
    assert [check.name for check in report.checks] == [
        "confluence",
        "associativity",
        "commutativity",
        "identity",
        "rank",
        "grading",
        "frobenius",
        "classical_limit",
        "sector_consistency",
    ]
    report.raise_on_failure()


@pytest.mark.parametrize("a, b", SMALL_WEIGHTS)
def test_verify_ring_all_small_weights(a, b):
    w = Weights(a, b)
    report = verify_ring(w, 6)
    assert report.passed, report.to_json()
    assert structure_constants(w, 6).rank == a + b


@pytest.mark.parametrize(
    "weights",
    [Weights(4, 6, bezout_n=3), Weights(6, 10)],
)
def test_dropping_zeta_factor_is_detected(weights):
    assert verify_ring(weights, 6).passed
    report = verify_ring(weights, 6, include_zeta_factor=False)
    assert not report.passed
    assert "sector_consistency" in report.failed_checks()
    assert sector_consistency(weights, include_zeta_factor=False)
    with pytest.raises(RingVerificationError) as excinfo:
        report.raise_on_failure()
    assert excinfo.value.report is report


def test_dropping_trivial_zeta_factor_changes_nothing():
    # 默认 Bézout 对下 (n - m) mod d = 0
    w = Weights(4, 6)
    assert quantum_presentation(w, False).relations == quantum_presentation(w).relations
    assert verify_ring(w, 4, include_zeta_factor=False).passed


@pytest.mark.parametrize("weights", [(4, 6), (6, 10)])
def test_bezout_independence(weights):
    comparison = verify_bezout_independence(Weights(*weights), N=4)
    assert comparison.isomorphic
    assert comparison.alternate.bezout != comparison.weights.bezout
    assert comparison.to_json()["isomorphic"] is True


@pytest.mark.parametrize("a, b", NONDEGENERATE)
def test_three_point_xy(a, b):
    w = Weights(a, b)
    expected = [Fraction(1)] + [Fraction(0)] * (w.d - 1)
    assert three_point_xy(w) == expected
    assert xy_q_coefficients(w) == expected


def test_three_point_xy_degenerate_falls_back():
    assert three_point_xy(Weights(2, 4)) == xy_q_coefficients(Weights(2, 4))
