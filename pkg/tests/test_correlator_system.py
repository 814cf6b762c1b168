import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from orbifold_gw.CorrelatorSystem import (
    CorrelatorKey,
    CorrelatorTable,
    Insertion,
    Provenance,
    WdvvResult,
    dilaton_reduce,
    divisor_reduce,
    make_key,
    p1_reconstruct,
    parse_class,
    parse_insertion,
    parse_key,
    point_class,
    seed_from_ring,
    string_reduce,
    unit_class,
    wdvv_check,
    wdvv_residual,
    wdvv_scan,
)
from orbifold_gw.InertiaSystem import Weights, point_0
from orbifold_gw.PolynomialAlgebra import X, Y
from orbifold_gw.QuantumRing import monomial_sector, pairing_matrix, structure_constants
from orbifold_gw.errors import (
    DivisorClassError,
    InapplicableRuleError,
    InvalidSectorError,
    MissingCorrelatorError,
    ParseError,
    UnstableKeyError,
)

ONE = unit_class()
PT = point_class()


def tau(cls, power):
    return Insertion(cls, power)


@pytest.fixture(scope="module")
def p1_table():
    return p1_reconstruct(3)


@pytest.fixture(scope="module")
def p46():
    w = Weights(4, 6)
    sc = structure_constants(w, 2)
    pairing = pairing_matrix(sc)
    return w, sc, pairing, seed_from_ring(sc, pairing)


def test_key_canonical_order():
    first = make_key(1, [PT, ONE, tau(PT, 1)])
    second = make_key(1, [tau(PT, 1), PT, ONE])
    assert first == second
    assert hash(first) == hash(second)
    assert str(first) == "<OneDim{0}, OneDim{0}.pt, tau1(OneDim{0}.pt)>_1"
    assert not first.is_primary()


def test_key_validation():
    with pytest.raises(UnstableKeyError):
        Insertion(PT, -1)
    with pytest.raises(UnstableKeyError):
        CorrelatorKey(-1, ())
    with pytest.raises(UnstableKeyError):
        CorrelatorKey(0, (), genus=1)
    assert not make_key(0, [PT, PT]).is_stable()
    assert make_key(1, []).is_stable()


def test_string_reduce():
    key = make_key(1, [ONE, tau(PT, 1), PT])
    assert string_reduce(key) == {make_key(1, [PT, PT]): 1}
    # 全部 τ_0：每一项都落到 τ_{-1}
    assert string_reduce(make_key(1, [ONE, PT, PT, PT])) == {}
    with pytest.raises(UnstableKeyError):
        string_reduce(make_key(0, [ONE, tau(PT, 2)]))
    with pytest.raises(InapplicableRuleError):
        string_reduce(make_key(1, [PT, PT]))


def test_dilaton_reduce():
    assert dilaton_reduce(make_key(1, [tau(ONE, 1), PT, PT])) == (0, make_key(1, [PT, PT]))
    assert dilaton_reduce(make_key(1, [tau(ONE, 1), PT, PT, PT])) == (1, make_key(1, [PT, PT, PT]))
    factor, rest = dilaton_reduce(make_key(1, [tau(ONE, 1), tau(ONE, 1), PT, PT, ONE]))
    assert factor == 2
    assert dilaton_reduce(rest) == (1, make_key(1, [ONE, PT, PT]))
    with pytest.raises(InapplicableRuleError):
        dilaton_reduce(make_key(1, [ONE, PT, PT]))
    with pytest.raises(UnstableKeyError):
        dilaton_reduce(make_key(0, [tau(ONE, 1), PT, PT]))


def test_divisor_reduce_p1():
    w = Weights(1, 1)
    assert divisor_reduce(make_key(1, [PT, PT, PT]), w) == {make_key(1, [PT, PT]): 1}
    assert divisor_reduce(make_key(0, [PT, PT, PT, ONE]), w) == {}


def test_divisor_reduce_p46(p46):
    w, sc, _, table = p46
    x = monomial_sector(w, X)
    y = monomial_sector(w, Y)
    key = make_key(1, [PT, x, y, PT])
    assert divisor_reduce(key, w, sc) == {make_key(1, [x, y, PT]): Fraction(1, 2)}
    assert table.evaluate(key) == Fraction(1, 2) * table.evaluate(make_key(1, [x, y, PT]))
    with pytest.raises(DivisorClassError):
        divisor_reduce(key, w, sc, divisor=x)
    with pytest.raises(InapplicableRuleError):
        divisor_reduce(make_key(1, [x, y, tau(ONE, 1), PT]), w)


def test_divisor_reduce_cup_product_terms():
    w = Weights(1, 1)
    sc = structure_constants(w, 2)
    # τ_1(1) ∪ T = τ_0(pt)，τ_1(pt) ∪ T = 0
    key = make_key(1, [PT, tau(ONE, 1), PT])
    assert divisor_reduce(key, w, sc) == {
        make_key(1, [tau(ONE, 1), PT]): 1,
        make_key(1, [PT, PT]): 1,
    }


def test_seed_values(p1_table, p46):
    assert p1_table.get(make_key(1, [PT, PT, PT])) == 1
    assert p1_table.provenance(make_key(1, [PT, PT, PT])) is Provenance.SEEDED
    w, sc, pairing, table = p46
    x = monomial_sector(w, X)
    y = monomial_sector(w, Y)
    # ⟨x, y, T⟩_1 · a = 1
    assert table.get(make_key(1, [x, y, PT])) * w.a == 1
    for i, j in itertools.product(range(sc.rank), repeat=2):
        ci = monomial_sector(w, sc.basis[i])
        cj = monomial_sector(w, sc.basis[j])
        assert table.get(make_key(0, [ONE, ci, cj])) == pairing.value(i, j)


def test_p1_reconstruction(p1_table):
    assert p1_table.get(make_key(1, [PT, PT])) == 1
    assert p1_table.provenance(make_key(1, [PT, PT])) is Provenance.RECURSION
    assert p1_table.get(make_key(2, [PT, PT])) == 0
    assert p1_table.evaluate(make_key(1, [PT, PT, PT, PT])) == 1
    assert p1_table.evaluate(make_key(2, [PT, PT, PT, PT])) == 0
    assert p1_table.evaluate(make_key(1, [tau(ONE, 1), PT, PT, PT])) == 1
    sc = structure_constants(Weights(1, 1), 3)
    seed = seed_from_ring(sc, pairing_matrix(sc))
    for key in seed.keys():
        assert p1_table.get(key) == seed.get(key)


def test_string_then_dilaton_matches_dilaton_then_string(p1_table):
    key = make_key(1, [ONE, tau(ONE, 1), tau(PT, 1), PT])
    by_string = sum(coeff * p1_table.evaluate(term) for term, coeff in string_reduce(key).items())
    factor, rest = dilaton_reduce(key)
    by_dilaton = factor * p1_table.evaluate(rest)
    assert by_string == by_dilaton == 1


def test_evaluate_reports_missing(p46):
    w, _, _, table = p46
    x = monomial_sector(w, X)
    key = make_key(1, [x, x, x, x])
    with pytest.raises(MissingCorrelatorError) as excinfo:
        table.evaluate(key)
    assert key in excinfo.value.missing
    with pytest.raises(UnstableKeyError):
        table.evaluate(make_key(0, [x, x]))


def test_user_entries_fill_gaps(p46):
    w, _, _, table = p46
    x = monomial_sector(w, X)
    key = make_key(1, [x, x, x, x])
    extended = table.with_entry(key, Fraction(3, 7))
    assert extended.evaluate(key) == Fraction(3, 7)
    assert extended.provenance(key) is Provenance.USER
    assert key not in table
    assert len(extended) == len(table) + 1


@pytest.mark.parametrize("beta", range(4))
def test_wdvv_vanishes_on_p1_table(p1_table, beta):
    pairing = pairing_matrix(p1_table.structure)
    results = wdvv_scan(p1_table, pairing, beta)
    assert len(results) == 16
    assert all(result.residual == 0 for result in results)
    assert wdvv_residual(p1_table, [PT, PT, PT, PT], [], beta, pairing) == 0


def test_wdvv_with_extra_insertion(p1_table):
    pairing = pairing_matrix(p1_table.structure)
    assert wdvv_residual(p1_table, [PT, PT, PT, PT], [PT], 2, pairing) == 0
    results = wdvv_scan(p1_table, pairing, 1, extras=[ONE], workers=2)
    assert all(result.residual == 0 for result in results)


def test_wdvv_detects_corruption(p1_table):
    pairing = pairing_matrix(p1_table.structure)
    key = make_key(0, [ONE, PT, PT])
    corrupted = p1_table.with_entry(key, p1_table.get(key) + 1)
    assert wdvv_residual(corrupted, [ONE, ONE, PT, PT], [], 0, pairing) == -1


def test_wdvv_on_p46_seed(p46):
    w, sc, pairing, table = p46
    classes = [ONE, PT, monomial_sector(w, X), monomial_sector(w, Y)]
    for beta in (0, 1):
        assert all(r.residual == 0 for r in wdvv_scan(table, pairing, beta, classes=classes))


def test_wdvv_lists_missing_entries(p46):
    w, _, pairing, table = p46
    x = monomial_sector(w, X)
    with pytest.raises(MissingCorrelatorError) as excinfo:
        wdvv_residual(table, [x, x, x, x], [x], 1, pairing)
    assert excinfo.value.missing
    result = wdvv_scan(table, pairing, 1, extras=[x], classes=[x])[0]
    assert result.residual is None
    assert result.to_json()["missing"]


def test_wdvv_result_passed():
    four = (PT, PT, PT, PT)
    assert WdvvResult(four, (), 0, Fraction(0)).passed
    assert not WdvvResult(four, (), 0, Fraction(1)).passed
    assert not WdvvResult(four, (), 0, None, (make_key(1, [PT, PT]),)).passed
    assert WdvvResult(four, (), 0, None).to_json()["passed"] is False


def test_wdvv_check_passes_on_p1_table(p1_table):
    pairing = pairing_matrix(p1_table.structure)
    assert wdvv_check(p1_table, pairing, 3) == []


def test_wdvv_check_reports_corruption(p1_table):
    pairing = pairing_matrix(p1_table.structure)
    key = make_key(0, [ONE, PT, PT])
    corrupted = p1_table.with_entry(key, p1_table.get(key) + 1)
    failures = wdvv_check(corrupted, pairing, 1)
    assert any(result.residual == -1 for result in failures)
    assert all(not result.passed for result in failures)


def test_wdvv_check_counts_missing_entries_as_failures(p46):
    w, _, pairing, table = p46
    x = monomial_sector(w, X)
    failures = wdvv_check(table, pairing, 1, extras=[x], classes=[x])
    assert failures
    assert any(result.residual is None and result.missing for result in failures)
    assert all(result.to_json()["passed"] is False for result in failures)


def test_concurrent_evaluate_matches_serial(p1_table):
    shapes = [
        [tau(ONE, 1), PT, PT, PT],
        [tau(ONE, 1), tau(ONE, 1), PT, PT, PT],
        [ONE, tau(ONE, 1), tau(PT, 1), PT],
    ]
    keys = [make_key(beta, shape) for beta in range(1, 4) for shape in shapes]
    serial = p1_table.with_entries({})
    expected = [serial.evaluate(key) for key in keys]
    shared = p1_table.with_entries({})
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(shared.evaluate, keys * 8))
    assert results == expected * 8


def test_parallel_wdvv_scan_matches_serial(p1_table):
    pairing = pairing_matrix(p1_table.structure)
    serial = wdvv_scan(p1_table.with_entries({}), pairing, 2, extras=[PT])
    parallel = wdvv_scan(p1_table.with_entries({}), pairing, 2, extras=[PT], workers=4)
    assert [r.to_json() for r in parallel] == [r.to_json() for r in serial]


def test_table_dump_and_load(p46):
    w, sc, _, table = p46
    buffer = io.StringIO()
    table.dump(buffer)
    lines = buffer.getvalue().splitlines()
    assert len(lines) == len(table)
    loaded = CorrelatorTable.load(w, lines, sc)
    assert loaded.keys() == table.keys()
    assert all(loaded.get(key) == table.get(key) for key in table.keys())
    assert all(loaded.provenance(key) is Provenance.SEEDED for key in loaded.keys())
    with pytest.raises(ParseError):
        CorrelatorTable.load(w, ['{"beta": 1}'])


def test_parse_classes():
    w = Weights(4, 6)
    assert parse_class(w, "1") == ONE
    assert parse_class(w, "pt") == PT
    assert parse_class(w, "x").sector == point_0(1)
    assert str(parse_class(w, "OneDim{1}.pt")) == "OneDim{1}.pt"
    assert parse_class(w, "PointInf{4}").degree == Fraction(2, 3)
    assert parse_insertion(w, "tau2(y)") == Insertion(parse_class(w, "y"), 2)
    key = parse_key(w, 1, "tau1(1), pt, x")
    assert key.n == 3
    for bad in ("z", "Point0{2}", "Point0{1}.pt"):
        with pytest.raises((ParseError, InvalidSectorError)):
            parse_class(w, bad)
