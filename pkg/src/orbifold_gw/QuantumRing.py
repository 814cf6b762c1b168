# -*- coding: utf-8 -*-
"""ℙ(a,b) 的经典 / 小量子 stringy Chow 环：表示、重写系统、结构常数、配对与校验报告。

环表示为 ℚ⟦q⟧[ζ, x, y] / (xy - q, A·x^A - B·y^B·ζ^{n-m}, ζ^d - 1)，
分次 deg ζ = 0, deg x = 1/A, deg y = 1/B, deg q = 1/A + 1/B。
"""
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import sympy

from orbifold_gw.InertiaSystem import (
    BasisClass,
    ClassKind,
    Sector,
    Weights,
    involution_sector,
    one_dim,
    point_0,
    point_inf,
    stringy_basis,
)
from orbifold_gw.PolynomialAlgebra import (
    DEFAULT_Q_TRUNCATION,
    ONE,
    Q,
    X,
    Y,
    Grading,
    Monomial,
    MonomialOrder,
    Polynomial,
    RewriteRule,
    RewriteSystem,
    Series,
    confluence_smoke_check,
    enumerate_normal_monomials,
    is_homogeneous,
    normal_form,
    rational_to_text,
    series_add,
    series_mul,
    zero_series,
)
from orbifold_gw.TwistedCurveSystem import h0_genus0, solve_map_picard
from orbifold_gw.errors import (
    ConfigError,
    ConfluenceError,
    DegeneratePairingError,
    NonNormalMonomialError,
    RingVerificationError,
)
from orbifold_gw.orbifold_error_log import PersistentErrorCallback, log_message

ElementLike = Union[Polynomial, Monomial, str, int, Fraction]


def ring_grading(w: Weights) -> Grading:
    return Grading(Fraction(0), Fraction(1, w.A), Fraction(1, w.B), Fraction(1, w.A) + Fraction(1, w.B))


def zeta_shift(w: Weights, include_zeta_factor: bool = True) -> int:
    """R2 中 ζ 的指数 (n - m) mod d；不带该因子时为 0。"""
    return (w.n - w.m) % w.d if include_zeta_factor else 0


def _zeta(power: int) -> Monomial:
    return Monomial(e_zeta=power)


@dataclass(frozen=True)
class RingPresentation:
    weights: Weights
    relations: Tuple[Polynomial, ...]
    grading: Grading
    quantum: bool
    include_zeta_factor: bool = True
    variables: Tuple[str, ...] = ("zeta", "x", "y", "q")

    def to_json(self) -> Dict[str, Any]:
        return {
            "weights": [self.weights.a, self.weights.b],
            "bezout": {"m": self.weights.m, "n": self.weights.n},
            "quantum": self.quantum,
            "relations": [r.to_text() for r in self.relations],
            "grading": self.grading.to_json(),
        }


def quantum_presentation(w: Weights, include_zeta_factor: bool = True) -> RingPresentation:
    """{xy - q, A·x^A - B·y^B·ζ^{(n-m) mod d}, ζ^d - 1}。"""
    s = zeta_shift(w, include_zeta_factor)
    relations = (
        Polynomial({X * Y: 1, Q: -1}),
        Polynomial({Monomial(e_x=w.A): w.A, Monomial(e_zeta=s, e_y=w.B): -w.B}),
        Polynomial({_zeta(w.d): 1, ONE: -1}),
    )
    return RingPresentation(w, relations, ring_grading(w), True, include_zeta_factor)


def classical_presentation(w: Weights, include_zeta_factor: bool = True) -> RingPresentation:
    """q = 0 的特化。"""
    quantum = quantum_presentation(w, include_zeta_factor)
    relations = tuple(r.q_zero() for r in quantum.relations)
    return RingPresentation(w, relations, quantum.grading, False, include_zeta_factor)


def rewrite_system(
    w: Weights,
    q_truncation: int = DEFAULT_Q_TRUNCATION,
    include_zeta_factor: bool = True,
    quantum: bool = True,
) -> RewriteSystem:
    """补全后的四条规则：

    ζ^d -> 1，xy -> q，y^B -> (A/B)·x^A·ζ^{(m-n) mod d}，x^{A+1} -> (B/A)·q·y^{B-1}·ζ^{(n-m) mod d}。
    经典情形两条带 q 的规则右边为 0。
    """
    s = zeta_shift(w, include_zeta_factor)
    grading = ring_grading(w)
    rules = [
        RewriteRule(_zeta(w.d), Polynomial.constant(1)),
        RewriteRule(X * Y, Polynomial.monomial(Q) if quantum else Polynomial.zero()),
        RewriteRule(
            Monomial(e_y=w.B),
            Polynomial.monomial(Monomial(e_zeta=(-s) % w.d, e_x=w.A), Fraction(w.A, w.B)),
        ),
        RewriteRule(
            Monomial(e_x=w.A + 1),
            Polynomial.monomial(Monomial(e_zeta=s, e_y=w.B - 1, e_q=1), Fraction(w.B, w.A))
            if quantum
            else Polynomial.zero(),
        ),
    ]
    return RewriteSystem(rules, q_truncation, MonomialOrder(grading))


def uncompleted_rewrite_system(
    w: Weights, q_truncation: int = DEFAULT_Q_TRUNCATION, include_zeta_factor: bool = True
) -> RewriteSystem:
    """只把三条关系定向（x^A -> (B/A)·y^B·ζ^s），不做补全；x^A·y 的重叠不汇合。"""
    s = zeta_shift(w, include_zeta_factor)
    rules = [
        RewriteRule(_zeta(w.d), Polynomial.constant(1)),
        RewriteRule(X * Y, Polynomial.monomial(Q)),
        RewriteRule(
            Monomial(e_x=w.A),
            Polynomial.monomial(Monomial(e_zeta=s, e_y=w.B), Fraction(w.B, w.A)),
        ),
    ]
    return RewriteSystem(rules, q_truncation, MonomialOrder(ring_grading(w), ("x", "y", "zeta")))


def point_monomial(w: Weights) -> Monomial:
    """未扭扇区 OneDim{0} 上次数为 1 的正规单项式 T = ζ^{(-n) mod d}·x^A。"""
    return Monomial(e_zeta=(-w.n) % w.d, e_x=w.A)


def integration_weight(w: Weights) -> Fraction:
    """∫ T = 1/a。"""
    return Fraction(1, w.a)


def hyperplane_class(w: Weights) -> Polynomial:
    """粗空间超平面类 h = A·T：∫ h = 1/d，∫_β h = k（β = k·d·[ℙ(a,b)]）。"""
    return Polynomial.monomial(point_monomial(w), w.A)


class QuantumRing:
    """一个 ℙ(a,b) 环实例：表示 + 重写系统 + 任意元素的乘法。"""

    def __init__(
        self,
        weights: Weights,
        q_truncation: int = DEFAULT_Q_TRUNCATION,
        include_zeta_factor: bool = True,
        quantum: bool = True,
        logger=None,
    ):
        self.weights = weights
        self.q_truncation = q_truncation
        self.include_zeta_factor = include_zeta_factor
        self.quantum = quantum
        self.logger = logger
        if quantum:
            self.presentation = quantum_presentation(weights, include_zeta_factor)
        else:
            self.presentation = classical_presentation(weights, include_zeta_factor)
        self.rewrite = rewrite_system(weights, q_truncation, include_zeta_factor, quantum)
        self._basis: Optional[List[Monomial]] = None
        self._persistent_error_cb: Optional[PersistentErrorCallback] = None

    def set_logger(self, logger):
        self.logger = logger

    def set_persistent_error_callback(self, callback: Optional[PersistentErrorCallback]) -> None:
        self._persistent_error_cb = callback

    def _emit_persistent_error(self, error_code: str, detail: str, exc: Optional[BaseException] = None) -> None:
        if self._persistent_error_cb:
            try:
                self._persistent_error_cb(error_code, detail, exc)
            except Exception:
                pass

    def _log(self, level: str, message: str):
        log_message(self.logger, level, message)

    def classical(self) -> "QuantumRing":
        return QuantumRing(self.weights, self.q_truncation, self.include_zeta_factor, False, self.logger)

    def element(self, value: ElementLike) -> Polynomial:
        """转成环元素：ζ 指数先取 mod d，再化为范式。"""
        if isinstance(value, str):
            value = Polynomial.parse(value)
        elif isinstance(value, Monomial):
            value = Polynomial.monomial(value)
        elif isinstance(value, (int, Fraction)):
            value = Polynomial.constant(value)
        d = self.weights.d
        reduced = value.map_monomials(
            lambda m: (Monomial(m.e_zeta % d, m.e_x, m.e_y, m.e_q), Fraction(1))
        )
        return normal_form(reduced, self.rewrite)

    def multiply(self, left: ElementLike, right: ElementLike) -> Polynomial:
        return normal_form(self.element(left) * self.element(right), self.rewrite)

    def basis(self) -> List[Monomial]:
        if self._basis is None:
            self._basis = enumerate_normal_monomials(self.rewrite, self.weights.d)
        return list(self._basis)

    def confluent(self, samples: int = 20, seed: int = 0) -> bool:
        return confluence_smoke_check(self.rewrite, samples, seed)

    def structure_constants(self, workers: int = 1, seed: int = 0, samples: int = 20) -> "StructureConstants":
        if not self.confluent(samples, seed):
            error = ConfluenceError(f"rewrite system for {self.weights.label()} is not confluent")
            self._log("error", f"confluence guard failed for {self.rewrite!r}")
            self._emit_persistent_error(error.error_code, error.detail, error)
            raise error
        basis = self.basis()
        index = {mono: i for i, mono in enumerate(basis)}
        pairs = list(itertools.product(range(len(basis)), repeat=2))

        def product(pair: Tuple[int, int]) -> Dict[int, Series]:
            i, j = pair
            return _decompose(self.multiply(basis[i], basis[j]), index, self.q_truncation)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                products = list(pool.map(product, pairs))
        else:
            products = [product(pair) for pair in pairs]
        rank = len(basis)
        table = tuple(
            tuple(products[i * rank + j] for j in range(rank)) for i in range(rank)
        )
        self._log(
            "debug",
            f"structure constants for {self.weights.label()}: rank {rank}, N={self.q_truncation}, workers={workers}",
        )
        return StructureConstants(
            weights=self.weights,
            basis=tuple(basis),
            products=table,
            q_truncation=self.q_truncation,
            include_zeta_factor=self.include_zeta_factor,
            quantum=self.quantum,
        )


def _decompose(p: Polynomial, index: Mapping[Monomial, int], q_truncation: int) -> Dict[int, Series]:
    out: Dict[int, List[Fraction]] = {}
    for mono, coeff in p.items():
        base = mono.without_q()
        if base not in index:
            raise NonNormalMonomialError(f"{base.to_text()} is not a basis monomial")
        series = out.setdefault(index[base], [Fraction(0)] * (q_truncation + 1))
        series[mono.e_q] += coeff
    return {k: tuple(series) for k, series in sorted(out.items())}


@dataclass(frozen=True)
class StructureConstants:
    """products[i][j] 是 α_i ⋆ α_j 的稀疏展开 {k: c[i][j][k]}，c 为 q 的截断级数。"""

    weights: Weights
    basis: Tuple[Monomial, ...]
    products: Tuple[Tuple[Mapping[int, Series], ...], ...]
    q_truncation: int
    include_zeta_factor: bool = True
    quantum: bool = True

    @property
    def rank(self) -> int:
        return len(self.basis)

    def index(self, mono: Monomial) -> int:
        try:
            return self.basis.index(mono)
        except ValueError:
            raise NonNormalMonomialError(f"{mono.to_text()} is not a basis monomial")

    def c(self, i: int, j: int, k: int) -> Series:
        return self.products[i][j].get(k, zero_series(self.q_truncation))

    @property
    def table(self) -> List[List[List[Series]]]:
        """稠密形式 c[i][j][k]。"""
        r = range(self.rank)
        return [[[self.c(i, j, k) for k in r] for j in r] for i in r]

    def multiply_vectors(self, u: Mapping[int, Series], v: Mapping[int, Series]) -> Dict[int, Series]:
        """系数为 q 级数的基向量相乘。"""
        N = self.q_truncation
        out: Dict[int, Series] = {}
        for i, ui in u.items():
            for j, vj in v.items():
                coefficient = series_mul(ui, vj, N)
                if not any(coefficient):
                    continue
                for k, ck in self.products[i][j].items():
                    term = series_mul(coefficient, ck, N)
                    out[k] = series_add(out.get(k, zero_series(N)), term)
        return {k: s for k, s in sorted(out.items()) if any(s)}

    def unit_vector(self, i: int) -> Dict[int, Series]:
        return {i: (Fraction(1),) + zero_series(self.q_truncation)[1:]}

    def sparse_entries(self) -> List[Dict[str, Any]]:
        entries = []
        for i in range(self.rank):
            for j in range(self.rank):
                for k, series in self.products[i][j].items():
                    entries.append(
                        {
                            "i": i,
                            "j": j,
                            "k": k,
                            "series": [
                                {"qpow": power, "coeff": rational_to_text(coeff)}
                                for power, coeff in enumerate(series)
                                if coeff
                            ],
                        }
                    )
        return entries

    def to_json(self) -> Dict[str, Any]:
        return {
            "weights": [self.weights.a, self.weights.b],
            "truncation": self.q_truncation,
            "basis": [mono.to_text() for mono in self.basis],
            "constants": self.sparse_entries(),
        }


def structure_constants(
    w: Weights,
    N: int = DEFAULT_Q_TRUNCATION,
    include_zeta_factor: bool = True,
    workers: int = 1,
    seed: int = 0,
    samples: int = 20,
    logger=None,
) -> StructureConstants:
    if N < 1:
        raise ConfigError(f"q truncation must be >= 1, got {N}")
    ring = QuantumRing(w, N, include_zeta_factor, logger=logger)
    return ring.structure_constants(workers=workers, seed=seed, samples=samples)


def _x_label(w: Weights, mono: Monomial) -> int:
    return (mono.e_x * w.n + mono.e_zeta * w.A) % w.a


def _y_label(w: Weights, mono: Monomial) -> int:
    return (mono.e_y * w.m + mono.e_zeta * w.B) % w.b


def _sector_from_x_label(w: Weights, label: int) -> Sector:
    return one_dim(label // w.A) if label % w.A == 0 else point_0(label)


def _sector_from_y_label(w: Weights, label: int) -> Sector:
    return one_dim(label // w.B) if label % w.B == 0 else point_inf(label)


def formal_sector(w: Weights, mono: Monomial) -> Optional[Sector]:
    """纯 x 或纯 y 单项式（不含 q）的扇区；x、y 同时出现时经典积为 0，返回 None。"""
    if mono.e_x and mono.e_y:
        return None
    if mono.e_y:
        return _sector_from_y_label(w, _y_label(w, mono))
    return _sector_from_x_label(w, _x_label(w, mono))


def monomial_sector(w: Weights, mono: Monomial) -> BasisClass:
    """正规单项式 -> stringy 基元素。"""
    if (
        mono.e_q
        or mono.e_zeta >= w.d
        or (mono.e_x and mono.e_y)
        or mono.e_x > w.A
        or mono.e_y >= w.B
    ):
        raise NonNormalMonomialError(f"{mono.to_text()} is not a normal monomial of {w.label()}")
    if mono.e_x == w.A:
        return BasisClass(one_dim((w.n + mono.e_zeta) % w.d), ClassKind.POINT, Fraction(1))
    sector = formal_sector(w, mono)
    return BasisClass(sector, ClassKind.FUNDAMENTAL, ring_grading(w).degree(mono))


@dataclass(frozen=True)
class PairingMatrix:
    """g̃[i][j] = I(α_i ⋆₀ α_j)，I 取 T 的系数乘以 1/a。"""

    weights: Weights
    basis: Tuple[Monomial, ...]
    matrix: Tuple[Tuple[Fraction, ...], ...]

    def value(self, i: int, j: int) -> Fraction:
        return self.matrix[i][j]

    def to_sympy(self) -> sympy.Matrix:
        return sympy.Matrix(
            [[sympy.Rational(v.numerator, v.denominator) for v in row] for row in self.matrix]
        )

    def determinant(self) -> Fraction:
        return _to_fraction(self.to_sympy().det())

    def inverse(self) -> Tuple[Tuple[Fraction, ...], ...]:
        """g̃^{ij}。"""
        inverse = self.to_sympy().inv()
        rank = len(self.basis)
        return tuple(tuple(_to_fraction(inverse[i, j]) for j in range(rank)) for i in range(rank))

    def is_symmetric(self) -> bool:
        rank = len(self.basis)
        return all(self.matrix[i][j] == self.matrix[j][i] for i in range(rank) for j in range(rank))

    def to_json(self) -> Dict[str, Any]:
        return {
            "basis": [mono.to_text() for mono in self.basis],
            "matrix": [[rational_to_text(v) for v in row] for row in self.matrix],
        }


def _to_fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def pairing_matrix(sc: StructureConstants) -> PairingMatrix:
    w = sc.weights
    t_index = sc.index(point_monomial(w))
    scale = integration_weight(w)
    matrix = tuple(
        tuple(sc.c(i, j, t_index)[0] * scale for j in range(sc.rank)) for i in range(sc.rank)
    )
    pairing = PairingMatrix(w, sc.basis, matrix)
    if pairing.to_sympy().det() == 0:
        raise DegeneratePairingError(f"pairing of {w.label()} is degenerate")
    return pairing


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    failures: List[str] = field(default_factory=list)

    def fail(self, message: str, limit: int = 20):
        self.passed = False
        if len(self.failures) < limit:
            self.failures.append(message)

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "failures": list(self.failures)}


@dataclass
class RingReport:
    weights: Weights
    q_truncation: int
    include_zeta_factor: bool
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> CheckResult:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def raise_on_failure(self):
        if not self.passed:
            raise RingVerificationError(
                f"{self.weights.label()} failed: {', '.join(self.failed_checks())}", report=self
            )

    def to_json(self) -> Dict[str, Any]:
        return {
            "weights": [self.weights.a, self.weights.b],
            "truncation": self.q_truncation,
            "zeta_factor": self.include_zeta_factor,
            "passed": self.passed,
            "checks": [check.to_json() for check in self.checks],
        }


def _series_text(series: Series) -> str:
    return "(" + ", ".join(rational_to_text(c) for c in series) + ")"


def _check_associativity(sc: StructureConstants) -> CheckResult:
    result = CheckResult("associativity")
    rank = sc.rank
    for i, j, k in itertools.product(range(rank), repeat=3):
        left = sc.multiply_vectors(dict(sc.products[i][j]), sc.unit_vector(k))
        right = sc.multiply_vectors(sc.unit_vector(i), dict(sc.products[j][k]))
        if left != right:
            result.fail(f"({sc.basis[i]} * {sc.basis[j]}) * {sc.basis[k]} != {sc.basis[i]} * ({sc.basis[j]} * {sc.basis[k]})")
    return result


def _check_commutativity(sc: StructureConstants) -> CheckResult:
    result = CheckResult("commutativity")
    for i, j in itertools.combinations(range(sc.rank), 2):
        if dict(sc.products[i][j]) != dict(sc.products[j][i]):
            result.fail(f"{sc.basis[i]} * {sc.basis[j]} != {sc.basis[j]} * {sc.basis[i]}")
    return result


def _check_identity(sc: StructureConstants) -> CheckResult:
    result = CheckResult("identity")
    try:
        one = sc.index(ONE)
    except NonNormalMonomialError:
        result.fail("1 is not a basis monomial")
        return result
    for j in range(sc.rank):
        if dict(sc.products[one][j]) != sc.unit_vector(j):
            result.fail(f"1 * {sc.basis[j]} != {sc.basis[j]}")
    return result


def _check_rank(sc: StructureConstants) -> CheckResult:
    w = sc.weights
    result = CheckResult("rank")
    if sc.rank != w.a + w.b:
        result.fail(f"rank {sc.rank} != a + b = {w.a + w.b}")
    classes = []
    for mono in sc.basis:
        try:
            classes.append(monomial_sector(w, mono))
        except NonNormalMonomialError as e:
            result.fail(str(e))
    expected = {(c.sector, c.kind): c.degree for c in stringy_basis(w)}
    actual = {(c.sector, c.kind): c.degree for c in classes}
    if len(actual) != len(classes) or actual != expected:
        result.fail("monomial_sector is not a degree-preserving bijection onto the stringy basis")
    return result


def _check_grading(sc: StructureConstants, presentation: RingPresentation) -> CheckResult:
    result = CheckResult("grading")
    grading = presentation.grading
    for relation in presentation.relations:
        if is_homogeneous(relation, grading) is None:
            result.fail(f"relation {relation} is not homogeneous")
    degrees = [grading.degree(mono) for mono in sc.basis]
    for i, j in itertools.product(range(sc.rank), repeat=2):
        for k, series in sc.products[i][j].items():
            for power, coeff in enumerate(series):
                if coeff and degrees[k] + power * grading.deg_q != degrees[i] + degrees[j]:
                    result.fail(f"{sc.basis[i]} * {sc.basis[j]} has q^{power} {sc.basis[k]} of wrong degree")
    return result


def _check_pairing(sc: StructureConstants, pairing: PairingMatrix) -> CheckResult:
    """对称、非退化、ι 分块，以及 Frobenius：g̃(α_i⋆α_j, α_k) 完全对称。"""
    w = sc.weights
    result = CheckResult("frobenius")
    if not pairing.is_symmetric():
        result.fail("pairing is not symmetric")
    if pairing.determinant() == 0:
        result.fail("pairing is degenerate")
    classes = [monomial_sector(w, mono) for mono in sc.basis]
    for i, j in itertools.product(range(sc.rank), repeat=2):
        if pairing.value(i, j) == 0:
            continue
        dual = involution_sector(w, classes[i].sector)
        if classes[j].sector != dual or classes[i].degree + classes[j].degree != 1:
            result.fail(f"g({sc.basis[i]}, {sc.basis[j]}) != 0 outside the involution block")

    def frobenius(i: int, j: int, k: int) -> Series:
        total = zero_series(sc.q_truncation)
        for l, series in sc.products[i][j].items():
            scalar = pairing.value(l, k)
            if scalar:
                total = series_add(total, tuple(c * scalar for c in series))
        return total

    for i, j, k in itertools.combinations_with_replacement(range(sc.rank), 3):
        values = {frobenius(*perm) for perm in set(itertools.permutations((i, j, k)))}
        if len(values) > 1:
            result.fail(
                f"g({sc.basis[i]} * {sc.basis[j]}, {sc.basis[k]}) not symmetric: "
                + " vs ".join(_series_text(v) for v in sorted(values))
            )
    return result


def _check_classical_limit(sc: StructureConstants, classical: StructureConstants, presentation: RingPresentation) -> CheckResult:
    result = CheckResult("classical_limit")
    expected = classical_presentation(sc.weights, sc.include_zeta_factor).relations
    if tuple(r.q_zero() for r in presentation.relations) != expected:
        result.fail("q = 0 specialization of the relations differs from the classical presentation")
    if classical.basis != sc.basis:
        result.fail("classical and quantum bases differ")
        return result
    for i, j in itertools.product(range(sc.rank), repeat=2):
        quantum_part = {k: s[0] for k, s in sc.products[i][j].items() if s[0]}
        classical_part = {k: s[0] for k, s in classical.products[i][j].items() if s[0]}
        if quantum_part != classical_part:
            result.fail(f"{sc.basis[i]} * {sc.basis[j]} at q = 0 differs from the classical product")
    return result


def sector_consistency(w: Weights, include_zeta_factor: bool = True) -> List[str]:
    """每条关系中不含 q 的项落在同一扇区；纯 x、纯 y 乘积的扇区标签可加。返回不一致的描述。"""
    failures: List[str] = []
    presentation = quantum_presentation(w, include_zeta_factor)
    for relation in presentation.relations:
        found = {formal_sector(w, mono) for mono in relation if not mono.e_q}
        found.discard(None)
        if len(found) > 1:
            failures.append(
                f"relation {relation} mixes sectors " + ", ".join(sorted(str(s) for s in found))
            )
    classical = QuantumRing(w, 1, include_zeta_factor, quantum=False)
    basis = classical.basis()
    pure_x = [mono for mono in basis if not mono.e_y]
    pure_y = [mono for mono in basis if not mono.e_x]
    for side, monomials, label, to_sector, modulus in (
        ("x", pure_x, _x_label, _sector_from_x_label, w.a),
        ("y", pure_y, _y_label, _sector_from_y_label, w.b),
    ):
        for u, v in itertools.combinations_with_replacement(monomials, 2):
            expected = to_sector(w, (label(w, u) + label(w, v)) % modulus)
            for mono in classical.multiply(u, v):
                actual = formal_sector(w, mono)
                if actual is not None and actual != expected:
                    failures.append(f"{side}-side product {u} * {v} lands on {actual}, expected {expected}")
    return failures


def _check_sector_consistency(w: Weights, include_zeta_factor: bool) -> CheckResult:
    result = CheckResult("sector_consistency")
    for message in sector_consistency(w, include_zeta_factor):
        result.fail(message)
    return result


def verify_ring(
    w: Weights,
    N: int = DEFAULT_Q_TRUNCATION,
    include_zeta_factor: bool = True,
    workers: int = 1,
    seed: int = 0,
    samples: int = 20,
    logger=None,
) -> RingReport:
    """结合律、交换律、单位元、秩、分次、Frobenius、经典极限、扇区一致性。"""
    report = RingReport(w, N, include_zeta_factor)
    ring = QuantumRing(w, N, include_zeta_factor, logger=logger)
    confluence = CheckResult("confluence")
    if not ring.confluent(samples, seed):
        confluence.fail(f"confluence guard failed for {ring.rewrite!r}")
        report.checks.append(confluence)
        log_message(logger, "error", f"{w.label()}: confluence guard failed")
        return report
    report.checks.append(confluence)
    sc = ring.structure_constants(workers=workers, seed=seed, samples=samples)
    classical = ring.classical().structure_constants(workers=workers, seed=seed, samples=samples)
    report.checks.append(_check_associativity(sc))
    report.checks.append(_check_commutativity(sc))
    report.checks.append(_check_identity(sc))
    report.checks.append(_check_rank(sc))
    report.checks.append(_check_grading(sc, ring.presentation))
    try:
        pairing = pairing_matrix(sc)
    except DegeneratePairingError as e:
        failed = CheckResult("frobenius")
        failed.fail(str(e))
        report.checks.append(failed)
    else:
        report.checks.append(_check_pairing(sc, pairing))
    report.checks.append(_check_classical_limit(sc, classical, ring.presentation))
    report.checks.append(_check_sector_consistency(w, include_zeta_factor))
    if report.passed:
        log_message(logger, "info", f"{w.label()} ring verified (N={N})")
    else:
        log_message(logger, "warning", f"{w.label()} ring checks failed: {', '.join(report.failed_checks())}")
    return report


def xy_q_coefficients(w: Weights, N: int = DEFAULT_Q_TRUNCATION) -> List[Fraction]:
    """x ⋆ y 中 q·ζ^i 的系数 (c_0, …, c_{d-1})。"""
    product = QuantumRing(w, N).multiply(X, Y)
    return [product.coefficient(Monomial(e_zeta=i, e_q=1)) for i in range(w.d)]


def _divisors(value: int) -> List[int]:
    return [D for D in range(1, value + 1) if value % D == 0]


def three_point_xy(w: Weights, logger=None) -> List[Fraction]:
    """由映射的 Picard 数据计数 ⟨x, y, ·⟩ 的 q 系数。

    c_0 = 1 当且仅当次数 d/(ab) 的解唯一且 L^a、L^b 都恰有一个截面；
    i ≠ 0 时 c_i = 0 当且仅当每个 D | d (D > 1) 的三点 football 上都无解。
    d = a 或 d = b 时改用表示直接计算。
    """
    if w.degenerate:
        log_message(logger, "info", f"{w.label()}: degenerate weights, reading x*y from the presentation")
        return xy_q_coefficients(w)
    coefficients = [Fraction(0)] * w.d
    solutions = solve_map_picard(w, 1, 1)
    if len(solutions) == 1:
        bundle = solutions[0]
        if h0_genus0(bundle.power(w.a), w.a, w.b) == 1 and h0_genus0(bundle.power(w.b), w.a, w.b) == 1:
            coefficients[0] = Fraction(1)
    twisted = [D for D in _divisors(w.d) if D > 1 and solve_map_picard(w, 1, D)]
    if twisted:
        log_message(
            logger,
            "warning",
            f"{w.label()}: maps through twisted third markings exist for D={twisted}; using presentation values",
        )
        presentation = xy_q_coefficients(w)
        coefficients[1:] = presentation[1:]
    return coefficients


@dataclass(frozen=True)
class BezoutComparison:
    weights: Weights
    alternate: Weights
    zeta_shift: Optional[int]

    @property
    def isomorphic(self) -> bool:
        return self.zeta_shift is not None

    def to_json(self) -> Dict[str, Any]:
        return {
            "weights": [self.weights.a, self.weights.b],
            "pairs": [[self.weights.m, self.weights.n], [self.alternate.m, self.alternate.n]],
            "isomorphic": self.isomorphic,
            "zeta_shift": self.zeta_shift,
        }


def _relabel(mono: Monomial, u: int, d: int) -> Monomial:
    """x -> ζ^u x，y -> ζ^{-u} y。"""
    shift = u * mono.e_x - u * mono.e_y
    return Monomial((mono.e_zeta + shift) % d, mono.e_x, mono.e_y, mono.e_q)


def verify_bezout_independence(
    w: Weights,
    alternate: Optional[Weights] = None,
    N: int = DEFAULT_Q_TRUNCATION,
    seed: int = 0,
    samples: int = 20,
) -> BezoutComparison:
    """寻找 ζ 幂次重标号 x -> ζ^u x、y -> ζ^{-u} y，使两个 Bézout 选择下的结构常数表逐项相等。"""
    if alternate is None:
        alternate = w.with_bezout(w.n + w.A)
    first = structure_constants(w, N, seed=seed, samples=samples)
    second = structure_constants(alternate, N, seed=seed, samples=samples)
    if first.rank != second.rank:
        return BezoutComparison(w, alternate, None)
    target_index = {mono: k for k, mono in enumerate(second.basis)}
    for u in range(w.d):
        images = [_relabel(mono, u, w.d) for mono in first.basis]
        if any(image not in target_index for image in images):
            continue
        perm = [target_index[image] for image in images]
        if all(
            {perm[k]: s for k, s in first.products[i][j].items()} == dict(second.products[perm[i]][perm[j]])
            for i in range(first.rank)
            for j in range(first.rank)
        ):
            return BezoutComparison(w, alternate, u)
    return BezoutComparison(w, alternate, None)
