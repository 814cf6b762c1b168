# -*- coding: utf-8 -*-
"""亏格 0 关联函数表：种子、string / dilaton / divisor 递推、WDVV 残差、ℙ¹ 重建。"""
import itertools
import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import IO, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from orbifold_gw.InertiaSystem import (
    BasisClass,
    ClassKind,
    Sector,
    SectorType,
    Weights,
    age,
    one_dim,
    validate_sector,
)
from orbifold_gw.PolynomialAlgebra import X, Y, rational_from_text, rational_to_text
from orbifold_gw.QuantumRing import (
    PairingMatrix,
    StructureConstants,
    monomial_sector,
    pairing_matrix,
    point_monomial,
    structure_constants,
)
from orbifold_gw.errors import (
    DivisorClassError,
    InapplicableRuleError,
    InvalidSectorError,
    MissingCorrelatorError,
    ParseError,
    UnstableKeyError,
)
from orbifold_gw.orbifold_error_log import log_message

FormalSum = Dict["CorrelatorKey", Fraction]


def unit_class() -> BasisClass:
    return BasisClass(one_dim(0), ClassKind.FUNDAMENTAL, Fraction(0))


def point_class() -> BasisClass:
    """OneDim{0} 上的点类 T；粗超平面类 h = A·T。"""
    return BasisClass(one_dim(0), ClassKind.POINT, Fraction(1))


@dataclass(frozen=True)
class Insertion:
    cls: BasisClass
    tau: int = 0

    def __post_init__(self):
        if self.tau < 0:
            raise UnstableKeyError(f"negative descendant power {self.tau}")

    def sort_key(self) -> Tuple[int, ...]:
        return self.cls.sort_key() + (self.tau,)

    def lowered(self) -> "Insertion":
        return Insertion(self.cls, self.tau - 1)

    def to_json(self) -> Dict[str, Any]:
        data = self.cls.to_json()
        data["tau"] = self.tau
        return data

    def __str__(self) -> str:
        return f"tau{self.tau}({self.cls})" if self.tau else str(self.cls)


@dataclass(frozen=True)
class CorrelatorKey:
    """⟨τ_{k_1}(γ_1), …, τ_{k_n}(γ_n)⟩_{0,β}；insertions 按规范顺序存储。"""

    beta: int
    insertions: Tuple[Insertion, ...]
    genus: int = 0

    def __post_init__(self):
        if self.genus != 0:
            raise UnstableKeyError("only genus 0 correlators are supported")
        if self.beta < 0:
            raise UnstableKeyError(f"negative degree {self.beta}")
        object.__setattr__(self, "insertions", tuple(sorted(self.insertions, key=Insertion.sort_key)))

    @property
    def n(self) -> int:
        return len(self.insertions)

    def is_stable(self) -> bool:
        return self.beta > 0 or self.n >= 3

    def is_primary(self) -> bool:
        return all(ins.tau == 0 for ins in self.insertions)

    def without(self, insertion: Insertion) -> "CorrelatorKey":
        rest = list(self.insertions)
        rest.remove(insertion)
        return CorrelatorKey(self.beta, tuple(rest))

    def sort_key(self) -> Tuple:
        return (self.beta, self.n, tuple(ins.sort_key() for ins in self.insertions))

    def to_json(self) -> Dict[str, Any]:
        return {"beta": self.beta, "insertions": [ins.to_json() for ins in self.insertions]}

    def __str__(self) -> str:
        return "<" + ", ".join(str(ins) for ins in self.insertions) + f">_{self.beta}"


def make_key(beta: int, insertions: Iterable[Union[Insertion, BasisClass]]) -> CorrelatorKey:
    items = tuple(ins if isinstance(ins, Insertion) else Insertion(ins) for ins in insertions)
    return CorrelatorKey(beta, items)


def _require_stable(key: CorrelatorKey) -> CorrelatorKey:
    if not key.is_stable():
        raise UnstableKeyError(f"{key} lies in the unstable range (beta = 0, n < 3)")
    return key


def _add(target: FormalSum, key: CorrelatorKey, coeff: Fraction):
    target[key] = target.get(key, Fraction(0)) + coeff
    if target[key] == 0:
        del target[key]


def string_reduce(key: CorrelatorKey) -> FormalSum:
    """⟨τ₀(1), τ_{k_i}(γ_i)…⟩ = Σ_i ⟨…τ_{k_i-1}(γ_i)…⟩，τ_{-1} 项记为 0。"""
    unit = Insertion(unit_class(), 0)
    if unit not in key.insertions:
        raise InapplicableRuleError(f"{key} has no tau0(1) insertion")
    rest = _require_stable(key.without(unit))
    result: FormalSum = {}
    for position, ins in enumerate(rest.insertions):
        if ins.tau == 0:
            continue
        lowered = list(rest.insertions)
        lowered[position] = ins.lowered()
        _add(result, CorrelatorKey(rest.beta, tuple(lowered)), Fraction(1))
    return result


def dilaton_reduce(key: CorrelatorKey) -> Tuple[int, CorrelatorKey]:
    """⟨τ₁(1), …⟩ = (n - 2)·⟨…⟩，n 为剩余插入个数。"""
    dilaton = Insertion(unit_class(), 1)
    if dilaton not in key.insertions:
        raise InapplicableRuleError(f"{key} has no tau1(1) insertion")
    rest = _require_stable(key.without(dilaton))
    return rest.n - 2, rest


def divisor_reduce(
    key: CorrelatorKey,
    weights: Weights,
    sc: Optional[StructureConstants] = None,
    divisor: Optional[BasisClass] = None,
) -> FormalSum:
    """插入 τ₀(T)，T = h/A：

    ⟨T, …⟩_β = (β/A)·⟨…⟩_β + Σ_i ⟨…τ_{k_i-1}(γ_i ∪ T)…⟩_β，
    ∪ 取经典积（需要 sc；没有带 descendant 的插入时可以省略）。
    """
    divisor = point_class() if divisor is None else divisor
    if divisor != point_class():
        raise DivisorClassError(f"divisor equation holds for the coarse hyperplane only, not {divisor}")
    inserted = Insertion(divisor, 0)
    if inserted not in key.insertions:
        raise InapplicableRuleError(f"{key} has no tau0({divisor}) insertion")
    rest = _require_stable(key.without(inserted))
    result: FormalSum = {}
    if rest.beta:
        _add(result, rest, Fraction(rest.beta, weights.A))
    descendants = [(position, ins) for position, ins in enumerate(rest.insertions) if ins.tau > 0]
    if descendants and sc is None:
        raise InapplicableRuleError("cup products with the divisor need structure constants")
    if descendants:
        classes = [monomial_sector(sc.weights, mono) for mono in sc.basis]
        t_index = sc.index(point_monomial(sc.weights))
        for position, ins in descendants:
            l = classes.index(ins.cls)
            for m, series in sc.products[l][t_index].items():
                if not series[0]:
                    continue
                replaced = list(rest.insertions)
                replaced[position] = Insertion(classes[m], ins.tau - 1)
                _add(result, CorrelatorKey(rest.beta, tuple(replaced)), series[0])
    return result


class Provenance(str, Enum):
    SEEDED = "seeded"
    RECURSION = "recursion"
    USER = "user"


class CorrelatorTable:
    """条目不可变：key -> 值及其来源。evaluate 的递推结果缓存在 _cache 中，读写由 _cache_lock 保护。"""

    def __init__(
        self,
        weights: Weights,
        entries: Optional[Mapping[CorrelatorKey, Fraction]] = None,
        provenance: Optional[Mapping[CorrelatorKey, Provenance]] = None,
        structure: Optional[StructureConstants] = None,
        logger=None,
    ):
        self.weights = weights
        self.structure = structure
        self.logger = logger
        stored: Dict[CorrelatorKey, Fraction] = {}
        origins: Dict[CorrelatorKey, Provenance] = {}
        for key, value in (entries or {}).items():
            _require_stable(key)
            stored[key] = Fraction(value)
            origins[key] = Provenance((provenance or {}).get(key, Provenance.USER))
        self._entries = stored
        self._provenance = origins
        self._cache: Dict[CorrelatorKey, Fraction] = {}
        self._cache_lock = threading.Lock()

    def set_logger(self, logger):
        self.logger = logger

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CorrelatorKey) -> bool:
        return key in self._entries

    def keys(self) -> List[CorrelatorKey]:
        return sorted(self._entries, key=CorrelatorKey.sort_key)

    def get(self, key: CorrelatorKey) -> Optional[Fraction]:
        return self._entries.get(key)

    def provenance(self, key: CorrelatorKey) -> Optional[Provenance]:
        return self._provenance.get(key)

    def with_entries(self, values: Mapping[CorrelatorKey, Fraction], provenance: Provenance = Provenance.USER) -> "CorrelatorTable":
        entries = dict(self._entries)
        origins = dict(self._provenance)
        for key, value in values.items():
            entries[key] = Fraction(value)
            origins[key] = provenance
        return CorrelatorTable(self.weights, entries, origins, self.structure, self.logger)

    def with_entry(self, key: CorrelatorKey, value: Fraction, provenance: Provenance = Provenance.USER) -> "CorrelatorTable":
        return self.with_entries({key: value}, provenance)

    def evaluate(self, key: CorrelatorKey) -> Fraction:
        """查表；否则依次尝试 string、dilaton、divisor 方程；都不适用时抛出 MissingCorrelatorError。"""
        _require_stable(key)
        if key in self._entries:
            return self._entries[key]
        with self._cache_lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        # 递推期间不持锁：_reduce 会再次调用 evaluate
        value = self._reduce(key)
        with self._cache_lock:
            return self._cache.setdefault(key, value)

    def _sum(self, terms: FormalSum) -> Fraction:
        return sum((coeff * self.evaluate(term) for term, coeff in terms.items()), Fraction(0))

    def _reduce(self, key: CorrelatorKey) -> Fraction:
        attempts = (
            lambda: self._sum(string_reduce(key)),
            lambda: self._dilaton(key),
            lambda: self._sum(divisor_reduce(key, self.weights, self.structure)),
        )
        missing: Optional[MissingCorrelatorError] = None
        for attempt in attempts:
            try:
                return attempt()
            except (InapplicableRuleError, UnstableKeyError):
                continue
            except MissingCorrelatorError as e:
                missing = missing or e
        raise missing or MissingCorrelatorError([key])

    def _dilaton(self, key: CorrelatorKey) -> Fraction:
        factor, reduced = dilaton_reduce(key)
        if factor == 0:
            return Fraction(0)
        return factor * self.evaluate(reduced)

    def dump(self, stream: IO[str]):
        """JSON lines：每行 {beta, insertions, value, provenance}。"""
        for key in self.keys():
            record = key.to_json()
            record["value"] = rational_to_text(self._entries[key])
            record["provenance"] = self._provenance[key].value
            stream.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, weights: Weights, lines: Iterable[str], structure: Optional[StructureConstants] = None) -> "CorrelatorTable":
        entries: Dict[CorrelatorKey, Fraction] = {}
        origins: Dict[CorrelatorKey, Provenance] = {}
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = CorrelatorKey(
                    int(record["beta"]),
                    tuple(insertion_from_json(weights, item) for item in record["insertions"]),
                )
                entries[key] = rational_from_text(record["value"])
                origins[key] = Provenance(record.get("provenance", Provenance.USER.value))
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"line {number}: {e}")
        return cls(weights, entries, origins, structure)


def basis_class(w: Weights, sector: Sector, kind: ClassKind) -> BasisClass:
    validate_sector(w, sector)
    if kind is ClassKind.POINT:
        if sector.type is not SectorType.ONE_DIM:
            raise InvalidSectorError(f"point classes live on one-dimensional sectors, not {sector}")
        return BasisClass(sector, kind, Fraction(1))
    return BasisClass(sector, kind, age(w, sector))


def insertion_from_json(w: Weights, data: Dict[str, Any]) -> Insertion:
    cls = basis_class(w, Sector.from_json(data["sector"]), ClassKind(data["kind"]))
    return Insertion(cls, int(data.get("tau", 0)))


_INSERTION_RE = re.compile(r"^(?:tau(\d+)\((.+)\)|(.+))$")
_SECTOR_RE = re.compile(r"^(OneDim|Point0|PointInf)\{(\d+)\}(\.pt)?$")


def parse_class(w: Weights, text: str) -> BasisClass:
    """`1`、`pt`、`x`、`y`，或 `OneDim{j}`、`OneDim{j}.pt`、`Point0{k}`、`PointInf{k}`。"""
    token = text.strip()
    if token == "1":
        return unit_class()
    if token == "pt":
        return point_class()
    if token == "x":
        return monomial_sector(w, X)
    if token == "y":
        return monomial_sector(w, Y)
    match = _SECTOR_RE.match(token)
    if not match:
        raise ParseError(f"unknown class {token!r}")
    sector = Sector.from_json({"type": match.group(1), "label": match.group(2)})
    kind = ClassKind.POINT if match.group(3) else ClassKind.FUNDAMENTAL
    return basis_class(w, sector, kind)


def parse_insertion(w: Weights, text: str) -> Insertion:
    match = _INSERTION_RE.match(text.strip())
    if not match:
        raise ParseError(f"bad insertion {text!r}")
    if match.group(1) is not None:
        return Insertion(parse_class(w, match.group(2)), int(match.group(1)))
    return Insertion(parse_class(w, match.group(3)))


def parse_key(w: Weights, beta: int, text: str) -> CorrelatorKey:
    parts = [part for part in text.split(",") if part.strip()]
    return CorrelatorKey(beta, tuple(parse_insertion(w, part) for part in parts))


def seed_from_ring(sc: StructureConstants, pairing: PairingMatrix) -> CorrelatorTable:
    """⟨α_i, α_j, α_k⟩_β = [q^β] g̃(α_i ⋆ α_j, α_k)，β ≤ N。"""
    classes = [monomial_sector(sc.weights, mono) for mono in sc.basis]
    entries: Dict[CorrelatorKey, Fraction] = {}
    for i, j, k in itertools.combinations_with_replacement(range(sc.rank), 3):
        for beta in range(sc.q_truncation + 1):
            value = sum(
                (series[beta] * pairing.value(l, k) for l, series in sc.products[i][j].items()),
                Fraction(0),
            )
            entries[make_key(beta, (classes[i], classes[j], classes[k]))] = value
    origins = {key: Provenance.SEEDED for key in entries}
    return CorrelatorTable(sc.weights, entries, origins, sc)


@dataclass(frozen=True)
class WdvvResult:
    four: Tuple[BasisClass, ...]
    extras: Tuple[Insertion, ...]
    beta: int
    residual: Optional[Fraction]
    missing: Tuple[CorrelatorKey, ...] = ()

    @property
    def passed(self) -> bool:
        return self.residual == 0 and not self.missing

    def to_json(self) -> Dict[str, Any]:
        return {
            "four": [str(c) for c in self.four],
            "extras": [str(e) for e in self.extras],
            "beta": self.beta,
            "residual": None if self.residual is None else rational_to_text(self.residual),
            "missing": [str(key) for key in self.missing],
            "passed": self.passed,
        }


def _inverse_pairing(pairing: PairingMatrix) -> Tuple[List[BasisClass], Tuple[Tuple[Fraction, ...], ...]]:
    classes = [monomial_sector(pairing.weights, mono) for mono in pairing.basis]
    return classes, pairing.inverse()


def _wdvv_side(
    t: CorrelatorTable,
    left: Tuple[BasisClass, BasisClass],
    right: Tuple[BasisClass, BasisClass],
    extras: Sequence[Insertion],
    beta: int,
    classes: Sequence[BasisClass],
    inverse: Sequence[Sequence[Fraction]],
    missing: List[CorrelatorKey],
) -> Fraction:
    total = Fraction(0)
    positions = range(len(extras))
    for size in range(len(extras) + 1):
        for chosen in itertools.combinations(positions, size):
            first = [extras[p] for p in chosen]
            second = [extras[p] for p in positions if p not in chosen]
            for beta1 in range(beta + 1):
                for e, f in itertools.product(range(len(classes)), repeat=2):
                    g = inverse[e][f]
                    if not g:
                        continue
                    key1 = make_key(beta1, [*left, *first, classes[e]])
                    key2 = make_key(beta - beta1, [classes[f], *right, *second])
                    try:
                        total += t.evaluate(key1) * g * t.evaluate(key2)
                    except MissingCorrelatorError as err:
                        missing.extend(k for k in err.missing if k not in missing)
    return total


def wdvv_residual(
    t: CorrelatorTable,
    four: Sequence[BasisClass],
    extras: Sequence[Union[Insertion, BasisClass]],
    beta: int,
    pairing: PairingMatrix,
) -> Fraction:
    """Σ ⟨a,b,S₁,T_e⟩ g̃^{ef} ⟨T_f,c,d,S₂⟩ - (b ↔ c)，对 β₁+β₂ = β 与 extras 的全部拆分求和；符号全为 +1。"""
    result = _wdvv(t, four, extras, beta, *_inverse_pairing(pairing))
    if result.missing:
        raise MissingCorrelatorError(result.missing)
    return result.residual


def _wdvv(t, four, extras, beta, classes, inverse) -> WdvvResult:
    if len(four) != 4:
        raise ValueError("WDVV needs exactly four classes")
    a, b, c, d = four
    extras = tuple(e if isinstance(e, Insertion) else Insertion(e) for e in extras)
    missing: List[CorrelatorKey] = []
    lhs = _wdvv_side(t, (a, b), (c, d), extras, beta, classes, inverse, missing)
    rhs = _wdvv_side(t, (a, c), (b, d), extras, beta, classes, inverse, missing)
    residual = None if missing else lhs - rhs
    return WdvvResult(tuple(four), extras, beta, residual, tuple(missing))


def wdvv_scan(
    t: CorrelatorTable,
    pairing: PairingMatrix,
    beta: int,
    extras: Sequence[Union[Insertion, BasisClass]] = (),
    classes: Optional[Sequence[BasisClass]] = None,
    workers: int = 1,
) -> List[WdvvResult]:
    """对 classes（默认全部基）的所有有序四元组计算残差。"""
    basis_classes, inverse = _inverse_pairing(pairing)
    candidates = basis_classes if classes is None else list(classes)
    quadruples = list(itertools.product(candidates, repeat=4))

    def run(four):
        return _wdvv(t, four, extras, beta, basis_classes, inverse)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, quadruples))
    return [run(four) for four in quadruples]


def wdvv_check(
    t: CorrelatorTable,
    pairing: PairingMatrix,
    max_beta: int,
    extras: Sequence[Union[Insertion, BasisClass]] = (),
    classes: Optional[Sequence[BasisClass]] = None,
    workers: int = 1,
) -> List[WdvvResult]:
    """β = 0..max_beta 全部扫描；返回残差非零或因缺失条目无法计算的结果。"""
    failures: List[WdvvResult] = []
    for beta in range(max_beta + 1):
        failures.extend(
            result
            for result in wdvv_scan(t, pairing, beta, extras, classes, workers)
            if not result.passed
        )
    return failures


def p1_reconstruct(max_beta: int, max_insertions: int = 5, logger=None) -> CorrelatorTable:
    """ℙ(1,1)：由环给出的三点值出发，用反向 divisor 方程得到两点值，再用 string / divisor 填满
    β ≤ max_beta、插入数 ≤ max_insertions 的全部无 descendant 关联函数。"""
    if max_beta < 1:
        raise ValueError(f"max_beta must be >= 1, got {max_beta}")
    w = Weights(1, 1)
    sc = structure_constants(w, max_beta)
    table = seed_from_ring(sc, pairing_matrix(sc))
    classes = [unit_class(), point_class()]
    divisor = point_class()
    two_point: Dict[CorrelatorKey, Fraction] = {}
    for beta in range(1, max_beta + 1):
        for pair in itertools.combinations_with_replacement(classes, 2):
            # ⟨T, γ₁, γ₂⟩_β = β·⟨γ₁, γ₂⟩_β（A = 1，无 descendant 时没有 cup 项）
            two_point[make_key(beta, pair)] = table.evaluate(make_key(beta, (divisor, *pair))) / beta
    table = table.with_entries(two_point, Provenance.RECURSION)
    for n in range(4, max_insertions + 1):
        values = {}
        for beta in range(max_beta + 1):
            for combo in itertools.combinations_with_replacement(classes, n):
                key = make_key(beta, combo)
                values[key] = table.evaluate(key)
        table = table.with_entries(values, Provenance.RECURSION)
    log_message(logger, "info", f"P(1,1) table: {len(table)} correlators up to beta = {max_beta}")
    return table

