# -*- coding: utf-8 -*-
"""惯性栈的组合模型：ℙ(a,b) 的扇区、带阶、年龄、对合、stringy 基，以及加权射影空间的扇区清单。"""
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

from orbifold_gw.PolynomialAlgebra import fractional_part, rational_to_text
from orbifold_gw.errors import ConfigError, EmptyWeightsError, InvalidSectorError
from orbifold_gw.orbifold_error_log import log_message


@dataclass(frozen=True)
class Weights:
    """ℙ(a,b) 的权重。bezout_n 为空时取最小的 n > 0 使 n·b ≡ d (mod a)，m = (d - n·b)/a。"""

    a: int
    b: int
    bezout_n: Optional[int] = None

    def __post_init__(self):
        if self.a < 1 or self.b < 1:
            raise ConfigError(f"weights must be positive, got ({self.a}, {self.b})")
        if self.bezout_n is not None and (self.bezout_n * self.b - self.d) % self.a != 0:
            raise ConfigError(
                f"n={self.bezout_n} does not satisfy n*b = d (mod a) for ({self.a}, {self.b})"
            )

    @cached_property
    def d(self) -> int:
        return math.gcd(self.a, self.b)

    @property
    def A(self) -> int:
        return self.a // self.d

    @property
    def B(self) -> int:
        return self.b // self.d

    @property
    def e(self) -> int:
        return self.a * self.b // self.d

    @cached_property
    def n(self) -> int:
        if self.bezout_n is not None:
            return self.bezout_n
        for candidate in range(1, self.a + 1):
            if (candidate * self.b - self.d) % self.a == 0:
                return candidate
        raise ConfigError(f"no Bezout pair for ({self.a}, {self.b})")  # unreachable

    @property
    def m(self) -> int:
        return (self.d - self.n * self.b) // self.a

    @property
    def bezout(self) -> Tuple[int, int]:
        """(m, n)，满足 m·a + n·b = d。"""
        return (self.m, self.n)

    @property
    def degenerate(self) -> bool:
        """d = a 或 d = b 时某一侧没有点扇区，x（或 y）落在一维扇区上。"""
        return self.d == self.a or self.d == self.b

    def with_bezout(self, n: int) -> "Weights":
        return Weights(self.a, self.b, n)

    def label(self) -> str:
        return f"P({self.a},{self.b})"


def alternate_bezout_pairs(w: Weights, count: int = 2) -> List[Weights]:
    """默认选择之外的 Bézout 选择：n' = n + t·A（t = 1..count）。"""
    return [w.with_bezout(w.n + t * w.A) for t in range(1, count + 1)]


class SectorType(str, Enum):
    ONE_DIM = "OneDim"
    POINT_0 = "Point0"
    POINT_INF = "PointInf"


_SECTOR_RANK = {SectorType.ONE_DIM: 0, SectorType.POINT_0: 1, SectorType.POINT_INF: 2}


@dataclass(frozen=True)
class Sector:
    type: SectorType
    label: int

    def sort_key(self) -> Tuple[int, int]:
        return (_SECTOR_RANK[self.type], self.label)

    def to_json(self) -> Dict[str, Any]:
        return {"type": self.type.value, "label": self.label}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Sector":
        try:
            return cls(SectorType(data["type"]), int(data["label"]))
        except (KeyError, ValueError, TypeError) as e:
            raise InvalidSectorError(f"bad sector {data!r}: {e}")

    def __str__(self) -> str:
        return f"{self.type.value}{{{self.label}}}"


def one_dim(j: int) -> Sector:
    return Sector(SectorType.ONE_DIM, j)


def point_0(k: int) -> Sector:
    return Sector(SectorType.POINT_0, k)


def point_inf(k: int) -> Sector:
    return Sector(SectorType.POINT_INF, k)


def validate_sector(w: Weights, s: Sector) -> None:
    if s.type is SectorType.ONE_DIM:
        if not 0 <= s.label < w.d:
            raise InvalidSectorError(f"{s} out of range for {w.label()}")
    elif s.type is SectorType.POINT_0:
        if not 0 <= s.label < w.a or s.label % w.A == 0:
            raise InvalidSectorError(f"{s} is not a point sector over 0 of {w.label()}")
    elif not 0 <= s.label < w.b or s.label % w.B == 0:
        raise InvalidSectorError(f"{s} is not a point sector over infinity of {w.label()}")


def sector_dimension(s: Sector) -> int:
    return 1 if s.type is SectorType.ONE_DIM else 0


def band_order(w: Weights, s: Sector) -> int:
    if s.type is SectorType.POINT_0:
        return w.a
    if s.type is SectorType.POINT_INF:
        return w.b
    return w.d // math.gcd(s.label, w.d)


def generic_stabilizer(w: Weights, s: Sector) -> int:
    if s.type is SectorType.POINT_0:
        return w.a
    if s.type is SectorType.POINT_INF:
        return w.b
    return w.d


@dataclass(frozen=True)
class InertiaComponent:
    sector: Sector
    dimension: int
    band_order: int
    generic_stabilizer: int
    age: Fraction

    def to_json(self) -> Dict[str, Any]:
        return {
            "sector": self.sector.to_json(),
            "dim": self.dimension,
            "r": self.band_order,
            "age": rational_to_text(self.age),
        }


class ClassKind(str, Enum):
    FUNDAMENTAL = "fundamental"
    POINT = "point"


@dataclass(frozen=True)
class BasisClass:
    """stringy 基元素：扇区的基本类（次数 = 年龄），或一维扇区上的点类（次数 1）。"""

    sector: Sector
    kind: ClassKind
    degree: Fraction = field(compare=False, hash=False)

    def sort_key(self) -> Tuple[int, int, int]:
        return self.sector.sort_key() + (0 if self.kind is ClassKind.FUNDAMENTAL else 1,)

    def to_json(self) -> Dict[str, Any]:
        return {"sector": self.sector.to_json(), "kind": self.kind.value}

    def __str__(self) -> str:
        suffix = "" if self.kind is ClassKind.FUNDAMENTAL else ".pt"
        return f"{self.sector}{suffix}"


def age(w: Weights, s: Sector) -> Fraction:
    """TP(a,b) ≅ O(a+b)：0 上标签 k 的年龄为 frac(k·b/a)，∞ 上为 frac(k·a/b)，一维扇区为 0。"""
    validate_sector(w, s)
    if s.type is SectorType.POINT_0:
        return fractional_part(Fraction(s.label * w.b, w.a))
    if s.type is SectorType.POINT_INF:
        return fractional_part(Fraction(s.label * w.a, w.b))
    return Fraction(0)


def involution_sector(w: Weights, s: Sector) -> Sector:
    """带的反转 ι：标签取负。"""
    validate_sector(w, s)
    if s.type is SectorType.POINT_0:
        return point_0((w.a - s.label) % w.a)
    if s.type is SectorType.POINT_INF:
        return point_inf((w.b - s.label) % w.b)
    return one_dim((w.d - s.label) % w.d)


def sectors(w: Weights) -> List[Sector]:
    result = [one_dim(j) for j in range(w.d)]
    result += [point_0(k) for k in range(1, w.a) if k % w.A != 0]
    result += [point_inf(k) for k in range(1, w.b) if k % w.B != 0]
    return result


def census(w: Weights, logger=None) -> List[InertiaComponent]:
    """d 个一维分量，a-d 个 0 上的点分量，b-d 个 ∞ 上的点分量。"""
    if w.degenerate:
        log_message(
            logger,
            "warning",
            f"{w.label()} has d = gcd = {w.d} equal to a weight; point sectors on that side are absent",
        )
    return [
        InertiaComponent(
            sector=s,
            dimension=sector_dimension(s),
            band_order=band_order(w, s),
            generic_stabilizer=generic_stabilizer(w, s),
            age=age(w, s),
        )
        for s in sectors(w)
    ]


def census_to_json(w: Weights, components: Optional[List[InertiaComponent]] = None) -> Dict[str, Any]:
    components = census(w) if components is None else components
    return {
        "weights": [w.a, w.b],
        "degenerate": w.degenerate,
        "components": [c.to_json() for c in components],
    }


def format_age(value: Fraction, denominator: Optional[int] = None) -> str:
    """表格输出用；denominator 给定时写成该分母的形式（如 6/12）。"""
    value = Fraction(value)
    if denominator and (value * denominator).denominator == 1:
        return f"{int(value * denominator)}/{denominator}"
    return rational_to_text(value)


def stringy_basis(w: Weights) -> List[BasisClass]:
    """每个分量一个基本类，每个一维分量再加一个点类，共 a+b 个。"""
    basis: List[BasisClass] = []
    for component in census(w):
        basis.append(BasisClass(component.sector, ClassKind.FUNDAMENTAL, component.age))
        if component.dimension == 1:
            basis.append(BasisClass(component.sector, ClassKind.POINT, Fraction(1)))
    return basis


@dataclass(frozen=True)
class WpsSector:
    twist: Fraction
    fixed: Tuple[int, ...]
    age: Fraction
    dimension: int
    band_order: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "twist": rational_to_text(self.twist),
            "fixed": list(self.fixed),
            "age": rational_to_text(self.age),
            "dim": self.dimension,
            "r": self.band_order,
        }


def wps_census(weights: Sequence[int]) -> List[WpsSector]:
    """ℙ(a_0,…,a_n) 的扇区：λ = k/a_i ∈ [0,1)，年龄 Σ frac(λ·a_i)。

    带阶：孤立点取不动权重的 gcd（整个迷向群），正维不动轨迹取 λ 的分母。
    """
    weights = [int(value) for value in weights]
    if not weights:
        raise EmptyWeightsError("weight list is empty")
    if min(weights) < 1:
        raise ConfigError(f"weights must be positive, got {weights}")
    twists = sorted({Fraction(k, weight) for weight in weights for k in range(weight)})
    result: List[WpsSector] = []
    for twist in twists:
        fixed = tuple(i for i, weight in enumerate(weights) if (twist * weight).denominator == 1)
        dimension = len(fixed) - 1
        if dimension == 0:
            order = math.gcd(*(weights[i] for i in fixed))
        else:
            order = twist.denominator
        result.append(
            WpsSector(
                twist=twist,
                fixed=fixed,
                age=sum((fractional_part(twist * weight) for weight in weights), Fraction(0)),
                dimension=dimension,
                band_order=order,
            )
        )
    return result


def census_matches_wps(w: Weights) -> bool:
    """census((a,b)) 与 wps_census([a,b]) 作为 (维数, 年龄, 带阶) 的多重集相等。"""
    left = Counter((c.dimension, c.age, c.band_order) for c in census(w))
    right = Counter((s.dimension, s.age, s.band_order) for s in wps_census([w.a, w.b]))
    return left == right


def denominator_bound_check(value: Fraction, w: Weights) -> bool:
    """value·lcm(a,b) 是否为整数（分母不超过自同构群的指数）。"""
    return (Fraction(value) * w.e).denominator == 1
