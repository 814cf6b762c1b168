# -*- coding: utf-8 -*-
"""扭曲曲线（football）上的 Picard 群、Riemann–Roch、截面计数与虚维数。

两点 football C_{a,b} 的 Picard 群由 L_0、L_∞ 生成，唯一关系 L_0^a ≅ L_∞^b；
三点 C_{a,b,D} 再加一个阶 D 的标记点生成元 L_D，关系 L_D^D ≅ L_0^a。
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple

from orbifold_gw.InertiaSystem import Sector, Weights, age, band_order
from orbifold_gw.PolynomialAlgebra import fractional_part
from orbifold_gw.errors import ConfigError, DivisibilityError, MarkingMismatchError, ParseError


@dataclass(frozen=True)
class Football:
    genus: int = 0
    marking_orders: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.genus < 0:
            raise ConfigError(f"genus must be >= 0, got {self.genus}")
        if any(order < 1 for order in self.marking_orders):
            raise MarkingMismatchError(f"marking orders must be positive: {self.marking_orders}")

    @property
    def coarse_euler(self) -> int:
        return 1 - self.genus

    @classmethod
    def two_marked(cls, a: int, b: int) -> "Football":
        return cls(0, (a, b))

    @classmethod
    def three_marked(cls, a: int, b: int, D: int) -> "Football":
        return cls(0, (a, b, D))


@dataclass(frozen=True)
class PicClass:
    """L_0^{z0} ⊗ L_∞^{z_inf} ⊗ Π L_D^{torsion[i]}。"""

    z0: int
    z_inf: int
    torsion: Tuple[int, ...] = ()

    def power(self, k: int) -> "PicClass":
        return PicClass(k * self.z0, k * self.z_inf, tuple(k * z for z in self.torsion))

    def __add__(self, other: "PicClass") -> "PicClass":
        if len(self.torsion) != len(other.torsion):
            raise MarkingMismatchError("tensor product of classes on different curves")
        return PicClass(
            self.z0 + other.z0,
            self.z_inf + other.z_inf,
            tuple(s + o for s, o in zip(self.torsion, other.torsion)),
        )

    def to_json(self) -> Dict[str, Any]:
        return {"z0": self.z0, "zinf": self.z_inf, "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "PicClass":
        try:
            return cls(int(data["z0"]), int(data["zinf"]), tuple(int(z) for z in data.get("torsion", [])))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad Picard class {data!r}: {e}")


def pic_to_json(p: PicClass) -> Dict[str, Any]:
    return p.to_json()


def pic_from_json(data: Dict[str, Any]) -> PicClass:
    return PicClass.from_json(data)


def _check_torsion(p: PicClass, torsion_orders: Sequence[int]) -> None:
    if len(p.torsion) != len(torsion_orders):
        raise MarkingMismatchError(
            f"class has {len(p.torsion)} torsion exponents but curve has {len(torsion_orders)} extra markings"
        )


def pic_canonical(p: PicClass, a: int, b: int, torsion_orders: Sequence[int] = ()) -> PicClass:
    """代表元满足 0 ≤ z0 < a（以及 0 ≤ z_D < D），次数不变。"""
    _check_torsion(p, torsion_orders)
    z0, z_inf = p.z0, p.z_inf
    torsion: List[int] = []
    for z, order in zip(p.torsion, torsion_orders):
        shift, rest = divmod(z, order)
        z0 += shift * a
        torsion.append(rest)
    shift = z0 // a
    return PicClass(z0 - shift * a, z_inf + shift * b, tuple(torsion))


def pic_degree(p: PicClass, a: int, b: int, torsion_orders: Sequence[int] = ()) -> Fraction:
    _check_torsion(p, torsion_orders)
    degree = Fraction(p.z0, a) + Fraction(p.z_inf, b)
    for z, order in zip(p.torsion, torsion_orders):
        degree += Fraction(z, order)
    return degree


@dataclass(frozen=True)
class SheafClass:
    """K 理论类：秩、次数、每个标记点的 age（挠类的 age 可以为负）。"""

    rank: int
    degree: Fraction
    ages: Tuple[Fraction, ...] = field(default=())

    def __add__(self, other: "SheafClass") -> "SheafClass":
        return direct_sum(self, other)


def direct_sum(s1: SheafClass, s2: SheafClass) -> SheafClass:
    if len(s1.ages) != len(s2.ages):
        raise MarkingMismatchError("direct sum of classes with different marking counts")
    return SheafClass(
        s1.rank + s2.rank,
        Fraction(s1.degree) + Fraction(s2.degree),
        tuple(Fraction(x) + Fraction(y) for x, y in zip(s1.ages, s2.ages)),
    )


def structure_sheaf(c: Football) -> SheafClass:
    return SheafClass(1, Fraction(0), tuple(Fraction(0) for _ in c.marking_orders))


def line_bundle_class(p: PicClass, a: int, b: int, torsion_orders: Sequence[int] = ()) -> SheafClass:
    """L_0^{z0} L_∞^{z_inf} 在 0 处的 age 为 frac(z0/a)，∞ 处为 frac(z_inf/b)（L_∞ 在 0 附近平凡）。"""
    ages = [fractional_part(Fraction(p.z0, a)), fractional_part(Fraction(p.z_inf, b))]
    ages += [fractional_part(Fraction(z, order)) for z, order in zip(p.torsion, torsion_orders)]
    return SheafClass(1, pic_degree(p, a, b, torsion_orders), tuple(ages))


def euler_char(s: SheafClass, c: Football) -> Fraction:
    """χ = rank·(1 - g) + deg - Σ ages；节点处的栈结构不影响。"""
    if len(s.ages) != len(c.marking_orders):
        raise MarkingMismatchError(
            f"{len(s.ages)} ages given for a curve with {len(c.marking_orders)} markings"
        )
    return s.rank * c.coarse_euler + Fraction(s.degree) - sum((Fraction(x) for x in s.ages), Fraction(0))


def torsion_class(r: int, k: int) -> SheafClass:
    """ι_*L_k：阶 r 的标记点上的挠层，k = 0 时 age 为 -(r-1)/r，否则 1/r。"""
    if r < 1 or not 0 <= k < r:
        raise MarkingMismatchError(f"need 0 <= k < r, got r={r}, k={k}")
    marking_age = Fraction(-(r - 1), r) if k == 0 else Fraction(1, r)
    return SheafClass(0, Fraction(1, r), (marking_age,))


def h0_genus0(p: PicClass, a: int, b: int, torsion_orders: Sequence[int] = ()) -> int:
    """max(0, ⌊z0/a⌋ + ⌊z_inf/b⌋ + Σ⌊z_D/D⌋ + 1)，即粗空间 ℙ¹ 上下取整后的线丛的截面数。"""
    _check_torsion(p, torsion_orders)
    coarse = p.z0 // a + p.z_inf // b
    coarse += sum(z // order for z, order in zip(p.torsion, torsion_orders))
    return max(0, coarse + 1)


def root_stack_section_count(p: PicClass, a: int, b: int) -> int:
    """两点 football 上逐个枚举单项式截面 s^{z0 + e·a} t^{z_inf - e·b}。"""
    if p.torsion:
        raise MarkingMismatchError("section oracle covers two-marked footballs only")
    count = 0
    for e in range(-abs(p.z0) - 1, abs(p.z_inf) + 2):
        if e * a + p.z0 >= 0 and p.z_inf - e * b >= 0:
            count += 1
    return count


def validate_h0_closed_form(a: int, b: int, bound: int = 20) -> List[PicClass]:
    """返回闭式与截面枚举不一致的类（为空即通过）。"""
    mismatches = []
    for z0 in range(-bound, bound + 1):
        for z_inf in range(-bound, bound + 1):
            p = PicClass(z0, z_inf)
            if h0_genus0(p, a, b) != root_stack_section_count(p, a, b):
                mismatches.append(p)
    return mismatches


def serre_dual_p1(p: PicClass) -> PicClass:
    """ℙ(1,1) 上 ω ⊗ L^{-1}，ω = O(-2)。"""
    return PicClass(0, -2 - p.z0 - p.z_inf)


def target_line_degree(w: Weights, ell: int = 1) -> Fraction:
    """O(ell) 在 ℙ(a,b) 的基本类上的次数 ell/(ab)。"""
    return Fraction(ell, w.a * w.b)


def map_degree(w: Weights, k: int, ell: int = 1) -> Fraction:
    """β = k·d·[ℙ(a,b)] 时 f*O(ell) 的次数。"""
    return Fraction(ell * k * w.d, w.a * w.b)


@dataclass(frozen=True)
class MapSpec:
    target: Weights
    curve: Football
    beta_multiple: int
    marking_sectors: Tuple[Sector, ...]

    def __post_init__(self):
        if self.beta_multiple < 0:
            raise ConfigError(f"beta multiple must be >= 0, got {self.beta_multiple}")
        if len(self.marking_sectors) != len(self.curve.marking_orders):
            raise MarkingMismatchError(
                f"{len(self.marking_sectors)} sectors for {len(self.curve.marking_orders)} markings"
            )
        for order, sector in zip(self.curve.marking_orders, self.marking_sectors):
            expected = band_order(self.target, sector)
            if order != expected:
                raise MarkingMismatchError(f"marking of order {order} cannot map to {sector} (band order {expected})")

    @classmethod
    def build(cls, target: Weights, beta_multiple: int, marking_sectors: Sequence[Sector]) -> "MapSpec":
        """曲线的标记阶取自各扇区的带阶。"""
        sectors = tuple(marking_sectors)
        curve = Football(0, tuple(band_order(target, s) for s in sectors))
        return cls(target, curve, beta_multiple, sectors)


def virtual_dim(m: MapSpec) -> Fraction:
    """亏格 0：χ(f*T) + n - 3，T ≅ O(a+b)，deg f*T = k·d·(a+b)/(ab)。"""
    if m.curve.genus != 0:
        raise ConfigError("virtual dimension is implemented for genus 0 only")
    w = m.target
    tangent = SheafClass(
        1,
        map_degree(w, m.beta_multiple, w.a + w.b),
        tuple(age(w, s) for s in m.marking_sectors),
    )
    return euler_char(tangent, m.curve) + len(m.marking_sectors) - 3


def solve_map_picard(w: Weights, k: int, D: int) -> List[PicClass]:
    """C_{a,b,D} 上次数 k·d/(ab)、z0 ≡ n (mod a)、z_inf ≡ m (mod b) 的全部规范 Picard 类。

    D > 1 时第三个标记点要求 z_D ≢ 0 (mod D)（可表示性）；D = 1 时没有第三个标记点的条件。
    """
    if k < 1:
        raise ConfigError(f"degree multiple must be positive, got {k}")
    if D < 1 or w.d % D != 0:
        raise DivisibilityError(f"third order {D} does not divide d = {w.d}")
    target = map_degree(w, k)
    z0 = w.n % w.a
    torsion_choices = [()] if D == 1 else [(z,) for z in range(1, D)]
    solutions = []
    for torsion in torsion_choices:
        rest = target - Fraction(z0, w.a) - sum((Fraction(z, D) for z in torsion), Fraction(0))
        z_inf = rest * w.b
        if z_inf.denominator != 1 or (int(z_inf) - w.m) % w.b != 0:
            continue
        solutions.append(PicClass(z0, int(z_inf), torsion))
    return solutions
