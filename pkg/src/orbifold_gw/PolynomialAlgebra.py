# -*- coding: utf-8 -*-
"""精确有理数与 ζ, x, y, q 上的多项式运算；基于重写规则的范式（q 按幂次截断）。"""
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

from orbifold_gw.errors import InfiniteBasisError, ParseError, TerminationError

Rational = Fraction
Coefficient = Union[int, Fraction]
Series = Tuple[Fraction, ...]

VARIABLES = ("zeta", "x", "y", "q")
DEFAULT_Q_TRUNCATION = 6


def fractional_part(value: Fraction) -> Fraction:
    """frac(v) = v - floor(v)，结果在 [0, 1)。"""
    value = Fraction(value)
    return value - math.floor(value)


def rational_to_text(value: Fraction) -> str:
    """JSON 中的有理数统一写成 "p/q"，避免浮点误差。"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def rational_from_text(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad rational {text!r}: {e}")


@dataclass(frozen=True, order=True)
class Monomial:
    """ζ^e_zeta x^e_x y^e_y q^e_q；比较顺序即 (e_zeta, e_x, e_y, e_q) 的字典序，只用于确定性排序。"""

    e_zeta: int = 0
    e_x: int = 0
    e_y: int = 0
    e_q: int = 0

    def __post_init__(self):
        if min(self.e_zeta, self.e_x, self.e_y, self.e_q) < 0:
            raise ValueError(f"negative exponent in {self.exponents()}")

    def exponents(self) -> Tuple[int, int, int, int]:
        return (self.e_zeta, self.e_x, self.e_y, self.e_q)

    def exponent(self, variable: str) -> int:
        return getattr(self, "e_" + variable)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(
            self.e_zeta + other.e_zeta,
            self.e_x + other.e_x,
            self.e_y + other.e_y,
            self.e_q + other.e_q,
        )

    def divides(self, other: "Monomial") -> bool:
        return all(s <= o for s, o in zip(self.exponents(), other.exponents()))

    def quotient(self, divisor: "Monomial") -> "Monomial":
        """self / divisor，要求 divisor 整除 self。"""
        return Monomial(*(s - d for s, d in zip(self.exponents(), divisor.exponents())))

    def lcm(self, other: "Monomial") -> "Monomial":
        return Monomial(*(max(s, o) for s, o in zip(self.exponents(), other.exponents())))

    def shares_variable(self, other: "Monomial") -> bool:
        return any(s and o for s, o in zip(self.exponents(), other.exponents()))

    def without_q(self) -> "Monomial":
        return Monomial(self.e_zeta, self.e_x, self.e_y, 0)

    def to_text(self) -> str:
        parts = []
        for name, exp in zip(VARIABLES, self.exponents()):
            if exp == 1:
                parts.append(name)
            elif exp > 1:
                parts.append(f"{name}^{exp}")
        return " ".join(parts) if parts else "1"

    def __str__(self) -> str:
        return self.to_text()


ONE = Monomial()
ZETA = Monomial(e_zeta=1)
X = Monomial(e_x=1)
Y = Monomial(e_y=1)
Q = Monomial(e_q=1)


@dataclass(frozen=True)
class Grading:
    deg_zeta: Fraction
    deg_x: Fraction
    deg_y: Fraction
    deg_q: Fraction

    def degree(self, mono: Monomial) -> Fraction:
        return (
            mono.e_zeta * Fraction(self.deg_zeta)
            + mono.e_x * Fraction(self.deg_x)
            + mono.e_y * Fraction(self.deg_y)
            + mono.e_q * Fraction(self.deg_q)
        )

    def to_json(self) -> Dict[str, str]:
        return {
            "zeta": rational_to_text(self.deg_zeta),
            "x": rational_to_text(self.deg_x),
            "y": rational_to_text(self.deg_y),
            "q": rational_to_text(self.deg_q),
        }


# 无权重时的默认分次：按总次数，q 记 2
TOTAL_DEGREE = Grading(Fraction(0), Fraction(1), Fraction(1), Fraction(2))

_FACTOR_RE = re.compile(r"(zeta|x|y|q)(?:\^(\d+))?")
_COEFF_RE = re.compile(r"\d+(?:/\d+)?")
_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")


class Polynomial:
    """有限映射 Monomial -> Fraction；不存零系数，迭代顺序按 Monomial 排序固定。"""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Coefficient]] = None):
        merged: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            merged[mono] = merged.get(mono, Fraction(0)) + Fraction(coeff)
        self._terms = MappingProxyType(
            {mono: merged[mono] for mono in sorted(merged) if merged[mono] != 0}
        )
        self._hash = None

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @classmethod
    def constant(cls, coeff: Coefficient) -> "Polynomial":
        return cls({ONE: coeff})

    @classmethod
    def monomial(cls, mono: Monomial, coeff: Coefficient = 1) -> "Polynomial":
        return cls({mono: coeff})

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def items(self):
        return self._terms.items()

    def monomials(self) -> List[Monomial]:
        return list(self._terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def max_q(self) -> int:
        return max((mono.e_q for mono in self._terms), default=0)

    def truncate(self, q_truncation: int) -> "Polynomial":
        """丢掉 q 次数大于 q_truncation 的项。"""
        return Polynomial({m: c for m, c in self.items() if m.e_q <= q_truncation})

    def q_zero(self) -> "Polynomial":
        return Polynomial({m: c for m, c in self.items() if m.e_q == 0})

    def q_coefficient(self, power: int) -> "Polynomial":
        """q^power 的系数（作为 ζ, x, y 的多项式）。"""
        return Polynomial({m.without_q(): c for m, c in self.items() if m.e_q == power})

    def map_monomials(self, func) -> "Polynomial":
        result: Dict[Monomial, Fraction] = {}
        for mono, coeff in self.items():
            image, factor = func(mono)
            result[image] = result.get(image, Fraction(0)) + coeff * factor
        return Polynomial(result)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        result = dict(self._terms)
        for mono, coeff in other.items():
            result[mono] = result.get(mono, Fraction(0)) + coeff
        return Polynomial(result)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return Polynomial({m: c * other for m, c in self.items()})
        if isinstance(other, Monomial):
            return Polynomial({m * other: c for m, c in self.items()})
        return poly_mul(self, other)

    def __rmul__(self, other) -> "Polynomial":
        return self * other

    def to_text(self) -> str:
        """序列化为 `c * zeta^i x^j y^k q^l` 以 +/- 连接的文本，零多项式为 "0"。"""
        if not self._terms:
            return "0"
        chunks: List[str] = []
        for index, (mono, coeff) in enumerate(self.items()):
            sign = "-" if coeff < 0 else "+"
            magnitude = abs(coeff)
            body = str(magnitude) if mono == ONE else f"{magnitude} * {mono.to_text()}"
            if index == 0:
                chunks.append(f"-{body}" if sign == "-" else body)
            else:
                chunks.append(f"{sign} {body}")
        return " ".join(chunks)

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        """to_text 的逆；系数写成 p/q，单项式因子以空格分隔，`^1` 可省略。"""
        stripped = (text or "").strip()
        if stripped in ("", "0"):
            return cls.zero()
        terms: Dict[Monomial, Fraction] = {}
        position = 0
        for match in _TERM_RE.finditer(stripped):
            if match.start() != position:
                raise ParseError(f"unexpected text at {position} in {text!r}")
            position = match.end()
            sign, body = match.group(1), match.group(2).strip()
            if not body:
                raise ParseError(f"empty term in {text!r}")
            coeff = Fraction(1)
            exponents = {name: 0 for name in VARIABLES}
            for part in (p.strip() for p in body.split("*")):
                if _COEFF_RE.fullmatch(part):
                    coeff *= Fraction(part)
                    continue
                if not part:
                    raise ParseError(f"dangling '*' in {text!r}")
                for factor in part.split():
                    factor_match = _FACTOR_RE.fullmatch(factor)
                    if not factor_match:
                        raise ParseError(f"bad factor {factor!r} in {text!r}")
                    exponents[factor_match.group(1)] += int(factor_match.group(2) or 1)
            if sign == "-":
                coeff = -coeff
            mono = Monomial(exponents["zeta"], exponents["x"], exponents["y"], exponents["q"])
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        if position != len(stripped):
            raise ParseError(f"trailing text in {text!r}")
        return cls(terms)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"


def poly_mul(p: Polynomial, r: Polynomial) -> Polynomial:
    """精确分配律乘积；不做 q 截断（由调用方截断）。"""
    result: Dict[Monomial, Fraction] = {}
    for m1, c1 in p.items():
        for m2, c2 in r.items():
            mono = m1 * m2
            result[mono] = result.get(mono, Fraction(0)) + c1 * c2
    return Polynomial(result)


def is_homogeneous(p: Polynomial, g: Grading) -> Optional[Fraction]:
    """所有项同次时返回该次数，否则（或零多项式）返回 None。"""
    degrees = {g.degree(mono) for mono in p}
    if len(degrees) != 1:
        return None
    return degrees.pop()


def series_mul(s1: Series, s2: Series, q_truncation: int) -> Series:
    """截断幂级数乘法（mod q^{N+1}），跳过零系数。"""
    out = [Fraction(0)] * (q_truncation + 1)
    for i, c1 in enumerate(s1):
        if not c1 or i > q_truncation:
            continue
        for j, c2 in enumerate(s2):
            if i + j > q_truncation:
                break
            if c2:
                out[i + j] += c1 * c2
    return tuple(out)


def series_add(s1: Series, s2: Series) -> Series:
    length = max(len(s1), len(s2))
    padded1 = tuple(s1) + (Fraction(0),) * (length - len(s1))
    padded2 = tuple(s2) + (Fraction(0),) * (length - len(s2))
    return tuple(a + b for a, b in zip(padded1, padded2))


def zero_series(q_truncation: int) -> Series:
    return (Fraction(0),) * (q_truncation + 1)


@dataclass(frozen=True)
class MonomialOrder:
    """分次优先的单项式序：(分次次数, -e_q, 按 priority 顺序的指数)。

    priority 默认 (y, x, zeta)，使 y^B > x^A、x^{A+1} > q y^{B-1}、ζ^d > 1 都成立。
    """

    grading: Grading = TOTAL_DEGREE
    priority: Tuple[str, ...] = ("y", "x", "zeta")

    def key(self, mono: Monomial) -> tuple:
        return (self.grading.degree(mono), -mono.e_q) + tuple(
            mono.exponent(name) for name in self.priority
        )

    def greater(self, left: Monomial, right: Monomial) -> bool:
        return self.key(left) > self.key(right)


@dataclass(frozen=True)
class RewriteRule:
    pattern: Monomial
    replacement: Polynomial

    def to_text(self) -> str:
        return f"{self.pattern.to_text()} -> {self.replacement.to_text()}"


class RewriteSystem:
    """有序规则表 pattern -> replacement 与 q 截断。

    构造时检查每条规则在 order 下严格递减（保证终止），
    require_homogeneous 时还检查规则对分次齐次。
    """

    def __init__(
        self,
        rules: Sequence[Union[RewriteRule, Tuple[Monomial, Polynomial]]],
        q_truncation: int = DEFAULT_Q_TRUNCATION,
        order: Optional[MonomialOrder] = None,
        require_homogeneous: bool = True,
    ):
        if q_truncation < 0:
            raise TerminationError(f"q_truncation must be >= 0, got {q_truncation}")
        self.order = order or MonomialOrder()
        self.q_truncation = q_truncation
        normalized: List[RewriteRule] = []
        for rule in rules:
            if not isinstance(rule, RewriteRule):
                rule = RewriteRule(rule[0], rule[1])
            if rule.pattern == ONE:
                raise TerminationError("pattern 1 would rewrite every monomial")
            for mono in rule.replacement:
                if not self.order.greater(rule.pattern, mono):
                    raise TerminationError(
                        f"rule {rule.to_text()} is not decreasing at {mono.to_text()}"
                    )
                if require_homogeneous and self.order.grading.degree(mono) != self.order.grading.degree(rule.pattern):
                    raise TerminationError(f"rule {rule.to_text()} is not homogeneous")
            normalized.append(rule)
        self.rules: Tuple[RewriteRule, ...] = tuple(normalized)

    def with_truncation(self, q_truncation: int) -> "RewriteSystem":
        return RewriteSystem(self.rules, q_truncation, self.order, require_homogeneous=False)

    def find_rules(self, mono: Monomial) -> List[RewriteRule]:
        return [rule for rule in self.rules if rule.pattern.divides(mono)]

    def is_reducible(self, mono: Monomial) -> bool:
        return any(rule.pattern.divides(mono) for rule in self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __repr__(self) -> str:
        inner = "; ".join(rule.to_text() for rule in self.rules)
        return f"RewriteSystem([{inner}], N={self.q_truncation})"


def _reduce(p: Polynomial, rs: RewriteSystem, rng: Optional[random.Random] = None) -> Polynomial:
    q_truncation = rs.q_truncation
    work: Dict[Monomial, Fraction] = {m: c for m, c in p.items() if m.e_q <= q_truncation}
    out: Dict[Monomial, Fraction] = {}
    while work:
        if rng is None:
            mono = next(iter(work))
        else:
            mono = rng.choice(list(work))
        coeff = work.pop(mono)
        if coeff == 0:
            continue
        candidates = rs.find_rules(mono)
        if not candidates:
            out[mono] = out.get(mono, Fraction(0)) + coeff
            continue
        rule = candidates[0] if rng is None else rng.choice(candidates)
        rest = mono.quotient(rule.pattern)
        for rep_mono, rep_coeff in rule.replacement.items():
            image = rest * rep_mono
            if image.e_q > q_truncation:
                continue
            work[image] = work.get(image, Fraction(0)) + coeff * rep_coeff
    return Polynomial(out)


def normal_form(p: Polynomial, rs: RewriteSystem) -> Polynomial:
    """规范代表元：不含可约单项式，q 次数大于截断的项被丢弃。"""
    return _reduce(p, rs)


def enumerate_normal_monomials(rs: RewriteSystem, zeta_bound: int, limit: int = 4096) -> List[Monomial]:
    """e_q = 0、e_zeta < zeta_bound 的全部不可约单项式，按 (e_zeta, e_y, e_x) 排序。"""
    found = set()
    frontier: List[Monomial] = []
    for i in range(zeta_bound):
        start = Monomial(e_zeta=i)
        if not rs.is_reducible(start):
            found.add(start)
            frontier.append(start)
    # 不可约单项式的因子仍不可约，所以从 ζ^i 出发逐次乘 x、y 即可遍历
    while frontier:
        mono = frontier.pop()
        for step in (X, Y):
            image = mono * step
            if image in found or rs.is_reducible(image):
                continue
            found.add(image)
            frontier.append(image)
            if len(found) > limit:
                raise InfiniteBasisError(f"more than {limit} irreducible monomials for {rs!r}")
    return sorted(found, key=lambda m: (m.e_zeta, m.e_y, m.e_x))


def _random_polynomial(rng: random.Random, rs: RewriteSystem) -> Polynomial:
    max_exp = {name: 1 for name in VARIABLES}
    for rule in rs.rules:
        for name in VARIABLES:
            max_exp[name] = max(max_exp[name], rule.pattern.exponent(name))
    terms: Dict[Monomial, Fraction] = {}
    for _ in range(rng.randint(1, 4)):
        mono = Monomial(
            rng.randint(0, max_exp["zeta"] + 1),
            rng.randint(0, max_exp["x"] + 1),
            rng.randint(0, max_exp["y"] + 1),
            rng.randint(0, 1),
        )
        terms[mono] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return Polynomial(terms)


def critical_pairs(rs: RewriteSystem) -> List[Tuple[RewriteRule, RewriteRule, Monomial]]:
    pairs = []
    for index, first in enumerate(rs.rules):
        for second in rs.rules[index + 1:]:
            if first.pattern.shares_variable(second.pattern):
                pairs.append((first, second, first.pattern.lcm(second.pattern)))
    return pairs


def _apply_at(rule: RewriteRule, mono: Monomial) -> Polynomial:
    return rule.replacement * mono.quotient(rule.pattern)


def confluence_smoke_check(rs: RewriteSystem, samples: int, seed: int) -> bool:
    """临界对全部汇合，且随机多项式在随机归约顺序下范式一致时返回 True。"""
    if samples <= 0:
        raise ValueError("samples must be positive")
    for first, second, overlap in critical_pairs(rs):
        if normal_form(_apply_at(first, overlap), rs) != normal_form(_apply_at(second, overlap), rs):
            return False
    if not rs.rules:
        return True
    rng = random.Random(seed)
    for _ in range(samples):
        p = _random_polynomial(rng, rs)
        reference = normal_form(p, rs)
        for _ in range(2):
            if _reduce(p, rs, rng) != reference:
                return False
    return True


_SYMBOLS = sympy.symbols("zeta x y q")


def to_sympy(p: Polynomial):
    zeta, x, y, q = _SYMBOLS
    expr = sympy.Integer(0)
    for mono, coeff in p.items():
        expr += (
            sympy.Rational(coeff.numerator, coeff.denominator)
            * zeta ** mono.e_zeta * x ** mono.e_x * y ** mono.e_y * q ** mono.e_q
        )
    return expr


def ideal_contains(relations: Sequence[Polynomial], p: Polynomial) -> bool:
    """Gröbner 基判定 p 是否属于 relations 生成的理想（独立于重写系统的校验）。"""
    generators = [to_sympy(r) for r in relations if not r.is_zero()]
    if not generators:
        return p.is_zero()
    basis = sympy.groebner(generators, *_SYMBOLS, order="grevlex", domain=sympy.QQ)
    return bool(basis.contains(to_sympy(p)))
