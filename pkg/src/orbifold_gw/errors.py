# -*- coding: utf-8 -*-
"""异常类型：每个异常带一个错误码（与 error_log 中的记录一致）。"""
from typing import Iterable, List, Optional


class OrbifoldGWError(Exception):
    """所有异常的基类。error_code 用于 error_log 与 CLI 诊断输出。"""

    error_code = "GW00"

    def __init__(self, detail: str, error_code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if error_code is not None:
            self.error_code = error_code

    def __str__(self) -> str:
        return f"{self.error_code}: {self.detail}"


class ConfigError(OrbifoldGWError):
    error_code = "CFG01"


class ParseError(OrbifoldGWError):
    error_code = "ALG01"


class TerminationError(OrbifoldGWError):
    """重写规则不满足单调递减（无法保证终止）。"""

    error_code = "ALG02"


class ConfluenceError(OrbifoldGWError):
    error_code = "ALG03"


class InfiniteBasisError(OrbifoldGWError):
    """不可约单项式无穷多（重写系统未截断出有限基）。"""

    error_code = "ALG04"


class InvalidSectorError(OrbifoldGWError):
    error_code = "ORB01"


class EmptyWeightsError(OrbifoldGWError):
    error_code = "ORB02"


class MarkingMismatchError(OrbifoldGWError):
    error_code = "RR01"


class DivisibilityError(OrbifoldGWError):
    error_code = "RR02"


class DegeneratePairingError(OrbifoldGWError):
    error_code = "RING01"


class RingVerificationError(OrbifoldGWError):
    error_code = "RING02"

    def __init__(self, detail: str, report=None):
        super().__init__(detail)
        self.report = report


class NonNormalMonomialError(OrbifoldGWError):
    error_code = "RING03"


class UnstableKeyError(OrbifoldGWError):
    error_code = "COR01"


class DivisorClassError(OrbifoldGWError):
    error_code = "COR02"


class MissingCorrelatorError(OrbifoldGWError):
    """递推无法得到的关联函数；missing 中列出缺失的 key。"""

    error_code = "COR03"

    def __init__(self, missing: Iterable):
        self.missing: List = list(missing)
        shown = ", ".join(str(key) for key in self.missing[:5])
        more = "" if len(self.missing) <= 5 else f" (+{len(self.missing) - 5} more)"
        super().__init__(f"missing correlators: {shown}{more}")


class InapplicableRuleError(OrbifoldGWError):
    """key 中没有该递推方程所需的插入（τ₀(1)、τ₁(1) 或除子类）。"""

    error_code = "COR04"


class WdvvResidualError(OrbifoldGWError):
    error_code = "COR05"
