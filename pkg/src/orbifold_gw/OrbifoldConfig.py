# -*- coding: utf-8 -*-
"""运行配置：gw_setting.yml 中的 KEY=value 与命令行覆盖项合并为一个只读记录。"""
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional, Tuple

from orbifold_gw.InertiaSystem import Weights
from orbifold_gw.SettingManager import SettingManager
from orbifold_gw.errors import ConfigError
from orbifold_gw.orbifold_error_log import log_message

OUTPUT_FORMATS = ("json", "table")


def parse_weights(text: str) -> Tuple[int, ...]:
    """"4,6" -> (4, 6)；格式错误抛出 ConfigError。"""
    try:
        values = tuple(int(part) for part in str(text).replace(" ", "").split(",") if part)
    except ValueError:
        raise ConfigError(f"weights must look like 'a,b', got {text!r}")
    if not values or min(values) < 1:
        raise ConfigError(f"weights must be positive integers, got {text!r}")
    return values


@dataclass(frozen=True)
class OrbifoldConfig:
    weights: Tuple[int, int] = (4, 6)
    q_truncation: int = 6
    output_format: str = "json"
    seed: int = 0
    confluence_samples: int = 20
    workers: int = 1
    error_log_path: Optional[str] = None

    def __post_init__(self):
        if len(self.weights) != 2 or min(self.weights) < 1:
            raise ConfigError(f"weights (a,b) must satisfy a,b >= 1, got {self.weights}")
        if self.q_truncation < 1:
            raise ConfigError(f"q truncation N must be >= 1, got {self.q_truncation}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.confluence_samples < 1:
            raise ConfigError("CONFLUENCE_SAMPLES must be >= 1")
        if self.workers < 1:
            raise ConfigError("PARALLEL_WORKERS must be >= 1")

    def target(self) -> Weights:
        return Weights(*self.weights)

    @classmethod
    def from_settings(
        cls,
        setting_manager: Optional[SettingManager] = None,
        overrides: Optional[Mapping[str, Any]] = None,
        logger=None,
    ) -> "OrbifoldConfig":
        """先读设置文件（缺失或格式错误的值回退默认并记录警告），再应用非 None 的覆盖项。"""
        settings = setting_manager or SettingManager()
        defaults = cls()

        def _parse_int(key: str, default: int) -> int:
            raw = settings.GetSetting(key)
            if raw is None:
                return default
            try:
                return int(raw)
            except (ValueError, TypeError):
                log_message(logger, "warning", f"{key}={raw!r} is not an integer, using {default}")
                return default

        raw_weights = settings.GetSetting("DEFAULT_WEIGHTS")
        weights = defaults.weights
        if raw_weights:
            try:
                parsed = parse_weights(raw_weights)
                if len(parsed) == 2:
                    weights = parsed
                else:
                    log_message(logger, "warning", f"DEFAULT_WEIGHTS={raw_weights!r} needs two entries, using {weights}")
            except ConfigError as e:
                log_message(logger, "warning", f"{e.detail}; using {weights}")

        config = cls(
            weights=weights,
            q_truncation=_parse_int("Q_TRUNCATION", defaults.q_truncation),
            output_format=(settings.GetSetting("OUTPUT_FORMAT") or defaults.output_format).lower(),
            seed=_parse_int("RANDOM_SEED", defaults.seed),
            confluence_samples=_parse_int("CONFLUENCE_SAMPLES", defaults.confluence_samples),
            workers=_parse_int("PARALLEL_WORKERS", defaults.workers),
            error_log_path=settings.GetSetting("ERROR_LOG_PATH"),
        )
        changes = {key: value for key, value in (overrides or {}).items() if value is not None}
        return replace(config, **changes) if changes else config
