# -*- coding: utf-8 -*-
"""错误日志：校验失败等恶性错误追加写入 ERROR_LOG_PATH 指定的文件；以及各系统共用的 _log 回退。"""
import sys
import threading
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

LOG_PREFIX = "[Orbifold GW]"

_file_lock = threading.Lock()

PersistentErrorCallback = Callable[[str, str, Optional[BaseException]], None]


@dataclass
class ErrorRecord:
    """一条错误日志。头行：`[时间] 错误码 P(a,b) N=截断`，其后为缩进的 detail / context / exception 行。"""

    error_code: str
    detail: str
    target: str = ""
    truncation: Optional[int] = None
    exception: Optional[BaseException] = None
    context: Dict[str, Any] = field(default_factory=dict)

    def header(self, timestamp: str) -> str:
        parts = [f"[{timestamp}]", self.error_code]
        if self.target:
            parts.append(self.target)
        if self.truncation is not None:
            parts.append(f"N={self.truncation}")
        return " ".join(parts)

    def render(self, timestamp: Optional[str] = None) -> str:
        stamp = timestamp or datetime.now().isoformat(sep=" ", timespec="seconds")
        lines = [self.header(stamp), f"  detail: {self.detail}"]
        lines.extend(f"  {key}={value}" for key, value in sorted(self.context.items()))
        if self.exception is not None:
            exc = self.exception
            lines.append(f"  exception: {type(exc).__name__}: {exc}")
            tb_lines = traceback.format_exception(type(exc), exc, exc.__traceback__)
            lines.extend(f"  traceback: {line}" for line in "".join(tb_lines).rstrip().splitlines())
        return "\n".join(lines) + "\n\n"


def append_error_log(log_file_path: str, record: ErrorRecord) -> bool:
    """线程安全追加一条记录；写入失败时返回 False，不抛异常。"""
    text = record.render()
    with _file_lock:
        try:
            path = Path(log_file_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as log_file:
                log_file.write(text)
        except OSError:
            return False
    return True


def log_message(logger, level: str, message: str) -> None:
    """有 logger 时按级别输出；否则回退到 stderr（stdout 留给数据输出）。"""
    text = f"{LOG_PREFIX} {message}"
    if logger:
        if level == "error":
            logger.error(text)
        elif level == "warning":
            logger.warning(text)
        elif level == "debug":
            logger.debug(text)
        else:
            logger.info(text)
    elif level in ("error", "warning"):
        print(f"[{level.upper()}] {text}", file=sys.stderr)
