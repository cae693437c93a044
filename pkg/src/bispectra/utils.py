"""通用工具函数：数值格式、配置摘要、原子写文件、线程数。"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping

from bispectra.exceptions import BISpectraError, ConfigError

THREADS_ENV = "BI_SPECTRA_THREADS"


def format_float(value: float) -> str:
    """17 位有效数字，保证 float 往返无损。"""
    return "%.17g" % value


def canonical_json(payload: Any) -> str:
    """键排序、无多余空白的 JSON，用于计算配置摘要。"""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def config_digest(payload: Mapping[str, Any]) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    """先写到同目录下的临时文件，再用 os.replace 发布。

    失败时临时文件被清理，目标文件保持原样。

    Raises:
        BISpectraError: 写入失败，消息中包含路径与原因。
    """
    path = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    except OSError as exc:
        raise BISpectraError(f"无法在 {path.parent} 创建临时文件: {exc}") from exc
    tmp = Path(tmp_name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise BISpectraError(f"写入 {path} 失败: {exc}") from exc


def resolve_thread_count(environ: Mapping[str, str] | None = None) -> int:
    """读取 BI_SPECTRA_THREADS；未设置或为 0 时取 CPU 核数。"""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} 必须是非负整数: {raw!r}", field=THREADS_ENV) from exc
    if threads < 0:
        raise ConfigError(f"{THREADS_ENV} 必须是非负整数: {raw!r}", field=THREADS_ENV)
    return threads or (os.cpu_count() or 1)
