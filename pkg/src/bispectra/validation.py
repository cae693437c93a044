"""路径与参数校验，以及扫描配置文件的解析。

所有校验失败都抛出 ConfigError，并在 field 中给出出错的参数名。
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Mapping

from bispectra.eigensolve import LabelStrategy
from bispectra.exceptions import ConfigError, DomainError
from bispectra.operators import Equation, RadialGrid
from bispectra.potentials import PotentialKind
from bispectra.sweep import SweepConfig, q_log, q_range, schedule_from_a_tilde, schedule_from_q

DEFAULT_RHO_INF = 100.0
DEFAULT_GRID = 20000
DEFAULT_LEVELS = 3

_SCHEDULE_KEYS = ("a_tilde", "Q", "Q_range", "Q_log")
_KNOWN_KEYS = frozenset(
    {
        "equation",
        "potential",
        "angular",
        "levels",
        "rho_inf",
        "grid",
        "tol",
        "labeling",
        "screen_spurious",
        *_SCHEDULE_KEYS,
    }
)


def safe_resolve_path(path: str | Path, must_exist: bool = True) -> Path:
    """安全解析路径，拒绝目录穿越。

    Raises:
        ConfigError: 路径包含 ..、不存在（must_exist 时）或无法解析。
    """
    raw = Path(path)
    if ".." in raw.parts:
        raise ConfigError(f"路径包含目录穿越（..）: {path}", field="path")

    try:
        return raw.resolve(strict=must_exist)
    except FileNotFoundError as exc:
        raise ConfigError(f"路径不存在: {path}", field="path") from exc
    except OSError as exc:
        raise ConfigError(f"无法解析路径: {path}: {exc}", field="path") from exc


def validate_output_file(path: str | Path, field: str = "out") -> Path:
    """校验输出文件路径：不能是符号链接或目录，父目录可创建且可写。"""
    raw = Path(path)
    # 拒绝符号链接：原子替换会把链接本身换成普通文件
    if raw.is_symlink():
        raise ConfigError(f"输出文件不能是符号链接: {path}", field=field)
    resolved = safe_resolve_path(raw, must_exist=False)
    if resolved.is_dir():
        raise ConfigError(f"输出路径是目录: {path}", field=field)

    parent = resolved.parent
    try:
        parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"无法创建输出目录: {parent}: {exc}", field=field) from exc
    if not os.access(parent, os.W_OK):
        raise ConfigError(f"输出目录没有写入权限: {parent}", field=field)
    return resolved


def require_positive(value: Any, field: str) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{field} 必须是数值: {value!r}", field=field) from exc
    if isinstance(value, bool) or not (math.isfinite(number) and number > 0):
        raise ConfigError(f"{field} 必须为有限正数: {value!r}", field=field)
    return number


def require_int(value: Any, field: str, minimum: int) -> int:
    try:
        integral = not isinstance(value, bool) and int(value) == value
    except (TypeError, ValueError):
        integral = False
    if not integral:
        raise ConfigError(f"{field} 必须是整数: {value!r}", field=field)
    if int(value) < minimum:
        raise ConfigError(f"{field} 必须 ≥ {minimum}: {value}", field=field)
    return int(value)


def make_grid(rho_inf: float, n_points: int) -> RadialGrid:
    rho_inf = require_positive(rho_inf, "rho_inf")
    n_points = require_int(n_points, "grid", 3)
    try:
        return RadialGrid(rho_inf, n_points)
    except DomainError as exc:
        raise ConfigError(str(exc), field="grid") from exc


def _enum(kind: type, value: Any, field: str):
    try:
        return kind(value)
    except ValueError as exc:
        choices = ", ".join(member.value for member in kind)
        raise ConfigError(f"{field} 取值 {value!r} 非法，可选: {choices}", field=field) from exc


def _number_list(value: Any, field: str) -> list[float]:
    if not isinstance(value, list):
        raise ConfigError(f"{field} 必须是数值列表", field=field)
    return [require_positive(item, field) for item in value]


def _schedule(data: Mapping[str, Any]):
    present = [key for key in _SCHEDULE_KEYS if key in data]
    if len(present) != 1:
        raise ConfigError(
            f"必须且只能给出一种 ã 序列 ({', '.join(_SCHEDULE_KEYS)})，实际: {present}",
            field="schedule",
        )
    key = present[0]
    value = data[key]
    if key == "a_tilde":
        return schedule_from_a_tilde(_number_list(value, key))
    if key == "Q":
        return schedule_from_q(_number_list(value, key))
    if not isinstance(value, Mapping):
        raise ConfigError(f"{key} 必须是对象", field=key)
    try:
        if key == "Q_range":
            values = q_range(
                require_positive(value["start"], "Q_range.start"),
                require_positive(value["end"], "Q_range.end"),
                require_positive(value["step"], "Q_range.step"),
            )
        else:
            values = q_log(
                require_positive(value["start"], "Q_log.start"),
                require_positive(value["end"], "Q_log.end"),
                require_int(value["points"], "Q_log.points", 1),
            )
    except KeyError as exc:
        raise ConfigError(f"{key} 缺少键 {exc.args[0]}", field=key) from exc
    return schedule_from_q(values)


def _optional_bool(value: Any) -> bool | None:
    if value is None or isinstance(value, bool):
        return value
    raise ConfigError(f"screen_spurious 必须是布尔值: {value!r}", field="screen_spurious")


def parse_sweep_config(data: Mapping[str, Any]) -> SweepConfig:
    """把 JSON 对象解析为 SweepConfig，缺省值与命令行一致。"""
    if not isinstance(data, Mapping):
        raise ConfigError("扫描配置必须是 JSON 对象", field="config")
    unknown = sorted(set(data) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"未知的配置键: {unknown}", field=unknown[0])
    for key in ("equation", "potential", "angular"):
        if key not in data:
            raise ConfigError(f"缺少配置键 {key}", field=key)

    equation = _enum(Equation, data["equation"], "equation")
    angular_raw = data["angular"]
    if not isinstance(angular_raw, list):
        raise ConfigError("angular 必须是整数列表", field="angular")
    minimum = 1 if equation is Equation.DIRAC else 0
    angular = tuple(require_int(item, "angular", minimum) for item in angular_raw)

    return SweepConfig(
        equation=equation,
        potential=_enum(PotentialKind, data["potential"], "potential"),
        angular=angular,
        levels=require_int(data.get("levels", DEFAULT_LEVELS), "levels", 1),
        grid=make_grid(data.get("rho_inf", DEFAULT_RHO_INF), data.get("grid", DEFAULT_GRID)),
        schedule=_schedule(data),
        tol=require_positive(data.get("tol", 1e-10), "tol"),
        labeling=_enum(LabelStrategy, data.get("labeling", "ordinal"), "labeling"),
        screen_spurious=_optional_bool(data.get("screen_spurious")),
    )


def load_sweep_config(path: str | Path) -> SweepConfig:
    resolved = safe_resolve_path(path, must_exist=True)
    try:
        data = json.loads(resolved.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"读取配置文件失败: {path}: {exc}", field="config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"配置文件不是合法 JSON: {path}: {exc}", field="config") from exc
    return parse_sweep_config(data)
