"""数值积分原语与 Born-Infeld 势所需的特殊常数。

主积分规则为 tanh-sinh（双指数）求积：横坐标以“到端点的距离”直接生成，
因此靠近端点的节点保有完整的相对精度，可处理 1/√x 型的可积端点奇异性。
被积函数需要接受 numpy 数组；返回形状为 (n,) 的标量族，或 (n, m) 的
向量族（m 个参数同时积分，每一列独立判定收敛）。
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from bispectra.exceptions import DomainError, QuadratureError
from bispectra.log import get_logger

logger = get_logger()

Integrand = Callable[[np.ndarray], "np.ndarray | float"]

ALPHA = 7.2973525376e-3
"""精细结构常数（固定为 10 位给定值，保证表格逐位复现）。"""

BETA_QUARTER = 7.4162987092054876736
"""B(1/4, 1/4) = Γ(1/4)² / √π。"""

_T_MAX = 5.0
# 至少比较到 h = 1/8 才接受收敛，避免粗网格上的偶然吻合
_MIN_LEVEL = 3


@dataclass(frozen=True)
class QuadratureConfig:
    """求积容差设置。"""

    abs_tol: float = 1e-13
    rel_tol: float = 1e-13
    max_levels: int = 12

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol 必须为正数: {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol 必须为正数: {self.rel_tol}")
        if self.max_levels < 1:
            raise DomainError(f"max_levels 至少为 1: {self.max_levels}")

    def tolerance(self, value: np.ndarray | float) -> np.ndarray:
        return np.maximum(self.abs_tol, self.rel_tol * np.abs(value))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class QuadratureResult:
    """单个积分的结果。"""

    value: float
    error_estimate: float
    levels_used: int


@dataclass(frozen=True)
class VectorQuadratureResult:
    """一族积分的结果，每个分量在各自的收敛层冻结。"""

    values: np.ndarray
    error_estimates: np.ndarray
    levels_used: np.ndarray


def alpha() -> float:
    """精细结构常数 α。"""
    return ALPHA


def beta_quarter() -> float:
    """B(1/4, 1/4)。"""
    return BETA_QUARTER


def born_a_tilde() -> float:
    """Born 提出的无量纲参数 ã_B = B(1/4,1/4)·α²/6。"""
    return beta_quarter() * alpha() ** 2 / 6.0


@functools.lru_cache(maxsize=None)
def _level_nodes(level: int) -> tuple[np.ndarray, np.ndarray]:
    """第 level 层新增的 t > 0 节点：端点余量 1 − tanh(y) 与权重 dx/dt。

    y = (π/2)·sinh(t)，q = e^{−2y}，两者都用 q 表示以免 cosh² 溢出。
    """
    h = 0.5**level
    if level == 0:
        t = np.arange(1, int(_T_MAX) + 1, dtype=float)
    else:
        t = h * np.arange(1, int(_T_MAX / h) + 1, 2, dtype=float)
    q = np.exp(-math.pi * np.sinh(t))
    complement = 2.0 * q / (1.0 + q)
    weight = 0.5 * math.pi * np.cosh(t) * 4.0 * q / (1.0 + q) ** 2
    complement.setflags(write=False)
    weight.setflags(write=False)
    return complement, weight


def _evaluate(f: Integrand, x: np.ndarray) -> np.ndarray:
    values = np.asarray(f(x), dtype=float)
    if values.ndim == 0:
        values = np.full(x.shape, float(values))
    if values.shape[0] != x.shape[0]:
        raise QuadratureError(
            f"被积函数返回形状 {values.shape} 与节点数 {x.shape[0]} 不一致"
        )
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise QuadratureError(
            f"被积函数在 x = {x[row]!r} 处返回非有限值",
            abscissa=float(x[row]),
        )
    return values


def _level_sum(f: Integrand, a: float, b: float, level: int) -> np.ndarray:
    """第 level 层新增节点的加权和（不含步长 h）。"""
    half = 0.5 * (b - a)
    complement, weight = _level_nodes(level)

    x_left = a + half * complement
    x_right = b - half * complement
    # 与端点重合的节点不求值：被积函数只保证在开区间内有限
    keep_left = (x_left > a) & (x_left < b)
    keep_right = (x_right > a) & (x_right < b)

    xs = [x_left[keep_left], x_right[keep_right]]
    ws = [weight[keep_left], weight[keep_right]]
    if level == 0:
        xs.insert(0, np.array([a + half]))
        ws.insert(0, np.array([0.5 * math.pi]))

    x = np.concatenate(xs)
    w = np.concatenate(ws)
    values = _evaluate(f, x)
    if values.ndim == 1:
        return half * np.sum(w * values)
    return half * np.sum(w[:, None] * values, axis=0)


def _tanh_sinh(
    f: Integrand, a: float, b: float, cfg: QuadratureConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """逐层加密的 tanh-sinh 求积。

    Returns:
        (冻结值, 误差估计, 收敛层, 是否收敛)，均为一维数组。
    """
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"积分区间必须有限且 a < b: ({a}, {b})")

    estimate = np.atleast_1d(np.asarray(_level_sum(f, a, b, 0), dtype=float))
    values = estimate.copy()
    errors = np.full(estimate.shape, np.inf)
    levels = np.zeros(estimate.shape, dtype=int)
    done = np.zeros(estimate.shape, dtype=bool)

    for level in range(1, cfg.max_levels + 1):
        h = 0.5**level
        previous = estimate
        estimate = 0.5 * previous + h * np.atleast_1d(_level_sum(f, a, b, level))
        err = np.abs(estimate - previous)

        pending = ~done
        values[pending] = estimate[pending]
        errors[pending] = err[pending]
        levels[pending] = level
        if level >= _MIN_LEVEL:
            done |= pending & (err <= cfg.tolerance(estimate))
        if done.all():
            break

    logger.debug(
        "tanh-sinh (%g, %g): %d 个分量，最深 %d 层，%d 个未收敛",
        a,
        b,
        values.size,
        int(levels.max()),
        int((~done).sum()),
    )
    return values, errors, levels, done


def integrate_tanh_sinh(
    f: Integrand, a: float, b: float, cfg: QuadratureConfig | None = None
) -> QuadratureResult:
    """用 tanh-sinh 规则计算 ∫_a^b f(x) dx。

    Args:
        f: 接受 numpy 数组的被积函数，允许端点处存在可积奇异性。
        a: 下限。
        b: 上限，须满足 a < b。
        cfg: 容差设置，默认 abs_tol = rel_tol = 1e-13，最多 12 层。

    Raises:
        QuadratureError: 未在 max_levels 层内收敛（携带最佳估计），
            或被积函数返回 NaN（携带出错横坐标）。
    """
    cfg = cfg or DEFAULT_CONFIG
    values, errors, levels, done = _tanh_sinh(f, a, b, cfg)
    if values.size != 1:
        raise QuadratureError("integrate_tanh_sinh 只接受标量被积函数")
    if not done[0]:
        raise QuadratureError(
            f"tanh-sinh 在 {cfg.max_levels} 层内未收敛: "
            f"估计值 {values[0]!r}，误差估计 {errors[0]:.3e}",
            best_estimate=float(values[0]),
            error_estimate=float(errors[0]),
            levels_used=int(levels[0]),
        )
    return QuadratureResult(float(values[0]), float(errors[0]), int(levels[0]))


def integrate_tanh_sinh_many(
    f: Integrand, a: float, b: float, cfg: QuadratureConfig | None = None
) -> VectorQuadratureResult:
    """对返回 (n, m) 的向量被积函数逐列积分。

    每一列在自己首次满足容差的那一层冻结，所以结果与同批的其他列无关。
    """
    cfg = cfg or DEFAULT_CONFIG
    values, errors, levels, done = _tanh_sinh(f, a, b, cfg)
    if not done.all():
        column = int(np.argmin(done))
        raise QuadratureError(
            f"tanh-sinh 在 {cfg.max_levels} 层内未收敛（第 {column} 列）: "
            f"估计值 {values[column]!r}，误差估计 {errors[column]:.3e}",
            best_estimate=float(values[column]),
            error_estimate=float(errors[column]),
            levels_used=int(levels[column]),
        )
    return VectorQuadratureResult(values, errors, levels)


def _quartic(x: np.ndarray) -> np.ndarray:
    x2 = x * x
    return 1.0 / np.sqrt(1.0 + x2 * x2)


def semi_infinite_quartic_many(
    c: np.ndarray, cfg: QuadratureConfig | None = None
) -> VectorQuadratureResult:
    """对一组下限 c ≥ 0 计算 ∫_c^∞ dx/√(1+x⁴)。

    x → 1/x 把 ∫_1^∞ 精确映为 ∫_0^1，于是
    ∫_c^∞ = ∫_0^{min(1,1/c)} + (c < 1 时) ∫_c^1，全部是有限区间。
    两段都缩放到 (0, 1) 上，使不同 c 共享同一组节点。
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if np.any(~np.isfinite(c)) or np.any(c < 0):
        raise DomainError("semi-infinite quartic 积分要求 c ≥ 0 且有限")

    upper = 1.0 / np.maximum(c, 1.0)
    head_span = np.where(c < 1.0, 1.0 - c, 0.0)
    head_start = np.minimum(c, 1.0)
    m = c.size

    def integrand(t: np.ndarray) -> np.ndarray:
        tail = _quartic(t[:, None] * upper[None, :])
        head = _quartic(head_start[None, :] + t[:, None] * head_span[None, :])
        return np.concatenate([tail, head], axis=1)

    result = integrate_tanh_sinh_many(integrand, 0.0, 1.0, cfg)
    tail_value, head_value = result.values[:m], result.values[m:]
    tail_err, head_err = result.error_estimates[:m], result.error_estimates[m:]
    return VectorQuadratureResult(
        upper * tail_value + head_span * head_value,
        upper * tail_err + head_span * head_err,
        np.maximum(result.levels_used[:m], result.levels_used[m:]),
    )


def integrate_semi_infinite_quartic(
    c: float, cfg: QuadratureConfig | None = None
) -> QuadratureResult:
    """∫_c^∞ dx/√(1+x⁴)，c ≥ 0。c = 0 时等于 B(1/4,1/4)/4。"""
    if not c >= 0:
        raise DomainError(f"下限 c 必须非负: {c}")
    result = semi_infinite_quartic_many(np.array([c], dtype=float), cfg)
    return QuadratureResult(
        float(result.values[0]),
        float(result.error_estimates[0]),
        int(result.levels_used[0]),
    )
