"""Coulomb 势与两种 Born-Infeld 势（试探粒子 V¹、自场 V²）。

单位：长度以 Bohr 半径计，能量取 Coulomb 势为 −1/ρ 的无量纲标度。
记 s = ρ/ã，x₀ = 1/(2√2)，Q(c) = ∫_c^∞ dx/√(1+x⁴)：

    V¹(ρ) = −(1/ã)·Q(s)
    V²(ρ) = −(1/ã)·[s·I(s) + B(1/4,1/4)/4]

其中 I(s) 的被积函数 g(x)/√(1+s⁴x⁴) 在 x₀ 处有 1/√ 型端点奇异性。
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from bispectra.exceptions import DomainError, GridMismatchError, PotentialError, QuadratureError
from bispectra.log import get_logger
from bispectra.quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    beta_quarter,
    integrate_semi_infinite_quartic,
    integrate_tanh_sinh,
    integrate_tanh_sinh_many,
    semi_infinite_quartic_many,
)

if TYPE_CHECKING:
    from bispectra.operators import RadialGrid

logger = get_logger()

X0 = 1.0 / (2.0 * math.sqrt(2.0))
_P0 = math.sqrt(2.0)
_SPLIT = 0.5 * X0
# 网格采样按固定边界分块向量化求积；每列独立收敛，分块方式不影响结果
_CHUNK = 256


class PotentialKind(str, enum.Enum):
    COULOMB = "coulomb"
    BI_TEST = "bi-test"
    BI_SELF = "bi-self"


@dataclass(frozen=True)
class PotentialSpec:
    """势能种类与 Born-Infeld 参数 ã。Coulomb 不带 ã。"""

    kind: PotentialKind
    a_tilde: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.kind is PotentialKind.COULOMB:
            if self.a_tilde is not None:
                raise DomainError("Coulomb 势不接受 ã 参数")
            return
        if self.a_tilde is None or not (
            math.isfinite(self.a_tilde) and self.a_tilde > 0
        ):
            raise DomainError(f"{self.kind.value} 势要求有限的 ã > 0: {self.a_tilde}")

    @classmethod
    def coulomb(cls) -> PotentialSpec:
        return cls(PotentialKind.COULOMB)

    def evaluate(self, rho: float, cfg: QuadratureConfig | None = None) -> float:
        """单点求值，按种类分派。"""
        if self.kind is PotentialKind.COULOMB:
            return coulomb(rho)
        assert self.a_tilde is not None
        if self.kind is PotentialKind.BI_TEST:
            return v1_test_particle(rho, self.a_tilde, cfg)
        return v2_self_field(rho, self.a_tilde, cfg)


@dataclass(frozen=True, eq=False)
class PotentialSamples:
    """势能在网格点 ρ_j = j·Δρ（j = 1…N）上的取值。"""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"势能采样长度 {values.shape} 与网格点数 {self.grid.n_points} 不一致"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("势能采样包含非有限值")
        if np.any(values > 0):
            raise DomainError("势能采样出现正值")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def coulomb(rho: float) -> float:
    """V(ρ) = −1/ρ。"""
    if not rho > 0:
        raise DomainError(f"Coulomb 势要求 ρ > 0: {rho}")
    return -1.0 / rho


def _check_bi_args(rho: float, a_tilde: float) -> None:
    if not (math.isfinite(rho) and rho >= 0):
        raise DomainError(f"ρ 必须有限且非负: {rho}")
    if not (math.isfinite(a_tilde) and a_tilde > 0):
        raise DomainError(f"ã 必须有限且为正: {a_tilde}")


def v1_test_particle(
    rho: float, a_tilde: float, cfg: QuadratureConfig | None = None
) -> float:
    """试探粒子势 V¹(ρ) = −(1/ã)·∫_{ρ/ã}^∞ dx/√(1+x⁴)，在 ρ = 0 处有限。"""
    _check_bi_args(rho, a_tilde)
    return -integrate_semi_infinite_quartic(rho / a_tilde, cfg).value / a_tilde


def self_field_integrand(x: np.ndarray | float, s: float = 0.0) -> np.ndarray:
    """I(s) 的被积函数，按原始代数形式求值。

    [2x√(1+x²) − 2x² − 1] / [√(1+4x²−4x√(1+x²))·√(1+x²)·√(1+s⁴x⁴)]

    根号下的量在 x₀ 附近因舍入可能略小于 0，此处截断为 0。
    """
    x = np.asarray(x, dtype=float)
    root = np.sqrt(1.0 + x * x)
    numerator = 2.0 * x * root - 2.0 * x * x - 1.0
    radicand = np.maximum(1.0 + 4.0 * x * x - 4.0 * x * root, 0.0)
    x2 = x * x
    with np.errstate(divide="ignore"):
        return numerator / (np.sqrt(radicand) * root * np.sqrt(1.0 + s**4 * x2 * x2))


def _radicand_near_edge(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """以 d = x₀ − x 为自变量计算 (x, 根号下的量)。

    令 p = √(1+x²) + x，则根号下的量等于 (2 − p²)/p²，且
    √2 − p = 2d·p·√2/(p·√2 + 1)，不依赖两个接近的数相减。
    """
    x = X0 - d
    p = np.sqrt(1.0 + x * x) + x
    gap = 2.0 * d * p * _P0 / (p * _P0 + 1.0)
    return x, gap * (_P0 + p) / (p * p)


def _kernel_parts(
    x: np.ndarray, radicand: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """返回 (g(x), (1 + g(x))/x²)。

    记 w = 1/p，a = √R·√(1+x²)，则 g = −w²/a，
    而 a² − w⁴ = −x²(2w² + 1)，所以 (1 + g)/x² = −(2w² + 1)/((a + w²)·a)。
    """
    root = np.sqrt(1.0 + x * x)
    w2 = 1.0 / (root + x) ** 2
    a = np.sqrt(radicand) * root
    return -w2 / a, -(2.0 * w2 + 1.0) / ((a + w2) * a)


def _kernel_near_origin(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.sqrt(1.0 + x * x) + x
    return _kernel_parts(x, (2.0 - p * p) / (p * p))


def _kernel_near_edge(d: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, radicand = _radicand_near_edge(d)
    g, excess = _kernel_parts(x, radicand)
    return x, g, excess


def _quartic_weight(t: np.ndarray) -> np.ndarray:
    t2 = t * t
    return 1.0 / np.sqrt(1.0 + t2 * t2)


def inner_integral(s: float, cfg: QuadratureConfig | None = None) -> float:
    """I(s) = ∫₀^{x₀} g(x)/√(1+s⁴x⁴) dx。

    在 x₀/2 处拆分：左段直接用 self_field_integrand，
    右段以到奇异端点的距离 d 为积分变量。
    """
    if not (math.isfinite(s) and s >= 0):
        raise DomainError(f"s 必须有限且非负: {s}")

    def left(x: np.ndarray) -> np.ndarray:
        return self_field_integrand(x, s)

    def right(d: np.ndarray) -> np.ndarray:
        x, g, _ = _kernel_near_edge(d)
        return g * _quartic_weight(s * x)

    head = integrate_tanh_sinh(left, 0.0, _SPLIT, cfg).value
    tail = integrate_tanh_sinh(right, 0.0, X0 - _SPLIT, cfg).value
    return head + tail


def _v2_bracket(s: np.ndarray, cfg: QuadratureConfig | None) -> np.ndarray:
    """对一组 s > 0 计算 s²·J(s) + s·Q(s·x₀)，V² = −bracket/ρ。

    J(s) = ∫₀^{x₀} (1 + g)/√(1+s⁴x⁴) dx，由 B/4 = s∫₀^{x₀}dx/√(1+s⁴x⁴) + Q(s·x₀)
    可知 s·I(s) + B/4 = s·J(s) + Q(s·x₀)。ρ ≫ ã 时两项都是 O(1) 而和是 O(1)，
    不再出现 O(1) 与 O(ã/ρ) 项相消的问题。
    """

    def left(x: np.ndarray) -> np.ndarray:
        _, excess = _kernel_near_origin(x)
        t = x[:, None] * s[None, :]
        return excess[:, None] * (t * t) * _quartic_weight(t)

    def right(d: np.ndarray) -> np.ndarray:
        x, _, excess = _kernel_near_edge(d)
        t = x[:, None] * s[None, :]
        return excess[:, None] * (t * t) * _quartic_weight(t)

    head = integrate_tanh_sinh_many(left, 0.0, _SPLIT, cfg).values
    tail = integrate_tanh_sinh_many(right, 0.0, X0 - _SPLIT, cfg).values
    outer = semi_infinite_quartic_many(s * X0, cfg).values
    return head + tail + s * outer


def v2_self_field(
    rho: float, a_tilde: float, cfg: QuadratureConfig | None = None
) -> float:
    """自场势 V²(ρ) = −(1/ã)·[s·I(s) + B(1/4,1/4)/4]，s = ρ/ã。

    ρ > 0 时按等价的无相消形式 −(1/ρ)·[s²J(s) + s·Q(s·x₀)] 求值。
    """
    _check_bi_args(rho, a_tilde)
    if rho == 0:
        return -0.25 * beta_quarter() / a_tilde
    s = rho / a_tilde
    return float(-_v2_bracket(np.array([s]), cfg)[0] / rho)


def _sample_chunk(
    spec: PotentialSpec, rho: np.ndarray, cfg: QuadratureConfig
) -> np.ndarray:
    assert spec.a_tilde is not None
    s = rho / spec.a_tilde
    if spec.kind is PotentialKind.BI_TEST:
        return -semi_infinite_quartic_many(s, cfg).values / spec.a_tilde
    return -_v2_bracket(s, cfg) / rho


def _locate_failure(
    spec: PotentialSpec, rho: np.ndarray, cfg: QuadratureConfig, exc: QuadratureError
) -> PotentialError:
    """逐点重算失败的分块，找出出错的 ρ_j。"""
    for value in rho:
        try:
            spec.evaluate(float(value), cfg)
        except QuadratureError as point_exc:
            return PotentialError(
                f"{spec.kind.value} 势在 ρ = {value!r} 处求值失败: {point_exc}",
                rho=float(value),
            )
    return PotentialError(
        f"{spec.kind.value} 势在 ρ ∈ [{rho[0]!r}, {rho[-1]!r}] 内求值失败: {exc}",
        rho=float(rho[0]),
    )


def sample_on_grid(
    spec: PotentialSpec, grid: RadialGrid, cfg: QuadratureConfig | None = None
) -> PotentialSamples:
    """在网格点上采样势能。

    Raises:
        PotentialError: 某个网格点求值失败，携带该点的 ρ。
    """
    cfg = cfg or DEFAULT_CONFIG
    points = grid.points
    if spec.kind is PotentialKind.COULOMB:
        return PotentialSamples(grid, -1.0 / points)

    values = np.empty_like(points)
    for start in range(0, points.size, _CHUNK):
        rho = points[start : start + _CHUNK]
        try:
            values[start : start + _CHUNK] = _sample_chunk(spec, rho, cfg)
        except QuadratureError as exc:
            raise _locate_failure(spec, rho, cfg, exc) from exc

    logger.debug(
        "%s 势采样完成: ã = %.17g, N = %d, V(ρ₁) = %.6g",
        spec.kind.value,
        spec.a_tilde,
        points.size,
        values[0],
    )
    return PotentialSamples(grid, values)
