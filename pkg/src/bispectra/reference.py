"""Coulomb 问题的解析能级与能量变量换算。

所有能量都以无量纲 Ẽ 报告：Schrödinger 方程下 Ẽ = (2/α²)·E/(mc²)，
Dirac 方程下为扣除静能后的同一标度，Coulomb 能级因而位于 −1/n² 附近。
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from bispectra.exceptions import DomainError
from bispectra.quadrature import alpha


@dataclass(frozen=True)
class LevelLabel:
    """能级标签。

    angular 在 Schrödinger 方程中是 ℓ，在 Dirac 方程中是 κ；
    sublabel 仅用于 Dirac 同一 (n, κ) 格内的成对能级，取 ℓ ∈ {κ−1, κ}。
    """

    n: int
    angular: int
    sublabel: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"主量子数 n 必须 ≥ 1: {self.n}")
        if self.angular < 0:
            raise DomainError(f"角量子数必须非负: {self.angular}")

    @classmethod
    def schrodinger(cls, n: int, ell: int) -> LevelLabel:
        if not 0 <= ell <= n - 1:
            raise DomainError(f"Schrödinger 标签要求 0 ≤ ℓ ≤ n−1: n={n}, ℓ={ell}")
        return cls(n, ell)

    @classmethod
    def dirac(cls, n: int, kappa: int, sublabel: int | None = None) -> LevelLabel:
        if not 1 <= kappa <= n:
            raise DomainError(f"Dirac 标签要求 1 ≤ κ ≤ n: n={n}, κ={kappa}")
        if sublabel is not None and sublabel not in (kappa - 1, kappa):
            raise DomainError(f"成对能级的 ℓ 只能是 κ−1 或 κ: κ={kappa}, ℓ={sublabel}")
        if sublabel == kappa and n == kappa:
            raise DomainError(f"n = κ = {n} 时不存在 ℓ = κ 的能级")
        return cls(n, kappa, sublabel)

    def __str__(self) -> str:
        if self.sublabel is None:
            return f"n={self.n} {self.angular}"
        return f"n={self.n} {self.angular} (ℓ={self.sublabel})"


@dataclass(frozen=True)
class ReferenceLevel:
    label: LevelLabel
    energy: float


def schrodinger_coulomb_exact(n: int) -> float:
    """Schrödinger–Coulomb 能级 Ẽ = −1/n²。"""
    if n < 1:
        raise DomainError(f"主量子数 n 必须 ≥ 1: {n}")
    return -1.0 / (n * n)


def dirac_coulomb_exact(n: int, kappa: int) -> float:
    """Dirac–Coulomb 精确能级。

    Ẽ = (2/α²)·{[1 + (α/(n − κ + √(κ² − α²)))²]^{−1/2} − 1}

    括号内是 1 减去 O(α²) 的小量，直接相减会丢掉约 5 位有效数字，
    这里改用 expm1/log1p 计算同一表达式。
    """
    if n < 1:
        raise DomainError(f"主量子数 n 必须 ≥ 1: {n}")
    if not 1 <= kappa <= n:
        raise DomainError(f"要求 1 ≤ κ ≤ n: n={n}, κ={kappa}")
    a = alpha()
    x = a / (n - kappa + math.sqrt(kappa * kappa - a * a))
    return (2.0 / (a * a)) * math.expm1(-0.5 * math.log1p(x * x))


def tilde_from_dirac_eigenvalue(lam: float) -> float:
    """把 Dirac 矩阵本征值 λ = E/(α m c²) 换算为 Ẽ = (2/α)·λ − 2/α²。

    λ ≈ 1/α ≈ 137，本身只有约 1e-14 的绝对精度，换算后 Ẽ 的误差约 4e-12。
    需要更高精度时使用 tilde_from_edge_offset。
    """
    a = alpha()
    return (2.0 / a) * (lam - 1.0 / a)


def tilde_from_edge_offset(mu: float) -> float:
    """由相对静能边界的偏移 μ = λ − 1/α 计算 Ẽ = (2/α)·μ。"""
    return (2.0 / alpha()) * mu


def dirac_eigenvalue_from_tilde(energy: float) -> float:
    """tilde_from_dirac_eigenvalue 的逆变换。"""
    a = alpha()
    return 1.0 / a + 0.5 * a * energy


def schrodinger_ladder(ell: int, levels: int) -> tuple[ReferenceLevel, ...]:
    """ℓ 通道最低 levels 个 Coulomb 能级（n = ℓ+1, ℓ+2, …）。"""
    if ell < 0:
        raise DomainError(f"ℓ 必须非负: {ell}")
    if levels < 0:
        raise DomainError(f"levels 必须非负: {levels}")
    return tuple(
        ReferenceLevel(LevelLabel.schrodinger(n, ell), schrodinger_coulomb_exact(n))
        for n in range(ell + 1, ell + 1 + levels)
    )


def dirac_ladder(kappa: int, levels: int) -> tuple[ReferenceLevel, ...]:
    """κ 通道前 levels 个主能级的 Coulomb 参考值。

    n = κ 只有一个能级（ℓ = κ−1），n > κ 时 ℓ = κ−1 与 ℓ = κ 成对出现，
    同一格内较深的记为 ℓ = κ−1。因此返回 1 + 2·(levels − 1) 个条目。
    """
    if kappa < 1:
        raise DomainError(f"κ 必须 ≥ 1: {kappa}")
    if levels < 0:
        raise DomainError(f"levels 必须非负: {levels}")
    ladder: list[ReferenceLevel] = []
    for n in range(kappa, kappa + levels):
        energy = dirac_coulomb_exact(n, kappa)
        ladder.append(ReferenceLevel(LevelLabel.dirac(n, kappa, kappa - 1), energy))
        if n > kappa:
            ladder.append(ReferenceLevel(LevelLabel.dirac(n, kappa, kappa), energy))
    return tuple(ladder)


def dirac_state_count(levels: int) -> int:
    """κ 通道前 levels 个主能级包含的本征态数。"""
    return 0 if levels <= 0 else 2 * levels - 1
