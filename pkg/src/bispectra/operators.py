"""径向 Schrödinger 方程与 Dirac 方程组的有限差分算子。

均匀网格 ρ_j = j·Δρ（j = 1…N，Δρ = ρ∞/N），两端以 u₀ = u_{N+1} = 0
（Dirac 还有 v₀ = v_{N+1} = 0）的方式截断：边界行直接去掉越界的邻点。

Dirac 未知量按 (u₁, v₁, u₂, v₂, …) 交错排列，得到半带宽为 3 的对称带状矩阵。
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from bispectra.exceptions import DomainError, GridMismatchError
from bispectra.potentials import PotentialSamples
from bispectra.quadrature import alpha

# LAPACK 一般带状存储的上下半带宽
DIRAC_BANDWIDTH = 3


class Equation(str, enum.Enum):
    SCHRODINGER = "schrodinger"
    DIRAC = "dirac"


@dataclass(frozen=True)
class RadialGrid:
    """人为无穷远 ρ∞ 与网格点数 N 决定的均匀网格。"""

    rho_inf: float
    n_points: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho_inf) and self.rho_inf > 0):
            raise DomainError(f"ρ∞ 必须为有限正数: {self.rho_inf}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DomainError(f"网格点数 N 必须是 ≥ 3 的整数: {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "rho_inf", float(self.rho_inf))

    @property
    def delta_rho(self) -> float:
        return self.rho_inf / self.n_points

    @functools.cached_property
    def points(self) -> np.ndarray:
        """ρ_j = j·Δρ，j = 1…N（只读）。"""
        pts = self.delta_rho * np.arange(1, self.n_points + 1, dtype=float)
        pts.setflags(write=False)
        return pts


def _check_samples(grid: RadialGrid, samples: PotentialSamples) -> None:
    if samples.grid != grid:
        raise GridMismatchError(
            f"势能采样网格 (ρ∞={samples.grid.rho_inf}, N={samples.grid.n_points}) "
            f"与算子网格 (ρ∞={grid.rho_inf}, N={grid.n_points}) 不一致"
        )


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    """对称三对角矩阵：d_j = 2/Δρ² + 2V(ρ_j) + ℓ(ℓ+1)/ρ_j²，e = −1/Δρ²。"""

    grid: RadialGrid
    ell: int
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    @property
    def size(self) -> int:
        return self.diagonal.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[:-1] += self.offdiagonal * x[1:]
        y[1:] += self.offdiagonal * x[:-1]
        return y

    def as_linear_operator(self) -> LinearOperator:
        n = self.size
        return LinearOperator(shape=(n, n), matvec=self.matvec, dtype=float)

    def to_sparse(self) -> sp.csr_matrix:
        return sp.diags(
            [self.offdiagonal, self.diagonal, self.offdiagonal],
            [-1, 0, 1],
            format="csr",
        )

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """交错排列的 Dirac 带状矩阵（大小 2N）。

    对每个网格点 j：
      u 行: (αV + 1/α)·u_j + (κ/ρ_j)·v_j − (v_{j+1} − v_{j−1})/(2Δρ)
      v 行: (αV − 1/α)·v_j + (κ/ρ_j)·u_j + (u_{j+1} − u_{j−1})/(2Δρ)

    本征值 λ = E/(α m c²)。束缚态位于 1/α 下方，相对边界的偏移
    μ = λ − 1/α 为 O(α)，因此另外提供扣除 1/α 后的对角线。
    """

    grid: RadialGrid
    kappa: int
    scaled_potential: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.grid.n_points

    def diagonal(self) -> np.ndarray:
        mass = 1.0 / alpha()
        diag = np.repeat(self.scaled_potential, 2)
        diag[0::2] += mass
        diag[1::2] -= mass
        return diag

    def edge_diagonal(self) -> np.ndarray:
        """D − I/α 的对角线：u 位为 αV，v 位为 αV − 2/α。"""
        diag = np.repeat(self.scaled_potential, 2)
        diag[1::2] -= 2.0 / alpha()
        return diag

    def band(self, offset: int) -> np.ndarray:
        """第 offset 条上对角线（offset = 1, 2, 3）。矩阵对称，下对角线相同。"""
        n = self.grid.n_points
        half_step = 0.5 / self.grid.delta_rho
        if offset == 1:
            band = np.empty(2 * n - 1)
            band[0::2] = self.kappa / self.grid.points
            band[1::2] = half_step
            return band
        if offset == 2:
            return np.zeros(2 * n - 2)
        if offset == 3:
            band = np.zeros(2 * n - 3)
            band[0::2] = -half_step
            return band
        raise DomainError(f"Dirac 矩阵没有第 {offset} 条上对角线")

    def to_sparse(self, *, edge: bool = False) -> sp.csr_matrix:
        """稀疏 CSR 形式；edge=True 时返回 D − I/α。"""
        diag = self.edge_diagonal() if edge else self.diagonal()
        bands = [self.band(k) for k in range(1, DIRAC_BANDWIDTH + 1)]
        return sp.diags(
            [bands[2], bands[1], bands[0], diag, bands[0], bands[1], bands[2]],
            [-3, -2, -1, 0, 1, 2, 3],
            format="csr",
        )

    def to_dense(self, *, edge: bool = False) -> np.ndarray:
        return self.to_sparse(edge=edge).toarray()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ x

    def as_linear_operator(self, *, edge: bool = False) -> LinearOperator:
        return aslinearoperator(self.to_sparse(edge=edge))

    def lu_band_storage(self, edge_shift: float) -> np.ndarray:
        """D − I/α − edge_shift·I 的 LAPACK gbtrf 带状存储。

        形状为 (2·kl + ku + 1, 2N)，前 kl 行留给部分主元消去的填充。
        A[i, j] 存放在 ab[kl + ku + i − j, j]。
        """
        kl = ku = DIRAC_BANDWIDTH
        size = self.size
        ab = np.zeros((2 * kl + ku + 1, size), dtype=float, order="F")
        ab[kl + ku, :] = self.edge_diagonal() - edge_shift
        for k in range(1, DIRAC_BANDWIDTH + 1):
            band = self.band(k)
            ab[kl + ku - k, k:] = band
            ab[kl + ku + k, : size - k] = band
        return ab


def assemble_schrodinger(
    grid: RadialGrid, samples: PotentialSamples, ell: int
) -> SchrodingerOperator:
    """组装径向 Schrödinger 算子，本征值近似 Ẽ = (2/α²)·E/(mc²)。"""
    _check_samples(grid, samples)
    if int(ell) != ell or ell < 0:
        raise DomainError(f"ℓ 必须是非负整数: {ell}")
    ell = int(ell)
    inv_step2 = 1.0 / grid.delta_rho**2
    rho = grid.points
    diagonal = 2.0 * inv_step2 + 2.0 * samples.values + ell * (ell + 1) / (rho * rho)
    offdiagonal = np.full(grid.n_points - 1, -inv_step2)
    return SchrodingerOperator(grid, ell, _readonly(diagonal), _readonly(offdiagonal))


def assemble_dirac(
    grid: RadialGrid, samples: PotentialSamples, kappa: int
) -> DiracOperator:
    """组装 Dirac 带状算子，本征值近似 λ = E/(α m c²)。"""
    _check_samples(grid, samples)
    if int(kappa) != kappa or kappa < 1:
        raise DomainError(f"κ 必须是 ≥ 1 的整数: {kappa}")
    scaled = _readonly(alpha() * np.array(samples.values, dtype=float))
    return DiracOperator(grid, int(kappa), scaled)
