"""bispectra 自定义异常。"""

from __future__ import annotations

from typing import Sequence


class BISpectraError(Exception):
    """bispectra 所有异常的基类。"""


class DomainError(BISpectraError, ValueError):
    """物理参数超出定义域（如 ρ ≤ 0 的 Coulomb 势、ã ≤ 0、κ > n）。"""


class ConfigError(BISpectraError):
    """命令行参数或扫描配置非法。"""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class GridMismatchError(BISpectraError):
    """势能采样与算子网格不一致。"""


class QuadratureError(BISpectraError):
    """数值积分未收敛或被积函数返回 NaN。"""

    def __init__(
        self,
        message: str,
        *,
        best_estimate: float = float("nan"),
        error_estimate: float = float("inf"),
        levels_used: int = 0,
        abscissa: float | None = None,
    ) -> None:
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        self.levels_used = levels_used
        self.abscissa = abscissa


class PotentialError(BISpectraError):
    """网格上某一点的势能求值失败。"""

    def __init__(self, message: str, rho: float) -> None:
        super().__init__(message)
        self.rho = rho


class EigenSolveError(BISpectraError):
    """本征值求解失败（分解失败或迭代未收敛）。"""

    def __init__(
        self,
        message: str,
        *,
        ritz_values: Sequence[float] = (),
        residual_norms: Sequence[float] = (),
        iterations: int = 0,
    ) -> None:
        super().__init__(message)
        self.ritz_values = tuple(float(v) for v in ritz_values)
        self.residual_norms = tuple(float(r) for r in residual_norms)
        self.iterations = iterations
