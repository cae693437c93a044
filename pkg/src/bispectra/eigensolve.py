"""本征值求解与能级标注。

- Schrödinger：对称三对角矩阵，默认用 Sturm 序列二分（LAPACK stebz）求最小的 k 个本征值，
  Lanczos（ARPACK）作为交叉校验。
- Dirac：束缚态位于谱的内部（1/α 下方，负能连续谱之上），用 (D − σI)⁻¹ 上的
  分块 Lanczos 提取离 σ 最近的本征值。带状矩阵用 LAPACK gbtrf/gbtrs 分解求解。
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.linalg.lapack import dgbtrf, dgbtrs
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from bispectra.exceptions import DomainError, EigenSolveError
from bispectra.log import get_logger
from bispectra.operators import DIRAC_BANDWIDTH, DiracOperator, SchrodingerOperator
from bispectra.quadrature import alpha
from bispectra.reference import LevelLabel, ReferenceLevel, dirac_eigenvalue_from_tilde

logger = get_logger()

DEFAULT_TOL = 1e-10
# 默认位移：静能边界下方 10⁻³/α，以相对边界的偏移表示
DEFAULT_EDGE_SHIFT = -1e-3 / alpha()
_GUARD_VECTORS = 2
_MIN_BASIS = 120
_BASIS_BLOCKS = 8
# 流水线位移取在最低参考能级下方的比例
GROUND_SHIFT_MARGIN = 0.5
_SHIFT_RETRIES = 3
_SPURIOUS_FACTOR = 10.0
# stebz 的 abstol 取最小正规数的两倍：二分一直进行到相对 ulp 级
BISECTION_FULL_PRECISION = 2.0 * np.finfo(float).tiny


class EigenTarget(str, enum.Enum):
    SMALLEST_ALGEBRAIC = "smallest"
    NEAREST_TO_SHIFT = "nearest"


@dataclass(frozen=True)
class EigenRequest:
    """求解请求。shift 只在 NEAREST_TO_SHIFT 时使用，单位与矩阵本征值相同。"""

    count: int
    target: EigenTarget = EigenTarget.SMALLEST_ALGEBRAIC
    shift: float | None = None
    tol: float = DEFAULT_TOL
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise DomainError(f"本征值个数至少为 1: {self.count}")
        if not self.tol > 0:
            raise DomainError(f"残差容差必须为正: {self.tol}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations 至少为 1: {self.max_iterations}")


@dataclass(frozen=True, eq=False)
class EigenResult:
    """升序排列的本征值及诊断信息。

    edge_offsets 只对 Dirac 结果存在：μ = λ − 1/α，直接由分解得到，
    不经过 λ ≈ 137 这一步，因此保留完整的双精度。
    """

    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    iterations: int
    eigenvectors: np.ndarray | None = None
    edge_offsets: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def tilde_energies(self) -> np.ndarray:
        """以 Ẽ 表示的能量。"""
        if self.edge_offsets is not None:
            return (2.0 / alpha()) * self.edge_offsets
        return np.asarray(self.eigenvalues, dtype=float)


def _residuals(matvec, vectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    norms = np.empty(values.size)
    for i in range(values.size):
        x = vectors[:, i]
        norms[i] = np.linalg.norm(matvec(x) - values[i] * x) / np.linalg.norm(x)
    return norms


def tridiag_smallest(
    operator: SchrodingerOperator, k: int, tol: float = BISECTION_FULL_PRECISION
) -> EigenResult:
    """Sturm 序列二分求最小的 k 个本征值，特征向量由逆迭代得到。

    Args:
        operator: 对称三对角算子。
        k: 本征值个数，1 ≤ k ≤ N。
        tol: 二分区间的绝对宽度。默认二分到双精度极限；≤ 0 时由 LAPACK 取
            ε·‖T‖，细网格上这会比能级差异本身还大。
    """
    if not 1 <= k <= operator.size:
        raise DomainError(f"要求 1 ≤ k ≤ N: k={k}, N={operator.size}")
    values, vectors = eigh_tridiagonal(
        operator.diagonal,
        operator.offdiagonal,
        select="i",
        select_range=(0, k - 1),
        tol=tol,
        lapack_driver="stebz",
    )
    residuals = _residuals(operator.matvec, vectors, values)
    logger.debug("stebz: k = %d, 最大残差 %.3e", k, float(residuals.max()))
    return EigenResult(values, residuals, 0, vectors)


def sturm_count(operator: SchrodingerOperator, x: float) -> int:
    """T 中严格小于 x 的本征值个数（LDLᵀ 惯性计数）。"""
    d = operator.diagonal - x
    e2 = operator.offdiagonal**2
    # 零主元换成一个极小负数，与 LAPACK dlaneg 的约定一致
    tiny = np.finfo(float).tiny
    count = 0
    q = d[0]
    for i in range(operator.size):
        if i > 0:
            q = d[i] - e2[i - 1] / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def lanczos_lowest(
    operator: LinearOperator | SchrodingerOperator, req: EigenRequest
) -> EigenResult:
    """ARPACK 隐式重启 Lanczos 求代数最小的 count 个本征值。

    Raises:
        EigenSolveError: 未在 max_iterations 次重启内收敛，或残差超过 tol。
    """
    if req.target is not EigenTarget.SMALLEST_ALGEBRAIC:
        raise DomainError("lanczos_lowest 只支持 SMALLEST_ALGEBRAIC 目标")
    if isinstance(operator, SchrodingerOperator):
        operator = operator.as_linear_operator()
    n = operator.shape[0]
    if req.count >= n:
        raise DomainError(f"ARPACK 要求 count < N: count={req.count}, N={n}")

    calls = 0

    def counted(x: np.ndarray) -> np.ndarray:
        nonlocal calls
        calls += 1
        return operator.matvec(x)

    counted_op = LinearOperator(operator.shape, matvec=counted, dtype=float)
    v0 = np.random.default_rng(req.seed).standard_normal(n)
    ncv = min(n, max(2 * req.count + 1, 40))
    try:
        values, vectors = eigsh(
            counted_op,
            k=req.count,
            which="SA",
            v0=v0,
            ncv=ncv,
            maxiter=req.max_iterations,
            tol=0.0,
        )
    except ArpackNoConvergence as exc:
        residuals = _residuals(operator.matvec, exc.eigenvectors, exc.eigenvalues)
        raise EigenSolveError(
            f"Lanczos 在 {req.max_iterations} 次重启内未收敛，"
            f"已收敛 {exc.eigenvalues.size}/{req.count} 个",
            ritz_values=exc.eigenvalues,
            residual_norms=residuals,
            iterations=calls,
        ) from exc
    except ArpackError as exc:
        raise EigenSolveError(f"ARPACK 失败: {exc}", iterations=calls) from exc

    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]
    residuals = _residuals(operator.matvec, vectors, values)
    if np.any(residuals > req.tol):
        raise EigenSolveError(
            f"Lanczos 残差 {residuals.max():.3e} 超过容差 {req.tol:.1e}",
            ritz_values=values,
            residual_norms=residuals,
            iterations=calls,
        )
    logger.debug("Lanczos: %d 次矩阵向量乘，最大残差 %.3e", calls, residuals.max())
    return EigenResult(values, residuals, calls, vectors)


class _ShiftedInverse:
    """(D − I/α − τI)⁻¹ 的带状 LU 分解，τ 是相对静能边界的位移。"""

    def __init__(self, operator: DiracOperator, edge_shift: float) -> None:
        self.edge_shift = edge_shift
        ab = operator.lu_band_storage(edge_shift)
        lu, ipiv, info = dgbtrf(ab, DIRAC_BANDWIDTH, DIRAC_BANDWIDTH)
        if info < 0:
            raise EigenSolveError(f"gbtrf 参数错误: info = {info}")
        if info > 0:
            raise ZeroDivisionError(f"U[{info - 1}, {info - 1}] 为零")
        self._lu = lu
        self._ipiv = ipiv

    def solve(self, block: np.ndarray) -> np.ndarray:
        x, info = dgbtrs(
            self._lu, DIRAC_BANDWIDTH, DIRAC_BANDWIDTH, block, self._ipiv
        )
        if info != 0:
            raise EigenSolveError(f"gbtrs 失败: info = {info}")
        return x


def _factorize(operator: DiracOperator, edge_shift: float) -> _ShiftedInverse:
    """分解失败（位移恰为本征值）时按相对 1e-8 的步长扰动位移重试。"""
    shift = edge_shift
    for attempt in range(_SHIFT_RETRIES + 1):
        try:
            return _ShiftedInverse(operator, shift)
        except ZeroDivisionError as exc:
            logger.debug("位移 τ = %.17g 处分解失败 (%s)，第 %d 次重试", shift, exc, attempt + 1)
            shift = edge_shift * (1.0 + 1e-8 * (attempt + 1))
    raise EigenSolveError(
        f"位移 σ 附近的带状分解连续失败 {_SHIFT_RETRIES + 1} 次",
        iterations=_SHIFT_RETRIES + 1,
    )


def _orthogonalize(block: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """对 basis 做两遍 Gram-Schmidt 投影后 QR，丢弃数值上线性相关的列。"""
    for _ in range(2):
        block = block - basis @ (basis.T @ block)
    q, r = np.linalg.qr(block)
    diag = np.abs(np.diag(r))
    scale = max(1.0, float(diag.max(initial=0.0)))
    return q[:, diag > 1e-12 * scale]


def bound_state_shift(lowest_tilde: float, margin: float = GROUND_SHIFT_MARGIN) -> float:
    """位于最低参考能级 Ẽ 下方 margin·|Ẽ| 处的位移 σ（λ 单位）。

    σ 在基态之下时，离 σ 最近的 k 个本征值就是最低的 k 个束缚态；
    边界附近的默认位移使 n ≥ 3 的能级挤在一起，块迭代的相对间隙只有 10⁻³。
    """
    if not lowest_tilde < 0:
        raise DomainError(f"最低参考能级必须为负: {lowest_tilde}")
    if not margin > 0:
        raise DomainError(f"margin 必须为正: {margin}")
    return dirac_eigenvalue_from_tilde((1.0 + margin) * lowest_tilde)


def shift_invert_bound_states(
    operator: DiracOperator,
    k: int,
    tol: float = DEFAULT_TOL,
    shift: float | None = None,
    *,
    max_iterations: int = 200,
    seed: int = 0,
) -> EigenResult:
    """求 1/α 下方离位移 σ 最近的 k 个束缚态。

    在 (D − σI)⁻¹ 上做带厚重启的分块 Lanczos（Rayleigh-Ritz），块宽 k + 2；
    近简并的能级对需要分块才能同时收敛。收敛判据是原矩阵上的直接残差
    ‖D y − λ y‖ ≤ tol。

    Args:
        operator: Dirac 带状算子。
        k: 需要的束缚态个数。
        tol: 残差容差。
        shift: 位移 σ，默认 1/α − 10⁻³/α。
        max_iterations: 最大重启次数。
        seed: 初始块的随机种子。

    Returns:
        升序排列的 λ，以及相对边界的偏移 μ = λ − 1/α。μ ≥ 0 的解不是束缚态，
        会被丢弃并记录警告。
    """
    size = operator.size
    block_size = k + _GUARD_VECTORS
    if not 1 <= k or block_size > size:
        raise DomainError(f"要求 1 ≤ k 且 k + {_GUARD_VECTORS} ≤ 2N: k={k}, 2N={size}")
    if not tol > 0:
        raise DomainError(f"残差容差必须为正: {tol}")

    edge_shift = DEFAULT_EDGE_SHIFT if shift is None else shift - 1.0 / alpha()
    inverse = _factorize(operator, edge_shift)
    tau = inverse.edge_shift
    edge_matrix = operator.to_sparse(edge=True)

    max_basis = min(size, max(_MIN_BASIS, _BASIS_BLOCKS * block_size))
    n_keep = max(block_size, max_basis // 2)

    rng = np.random.default_rng(seed)
    basis = _orthogonalize(rng.standard_normal((size, block_size)), np.empty((size, 0)))
    images = inverse.solve(basis)
    candidates = images
    solves = 1

    for restart in range(max_iterations):
        while basis.shape[1] + block_size <= max_basis:
            block = _orthogonalize(candidates, basis)
            if block.shape[1] == 0:
                break
            block_images = inverse.solve(block)
            solves += 1
            basis = np.hstack([basis, block])
            images = np.hstack([images, block_images])
            candidates = block_images

        projected = basis.T @ images
        theta, coeffs = np.linalg.eigh(0.5 * (projected + projected.T))
        order = np.argsort(-np.abs(theta))
        theta, coeffs = theta[order], coeffs[:, order]

        wanted = theta[:block_size]
        ritz = basis @ coeffs[:, :block_size]
        offsets = tau + 1.0 / wanted
        residuals = np.linalg.norm(edge_matrix @ ritz - ritz * offsets, axis=0)
        logger.debug(
            "分块 Lanczos 第 %d 次重启: 基 %d 维, 前 %d 个残差最大 %.3e",
            restart,
            basis.shape[1],
            k,
            float(residuals[:k].max()),
        )
        if np.all(residuals[:k] <= tol):
            break

        keep = min(n_keep, theta.size)
        basis = basis @ coeffs[:, :keep]
        images = images @ coeffs[:, :keep]
        candidates = images[:, :block_size]
    else:
        raise EigenSolveError(
            f"分块 Lanczos 在 {max_iterations} 次重启内未收敛",
            ritz_values=1.0 / alpha() + offsets[:k],
            residual_norms=residuals[:k],
            iterations=solves,
        )

    offsets, residuals, ritz = offsets[:k], residuals[:k], ritz[:, :k]
    order = np.argsort(offsets)
    offsets, residuals, ritz = offsets[order], residuals[order], ritz[:, order]

    bound = offsets < 0.0
    if not bound.all():
        logger.warning(
            "丢弃 %d 个位于静能边界之上的本征值（非束缚态）", int((~bound).sum())
        )
        offsets, residuals, ritz = offsets[bound], residuals[bound], ritz[:, bound]

    logger.debug("分块 Lanczos 收敛: %d 次块求解", solves)
    return EigenResult(
        eigenvalues=1.0 / alpha() + offsets,
        residual_norms=residuals,
        iterations=solves,
        eigenvectors=ritz,
        edge_offsets=offsets,
    )


def oscillation_energy(vector: np.ndarray, components: int = 1) -> float:
    """Σ (x_{j+1} − x_j)²，按分量分别计算后求和；向量先归一化。

    Dirac 本征向量是 (u₁, v₁, u₂, v₂, …) 交错排列，components = 2。
    """
    x = np.asarray(vector, dtype=float)
    x = x / np.linalg.norm(x)
    return float(sum(np.sum(np.diff(x[c::components]) ** 2) for c in range(components)))


class PairCharacter(str, enum.Enum):
    SMOOTH = "smooth"
    STAGGERED = "staggered"


def stagger(vector: np.ndarray) -> np.ndarray:
    """作用 J = diag((−1)^j, −(−1)^j)：u_j → (−1)^j u_j，v_j → −(−1)^j v_j。

    中心差分矩阵满足 J D(κ) J = D(−κ)，J 把 κ 的逐点变号解映成 −κ 的平滑解。
    """
    x = np.array(vector, dtype=float)
    sign = np.where(np.arange(x.size // 2) % 2 == 0, 1.0, -1.0)
    x[0::2] *= sign
    x[1::2] *= -sign
    return x


def staggering_fraction(vector: np.ndarray) -> float:
    """两个分量上逐点变号部分所占的比例，取值 [0, 1]。

    对每个分量 x 计算 Σ(x_{j+1} − x_j)² / Σ[(x_{j+1} + x_j)² + (x_{j+1} − x_j)²]
    的合并比值；平滑向量接近 0，逐点变号向量接近 1。
    """
    x = np.asarray(vector, dtype=float)
    staggered = 0.0
    total = 0.0
    for c in range(2):
        part = x[c::2]
        staggered += float(np.sum((part[1:] - part[:-1]) ** 2))
        total += 2.0 * float(np.sum(part[1:] ** 2 + part[:-1] ** 2))
    return staggered / total if total > 0 else 0.0


def pair_character(vector: np.ndarray) -> PairCharacter:
    """判断 Dirac 本征向量（u、v 两个分量）是平滑的还是逐点变号的。"""
    if staggering_fraction(vector) <= 0.5:
        return PairCharacter.SMOOTH
    return PairCharacter.STAGGERED


def _pair_characters(fractions: Sequence[float]) -> list[PairCharacter]:
    """同一格内的两个成员：变号比例较大的为 STAGGERED，另一个为 SMOOTH。

    近简并的一对可能被求成两者的任意旋转，逐个分类会得到两个相同的性质。
    """
    if len(fractions) != 2:
        return [
            PairCharacter.STAGGERED if f > 0.5 else PairCharacter.SMOOTH for f in fractions
        ]
    if fractions[0] > fractions[1]:
        return [PairCharacter.STAGGERED, PairCharacter.SMOOTH]
    return [PairCharacter.SMOOTH, PairCharacter.STAGGERED]


class LabelStrategy(str, enum.Enum):
    NEAREST = "nearest"
    ORDINAL = "ordinal"


@dataclass(frozen=True)
class LabeledLevel:
    label: LevelLabel
    energy: float
    residual: float
    ambiguous: bool = False
    character: PairCharacter | None = None
    spurious: bool = False


@dataclass(frozen=True)
class Spectrum:
    """带标签的束缚态能级，按能量升序。"""

    levels: tuple[LabeledLevel, ...] = ()
    iterations: int = 0
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self) -> Iterator[LabeledLevel]:
        return iter(self.levels)

    def energies(self) -> np.ndarray:
        return np.array([level.energy for level in self.levels])

    @property
    def has_ambiguity(self) -> bool:
        return any(level.ambiguous for level in self.levels)


def _cells(reference: Sequence[ReferenceLevel]) -> list[tuple[float, list[LevelLabel]]]:
    """把能量相同的参考条目并为一格；格内标签按子标签升序。"""
    cells: list[tuple[float, list[LevelLabel]]] = []
    for item in reference:
        if cells and cells[-1][0] == item.energy:
            cells[-1][1].append(item.label)
        else:
            cells.append((item.energy, [item.label]))
    for _, labels in cells:
        labels.sort(key=lambda lab: -1 if lab.sublabel is None else lab.sublabel)
    return cells


def _label_nearest(
    energies: np.ndarray, reference: Sequence[ReferenceLevel]
) -> list[tuple[int, LevelLabel, bool]]:
    cells = _cells(reference)
    centres = np.array([energy for energy, _ in cells])
    members: dict[int, list[int]] = {}
    for i, energy in enumerate(energies):
        distance = np.abs(centres - energy)
        # argmin 取第一个最小值；参考按 n 升序，平局即归于较低的 n
        members.setdefault(int(np.argmin(distance)), []).append(i)

    labeled: list[tuple[int, LevelLabel, bool]] = []
    for cell_index, indices in members.items():
        centre, labels = cells[cell_index]
        indices.sort(key=lambda i: energies[i])
        ambiguous = False
        if len(indices) > len(labels):
            distance = sorted(abs(energies[i] - centre) for i in indices)
            near, far = distance[len(labels) - 1], distance[len(labels)]
            ambiguous = far < 2.0 * near
            logger.warning(
                "%d 个本征值落在参考能级 %.10g 的同一格（容量 %d），间距比 %.3g",
                len(indices),
                centre,
                len(labels),
                far / near if near > 0 else math.inf,
            )
        for slot, i in enumerate(indices):
            overflow = slot >= len(labels)
            label = labels[min(slot, len(labels) - 1)]
            labeled.append((i, label, ambiguous or overflow))
    labeled.sort(key=lambda item: item[0])
    return labeled


def _label_ordinal(
    energies: np.ndarray, reference: Sequence[ReferenceLevel]
) -> list[tuple[int, LevelLabel, bool]]:
    ordered = sorted(reference, key=lambda item: item.energy)
    if energies.size > len(ordered):
        logger.debug("按序标注: 丢弃 %d 个超出参考列表的本征值", energies.size - len(ordered))
    return [(i, ordered[i].label, False) for i in range(min(energies.size, len(ordered)))]


def label_levels(
    result: EigenResult,
    reference: Sequence[ReferenceLevel],
    strategy: LabelStrategy | str = LabelStrategy.NEAREST,
) -> Spectrum:
    """给本征值打上 Coulomb 参考能级的标签。

    nearest：每个本征值取最近的参考能级，平局归于较低的 n；同一 (n, κ) 格内的
    成对能级按能量升序依次取子标签。超出格容量且间距比小于 2 时标记为 ambiguous。
    ordinal：按升序逐个对应参考列表（1 个 n = κ 能级，其后每个 n 一对），
    适合在大 ã 下跟踪能级。
    """
    strategy = LabelStrategy(strategy)
    energies = result.tilde_energies()
    order = np.argsort(energies, kind="stable")
    energies = energies[order]
    if energies.size == 0 or not reference:
        return Spectrum((), result.iterations)

    if strategy is LabelStrategy.NEAREST:
        assignments = _label_nearest(energies, reference)
    else:
        assignments = _label_ordinal(energies, reference)

    vectors = result.eigenvectors
    characters: dict[int, PairCharacter] = {}
    if vectors is not None and result.edge_offsets is not None:
        cells: dict[tuple[int, int], list[int]] = {}
        for i, label, _ in assignments:
            cells.setdefault((label.n, label.angular), []).append(i)
        for members in cells.values():
            fractions = [staggering_fraction(vectors[:, order[i]]) for i in members]
            characters.update(zip(members, _pair_characters(fractions)))

    levels = []
    for i, label, ambiguous in assignments:
        character = characters.get(i)
        levels.append(
            LabeledLevel(
                label=label,
                energy=float(energies[i]),
                residual=float(result.residual_norms[order[i]]),
                ambiguous=ambiguous,
                character=character,
            )
        )
    diagnostics = tuple(
        f"{level.label}: 标签存在歧义" for level in levels if level.ambiguous
    )
    return Spectrum(tuple(levels), result.iterations, diagnostics)


def level_oscillations(result: EigenResult, spectrum: Spectrum) -> dict[LevelLabel, float]:
    """按标签给出每个能级本征向量的振荡能量。

    STAGGERED 的 Dirac 能级先用 J 变回平滑形式，否则倍频解总会被当成伪解。
    """
    if result.eigenvectors is None:
        raise DomainError("需要本征向量才能计算振荡能量")
    components = 2 if result.edge_offsets is not None else 1
    energies = result.tilde_energies()
    oscillations: dict[LevelLabel, float] = {}
    for level in spectrum:
        index = int(np.argmin(np.abs(energies - level.energy)))
        vector = result.eigenvectors[:, index]
        if level.character is PairCharacter.STAGGERED:
            vector = stagger(vector)
        oscillations[level.label] = oscillation_energy(vector, components)
    return oscillations


def flag_spurious(
    spectrum: Spectrum,
    oscillations: dict[LevelLabel, float],
    reference_oscillations: dict[LevelLabel, float],
    factor: float = _SPURIOUS_FACTOR,
) -> Spectrum:
    """振荡能量超过同标签 Coulomb 参考态 factor 倍的能级标记为 spurious（不丢弃）。"""
    levels = []
    notes = list(spectrum.diagnostics)
    for level in spectrum:
        mine = oscillations.get(level.label)
        ref = reference_oscillations.get(level.label)
        spurious = mine is not None and ref is not None and mine > factor * ref
        if spurious:
            logger.warning(
                "%s 疑似伪解: 振荡能量 %.3e > %g × 参考值 %.3e", level.label, mine, factor, ref
            )
            notes.append(f"{level.label}: 疑似伪解（振荡能量 {mine:.3e}）")
        levels.append(
            LabeledLevel(
                level.label,
                level.energy,
                level.residual,
                level.ambiguous,
                level.character,
                spurious,
            )
        )
    return Spectrum(tuple(levels), spectrum.iterations, tuple(notes))


def convergence_order(
    values: Sequence[float], grids: Sequence[int], exact: float | None = None
) -> float:
    """由网格加密序列估计收敛阶 p（误差 ∝ N^{−p}）。

    给定 exact 时对 log|误差| 与 log N 做最小二乘拟合；否则要求三个等比网格，
    用 Richardson 比值 (v₁ − v₀)/(v₂ − v₁) = r^p。
    """
    values = np.asarray(values, dtype=float)
    grids = np.asarray(grids, dtype=float)
    if values.size != grids.size or values.size < 2:
        raise DomainError("至少需要两组 (网格, 数值)")
    if exact is not None:
        errors = np.abs(values - exact)
        if np.any(errors == 0):
            raise DomainError("误差为零，无法估计收敛阶")
        slope = np.polyfit(np.log(grids), np.log(errors), 1)[0]
        return float(-slope)
    if values.size != 3:
        raise DomainError("没有精确值时需要恰好三个网格")
    ratio = grids[1] / grids[0]
    if not math.isclose(grids[2] / grids[1], ratio, rel_tol=1e-12):
        raise DomainError("Richardson 估计要求等比网格")
    first, second = values[1] - values[0], values[2] - values[1]
    if first == 0 or second == 0 or first * second < 0:
        raise DomainError("数值序列不单调，无法估计收敛阶")
    return float(math.log(first / second) / math.log(ratio))
