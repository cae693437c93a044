"""按 ã 扫描能谱：单点求解、并行扫描、简并劈裂与结果持久化。"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from bispectra.eigensolve import (
    BISECTION_FULL_PRECISION,
    DEFAULT_TOL,
    EigenResult,
    LabelStrategy,
    PairCharacter,
    Spectrum,
    bound_state_shift,
    flag_spurious,
    label_levels,
    level_oscillations,
    shift_invert_bound_states,
    sturm_count,
    tridiag_smallest,
)
from bispectra.exceptions import BISpectraError, ConfigError, DomainError
from bispectra.log import get_logger
from bispectra.operators import Equation, RadialGrid, assemble_dirac, assemble_schrodinger
from bispectra.potentials import PotentialKind, PotentialSamples, PotentialSpec, sample_on_grid
from bispectra.quadrature import QuadratureConfig, born_a_tilde
from bispectra.reference import LevelLabel, dirac_ladder, dirac_state_count, schrodinger_ladder
from bispectra.utils import atomic_write_text, format_float, resolve_thread_count

logger = get_logger()

FIELDS = (
    "equation",
    "potential",
    "a_tilde",
    "Q",
    "angular",
    "n",
    "E_tilde",
    "residual",
    "rho_inf",
    "N",
)
_INT_FIELDS = frozenset({"angular", "n", "N"})
_STR_FIELDS = frozenset({"equation", "potential"})


@dataclass(frozen=True)
class SchedulePoint:
    a_tilde: float
    Q: float


def schedule_from_q(values: Iterable[float]) -> tuple[SchedulePoint, ...]:
    """ã = Q·ã_B。"""
    a_born = born_a_tilde()
    return tuple(SchedulePoint(float(q) * a_born, float(q)) for q in values)


def schedule_from_a_tilde(values: Iterable[float]) -> tuple[SchedulePoint, ...]:
    a_born = born_a_tilde()
    return tuple(SchedulePoint(float(a), float(a) / a_born) for a in values)


def q_range(start: float, end: float, step: float) -> tuple[float, ...]:
    """start, start + step, … 直到不超过 end（含端点）。"""
    if not step > 0:
        raise ConfigError(f"Q 步长必须为正: {step}", field="Q_step")
    if end < start:
        raise ConfigError(f"Q 终点 {end} 小于起点 {start}", field="Q_end")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


def q_log(start: float, end: float, points: int) -> tuple[float, ...]:
    """对数等距的 Q 序列，含两端。"""
    if not (start > 0 and end > 0):
        raise ConfigError("对数 Q 序列要求端点为正", field="Q_log")
    if points < 1:
        raise ConfigError(f"对数 Q 序列至少 1 个点: {points}", field="Q_log")
    if points == 1:
        return (float(start),)
    return tuple(float(q) for q in np.geomspace(start, end, points))


def default_screening(equation: Equation | str, potential: PotentialKind | str) -> bool:
    """只有 Dirac 离散化会产生伪解；Coulomb 本身就是参考，无需筛查。"""
    if Equation(equation) is not Equation.DIRAC:
        return False
    return PotentialKind(potential) is not PotentialKind.COULOMB


@dataclass(frozen=True)
class SweepConfig:
    equation: Equation
    potential: PotentialKind
    angular: tuple[int, ...]
    levels: int
    grid: RadialGrid
    schedule: tuple[SchedulePoint, ...]
    tol: float = DEFAULT_TOL
    labeling: LabelStrategy = LabelStrategy.ORDINAL
    screen_spurious: bool | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "equation", Equation(self.equation))
        object.__setattr__(self, "potential", PotentialKind(self.potential))
        object.__setattr__(self, "labeling", LabelStrategy(self.labeling))
        object.__setattr__(self, "angular", tuple(int(a) for a in self.angular))
        object.__setattr__(self, "schedule", tuple(self.schedule))
        if not self.schedule:
            raise ConfigError("ã 序列为空", field="schedule")
        for point in self.schedule:
            if not (point.Q > 0 and point.a_tilde > 0):
                raise ConfigError(f"Q 与 ã 必须为正: Q={point.Q}", field="schedule")
        minimum = 1 if self.equation is Equation.DIRAC else 0
        for value in self.angular:
            if value < minimum:
                name = "κ" if self.equation is Equation.DIRAC else "ℓ"
                raise ConfigError(f"{name} 必须 ≥ {minimum}: {value}", field="angular")
        if self.levels < 1:
            raise ConfigError(f"levels 至少为 1: {self.levels}", field="levels")
        if not self.tol > 0:
            raise ConfigError(f"tol 必须为正: {self.tol}", field="tol")

    @property
    def screens_spurious(self) -> bool:
        """未显式指定时，非 Coulomb 势的 Dirac 扫描默认筛查伪解。"""
        if self.screen_spurious is not None:
            return self.screen_spurious
        return default_screening(self.equation, self.potential)

    def potential_at(self, point: SchedulePoint) -> PotentialSpec:
        if self.potential is PotentialKind.COULOMB:
            return PotentialSpec.coulomb()
        return PotentialSpec(self.potential, point.a_tilde)

    def to_dict(self) -> dict:
        """展开全部默认值后的配置，写入 RunManifest。"""
        return {
            "equation": self.equation.value,
            "potential": self.potential.value,
            "angular": list(self.angular),
            "levels": self.levels,
            "rho_inf": self.grid.rho_inf,
            "grid": self.grid.n_points,
            "tol": self.tol,
            "labeling": self.labeling.value,
            "screen_spurious": self.screens_spurious,
            "Q": [point.Q for point in self.schedule],
            "a_tilde": [point.a_tilde for point in self.schedule],
        }


@dataclass(frozen=True)
class SweepRecord:
    """CSV/JSON 的一行。character 只保存在内存中，不参与比较与持久化。"""

    equation: str
    potential: str
    a_tilde: float
    Q: float
    angular: int
    n: int
    E_tilde: float
    residual: float
    rho_inf: float
    N: int
    character: str | None = field(default=None, compare=False)

    def row(self) -> dict:
        data = asdict(self)
        data.pop("character")
        return data


@dataclass(frozen=True)
class SweepFailure:
    a_tilde: float
    Q: float
    angular: int | None
    reason: str


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    failures: tuple[SweepFailure, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class ChannelSolution:
    spectrum: Spectrum
    result: EigenResult


def _solve_schrodinger(
    grid: RadialGrid, samples: PotentialSamples, ell: int, levels: int, tol: float
) -> tuple[EigenResult, tuple]:
    operator = assemble_schrodinger(grid, samples, ell)
    bound = sturm_count(operator, 0.0)
    if bound < levels:
        logger.warning("ℓ = %d 通道只有 %d 个束缚态（请求 %d 个）", ell, bound, levels)
    k = min(levels, bound)
    reference = schrodinger_ladder(ell, levels)
    if k == 0:
        empty = np.empty(0)
        return EigenResult(empty, empty, 0, np.empty((grid.n_points, 0))), reference
    result = tridiag_smallest(operator, k, tol=BISECTION_FULL_PRECISION)
    # 逆迭代向量的残差下限约为 ε·‖T‖，而 ‖T‖ ≈ 4/Δρ² 在细网格上很大
    scale = max(1.0, float(np.abs(operator.diagonal).max()) - 2.0 * operator.offdiagonal[0])
    if np.any(result.residual_norms > tol * scale):
        raise BISpectraError(
            f"ℓ = {ell} 通道残差 {result.residual_norms.max():.3e} 超过容差 {tol:.1e}"
        )
    return result, reference


def _solve_dirac(
    grid: RadialGrid, samples: PotentialSamples, kappa: int, levels: int, tol: float
) -> tuple[EigenResult, tuple]:
    operator = assemble_dirac(grid, samples, kappa)
    reference = dirac_ladder(kappa, levels)
    shift = bound_state_shift(min(item.energy for item in reference))
    result = shift_invert_bound_states(operator, dirac_state_count(levels), tol, shift)
    return result, reference


def reference_oscillations(
    equation: Equation,
    coulomb_samples: PotentialSamples,
    angular: int,
    levels: int,
    *,
    tol: float = DEFAULT_TOL,
    labeling: LabelStrategy | str = LabelStrategy.NEAREST,
) -> dict[LevelLabel, float]:
    """同一网格上 Coulomb 问题各能级本征向量的振荡能量。"""
    solver = _solve_dirac if Equation(equation) is Equation.DIRAC else _solve_schrodinger
    result, reference = solver(coulomb_samples.grid, coulomb_samples, angular, levels, tol)
    return level_oscillations(result, label_levels(result, reference, labeling))


def solve_channel(
    equation: Equation,
    samples: PotentialSamples,
    angular: int,
    levels: int,
    *,
    tol: float = DEFAULT_TOL,
    labeling: LabelStrategy | str = LabelStrategy.NEAREST,
    coulomb_samples: PotentialSamples | None = None,
    screening: dict[LevelLabel, float] | None = None,
) -> ChannelSolution:
    """在已采样的势能上求一个角量子数通道的前 levels 个主能级。

    给出 screening（按标签的 Coulomb 参考振荡能量）或 coulomb_samples 时，
    用本征向量的振荡能量筛查伪解。
    """
    equation = Equation(equation)
    grid = samples.grid
    solver = _solve_dirac if equation is Equation.DIRAC else _solve_schrodinger
    result, reference = solver(grid, samples, angular, levels, tol)
    spectrum = label_levels(result, reference, labeling)

    if screening is None and coulomb_samples is not None and len(spectrum):
        screening = reference_oscillations(
            equation, coulomb_samples, angular, levels, tol=tol, labeling=labeling
        )
    if screening is not None and len(spectrum):
        spectrum = flag_spurious(spectrum, level_oscillations(result, spectrum), screening)
    return ChannelSolution(spectrum, result)


def compute_spectrum(
    equation: Equation | str,
    potential: PotentialSpec,
    grid: RadialGrid,
    angular: int,
    levels: int,
    *,
    tol: float = DEFAULT_TOL,
    labeling: LabelStrategy | str = LabelStrategy.NEAREST,
    screen_spurious: bool | None = None,
    quadrature: QuadratureConfig | None = None,
) -> ChannelSolution:
    """采样势能并求解单个通道。screen_spurious 为 None 时按 default_screening 决定。"""
    samples = sample_on_grid(potential, grid, quadrature)
    if screen_spurious is None:
        screen_spurious = default_screening(equation, potential.kind)
    coulomb_samples = None
    if screen_spurious:
        coulomb_samples = sample_on_grid(PotentialSpec.coulomb(), grid)
    return solve_channel(
        Equation(equation),
        samples,
        angular,
        levels,
        tol=tol,
        labeling=labeling,
        coulomb_samples=coulomb_samples,
    )


def _records_for(
    cfg: SweepConfig, point: SchedulePoint, angular: int, spectrum: Spectrum
) -> list[SweepRecord]:
    return [
        SweepRecord(
            equation=cfg.equation.value,
            potential=cfg.potential.value,
            a_tilde=point.a_tilde,
            Q=point.Q,
            angular=angular,
            n=level.label.n,
            E_tilde=level.energy,
            residual=level.residual,
            rho_inf=cfg.grid.rho_inf,
            N=cfg.grid.n_points,
            character=level.character.value if level.character else None,
        )
        for level in spectrum
    ]


def _run_point(
    cfg: SweepConfig,
    point: SchedulePoint,
    screening: dict[int, dict[LevelLabel, float]],
) -> tuple[list[SweepRecord], list[SweepFailure]]:
    records: list[SweepRecord] = []
    failures: list[SweepFailure] = []
    try:
        samples = sample_on_grid(cfg.potential_at(point), cfg.grid)
    except BISpectraError as exc:
        logger.warning("Q = %g: 势能采样失败: %s", point.Q, exc)
        return records, [SweepFailure(point.a_tilde, point.Q, None, str(exc))]

    for angular in cfg.angular:
        try:
            solution = solve_channel(
                cfg.equation,
                samples,
                angular,
                cfg.levels,
                tol=cfg.tol,
                labeling=cfg.labeling,
                screening=screening.get(angular),
            )
        except BISpectraError as exc:
            logger.warning("Q = %g, 通道 %d 求解失败: %s", point.Q, angular, exc)
            failures.append(SweepFailure(point.a_tilde, point.Q, angular, str(exc)))
            continue
        records.extend(_records_for(cfg, point, angular, solution.spectrum))
    logger.info("Q = %g (ã = %.6g): %d 条记录", point.Q, point.a_tilde, len(records))
    return records, failures


def sort_key(record: SweepRecord) -> tuple:
    return (record.Q, record.angular, record.n, record.E_tilde)


def _screening_references(cfg: SweepConfig) -> dict[int, dict[LevelLabel, float]]:
    """Coulomb 参考振荡能量与 ã 无关，每个通道只求一次。"""
    coulomb_samples = sample_on_grid(PotentialSpec.coulomb(), cfg.grid)
    references: dict[int, dict[LevelLabel, float]] = {}
    for angular in cfg.angular:
        try:
            references[angular] = reference_oscillations(
                cfg.equation,
                coulomb_samples,
                angular,
                cfg.levels,
                tol=cfg.tol,
                labeling=cfg.labeling,
            )
        except BISpectraError as exc:
            logger.warning("通道 %d 的 Coulomb 参考求解失败，跳过伪解筛查: %s", angular, exc)
    return references


def run_sweep(cfg: SweepConfig, threads: int | None = None) -> SweepResult:
    """对调度中的每个 ã 独立求解；单点失败只记录，不中断扫描。

    Args:
        cfg: 扫描配置。
        threads: 工作线程数，默认读取 BI_SPECTRA_THREADS。
    """
    if not cfg.angular:
        return SweepResult(())
    workers = threads if threads else resolve_thread_count()
    screening = _screening_references(cfg) if cfg.screens_spurious else {}

    logger.info(
        "开始扫描: %s / %s, %d 个 ã, 通道 %s, %d 个线程",
        cfg.equation.value,
        cfg.potential.value,
        len(cfg.schedule),
        list(cfg.angular),
        workers,
    )
    records: list[SweepRecord] = []
    failures: list[SweepFailure] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_point, cfg, point, screening) for point in cfg.schedule
        ]
        for future in futures:
            point_records, point_failures = future.result()
            records.extend(point_records)
            failures.extend(point_failures)

    records.sort(key=sort_key)
    failures.sort(key=lambda f: (f.Q, -1 if f.angular is None else f.angular))
    return SweepResult(tuple(records), tuple(failures))


@dataclass(frozen=True)
class SplittingPoint:
    """某个 ã 处的劈裂；成员缺失时 delta 为 None。"""

    a_tilde: float
    Q: float
    delta: float | None

    @property
    def gap(self) -> bool:
        return self.delta is None


def _pair_difference(members: list[SweepRecord], signed: bool) -> float | None:
    """Dirac 同一 (n, κ) 格内的两个成员。signed 时为 平滑 − 交错。"""
    if len(members) != 2:
        return None
    lower, upper = sorted(members, key=lambda r: r.E_tilde)
    if not signed:
        return abs(upper.E_tilde - lower.E_tilde)
    by_character = {r.character: r for r in members}
    smooth = by_character.get(PairCharacter.SMOOTH.value)
    staggered = by_character.get(PairCharacter.STAGGERED.value)
    if smooth is None or staggered is None:
        return None
    return smooth.E_tilde - staggered.E_tilde


def degeneracy_splitting(
    records: Sequence[SweepRecord], n: int, kappa: int, *, signed: bool = False
) -> list[SplittingPoint]:
    """每个 ã 处 (n, κ) 能级对的劈裂 ΔẼ。

    Dirac 记录取同一 κ 通道内的两个成员；Schrödinger 记录比较 ℓ = κ−1 与 ℓ = κ，
    signed 时为 Ẽ(ℓ=κ−1) − Ẽ(ℓ=κ)。
    """
    if kappa < 1 or n <= kappa:
        raise DomainError(f"不存在 n={n}, κ={kappa} 的能级对")
    points: dict[tuple[float, float], list[SweepRecord]] = {}
    for record in records:
        points.setdefault((record.Q, record.a_tilde), [])
        if record.n != n:
            continue
        if record.equation == Equation.DIRAC.value and record.angular == kappa:
            points[(record.Q, record.a_tilde)].append(record)
        elif record.equation == Equation.SCHRODINGER.value and record.angular in (
            kappa - 1,
            kappa,
        ):
            points[(record.Q, record.a_tilde)].append(record)

    series: list[SplittingPoint] = []
    for (q, a_tilde), members in sorted(points.items()):
        if members and members[0].equation == Equation.SCHRODINGER.value:
            by_ell = {r.angular: r for r in members}
            delta = None
            if len(by_ell) == 2 and len(members) == 2:
                diff = by_ell[kappa - 1].E_tilde - by_ell[kappa].E_tilde
                delta = diff if signed else abs(diff)
        else:
            delta = _pair_difference(members, signed)
        if delta is None:
            logger.warning("Q = %g: n=%d κ=%d 的能级对缺少成员", q, n, kappa)
        series.append(SplittingPoint(a_tilde, q, delta))
    return series


def _format_cell(name: str, value) -> str:
    if name in _STR_FIELDS or name in _INT_FIELDS:
        return str(value)
    return format_float(value)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FIELDS)
    for record in records:
        row = record.row()
        writer.writerow([_format_cell(name, row[name]) for name in FIELDS])
    return buffer.getvalue()


def records_to_json(records: Sequence[SweepRecord]) -> str:
    return json.dumps([record.row() for record in records], indent=2) + "\n"


def _format_of(path: Path, fmt: str | None) -> str:
    fmt = (fmt or path.suffix.lstrip(".") or "csv").lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"不支持的输出格式: {fmt}", field="format")
    return fmt


def write_records(
    records: Sequence[SweepRecord], path: str | Path, fmt: str | None = None
) -> Path:
    """按固定列序写 CSV（浮点 17 位有效数字）或同名字段的 JSON。"""
    path = Path(path)
    fmt = _format_of(path, fmt)
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    atomic_write_text(path, text)
    logger.info("已写入 %d 条记录: %s", len(records), path)
    return path


def _coerce(row: dict) -> SweepRecord:
    values = {}
    for name in FIELDS:
        if name not in row:
            raise ConfigError(f"记录缺少字段 {name}", field=name)
        raw = row[name]
        if name in _STR_FIELDS:
            values[name] = str(raw)
        elif name in _INT_FIELDS:
            values[name] = int(raw)
        else:
            values[name] = float(raw)
    return SweepRecord(**values)


def read_records(path: str | Path, fmt: str | None = None) -> list[SweepRecord]:
    """write_records 的逆操作。"""
    path = Path(path)
    fmt = _format_of(path, fmt)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BISpectraError(f"读取 {path} 失败: {exc}") from exc
    if fmt == "json":
        rows = json.loads(text)
    else:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != FIELDS:
            raise ConfigError(f"CSV 表头与约定不一致: {reader.fieldnames}", field="header")
        rows = list(reader)
    return [_coerce(row) for row in rows]
