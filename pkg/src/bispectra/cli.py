"""命令行入口：spectrum / validate / sweep。

退出码：0 成功，1 数值计算失败，2 参数或配置错误。
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from bispectra.eigensolve import DEFAULT_TOL, LabelStrategy, Spectrum, convergence_order
from bispectra.exceptions import BISpectraError, ConfigError, EigenSolveError
from bispectra.log import configure_logging, get_logger
from bispectra.operators import Equation, RadialGrid
from bispectra.potentials import PotentialKind, PotentialSpec
from bispectra.quadrature import born_a_tilde
from bispectra.reference import (
    dirac_coulomb_exact,
    dirac_state_count,
    tilde_from_dirac_eigenvalue,
)
from bispectra.sweep import (
    SweepConfig,
    SweepRecord,
    compute_spectrum,
    default_screening,
    q_log,
    q_range,
    run_sweep,
    schedule_from_a_tilde,
    schedule_from_q,
    write_records,
)
from bispectra.utils import atomic_write_text, canonical_json, config_digest, format_float
from bispectra.validation import (
    DEFAULT_GRID,
    DEFAULT_LEVELS,
    DEFAULT_RHO_INF,
    load_sweep_config,
    make_grid,
    require_int,
    require_positive,
    validate_output_file,
)
from bispectra.version import __version__

logger = get_logger()

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

# Dirac 基态与解析值的允许偏差
GROUND_STATE_TOL = 1e-9


@dataclass(frozen=True)
class RunManifest:
    """与输出文件一同写出的运行清单。input_hash 只覆盖配置，不含时间戳。"""

    config: dict[str, Any]
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    input_hash: str = ""

    def __post_init__(self) -> None:
        if not self.input_hash:
            object.__setattr__(self, "input_hash", config_digest(self.config))

    @staticmethod
    def path_for(output: Path) -> Path:
        return output.with_name(output.name + ".manifest.json")

    def write(self, output: Path) -> Path:
        path = self.path_for(output)
        atomic_write_text(path, canonical_json(asdict(self)) + "\n")
        return path


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="输出详细日志（DEBUG 级别）"
    )
    parser.add_argument("-q", "--quiet", action="store_true", help="只输出错误信息")


def _add_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--rho-inf",
        type=float,
        default=DEFAULT_RHO_INF,
        help=f"人为无穷远 ρ∞，默认 {DEFAULT_RHO_INF:g}",
    )
    parser.add_argument(
        "--grid", type=int, default=DEFAULT_GRID, help=f"网格点数 N，默认 {DEFAULT_GRID}"
    )
    parser.add_argument(
        "--tol", type=float, default=DEFAULT_TOL, help=f"本征对残差容差，默认 {DEFAULT_TOL:g}"
    )


def _add_output(parser: argparse.ArgumentParser, *, required: bool = False) -> None:
    parser.add_argument("--out", required=required, help="结果文件路径（同时写出 RunManifest）")
    parser.add_argument(
        "--format", choices=["csv", "json"], default=None, help="输出格式，默认按扩展名，否则 csv"
    )


def create_parser() -> argparse.ArgumentParser:
    """创建命令行参数解析器。"""
    parser = argparse.ArgumentParser(
        prog="bi-spectra",
        description=(
            "Born-Infeld 氢原子能谱计算工具。\n\n"
            "示例:\n"
            "  bi-spectra spectrum --equation dirac --potential coulomb --kappa 1 --levels 3\n"
            "  bi-spectra spectrum --equation schrodinger --potential bi-self --Q 1 --ell 0\n"
            "  bi-spectra validate --n-max 3 --kappa-max 2\n"
            "  bi-spectra sweep --config sweep.json --out sweep.csv --plot sweep.svg"
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
        help="显示版本信息并退出",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    spectrum = commands.add_parser("spectrum", help="求单个通道的束缚态能谱")
    spectrum.add_argument(
        "--equation", choices=[e.value for e in Equation], required=True, help="径向方程"
    )
    spectrum.add_argument(
        "--potential",
        choices=[k.value for k in PotentialKind],
        default=PotentialKind.COULOMB.value,
        help="势能种类，默认 coulomb",
    )
    scale = spectrum.add_mutually_exclusive_group()
    scale.add_argument("--a-tilde", type=float, help="Born-Infeld 参数 ã")
    scale.add_argument("--Q", type=float, help="以 Born 值为单位的 ã = Q·ã_B")
    channel = spectrum.add_mutually_exclusive_group()
    channel.add_argument("--ell", type=int, help="Schrödinger 角量子数 ℓ（默认 0）")
    channel.add_argument("--kappa", type=int, help="Dirac 角参数 κ（默认 1）")
    spectrum.add_argument(
        "--levels",
        type=int,
        default=DEFAULT_LEVELS,
        help=f"主能级个数，默认 {DEFAULT_LEVELS}（Dirac 下 n > κ 的能级成对给出）",
    )
    spectrum.add_argument(
        "--labeling",
        choices=[s.value for s in LabelStrategy],
        default=LabelStrategy.NEAREST.value,
        help="标注方式，默认 nearest",
    )
    spectrum.add_argument(
        "--screen-spurious",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="与 Coulomb 解比较振荡能量，标记疑似伪解（Dirac 非 Coulomb 势默认开启）",
    )
    _add_grid(spectrum)
    _add_output(spectrum)
    _add_common(spectrum)
    spectrum.set_defaults(handler=cmd_spectrum)

    validate = commands.add_parser("validate", help="与 Dirac–Coulomb 解析能级比较")
    validate.add_argument("--kappa-max", type=int, default=2, help="最大 κ，默认 2")
    validate.add_argument("--n-max", type=int, default=3, help="最大主量子数，默认 3")
    validate.add_argument(
        "--study",
        action="store_true",
        help="额外在 N/4、N/2、N 上求基态并估计收敛阶",
    )
    _add_grid(validate)
    _add_common(validate)
    validate.set_defaults(handler=cmd_validate)

    sweep = commands.add_parser("sweep", help="按 ã 序列扫描能谱")
    sweep.add_argument("--config", help="JSON 扫描配置文件")
    sweep.add_argument("--equation", choices=[e.value for e in Equation], help="径向方程")
    sweep.add_argument(
        "--potential", choices=[k.value for k in PotentialKind], help="势能种类"
    )
    sweep.add_argument("--angular", type=int, nargs="+", help="ℓ 或 κ 列表")
    sweep.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help="每个通道的主能级个数")
    sweep.add_argument(
        "--labeling",
        choices=[s.value for s in LabelStrategy],
        default=LabelStrategy.ORDINAL.value,
        help="标注方式，默认 ordinal",
    )
    sweep.add_argument(
        "--screen-spurious",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="标记疑似伪解（Dirac 非 Coulomb 势默认开启）",
    )
    schedule = sweep.add_mutually_exclusive_group()
    schedule.add_argument("--Q-list", type=float, nargs="+", help="显式 Q 列表")
    schedule.add_argument("--a-tilde-list", type=float, nargs="+", help="显式 ã 列表")
    schedule.add_argument(
        "--Q-log",
        type=float,
        nargs=3,
        metavar=("START", "END", "POINTS"),
        help="对数等距 Q 序列",
    )
    sweep.add_argument("--Q-start", type=float, help="等距 Q 序列起点")
    sweep.add_argument("--Q-end", type=float, help="等距 Q 序列终点（含）")
    sweep.add_argument("--Q-step", type=float, help="等距 Q 序列步长")
    sweep.add_argument("--threads", type=int, help="工作线程数，默认读取 BI_SPECTRA_THREADS")
    sweep.add_argument("--plot", help="输出 SVG 图像路径（需要 matplotlib）")
    _add_grid(sweep)
    _add_output(sweep, required=True)
    _add_common(sweep)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def _resolve_potential(args: argparse.Namespace) -> tuple[PotentialSpec, float | None]:
    kind = PotentialKind(args.potential)
    if kind is PotentialKind.COULOMB:
        if args.a_tilde is not None or args.Q is not None:
            raise ConfigError("Coulomb 势不接受 --a-tilde/--Q", field="a_tilde")
        return PotentialSpec.coulomb(), None
    if args.a_tilde is not None:
        a_tilde = require_positive(args.a_tilde, "a_tilde")
    elif args.Q is not None:
        a_tilde = require_positive(args.Q, "Q") * born_a_tilde()
    else:
        raise ConfigError(f"{kind.value} 势需要 --a-tilde 或 --Q", field="a_tilde")
    return PotentialSpec(kind, a_tilde), a_tilde


def _resolve_angular(args: argparse.Namespace, equation: Equation) -> int:
    if equation is Equation.DIRAC:
        if args.ell is not None:
            raise ConfigError("Dirac 方程使用 --kappa，不接受 --ell", field="ell")
        return require_int(1 if args.kappa is None else args.kappa, "kappa", 1)
    if args.kappa is not None:
        raise ConfigError("Schrödinger 方程使用 --ell，不接受 --kappa", field="kappa")
    return require_int(0 if args.ell is None else args.ell, "ell", 0)


def _print_spectrum(spectrum: Spectrum, equation: Equation) -> None:
    name = "kappa" if equation is Equation.DIRAC else "ell"
    print(f"{'n':>3} {name:>5} {'sub':>4} {'E_tilde':>25} {'residual':>10}  flags")
    for level in spectrum:
        flags = []
        if level.ambiguous:
            flags.append("ambiguous")
        if level.spurious:
            flags.append("spurious")
        if level.character is not None:
            flags.append(level.character.value)
        sub = "-" if level.label.sublabel is None else str(level.label.sublabel)
        print(
            f"{level.label.n:>3} {level.label.angular:>5} {sub:>4} "
            f"{format_float(level.energy):>25} {level.residual:>10.2e}  {','.join(flags)}"
        )


def _write_output(
    records: list[SweepRecord], out: str, fmt: str | None, config: dict[str, Any]
) -> None:
    path = validate_output_file(out)
    write_records(records, path, fmt)
    manifest = RunManifest(config)
    logger.info("运行清单: %s", manifest.write(path))


def cmd_spectrum(args: argparse.Namespace) -> int:
    equation = Equation(args.equation)
    potential, a_tilde = _resolve_potential(args)
    angular = _resolve_angular(args, equation)
    levels = require_int(args.levels, "levels", 1)
    grid = make_grid(args.rho_inf, args.grid)
    tol = require_positive(args.tol, "tol")
    if args.out:
        validate_output_file(args.out)
    screen = args.screen_spurious
    if screen is None:
        screen = default_screening(equation, potential.kind)

    solution = compute_spectrum(
        equation,
        potential,
        grid,
        angular,
        levels,
        tol=tol,
        labeling=args.labeling,
        screen_spurious=screen,
    )
    spectrum = solution.spectrum
    _print_spectrum(spectrum, equation)
    for note in spectrum.diagnostics:
        logger.warning(note)

    if args.out:
        a_value = a_tilde if a_tilde is not None else 0.0
        records = [
            SweepRecord(
                equation=equation.value,
                potential=potential.kind.value,
                a_tilde=a_value,
                Q=a_value / born_a_tilde(),
                angular=angular,
                n=level.label.n,
                E_tilde=level.energy,
                residual=level.residual,
                rho_inf=grid.rho_inf,
                N=grid.n_points,
            )
            for level in spectrum
        ]
        config = {
            "command": "spectrum",
            "equation": equation.value,
            "potential": potential.kind.value,
            "a_tilde": a_tilde,
            "angular": angular,
            "levels": levels,
            "rho_inf": grid.rho_inf,
            "grid": grid.n_points,
            "tol": tol,
            "labeling": args.labeling,
            "screen_spurious": screen,
        }
        _write_output(records, args.out, args.format, config)

    expected = dirac_state_count(levels) if equation is Equation.DIRAC else levels
    if len(spectrum) < expected:
        logger.error("只求得 %d/%d 个能级", len(spectrum), expected)
        return EXIT_NUMERICAL
    return EXIT_OK


def _dirac_rows(
    grid: RadialGrid, kappa_max: int, n_max: int, tol: float
) -> tuple[list[tuple], list[str]]:
    """逐个 κ 求解；某个 κ 失败时记录诊断并继续其余通道。"""
    rows = []
    problems = []
    for kappa in range(1, kappa_max + 1):
        levels = n_max - kappa + 1
        if levels < 1:
            continue
        try:
            solution = compute_spectrum(
                Equation.DIRAC, PotentialSpec.coulomb(), grid, kappa, levels, tol=tol
            )
        except EigenSolveError as exc:
            problems.append(f"kappa {kappa}: {exc}")
            for value, residual in zip(exc.ritz_values, exc.residual_norms):
                energy = tilde_from_dirac_eigenvalue(value)
                problems.append(
                    f"kappa {kappa}: best E_tilde {format_float(energy)} residual {residual:.2e}"
                )
            continue
        except BISpectraError as exc:
            problems.append(f"kappa {kappa}: {exc}")
            continue
        for level in solution.spectrum:
            exact = dirac_coulomb_exact(level.label.n, kappa)
            rows.append((level.label.n, kappa, level.label.sublabel, level.energy, exact))
    return rows, problems


def cmd_validate(args: argparse.Namespace) -> int:
    kappa_max = require_int(args.kappa_max, "kappa_max", 1)
    n_max = require_int(args.n_max, "n_max", 1)
    grid = make_grid(args.rho_inf, args.grid)
    tol = require_positive(args.tol, "tol")

    rows, problems = _dirac_rows(grid, kappa_max, n_max, tol)
    # 单空格分隔：n kappa −Ẽ_num −Ẽ_exact |diff| ell
    print("n kappa numerical exact |diff| ell")
    ground_diff = None
    for n, kappa, sub, energy, exact in rows:
        diff = abs(energy - exact)
        if n == 1 and kappa == 1:
            ground_diff = diff if ground_diff is None else min(ground_diff, diff)
        ell = "-" if sub is None else str(sub)
        print(f"{n} {kappa} {-energy:.12f} {-exact:.12f} {diff:.2e} {ell}")
    for problem in problems:
        print(f"# {problem}")
        logger.error("求解失败: %s", problem)

    if args.study:
        grids = [grid.n_points // 4, grid.n_points // 2, grid.n_points]
        values = []
        for n_points in grids:
            coarse = make_grid(grid.rho_inf, n_points)
            spectrum = compute_spectrum(
                Equation.DIRAC, PotentialSpec.coulomb(), coarse, 1, 1, tol=tol
            ).spectrum
            values.append(spectrum.levels[0].energy)
            print(f"N = {n_points:>7}: E_tilde(1,1) = {format_float(values[-1])}")
        order = convergence_order(values, grids, exact=dirac_coulomb_exact(1, 1))
        print(f"observed order p = {order:.3f}")

    if ground_diff is None:
        logger.error("未求得基态 (n=1, κ=1)")
        return EXIT_NUMERICAL
    if ground_diff > GROUND_STATE_TOL:
        logger.error("基态偏差 %.3e 超过 %.0e", ground_diff, GROUND_STATE_TOL)
        return EXIT_NUMERICAL
    if problems:
        return EXIT_NUMERICAL
    return EXIT_OK


def _inline_schedule(args: argparse.Namespace):
    range_flags = (args.Q_start, args.Q_end, args.Q_step)
    given = [
        args.Q_list is not None,
        args.a_tilde_list is not None,
        args.Q_log is not None,
        any(flag is not None for flag in range_flags),
    ]
    if sum(given) != 1:
        raise ConfigError(
            "需要且只能给出一种 ã 序列: --Q-list / --a-tilde-list / --Q-log / "
            "--Q-start --Q-end --Q-step",
            field="schedule",
        )
    if args.Q_list is not None:
        return schedule_from_q(require_positive(q, "Q_list") for q in args.Q_list)
    if args.a_tilde_list is not None:
        return schedule_from_a_tilde(require_positive(a, "a_tilde_list") for a in args.a_tilde_list)
    if args.Q_log is not None:
        start, end, points = args.Q_log
        return schedule_from_q(q_log(start, end, require_int(points, "Q_log.points", 1)))
    if any(flag is None for flag in range_flags):
        raise ConfigError("--Q-start、--Q-end、--Q-step 必须同时给出", field="Q_range")
    start = require_positive(args.Q_start, "Q_start")
    return schedule_from_q(q_range(start, args.Q_end, args.Q_step))


def _sweep_config(args: argparse.Namespace) -> SweepConfig:
    if args.config:
        inline = [args.equation, args.potential, args.angular, args.Q_list, args.a_tilde_list]
        inline += [args.Q_log, args.Q_start, args.Q_end, args.Q_step]
        if any(value is not None for value in inline):
            raise ConfigError("--config 不能与内联扫描参数同时使用", field="config")
        return load_sweep_config(args.config)
    for name in ("equation", "potential", "angular"):
        if getattr(args, name) is None:
            raise ConfigError(f"未给出 --config 时必须指定 --{name}", field=name)
    equation = Equation(args.equation)
    minimum = 1 if equation is Equation.DIRAC else 0
    return SweepConfig(
        equation=equation,
        potential=PotentialKind(args.potential),
        angular=tuple(require_int(a, "angular", minimum) for a in args.angular),
        levels=require_int(args.levels, "levels", 1),
        grid=make_grid(args.rho_inf, args.grid),
        schedule=_inline_schedule(args),
        tol=require_positive(args.tol, "tol"),
        labeling=LabelStrategy(args.labeling),
        screen_spurious=args.screen_spurious,
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _sweep_config(args)
    out = validate_output_file(args.out)
    plot = validate_output_file(args.plot, field="plot") if args.plot else None
    if plot is not None:
        from bispectra.plotting import check_matplotlib

        check_matplotlib()
    threads = None
    if args.threads is not None:
        threads = require_int(args.threads, "threads", 0) or None

    result = run_sweep(cfg, threads=threads)
    records = list(result.records)
    _write_output(records, str(out), args.format, {"command": "sweep", **cfg.to_dict()})
    if plot is not None:
        from bispectra.plotting import write_svg

        write_svg(records, plot, title=f"{cfg.equation.value} / {cfg.potential.value}")

    for failure in result.failures:
        channel = "全部通道" if failure.angular is None else f"通道 {failure.angular}"
        logger.error("Q = %g, %s 失败: %s", failure.Q, channel, failure.reason)
    print(f"{len(records)} 条记录已写入 {out}")
    return EXIT_OK if result.ok else EXIT_NUMERICAL


def main(argv: list[str] | None = None) -> int:
    """命令行入口。"""
    parser = create_parser()
    args = parser.parse_args(argv)

    configure_logging(verbose=args.verbose, quiet=args.quiet)

    try:
        return args.handler(args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        logger.error("参数错误%s: %s", where, exc)
        return EXIT_USAGE
    except BISpectraError as exc:
        # 求解器异常携带的诊断在 DEBUG 日志中给出
        logger.error("计算失败: %s", exc)
        logger.debug("异常详情: %r", vars(exc))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
