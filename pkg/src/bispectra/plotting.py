"""扫描结果的 SVG 折线图（可选依赖 matplotlib）。"""

from __future__ import annotations

import importlib.util
import io
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from bispectra.exceptions import ConfigError
from bispectra.log import get_logger
from bispectra.sweep import SweepRecord
from bispectra.utils import atomic_write_text

logger = get_logger()


def check_matplotlib() -> None:
    if importlib.util.find_spec("matplotlib") is None:
        raise ConfigError(
            "需要安装 matplotlib 才能输出 SVG，请运行: pip install 'bi-spectra[plot]'",
            field="plot",
        )


def _series(
    records: Sequence[SweepRecord],
) -> dict[int, dict[tuple[int, int], list[tuple[float, float]]]]:
    """按通道分组；同一 (n, 序号) 连成一条线，序号区分能级对的两个成员。"""
    grouped: dict[tuple[int, int, float], list[SweepRecord]] = defaultdict(list)
    for record in records:
        grouped[(record.angular, record.n, record.a_tilde)].append(record)

    channels: dict[int, dict[tuple[int, int], list[tuple[float, float]]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for (angular, n, a_tilde), members in sorted(grouped.items()):
        for member, record in enumerate(sorted(members, key=lambda r: r.E_tilde)):
            channels[angular][(n, member)].append((a_tilde, record.E_tilde))
    return channels


def render_svg(records: Sequence[SweepRecord], title: str = "") -> str:
    """Ẽ 对 ã 的折线图，每个通道一个子图，ã 轴取对数。"""
    check_matplotlib()
    # 只用面向对象接口与 Agg 画布，不触碰 pyplot 的全局状态
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    channels = _series(records)
    count = max(1, len(channels))
    figure = Figure(figsize=(6.4, 3.2 * count))
    FigureCanvasAgg(figure)
    axes = figure.subplots(count, 1, squeeze=False)[:, 0]

    equation = records[0].equation if records else ""
    name = "κ" if equation == "dirac" else "ℓ"
    for ax, (angular, lines) in zip(axes, sorted(channels.items())):
        for (n, member), points in sorted(lines.items()):
            xs, ys = zip(*points)
            suffix = f" ({member + 1})" if member else ""
            ax.plot(xs, ys, marker="o", markersize=3, label=f"n={n}{suffix}")
        ax.set_xscale("log")
        ax.set_xlabel("ã")
        ax.set_ylabel("Ẽ")
        ax.set_title(f"{name} = {angular}")
        ax.legend(fontsize="small")
    if title:
        figure.suptitle(title)
    figure.tight_layout()

    buffer = io.StringIO()
    figure.savefig(buffer, format="svg")
    return buffer.getvalue()


def write_svg(records: Sequence[SweepRecord], path: str | Path, title: str = "") -> Path:
    path = Path(path)
    atomic_write_text(path, render_svg(records, title))
    logger.info("已写入图像: %s", path)
    return path
