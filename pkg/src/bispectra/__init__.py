"""bispectra - Born-Infeld 氢原子能谱计算工具。

在 Coulomb 势、Born-Infeld 试探粒子势 V¹ 与自场势 V² 下，
用有限差分求解径向 Schrödinger 方程和 Dirac 方程组的束缚态能谱：
- tanh-sinh 求积计算势能
- Sturm 二分 / Lanczos / 移位求逆分块 Lanczos 求本征值
- 按 ã 扫描能谱并输出 CSV/JSON/SVG
"""

from bispectra.cli import main
from bispectra.exceptions import BISpectraError
from bispectra.version import __version__

__all__ = [
    "BISpectraError",
    "main",
    "__version__",
]
