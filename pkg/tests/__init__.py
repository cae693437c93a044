"""tests package - 将 src 目录加入路径以便直接导入 bispectra。"""

import os
import sys
from pathlib import Path

_PROJECT_ROOT = Path(__file__).parent.parent
_SRC_PATH = _PROJECT_ROOT / "src"
if str(_SRC_PATH) not in sys.path:
    sys.path.insert(0, str(_SRC_PATH))

from bispectra.log import configure_logging  # noqa: E402  pylint: disable=wrong-import-position

# 测试期间默认静默日志，避免污染输出
configure_logging(quiet=True)

# 完整网格上的验收测试耗时数分钟，默认跳过
SLOW_TESTS = os.environ.get("BI_SPECTRA_SLOW_TESTS", "") not in ("", "0")
