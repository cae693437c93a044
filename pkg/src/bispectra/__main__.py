"""支持 python -m bispectra 运行。"""

import sys

from bispectra.cli import main

if __name__ == "__main__":
    sys.exit(main())
