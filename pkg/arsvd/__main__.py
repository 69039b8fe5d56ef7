"""Allow ``python -m arsvd``."""

import sys

from .cli import main

sys.exit(main())
