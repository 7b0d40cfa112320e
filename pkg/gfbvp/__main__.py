"""Run the command-line interface with ``python -m gfbvp``."""

import sys

from .cli import main

sys.exit(main())
