"""Module entry point so `python -m cachecast` runs the CLI."""

import sys

from .cli import main

sys.exit(main())
