"""
Entry point for running the laboratory as a module:

    python -m plaplace_lab
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
