#!/usr/bin/env python
"""Run the pinsker harness from a source checkout."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))

from pinsker_lib.harness import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
