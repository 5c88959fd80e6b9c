"""Console-script launcher.

SOPOOL_THREADS must reach the BLAS thread pools before numpy is first
imported, so this module stays free of numpy imports and sets the common
knobs, then hands off to the real CLI. Benchmarks default to a single
thread for stable medians unless the user overrides.
"""

from __future__ import annotations

import os
import sys


def _pin_threads(argv: list[str]) -> None:
    threads = os.environ.get("SOPOOL_THREADS")
    if threads is None and argv and argv[0] == "bench":
        threads = "1"
    if threads is not None:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, threads)


def main() -> int:
    argv = sys.argv[1:]
    _pin_threads(argv)
    from .cli import main as cli_main

    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
