"""Console entry point.

Applies the THERMODIFF_NUM_THREADS cap to the BLAS/OpenMP pools before
numpy is imported, then hands off to the CLI.
"""

import os
import sys


def main():
    cap = os.environ.get("THERMODIFF_NUM_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
            os.environ.setdefault(var, cap)
    from .cli import main as cli_main
    sys.exit(cli_main())
