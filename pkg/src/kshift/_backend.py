"""Select the compiled kernels if built, else the NumPy fallback.

Set ``KSHIFT_PURE=1`` in the environment to force the fallback.
"""

import os

if os.environ.get("KSHIFT_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

        BACKEND = "python"

solve_tridiag = kernels.solve_tridiag
upwind_step = kernels.upwind_step
sturm_count = kernels.sturm_count

__all__ = ["BACKEND", "kernels", "solve_tridiag", "upwind_step", "sturm_count"]
