"""Backend selection for the quadrature kernels.

Set ``PXROBIN_KERNELS=numpy`` to force the pure-numpy fallback,
``PXROBIN_KERNELS=numba`` to require the jitted kernels, or leave unset
("auto") to use numba when it imports.  ``BACKEND`` records the choice.
Run ``benchmarks/bench_kernels.py`` to compare the two paths.
"""

import os

_choice = os.environ.get("PXROBIN_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"PXROBIN_KERNELS must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    from . import numpy_impl as _impl
    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from . import numpy_impl as _impl
        BACKEND = "numpy"

power_sum = _impl.power_sum
power_sum_scaled = _impl.power_sum_scaled
row_power_sum = _impl.row_power_sum
assemble_volume = _impl.assemble_volume
assemble_gradient = _impl.assemble_gradient
assemble_edge = _impl.assemble_edge
