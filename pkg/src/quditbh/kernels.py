"""Kernel lane selection.

The compiled core (`quditbh._core`, Cython) is preferred; the numpy lane in
`_kernels_py` implements the same algorithms and is selected when the
extension is unavailable or when the environment sets QBH_PURE=1.  Both lanes
expose: jacobi_eigh, jacobi_eigh_batch, fwht, and the COMPILED flag.
"""

from __future__ import annotations

import os

if os.environ.get("QBH_PURE", "0") == "1":
    from quditbh import _kernels_py as _impl
else:
    try:
        from quditbh import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from quditbh import _kernels_py as _impl

COMPILED: bool = bool(_impl.COMPILED)
BACKEND: str = "compiled" if COMPILED else "python"

jacobi_eigh = _impl.jacobi_eigh
jacobi_eigh_batch = _impl.jacobi_eigh_batch
fwht = _impl.fwht
