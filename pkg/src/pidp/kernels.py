"""Backend selection for the numerical kernels.

Two interchangeable kernel modules exist: a compiled Cython extension
(``pidp._kernels_cy``) and a pure-Python reference (``pidp._kernels_py``).
The environment variable ``PIDP_KERNELS`` picks one at import time:

- ``auto`` (default): compiled if available, otherwise pure Python
- ``compiled``: require the extension, raise if it failed to build
- ``python``: force the reference implementation

Both expose the same module-level functions with identical semantics; the
test suite checks them against each other.
"""

from __future__ import annotations

import os

from pidp import _kernels_py

_CHOICE = os.environ.get("PIDP_KERNELS", "auto").strip().lower()
if _CHOICE not in ("auto", "compiled", "python"):
    raise ImportError(
        f"PIDP_KERNELS must be one of 'auto', 'compiled', 'python', got {_CHOICE!r}"
    )

if _CHOICE == "python":
    _impl = _kernels_py
else:
    try:
        from pidp import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _CHOICE == "compiled":
            raise ImportError(
                "PIDP_KERNELS=compiled but the pidp._kernels_cy extension is "
                "not importable; rebuild the package or use PIDP_KERNELS=python"
            ) from None
        _impl = _kernels_py


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return "python" if _impl is _kernels_py else "compiled"


FD_STEP_FLOOR = _kernels_py.FD_STEP_FLOOR

fd_step = _impl.fd_step
delta = _impl.delta
drift = _impl.drift
control = _impl.control
rhs = _impl.rhs
x1_jacobian = _impl.x1_jacobian
x2_jacobian = _impl.x2_jacobian
x3_jacobian = _impl.x3_jacobian
x4_jacobian = _impl.x4_jacobian
field_value = _impl.field_value
leaf_matrix = _impl.leaf_matrix
stratum_dets = _impl.stratum_dets
rk4_control_steps = _impl.rk4_control_steps
rk4_field_steps = _impl.rk4_field_steps
