"""Backend dispatch for the numeric hot kernels.

Two interchangeable implementations exist: a numba-jitted one and a pure
numpy one. Selection happens once at import via the ``TILTMPC_BACKEND``
environment variable:

* ``auto`` (default): numba when importable, else the numpy fallback.
* ``numba``: require the jitted backend, raise if numba is missing.
* ``numpy``: force the fallback (useful for debugging and benchmarks).

``active`` is the chosen backend module; both backends stay importable side
by side through :func:`get_backend` so they can be compared directly.
"""

import os
import warnings

from . import _numpy_impl

_CHOICES = ("auto", "numba", "numpy")
_requested = os.environ.get("TILTMPC_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise ValueError(
        f"TILTMPC_BACKEND={_requested!r} not understood; expected one of {_CHOICES}"
    )

if _requested == "numpy":
    active = _numpy_impl
else:
    try:
        from . import _numba_impl

        active = _numba_impl
    except ImportError as exc:
        if _requested == "numba":
            raise ImportError(
                "TILTMPC_BACKEND=numba but the numba backend failed to import"
            ) from exc
        warnings.warn(
            "numba is not installed; using the slower pure-numpy kernels "
            "(set TILTMPC_BACKEND=numpy to silence)",
            RuntimeWarning,
            stacklevel=2,
        )
        active = _numpy_impl

BACKEND = active.BACKEND_NAME


def get_backend(name=None):
    """Return a kernel backend module by name ('numba' or 'numpy')."""
    if name is None:
        return active
    if name == "numpy":
        return _numpy_impl
    if name == "numba":
        from . import _numba_impl

        return _numba_impl
    raise ValueError(f"unknown backend {name!r}")
