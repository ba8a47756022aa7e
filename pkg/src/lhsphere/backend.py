"""Kernel backend selection.

The recurrence kernels exist twice: a compiled Cython extension
(``lhsphere._bessel_cy``) and a pure-Python reference (``_bessel_py``).
Both implement the same algorithms and agree to machine precision; the
compiled one is picked automatically when the extension built.

Selection is controlled by the ``LHSPHERE_KERNELS`` environment variable:

* ``auto`` (default, or unset): compiled if importable, else pure Python.
* ``cy``: require the compiled extension; ImportError if missing.
* ``py``: force the pure-Python kernels.
"""

from __future__ import annotations

import os

from . import _bessel_py


def available_backends() -> tuple[str, ...]:
    """Names of the kernel backends importable in this environment."""
    names = ["py"]
    try:
        from . import _bessel_cy  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cy")
    return tuple(names)


def _select():
    choice = os.environ.get("LHSPHERE_KERNELS", "auto").strip().lower()
    if choice not in ("auto", "cy", "py"):
        raise ValueError(
            f"LHSPHERE_KERNELS={choice!r}: expected 'auto', 'cy' or 'py'"
        )
    if choice == "py":
        return "py", _bessel_py
    try:
        from . import _bessel_cy
    except ImportError:
        if choice == "cy":
            raise
        return "py", _bessel_py
    return "cy", _bessel_cy


BACKEND, _impl = _select()

jn_array = _impl.jn_array
yn_array = _impl.yn_array
h1n_array = _impl.h1n_array
