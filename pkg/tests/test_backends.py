"""Compiled and pure-Python kernel backends agree and select correctly."""

import os
import subprocess
import sys

import numpy as np
import pytest

from lhsphere import _bessel_py, backend


def _has_cy():
    return "cy" in backend.available_backends()


def test_available_backends_always_lists_py():
    names = backend.available_backends()
    assert "py" in names
    assert set(names) <= {"cy", "py"}


@pytest.mark.skipif(not _has_cy(), reason="compiled extension not built")
def test_backends_agree_on_tables():
    from lhsphere import _bessel_cy

    rng = np.random.default_rng(20240514)
    for _ in range(40):
        n = int(rng.integers(1, 60))
        z = complex(rng.uniform(0.05, 40.0), rng.uniform(-3.0, 3.0))
        if rng.random() < 0.5:
            z = complex(z.real, 0.0)
        for fn in ("jn_array", "yn_array", "h1n_array"):
            a = getattr(_bessel_py, fn)(n, z)
            b = getattr(_bessel_cy, fn)(n, z)
            # same algorithm; C and Python arithmetic round differently in
            # the last ulp (measured worst case ~4e-16 relative)
            np.testing.assert_allclose(b, a, rtol=1e-14, atol=0.0,
                                       err_msg=f"{fn} n={n} z={z}")


def _run_with_env(value):
    env = dict(os.environ)
    if value is None:
        env.pop("LHSPHERE_KERNELS", None)
    else:
        env["LHSPHERE_KERNELS"] = value
    return subprocess.run(
        [sys.executable, "-c", "import lhsphere.backend as b; print(b.BACKEND)"],
        capture_output=True, text=True, env=env,
    )


def test_kernel_env_var_selection():
    auto = _run_with_env(None)
    assert auto.returncode == 0
    assert auto.stdout.strip() == ("cy" if _has_cy() else "py")

    forced_py = _run_with_env("py")
    assert forced_py.returncode == 0
    assert forced_py.stdout.strip() == "py"

    if _has_cy():
        forced_cy = _run_with_env("cy")
        assert forced_cy.returncode == 0
        assert forced_cy.stdout.strip() == "cy"


def test_kernel_env_var_rejects_unknown():
    bad = _run_with_env("fortran")
    assert bad.returncode != 0
    assert "LHSPHERE_KERNELS" in bad.stderr


def test_selected_backend_exports_kernels():
    rng = np.random.default_rng(7)
    z = complex(rng.uniform(1.0, 5.0), 0.0)
    j = backend.jn_array(10, z)
    y = backend.yn_array(10, z)
    h = backend.h1n_array(10, z)
    np.testing.assert_allclose(h, j + 1j * y, rtol=1e-12)
