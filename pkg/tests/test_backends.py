import os
import subprocess
import sys

import numpy as np
import pytest

from mopens.numerics import _backend, _pycore

_core = pytest.importorskip("mopens.numerics._core")


def test_backend_selected():
    assert _backend.BACKEND in ("compiled", "python")
    if not os.environ.get("MOPENS_PURE_PYTHON"):
        assert _backend.BACKEND == "compiled"


def test_airy_twins_agree():
    x = np.linspace(-40, 40, 4001)
    a1, d1 = _core.airy_array(x)
    a2, d2 = _pycore.airy_array(x)
    assert np.max(np.abs(a1 - a2)) < 1e-13 and np.max(np.abs(d1 - d2)) < 1e-12
    for v in (-7.3, 0.0, 2.5, 12.0):
        assert np.allclose(_core.airy_scalar(v), _pycore.airy_scalar(v), rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("n", [1, 2, 5, 30, 80])
def test_eigen_twins_agree(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = (a + a.conj().T) / 2
    e1 = np.sort(_core.hermitian_eigenvalues(a))
    e2 = np.sort(_pycore.hermitian_eigenvalues(a))
    assert np.max(np.abs(e1 - e2)) < 1e-11 * n


def test_pure_python_fallback_subprocess():
    code = ("from mopens.numerics import _backend, airy_ai, hermitian_eigenvalues;"
            "import numpy as np;"
            "print(_backend.BACKEND, repr(airy_ai(1.0)[0]), hermitian_eigenvalues(np.diag([2.0, 1.0]))[0])")
    env = dict(os.environ, MOPENS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, ai, lam = out.stdout.split()
    assert backend == "python"
    assert abs(float(ai) - 0.1352924163128814) < 1e-14
    assert float(lam) == pytest.approx(1.0, abs=1e-15)
