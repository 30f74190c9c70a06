"""Compiled kernels agree with their plain-Python source paths."""

import os
import subprocess
import sys

import numpy as np
import pytest

from scfde import kernels
from scfde.numerics import RngStream, dft, idft


def _autocov(seed, m=128):
    gen = RngStream(11, seed).generator()
    spectrum = 0.05 + gen.random(m)
    return idft(1.0 / spectrum)


class TestLevinsonParity:
    @pytest.mark.parametrize("order", [1, 3, 8, 19])
    def test_matches_python_path(self, order):
        q = _autocov(order)
        fast = kernels.levinson_recursion(q, order)
        slow = kernels._levinson_recursion(q, order)
        np.testing.assert_allclose(fast[0], slow[0], rtol=0, atol=1e-13)
        np.testing.assert_allclose(fast[1], slow[1], rtol=0, atol=1e-13)
        assert fast[2] == slow[2] == -1

    def test_failure_step_reported(self):
        q = np.array([1.0, 0.999999, 0.999998, 0.999999], complex)
        q = np.array([1.0 + 0j, 1.0, 1.0, 1.0])  # rank-one, not pos def
        taps, errs, fail = kernels.levinson_recursion(q, 3)
        assert fail >= 1
        assert errs[fail] <= 0.0


class TestFeedbackParity:
    def test_matches_python_path(self):
        gen = RngStream(11, 99).generator()
        m, taps = 64, 6
        z_t = gen.standard_normal(m) + 1j * gen.standard_normal(m)
        fbf = 0.2 * (gen.standard_normal(taps) + 1j * gen.standard_normal(taps))
        points = np.array([1.0 + 0j, -1.0 + 0j])
        tail = points[gen.integers(0, 2, taps)]
        fast = kernels.dd_feedback(z_t, fbf, tail, points, True)
        slow = kernels._dd_feedback(z_t, fbf, tail, points, True)
        for a, b in zip(fast, slow):
            np.testing.assert_array_equal(a, b)

    def test_complex_metric(self):
        points = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
        z_t = np.array([0.9 + 0.8j, -0.7 - 0.6j, 0.1 + 0.9j, -0.9 + 0.1j])
        fbf = np.zeros(1, complex)
        tail = points[:1]
        z_hat, dec, idx = kernels.dd_feedback(z_t, fbf, tail, points, False)
        np.testing.assert_allclose(z_hat, z_t)
        expect = [np.argmin(np.abs(v - points) ** 2) for v in z_t]
        assert list(idx) == expect
        np.testing.assert_array_equal(dec, points[idx])


class TestBackendSelection:
    def test_backend_reports_numba_here(self):
        # the dev environment has numba installed and the flag unset
        if os.environ.get("SCFDE_DISABLE_NUMBA"):
            assert kernels.backend() == "numpy"
        else:
            assert kernels.backend() == "numba"

    def test_env_flag_selects_numpy(self):
        code = (
            "import scfde.kernels as k; import numpy as np; "
            "q = np.array([2.0+0j, 0.5, 0.25]); "
            "taps, errs, fail = k.levinson_recursion(q, 2); "
            "print(k.backend(), fail, abs(taps[0]) < 1)"
        )
        env = dict(os.environ, SCFDE_DISABLE_NUMBA="1")
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.split() == ["numpy", "-1", "True"]


def test_whitening_property_through_kernel():
    # the kernel's taps must whiten the spectrum they were derived from
    m = 256
    gen = RngStream(11, 5).generator()
    h = dft(np.concatenate([gen.standard_normal(8) * 0.3 + 0.5, np.zeros(m - 8)]))
    denom = np.abs(h) ** 2 + 0.1
    q = idft(1.0 / denom)
    taps, errs, fail = kernels.levinson_recursion(q, 20)
    assert fail == -1
    one_plus_b = dft(np.concatenate([[1.0], taps, np.zeros(m - 21)]))
    lags = idft(np.abs(one_plus_b) ** 2 / denom)
    assert np.max(np.abs(lags[1:21])) < 1e-6 * abs(lags[0])
