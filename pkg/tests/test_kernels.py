import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeilab import kernels

fast = kernels.compiled_backend()
slow = kernels.python_backend()
needs_compiled = pytest.mark.skipif(fast is None, reason="compiled kernels not built")

ARGS = (1e-10, 1e-14, 1e-8, 60.0, 2000)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    if fast is not None:
        assert kernels.BACKEND in ("cython", "python")  # env var may force python


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(-0.8, 0.8), st.floats(-25, 25))
def test_jb_backends_agree(br, bi, theta):
    a = fast.jb_real(br, bi, theta, *ARGS)
    b = slow.jb_real(br, bi, theta, *ARGS)
    assert a[2] == b[2] == 0
    assert abs(complex(a[0], a[1]) - complex(b[0], b[1])) <= 1e-13 * max(1.0, abs(complex(b[0], b[1])))


@needs_compiled
def test_jb_many_matches_scalar():
    th = np.linspace(-5, 5, 11)
    vals, status = fast.jb_real_many(1.3, 0.4, th, *ARGS)
    assert not status.any()
    for t, v in zip(th, vals):
        re, im, _ = slow.jb_real(1.3, 0.4, float(t), *ARGS)
        assert abs(v - complex(re, im)) < 1e-14


@needs_compiled
def test_budget_status_reported():
    _, _, st_fast = fast.jb_real(1.0, 0.0, 50.0, 1e-15, 1e-300, 1e-8, 60.0, 10)
    _, _, st_slow = slow.jb_real(1.0, 0.0, 50.0, 1e-15, 1e-300, 1e-8, 60.0, 10)
    assert st_fast == st_slow == 1


@needs_compiled
def test_midpoint_kernel_backends_agree():
    n = 37
    theta = (np.arange(n) + 0.5 - n / 2) * 0.3
    fp = np.cosh(0.15 * np.arange(n))
    a = fast.midpoint_kernel(theta, fp, 0.1, 0.05)
    b = slow.midpoint_kernel(theta, fp, 0.1, 0.05)
    assert np.allclose(a, b, rtol=1e-14, atol=0)
    assert np.array_equal(a, a.T)
    assert np.array_equal(b, b.T)
