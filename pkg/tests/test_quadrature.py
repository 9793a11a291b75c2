import math

import numpy as np
import pytest

from qeilab.errors import QuadratureFailure
from qeilab.quadrature import QuadratureConfig, gauss_legendre, gk15_adaptive, initial_panels


def test_polynomial_exact():
    val, err, nb = gk15_adaptive(lambda x: x ** 5 - 3 * x ** 2, 0.0, 2.0)
    assert val == pytest.approx(64 / 6 - 8, abs=1e-13)
    assert nb == 0


def test_exponential_decay():
    val, _, _ = gk15_adaptive(lambda x: np.exp(-x), 0.0, 60.0, rtol=1e-13, atol=1e-16)
    assert val == pytest.approx(-math.expm1(-60.0), rel=1e-13)


def test_oscillatory_complex():
    val, _, _ = gk15_adaptive(lambda x: np.exp(1j * 20 * x), 0.0, math.pi / 3,
                              n_initial=initial_panels(0.0, math.pi / 3, 20.0))
    exact = (np.exp(1j * 20 * math.pi / 3) - 1) / (20j)
    assert abs(val - exact) < 1e-12


def test_budget_exhaustion():
    with pytest.raises(QuadratureFailure):
        gk15_adaptive(lambda x: np.abs(x - 0.3) ** -0.9, 0.0, 1.0, rtol=1e-14, atol=1e-300,
                      max_subdivisions=10)


def test_initial_panels():
    assert initial_panels(0.0, 60.0, 0.0) == 16
    assert initial_panels(0.0, math.pi, 3.0) == 19


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(relative_tolerance=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(x_max_base=1.0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=5)
    with pytest.raises(ValueError):
        QuadratureConfig.from_json({"rtol": 1e-3})
    cfg = QuadratureConfig.from_json({"x_max_base": 120.0})
    assert QuadratureConfig.from_json(cfg.to_json()) == cfg


def test_gauss_legendre_weights():
    x, w = gauss_legendre(6)
    assert w.sum() == pytest.approx(2.0)
    assert np.dot(w, x ** 10) == pytest.approx(2 / 11)
