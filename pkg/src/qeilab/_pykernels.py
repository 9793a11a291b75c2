"""Pure numpy implementations of the hot kernels.

Same call signatures as the compiled ``_ckernels`` module; ``kernels.py``
picks one at import time.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import QuadratureFailure
from .quadrature import gk15_adaptive, initial_panels

NAME = "python"


def _one_minus_exp_neg(u: np.ndarray, v: float | np.ndarray) -> np.ndarray:
    """1 - exp(-(u + i v)) without cancellation for small arguments."""
    if np.all(v == 0):
        return -np.expm1(-u) + 0j
    re = -np.expm1(-u) * np.cos(v) + 2.0 * np.sin(0.5 * v) ** 2
    im = np.exp(-u) * np.sin(v)
    return re + 1j * im


def jb_weight(x: np.ndarray, b: complex) -> np.ndarray:
    """8/x * sinh(xB/4) sinh(x(2-B)/4) sinh(x/2) / sinh(x)^2, overflow-free."""
    br, bi = b.real, b.imag
    f1 = _one_minus_exp_neg(0.5 * x * br, 0.5 * x * bi)
    f2 = _one_minus_exp_neg(0.5 * x * (2.0 - br), -0.5 * x * bi)
    ex = np.exp(-x)
    return 4.0 * ex * f1 * f2 / (x * (1.0 + ex) * (-np.expm1(-2.0 * x)))


def jb_real(b_re: float, b_im: float, theta: float, rtol: float, atol: float,
            x_min: float, x_max: float, max_sub: int) -> tuple[float, float, int]:
    """J_B(theta + i pi) for real theta. Returns (re, im, status); status 1 = budget hit."""
    b = complex(b_re, b_im)
    if theta == 0.0:
        return 0.0, 0.0, 0
    c = theta / (2.0 * math.pi)

    def f(x):
        w = jb_weight(x, b)
        return w * np.sin(c * x) ** 2

    try:
        val, _, _ = gk15_adaptive(f, x_min, x_max, rtol=rtol, atol=atol,
                                  max_subdivisions=max_sub,
                                  n_initial=initial_panels(x_min, x_max, theta / math.pi))
    except QuadratureFailure:
        return math.nan, math.nan, 1
    val = complex(val)
    return val.real, val.imag, 0


def jb_real_many(b_re: float, b_im: float, thetas, rtol: float, atol: float,
                 x_min: float, x_max: float, max_sub: int) -> tuple[np.ndarray, np.ndarray]:
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape, dtype=complex)
    status = np.zeros(thetas.shape, dtype=np.int32)
    for i, t in enumerate(thetas.flat):
        re, im, st = jb_real(b_re, b_im, float(t), rtol, atol, x_min, x_max, max_sub)
        out.flat[i] = complex(re, im)
        status.flat[i] = st
    return out, status


def midpoint_kernel(theta: np.ndarray, fp_diff: np.ndarray, sigma: float,
                    pref: float) -> np.ndarray:
    """pref * cosh^2((t_j+t_k)/2) * fp_diff[|j-k|] * exp(-sigma^2 (cosh t_j - cosh t_k)^2).

    Only the upper triangle is computed; the lower one is its mirror image.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    j, k = np.triu_indices(n)
    ch = np.cosh(theta)
    vals = (pref * np.cosh(0.5 * (theta[j] + theta[k])) ** 2 * fp_diff[k - j]
            * np.exp(-(sigma * (ch[j] - ch[k])) ** 2))
    out = np.empty((n, n))
    out[j, k] = vals
    out[k, j] = vals
    return out
