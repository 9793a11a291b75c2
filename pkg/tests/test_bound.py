import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeilab.bound import (HalfLineDecomposition, c_g_estimate, ell_pm_scan, h_pm, k_pm,
                          random_grid_functions, x_phi, y_phi)
from qeilab.errors import GridTooSmall, NonConvergent
from qeilab.spectral import Grid, SmearingGaussian, assemble_midpoint
from qeilab.stress import FormFactorFP, PolynomialP

SM = SmearingGaussian(0.1, 1.0)
K_PLUS_ISING_1 = 1.9809539319118603  # sqrt(cosh^2 1 + cosh 1)


def test_h_examples(free_ff, ising_ff, sg_ff):
    t = np.linspace(0, 4, 9)
    assert np.allclose(h_pm(free_ff, "+", t, t), np.cosh(t) ** 2 + 1, rtol=1e-15)
    assert np.allclose(h_pm(free_ff, "-", t, t), np.cosh(t) ** 2 - 1, rtol=1e-15, atol=1e-15)
    for ff in (free_ff, ising_ff, sg_ff):
        assert h_pm(ff, +1, 0.0, 0.0) == pytest.approx(2.0, abs=1e-15)
        assert h_pm(ff, -1, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        h_pm(free_ff, 0, 1.0, 1.0)


def test_k_examples(free_ff, ising_ff):
    t = np.linspace(0, 4, 9)
    assert np.allclose(k_pm(free_ff, "-", t), np.sinh(t), rtol=1e-13, atol=1e-15)
    assert k_pm(free_ff, "+", 0.0) == pytest.approx(math.sqrt(2.0))
    assert k_pm(ising_ff, "+", 1.0) == pytest.approx(K_PLUS_ISING_1, rel=1e-15)
    assert k_pm(lambda x: np.ones_like(x), "-", 1.0) == pytest.approx(math.sinh(1.0))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
def test_half_line_parseval(half, seed):
    g = Grid(2 * half, 3.0)
    phi = random_grid_functions(g, 1, seed=seed)[0]
    dec = HalfLineDecomposition.from_grid_function(g, phi)
    norm = np.vdot(phi, phi).real
    assert abs(dec.norm_sq() - norm) <= 1e-12 * norm


def test_half_line_needs_even_grid():
    with pytest.raises(GridTooSmall):
        HalfLineDecomposition.from_grid_function(Grid(5, 1.0), np.ones(5))
    with pytest.raises(GridTooSmall):
        HalfLineDecomposition.from_grid_function(Grid(4, 1.0), np.ones(5))


def test_x_phi_trivial_cases(sg_ff):
    g = Grid(40, 4.0)
    assert x_phi(sg_ff, g, SM, np.zeros(40)) == 0.0
    assert y_phi(sg_ff, g, SM, np.zeros(40)) == 0.0
    phi = np.exp(-(g.midpoints - 1.0) ** 2) + np.exp(-(g.midpoints + 1.0) ** 2)
    dec = HalfLineDecomposition.from_grid_function(g, phi)
    assert not np.any(dec.phi_minus)
    assert x_phi(sg_ff, g, SM, phi) == pytest.approx(assemble_midpoint(sg_ff, g, SM).expectation(phi),
                                                     rel=1e-12)


@pytest.mark.parametrize("name", ["free_ff", "ising_ff", "sg_ff"])
def test_x_phi_matches_full_matrix(name, request):
    ff = request.getfixturevalue(name)
    g = Grid(120, 5.0)
    m = assemble_midpoint(ff, g, SM)
    for phi in random_grid_functions(g, 10, seed=1):
        full = m.expectation(phi)
        assert abs(x_phi(ff, g, SM, phi) - full) <= 1e-8 * abs(full)


def test_y_rank_one_without_smearing(ising_ff):
    g = Grid(60, 3.0)
    phi = random_grid_functions(g, 1, seed=7)[0]
    dec = HalfLineDecomposition.from_grid_function(g, phi)
    expect = sum(abs(np.sum(k_pm(ising_ff, s, dec.theta) * c)) ** 2 for s, c in dec.channels())
    expect *= g.h ** 2 / (2 * math.pi)
    assert y_phi(ising_ff, g, None, phi) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("nu", [0.0, 0.3, 0.9])
def test_y_nonnegative_any_class(free_ev, nu):
    ff = FormFactorFP(free_ev, PolynomialP.affine(nu))
    g = Grid(100, 6.0)
    assert min(y_phi(ff, g, SM, p) for p in random_grid_functions(g, 50, seed=2)) >= -1e-10


def test_random_functions_seeded():
    g = Grid(10, 2.0)
    a = random_grid_functions(g, 3, seed=5, support=1.0)
    assert np.array_equal(a, random_grid_functions(g, 3, seed=5, support=1.0))
    assert not np.any(a[:, np.abs(g.midpoints) > 1.0])


def test_ell_scan(ising_ff, sg_ff):
    for ff in (ising_ff, sg_ff):
        for s in "+-":
            rep = ell_pm_scan(ff, s, np.linspace(2, 8, 13), np.linspace(-1, 1, 21))
            assert rep.zero_deviation < 1e-12
            assert rep.even_deviation < 1e-12
            assert math.isfinite(rep.a_fit) and rep.a_fit < 10


def test_c_g_finite_and_chain(free_ff, ising_ff, sg_ff):
    for ff in (free_ff, ising_ff, sg_ff):
        est = c_g_estimate(ff, SM)
        assert math.isfinite(est.c_g) and est.c_g > 0
        assert est.bound == pytest.approx(math.sqrt(est.c_g) / (2 * math.pi))
        assert est.shells[-1] < 1e-6 * est.c_g


def test_c_g_ising_chain(ising_ff):
    est = c_g_estimate(ising_ff, SM)
    lam = -0.11609414863568936
    assert lam >= -est.c_g
    assert lam >= -est.bound


def test_c_g_nonconvergent_above_threshold(free_ev):
    with pytest.raises(NonConvergent):
        c_g_estimate(FormFactorFP(free_ev, PolynomialP.affine(0.9)), SM)
