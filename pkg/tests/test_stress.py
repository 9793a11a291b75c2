import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeilab.errors import DivergentLimit
from qeilab.minimal import MinimalSolution
from qeilab.models import ModelSpec
from qeilab.stress import (FormFactorFP, PolynomialError, PolynomialP, QeiClass, boost_matrix,
                           classify_qei, f_alpha_beta, f_free, momentum, qei_nu_threshold,
                           random_rapidity_pairs, verify_tensor_conditions)

TWO_PI = 2 * math.pi
ISING_F00_ORACLE = 0.24558891062022586  # cosh(1) / 2 pi, evaluated separately


def test_polynomial_normalization():
    with pytest.raises(PolynomialError):
        PolynomialP((1.0, 1.0))
    p = PolynomialP((0.5, 0.5, 0.0))
    assert p.degree == 1 and p.coefficients == (0.5, 0.5)
    assert PolynomialP.affine(0.3).nu == pytest.approx(0.3)
    assert PolynomialP.one().nu == 0.0
    assert PolynomialP.half_power(2).nu is None
    assert PolynomialP.half_power(2).coefficients == pytest.approx((0.25, 0.5, 0.25))
    assert PolynomialP.from_json({"nu": 0.6}) == PolynomialP.affine(0.6)
    assert PolynomialP.from_json(1) == PolynomialP.one()
    assert PolynomialP.from_json([0.0, 1.0])(3.0) == 3.0


def test_fp_examples(free_ev, ising_ev):
    assert FormFactorFP(free_ev, PolynomialP.one()).fp(3.0) == 1.0
    assert FormFactorFP(ising_ev, PolynomialP.one()).fp(2.0) == pytest.approx(1.5430806348152437, rel=1e-15)
    for ev in (free_ev, ising_ev):
        assert FormFactorFP(ev, PolynomialP.affine(0.7)).fp(0.0) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10))
def test_fp_even(theta):
    ev = MinimalSolution(ModelSpec.sinh_gordon(1.0))
    ff = FormFactorFP(ev, PolynomialP.affine(0.3))
    assert abs(ff.fp(theta) - ff.fp(-theta)) < 1e-10 * max(1.0, abs(ff.fp(theta)))


def test_momentum():
    p = momentum(1.0, 0.0)
    assert (p.p0, p.p1) == (1.0, 0.0)
    assert momentum(2.0, 0.0).p0 == 2.0
    p = momentum(1.0, 1.0)
    assert (p.p0, p.p1) == (math.cosh(1), math.sinh(1))
    with pytest.raises(ValueError):
        momentum(0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5), st.floats(-15, 15))
def test_mass_shell(mu, theta):
    p = momentum(mu, theta)
    assert p.p0 >= mu
    assert abs(p.mass_squared() - mu * mu) <= 1e-10 * p.p0 ** 2


def test_f_free_examples():
    assert np.allclose(f_free(1.0, 0.0, 0.0), np.array([[1, 0], [0, 0]]) / TWO_PI, atol=1e-16)
    assert f_free(1.0, 0.8, -0.8)[0, 0] == pytest.approx(1 / TWO_PI)
    m = f_free(1.0, 1.3, 1.3)
    # F00 - F11 on the diagonal is mu^2 / 2 pi
    assert m[0, 0] - m[1, 1] == pytest.approx(1 / TWO_PI, rel=1e-13)


def test_f_alpha_beta_examples(free_ff, ising_ff):
    assert f_alpha_beta(ising_ff, 1.0, 1.0, -1.0)[0, 0] == pytest.approx(ISING_F00_ORACLE, rel=1e-14)
    assert np.allclose(f_alpha_beta(free_ff, 2.0, 0.3, -1.1), f_free(2.0, 0.3, -1.1), rtol=1e-15)
    assert f_alpha_beta(ising_ff, 1.0, 0.0, 0.0)[0, 0] == pytest.approx(1 / TWO_PI)


def test_boost_is_lorentz():
    lam = boost_matrix(0.7)
    eta = np.diag([1.0, -1.0])
    assert np.allclose(lam.T @ eta @ lam, eta, atol=1e-15)


@pytest.mark.parametrize("model", ["free", "ising", "sg"])
@pytest.mark.parametrize("poly", [PolynomialP.one(), PolynomialP.affine(0.3)], ids=["P1", "nu0.3"])
def test_tensor_conditions(model, poly, free_ev, ising_ev, sg_ev):
    ev = {"free": free_ev, "ising": ising_ev, "sg": sg_ev}[model]
    rep = verify_tensor_conditions(FormFactorFP(ev, poly), 1.0, random_rapidity_pairs(100))
    assert rep.passed, rep.to_json()


def test_ising_continuity_point(ising_ff):
    rep = verify_tensor_conditions(ising_ff, 1.0, np.array([[1.0, -1.0]]))
    assert rep.deviations["conservation"] < 1e-12


def test_rapidity_pairs_seeded():
    a = random_rapidity_pairs(10, seed=3)
    assert np.array_equal(a, random_rapidity_pairs(10, seed=3))
    assert a.shape == (10, 2) and np.all(np.abs(a) <= 5)


def test_thresholds(free_ev, ising_ev, sg_ev):
    assert qei_nu_threshold(free_ev) == 0.5
    assert qei_nu_threshold(sg_ev) == pytest.approx(0.3946, abs=1e-4)
    with pytest.raises(DivergentLimit):
        qei_nu_threshold(ising_ev)


def test_classification_examples(free_ev, ising_ev, sg_ev):
    assert classify_qei(FormFactorFP(ising_ev, PolynomialP.one())).kind is QeiClass.HOLDS
    assert classify_qei(FormFactorFP(ising_ev, PolynomialP.affine(0.1))).kind is QeiClass.FAILS
    assert classify_qei(FormFactorFP(sg_ev, PolynomialP.affine(0.6))).kind is QeiClass.FAILS
    assert classify_qei(FormFactorFP(sg_ev, PolynomialP.affine(0.3))).kind is QeiClass.HOLDS
    assert classify_qei(FormFactorFP(free_ev, PolynomialP((0.0, 1.0)))).kind is QeiClass.FAILS
    assert classify_qei(FormFactorFP(free_ev, PolynomialP.affine(0.5))).kind is QeiClass.BORDERLINE
    assert classify_qei(FormFactorFP(free_ev, PolynomialP.half_power(2))).kind is QeiClass.FAILS
    for ev in (free_ev, ising_ev, sg_ev):
        assert classify_qei(FormFactorFP(ev, PolynomialP.one())).kind is QeiClass.HOLDS


def test_classification_mass_independent():
    for mass in (0.5, 1.0, 3.0):
        ff = FormFactorFP(MinimalSolution(ModelSpec.sinh_gordon(1.0, mass=mass)), PolynomialP.affine(0.6))
        assert classify_qei(ff).kind is QeiClass.FAILS


def test_generalized_classification():
    gi = MinimalSolution(ModelSpec.generalized_ising([0.7]))
    # F_min ~ cosh^{-1/2}, so P = (1+x)/2 gives F_P ~ cosh^{1/2}: ratio -> 0
    assert classify_qei(FormFactorFP(gi, PolynomialP.half_power(1))).kind is QeiClass.HOLDS
    assert classify_qei(FormFactorFP(gi, PolynomialP.half_power(3))).kind is QeiClass.FAILS
