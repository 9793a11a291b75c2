"""One-particle stress tensor kernels built from a minimal solution.

The energy-momentum kernel is the free one times a scalar form factor,

    F^{ab}(theta, eta) = F^{ab}_free(theta, eta) * F_P(theta - eta),
    F_P(theta) = P(cosh theta) * F_min(theta + i pi),

with P a real polynomial normalized by P(1) = 1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DivergentLimit, ModelSpecError
from .minimal import MinimalSolution
from .models import Family

TWO_PI = 2.0 * math.pi
P_NORM_TOL = 1e-12
BORDERLINE_TOL = 1e-12
RATIO_SAMPLES = (20.0, 25.0, 30.0)
UNDETERMINED_BAND = (0.45, 0.55)


class PolynomialError(ModelSpecError):
    """P is not a real polynomial with P(1) = 1."""


@dataclass(frozen=True)
class PolynomialP:
    """Real polynomial in ascending coefficient order, normalized by P(1) = 1."""
    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = [float(c) for c in self.coefficients]
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise PolynomialError("P needs at least one finite coefficient")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        if abs(math.fsum(coeffs) - 1.0) > P_NORM_TOL:
            raise PolynomialError(f"P(1) = {math.fsum(coeffs)!r}, must equal 1")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def one(cls) -> "PolynomialP":
        return cls((1.0,))

    @classmethod
    def affine(cls, nu: float) -> "PolynomialP":
        """P(x) = (1 - nu) + nu x."""
        return cls((1.0 - nu, nu))

    @classmethod
    def half_power(cls, n: int) -> "PolynomialP":
        """P(x) = ((1 + x) / 2)^n."""
        if n < 0:
            raise PolynomialError("power must be nonnegative")
        return cls(tuple(npoly.polypow([0.5, 0.5], n)))

    @classmethod
    def from_json(cls, data) -> "PolynomialP":
        if isinstance(data, dict):
            if set(data) != {"nu"}:
                raise PolynomialError(f"P object must be {{'nu': x}}, got keys {sorted(data)}")
            return cls.affine(float(data["nu"]))
        if isinstance(data, (int, float)):
            return cls((float(data),))
        return cls(tuple(float(c) for c in data))

    def to_json(self) -> list[float]:
        return list(self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def nu(self) -> float | None:
        """Slope of an affine P, None for higher degree."""
        if self.degree == 0:
            return 0.0
        if self.degree == 1:
            return self.coefficients[1]
        return None

    def __call__(self, x):
        return npoly.polyval(x, self.coefficients)

    def describe(self) -> str:
        return "[" + ",".join(f"{c:.12g}" for c in self.coefficients) + "]"


class FormFactorFP:
    """F_P(theta) = P(cosh theta) F_min(theta + i pi) on the real line."""

    def __init__(self, evaluator: MinimalSolution, polynomial: PolynomialP | None = None):
        self.evaluator = evaluator
        self.polynomial = polynomial or PolynomialP.one()

    @property
    def family(self) -> Family:
        return self.evaluator.family

    @property
    def mass(self) -> float:
        return self.evaluator.spec.mass

    def fp(self, theta: float) -> float:
        return float(self.fp_many(np.array([float(theta)]))[0])

    def fp_many(self, thetas) -> np.ndarray:
        thetas = np.abs(np.asarray(thetas, dtype=float))
        return self.polynomial(np.cosh(thetas)) * self.evaluator.fmin_shifted_many(thetas)

    def __call__(self, thetas):
        return self.fp_many(thetas)

    def __repr__(self):
        return f"FormFactorFP({self.evaluator.spec.describe()}, P={self.polynomial.describe()})"


@dataclass(frozen=True)
class TwoMomentum:
    p0: float
    p1: float

    def lower(self) -> tuple[float, float]:
        return self.p0, -self.p1

    def mass_squared(self) -> float:
        return self.p0 * self.p0 - self.p1 * self.p1


def momentum(mu: float, theta: float) -> TwoMomentum:
    if not mu > 0:
        raise ValueError("mass must be positive")
    return TwoMomentum(mu * math.cosh(theta), mu * math.sinh(theta))


def f_free(mu: float, theta, eta) -> np.ndarray:
    """Free kernel, shape (..., 2, 2)."""
    s = 0.5 * (np.asarray(theta, dtype=float) + np.asarray(eta, dtype=float))
    c, sh = np.cosh(s), np.sinh(s)
    pref = mu * mu / TWO_PI
    out = np.empty(np.shape(s) + (2, 2))
    out[..., 0, 0] = pref * c * c
    out[..., 0, 1] = out[..., 1, 0] = pref * c * sh
    out[..., 1, 1] = pref * sh * sh
    return out


def f_alpha_beta(ff: FormFactorFP, mu: float, theta, eta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    scale = ff.fp_many(theta - eta)
    return f_free(mu, theta, eta) * np.asarray(scale)[..., None, None]


def boost_matrix(lam: float) -> np.ndarray:
    """Lambda with p(theta - lam) = Lambda p(theta)."""
    c, s = math.cosh(lam), math.sinh(lam)
    return np.array([[c, -s], [-s, c]])


@dataclass
class TensorConditionReport:
    deviations: dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-10

    @property
    def passed_conditions(self) -> dict[str, bool]:
        return {k: bool(v < self.tolerance) for k, v in self.deviations.items()}

    @property
    def passed(self) -> bool:
        return all(self.passed_conditions.values())

    def to_json(self) -> dict:
        return {"tolerance": self.tolerance, "passed": self.passed,
                "deviations": dict(self.deviations), "pass": self.passed_conditions}


def verify_tensor_conditions(ff: FormFactorFP, mu: float,
                             samples: Iterable[tuple[float, float]],
                             boosts: Sequence[float] = (-1.0, -0.5, 0.25, 0.7, 1.3),
                             tol: float = 1e-10) -> TensorConditionReport:
    """Max relative deviations of the symmetry, covariance, conservation and
    normalization conditions, and of F^11 = tanh^2((theta+eta)/2) F^00."""
    pts = np.array(list(samples), dtype=float).reshape(-1, 2)
    th, et = pts[:, 0], pts[:, 1]
    f = f_alpha_beta(ff, mu, th, et)
    norms = np.maximum(np.abs(f).max(axis=(1, 2)), 1e-300)
    rep = TensorConditionReport(tolerance=tol)

    rep.deviations["symmetry"] = float(np.max(np.abs(f[:, 0, 1] - f[:, 1, 0]) / norms))

    dev6 = 0.0
    for lam in boosts:
        lm = boost_matrix(lam)
        lhs = f_alpha_beta(ff, mu, th - lam, et - lam)
        rhs = lm @ f @ lm.T
        scale = np.maximum(np.abs(rhs).max(axis=(1, 2)), 1e-300)
        dev6 = max(dev6, float(np.max(np.abs(lhs - rhs).max(axis=(1, 2)) / scale)))
    rep.deviations["covariance"] = dev6

    # lower-index momentum difference contracted with the first tensor index
    dp0 = mu * (np.cosh(th) - np.cosh(et))
    dp1 = -mu * (np.sinh(th) - np.sinh(et))
    contr = dp0[:, None] * f[:, 0, :] + dp1[:, None] * f[:, 1, :]
    scale8 = np.maximum((np.abs(dp0) + np.abs(dp1)) * norms, 1e-300)
    rep.deviations["conservation"] = float(np.max(np.abs(contr).max(axis=1) / scale8))

    diag = f_alpha_beta(ff, mu, th, th)[:, 0, 0]
    expect = mu * mu / TWO_PI * np.cosh(th) ** 2
    rep.deviations["normalization"] = float(np.max(np.abs(diag - expect) / expect))

    t2 = np.tanh(0.5 * (th + et)) ** 2
    rep.deviations["spatial_ratio"] = float(np.max(np.abs(f[:, 1, 1] - t2 * f[:, 0, 0]) / norms))
    return rep


def random_rapidity_pairs(n: int, bound: float = 5.0, seed: int = 0) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(-bound, bound, size=(n, 2))


class QeiClass(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    BORDERLINE = "Borderline"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class QeiClassification:
    kind: QeiClass
    rationale: str
    threshold: float | None = None

    def to_json(self) -> dict:
        return {"classification": self.kind.value, "rationale": self.rationale,
                "threshold": self.threshold}


def qei_nu_threshold(evaluator: MinimalSolution) -> float:
    """Largest |nu| for which P(x) = (1 - nu) + nu x still admits a QEI."""
    f_inf = evaluator.fmin_infinity()
    if f_inf == 0.0:
        raise DivergentLimit("F_min tends to zero, the nu threshold is unbounded")
    return 1.0 / (2.0 * f_inf)


def asymptotic_ratio(ff: FormFactorFP, thetas: Sequence[float] = RATIO_SAMPLES) -> np.ndarray:
    """F_P(theta) / cosh(theta) at large theta."""
    t = np.asarray(thetas, dtype=float)
    return ff.fp_many(t) / np.cosh(t)


def classify_qei(ff: FormFactorFP) -> QeiClassification:
    """Whether a one-particle QEI holds for this form factor."""
    fam = ff.family
    poly = ff.polynomial
    if fam is Family.ISING:
        if poly.degree == 0:
            return QeiClassification(QeiClass.HOLDS, "Ising with P = 1")
        return QeiClassification(QeiClass.FAILS, "Ising admits a QEI only for P = 1")
    if fam in (Family.FREE, Family.SINH_GORDON):
        if poly.degree == 0:
            return QeiClassification(QeiClass.HOLDS, "P = 1, F_P bounded")
        if poly.degree >= 2:
            return QeiClassification(QeiClass.FAILS, f"deg P = {poly.degree} >= 2")
        thr = qei_nu_threshold(ff.evaluator)
        nu = abs(poly.nu)
        if abs(nu - thr) <= BORDERLINE_TOL:
            return QeiClassification(QeiClass.BORDERLINE, f"|nu| = {nu:.12g} at the threshold", thr)
        if nu < thr:
            return QeiClassification(QeiClass.HOLDS, f"|nu| = {nu:.6g} < {thr:.6g}", thr)
        return QeiClassification(QeiClass.FAILS, f"|nu| = {nu:.6g} > {thr:.6g}", thr)
    ratios = asymptotic_ratio(ff)
    lo, hi = UNDETERMINED_BAND
    d = np.diff(ratios)
    monotone = bool(np.all(d >= 0) or np.all(d <= 0))
    desc = ", ".join(f"{r:.4g}" for r in ratios)
    if monotone and np.all(ratios < lo):
        return QeiClassification(QeiClass.HOLDS, f"F_P/cosh at large theta: {desc} < 1/2")
    if monotone and np.all(ratios > hi):
        return QeiClassification(QeiClass.FAILS, f"F_P/cosh at large theta: {desc} > 1/2")
    return QeiClassification(QeiClass.UNDETERMINED, f"F_P/cosh at large theta: {desc} inconclusive")
