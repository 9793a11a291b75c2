"""Minimal solutions F_min of the form factor equations.

Free and Ising have closed forms. The sinh-Gordon type families go through
the integral

    J_B(theta + i pi) = 8 int_0^inf dx/x  sinh(xB/4) sinh(x(2-B)/4) sinh(x/2)
                                           / sinh(x)^2 * sin^2(x theta / 2 pi)

with F_min(zeta) = exp(sum_j J_{B_j}(zeta)) / (-i sinh(zeta/2))^p, where the
integer power p removes the surplus zeros at zeta = 0.
"""
from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from ._pykernels import _one_minus_exp_neg, jb_weight
from .errors import (DivergentLimit, QuadratureFailure, ResidualImaginary,
                     StripViolation)
from .models import Family, ModelSpec, scattering_value, s_at_zero, validate
from .quadrature import QuadratureConfig, gk15_adaptive, initial_panels

STRIP_MARGIN = 0.05
X_MIN = 1e-8
RESIDUAL_IMAG_TOL = 1e-9
CACHE_QUANTUM = 1e-12
PROPERTY_TOL = 1e-8


def _check_strip(theta: complex) -> float:
    a = abs(theta.imag)
    if not a < math.pi - STRIP_MARGIN:
        raise StripViolation(
            f"|Im theta| = {a:.6g} must be below pi - {STRIP_MARGIN} for the J_B integral")
    return a


def _x_max(cfg: QuadratureConfig, abs_imag: float) -> float:
    return cfg.x_max_base / (1.0 - abs_imag / math.pi)


def _weight_without_decay(x: np.ndarray, b: complex) -> np.ndarray:
    # jb_weight(x, b) * exp(x), kept separate so exp(-x) can be merged with sin^2 below
    f1 = _one_minus_exp_neg(0.5 * x * b.real, 0.5 * x * b.imag)
    f2 = _one_minus_exp_neg(0.5 * x * (2.0 - b.real), -0.5 * x * b.imag)
    return 4.0 * f1 * f2 / (x * (1.0 + np.exp(-x)) * (-np.expm1(-2.0 * x)))


def j_b(b: complex, theta: complex, cfg: QuadratureConfig | None = None) -> complex:
    """J_B(theta + i pi) for |Im theta| < pi - 0.05."""
    cfg = cfg or QuadratureConfig()
    b = complex(b)
    theta = complex(theta)
    a = _check_strip(theta)
    x_max = _x_max(cfg, a)
    if theta.imag == 0.0:
        re, im, status = kernels.jb_real(b.real, b.imag, theta.real, cfg.relative_tolerance,
                                         cfg.absolute_tolerance, X_MIN, x_max,
                                         int(cfg.max_subdivisions))
        if status:
            raise QuadratureFailure(f"J_B quadrature did not converge (B={b}, theta={theta})")
        return complex(re, im)
    if theta == 0:
        return 0j
    w = theta / math.pi

    def f(x):
        # exp(-x) sin^2(x theta / 2 pi), both exponents have negative real part
        e_plus = np.exp(1j * x * w - x)
        e_minus = np.exp(-1j * x * w - x)
        return _weight_without_decay(x, b) * 0.5 * (np.exp(-x) - 0.5 * (e_plus + e_minus))

    val, _, _ = gk15_adaptive(f, X_MIN, x_max, rtol=cfg.relative_tolerance,
                              atol=cfg.absolute_tolerance,
                              max_subdivisions=int(cfg.max_subdivisions),
                              n_initial=initial_panels(X_MIN, x_max, abs(w)))
    return complex(val)


def j_b_infinity(b: complex, cfg: QuadratureConfig | None = None) -> complex:
    """lim J_B(theta + i pi) for real theta -> infinity: sin^2 replaced by its mean 1/2."""
    cfg = cfg or QuadratureConfig()
    b = complex(b)
    # the weight tends to B(2-B)/4 at x = 0, so start at 0 (Gauss nodes avoid the endpoint)
    val, _, _ = gk15_adaptive(lambda x: 0.5 * jb_weight(x, b), 0.0, cfg.x_max_base,
                              rtol=cfg.relative_tolerance, atol=cfg.absolute_tolerance,
                              max_subdivisions=int(cfg.max_subdivisions))
    return complex(val)


def _log_cosh_half(theta: np.ndarray) -> np.ndarray:
    a = 0.5 * np.abs(theta)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def cosh_power(spec: ModelSpec) -> int:
    """Power p of -i sinh(zeta/2) dividing exp(sum J); negative means a multiplying factor."""
    n = len(spec.couplings)
    fam = spec.family
    if fam is Family.ISING:
        return -1
    if fam is Family.GENERALIZED_SINH_GORDON:
        return 2 * (n // 2)
    if fam is Family.GENERALIZED_ISING:
        return 2 * ((n + 1) // 2) - 1
    return 0


@dataclass
class PropertyCheck:
    name: str
    deviation: float
    passed: bool
    detail: str = ""


@dataclass
class MinimalPropertiesReport:
    checks: dict[str, PropertyCheck] = field(default_factory=dict)
    growth_fit: tuple[float, float] = (math.nan, math.nan)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "growth_fit": {"a": self.growth_fit[0], "b": self.growth_fit[1]},
            "checks": {k: {"deviation": c.deviation, "passed": c.passed, "detail": c.detail}
                       for k, c in self.checks.items()},
        }


class MinimalSolution:
    """Evaluator for F_min of one model, with a cache on the line R + i pi.

    The cache maps quantized real theta to F_min(theta + i pi). Inserts are
    idempotent, so concurrent use from threads is safe.
    """

    def __init__(self, spec: ModelSpec, quadrature: QuadratureConfig | None = None):
        validate(spec)
        self.spec = spec
        self.quadrature = quadrature or QuadratureConfig()
        self.power = cosh_power(spec)
        self._cache: dict[int, float] = {}
        self._continuation_constants: list[complex] | None = None

    @property
    def family(self) -> Family:
        return self.spec.family

    @property
    def uses_quadrature(self) -> bool:
        return bool(self.spec.couplings)

    def __repr__(self):
        return f"MinimalSolution({self.spec.describe()})"

    # -- real line R + i pi ---------------------------------------------
    def fmin_shifted(self, theta: float) -> float:
        return float(self.fmin_shifted_many(np.array([float(theta)]))[0])

    def fmin_shifted_many(self, thetas) -> np.ndarray:
        """F_min(theta + i pi) for an array of real theta."""
        thetas = np.asarray(thetas, dtype=float)
        fam = self.family
        if fam is Family.FREE:
            return np.ones_like(thetas)
        if fam is Family.ISING:
            return np.cosh(0.5 * thetas)
        keys = np.rint(thetas / CACHE_QUANTUM).astype(np.int64) if thetas.size else thetas
        out = np.empty(thetas.shape)
        missing: dict[int, float] = {}
        for idx, key in np.ndenumerate(keys):
            k = int(key)
            hit = self._cache.get(k)
            if hit is None:
                missing.setdefault(k, float(thetas[idx]))
            else:
                out[idx] = hit
        if missing:
            mkeys = list(missing)
            mthetas = np.array([missing[k] for k in mkeys])
            vals = self._evaluate_shifted(mthetas)
            for k, v in zip(mkeys, vals):
                self._cache[k] = float(v)
            for idx, key in np.ndenumerate(keys):
                out[idx] = self._cache[int(key)]
        return out

    def _evaluate_shifted(self, thetas: np.ndarray) -> np.ndarray:
        cfg = self.quadrature
        total = np.zeros(thetas.shape, dtype=complex)
        for b, mult in Counter(self.spec.couplings).items():
            vals, status = kernels.jb_real_many(
                b.real, b.imag, thetas, cfg.relative_tolerance, cfg.absolute_tolerance,
                X_MIN, cfg.x_max_base, int(cfg.max_subdivisions))
            if np.any(status):
                bad = thetas[np.asarray(status) != 0]
                raise QuadratureFailure(f"J_B quadrature did not converge for B={b} at theta={bad[:5]}")
            total += mult * vals
        resid = np.abs(total.imag)
        if resid.size and resid.max() > RESIDUAL_IMAG_TOL:
            raise ResidualImaginary(
                f"imaginary part {resid.max():.3g} of sum J_B did not cancel for {self.spec.describe()}")
        log_f = total.real
        if self.power:
            log_f = log_f - self.power * _log_cosh_half(thetas)
        return np.exp(log_f)

    def clear_cache(self):
        self._cache.clear()

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    # -- complex plane ----------------------------------------------------
    def _sum_j(self, theta: complex) -> complex:
        cfg = self.quadrature
        return sum(mult * j_b(b, theta, cfg) for b, mult in Counter(self.spec.couplings).items())

    def fmin_complex(self, zeta: complex) -> complex:
        """F_min(zeta).

        Closed-form families accept any zeta. Quadrature families need
        delta < Im zeta < 2 pi - delta for the integral; the band
        -pi + delta < Im zeta <= delta is reached through
        F(zeta) F(zeta + i pi) = prod_j C_j sinh(zeta) / (sinh(zeta) + i sin(B_j pi/2))
        divided by (-i sinh(zeta) / 2)^p.
        """
        zeta = complex(zeta)
        fam = self.family
        if fam is Family.FREE:
            return 1.0 + 0j
        if fam is Family.ISING:
            return -1j * cmath.sinh(zeta / 2)
        y = zeta.imag
        if STRIP_MARGIN < y < 2 * math.pi - STRIP_MARGIN:
            return self._fmin_direct(zeta)
        if -math.pi + STRIP_MARGIN < y <= STRIP_MARGIN:
            return self._product_identity(zeta) / self._fmin_direct(zeta + 1j * math.pi)
        raise StripViolation(f"F_min not available at Im zeta = {y:.6g}")

    def _fmin_direct(self, zeta: complex) -> complex:
        val = cmath.exp(self._sum_j(zeta - 1j * math.pi))
        if self.power:
            val /= (-1j * cmath.sinh(zeta / 2)) ** self.power
        return val

    def _product_identity(self, zeta: complex) -> complex:
        if self._continuation_constants is None:
            consts = []
            for b in self.spec.couplings:
                f_half = cmath.exp(j_b(b, -0.5j * math.pi, self.quadrature))
                consts.append(f_half ** 2 * (1 + cmath.sin(b * math.pi / 2)))
            self._continuation_constants = consts
        sh = cmath.sinh(zeta)
        val = 1.0 + 0j
        for b, c in zip(self.spec.couplings, self._continuation_constants):
            val *= c * sh / (sh + 1j * cmath.sin(b * math.pi / 2))
        if self.power:
            val /= (-0.5j * sh) ** self.power
        return val

    # -- asymptotics ------------------------------------------------------
    def fmin_infinity(self) -> float:
        """lim F_min(theta + i pi) as |theta| -> infinity."""
        fam = self.family
        if fam is Family.FREE:
            return 1.0
        if fam is Family.ISING:
            raise DivergentLimit("Ising F_min(theta + i pi) = cosh(theta/2) is unbounded")
        if self.power > 0:
            return 0.0
        total = sum(mult * j_b_infinity(b, self.quadrature)
                    for b, mult in Counter(self.spec.couplings).items())
        if abs(total.imag) > RESIDUAL_IMAG_TOL:
            raise ResidualImaginary(f"imaginary part {total.imag:.3g} in the asymptotic constant")
        return math.exp(total.real)

    # -- defining properties, checked numerically --------------------------
    def verify_minimal_properties(self, sample_points: Iterable[complex],
                                  tol: float = PROPERTY_TOL) -> MinimalPropertiesReport:
        """Check the defining properties on points of the strip 0 < Im zeta < pi.

        (b) F(i pi + w) = F(i pi - w) with w = zeta - i pi,
        (c) F(-zeta) = S(-zeta) F(zeta),
        (d) F(i pi) = 1,
        (e) |log|F|| <= a |Re zeta| + b for |Re zeta| >= 1 (fitted a, b),
        (a) no zeros or poles: min |F| over the samples away from zeta = 0.
        """
        pts = [complex(z) for z in sample_points]
        report = MinimalPropertiesReport()
        values = {z: self.fmin_complex(z) for z in pts}

        def rel(u, v):
            return abs(u - v) / max(1.0, abs(v))

        dev_b = max((rel(values[z], self.fmin_complex(2j * math.pi - z)) for z in pts), default=0.0)
        report.checks["b"] = PropertyCheck("b", dev_b, dev_b < tol, "F(i pi + w) - F(i pi - w)")

        dev_c = 0.0
        skipped = 0
        for z in pts:
            try:
                lhs = self.fmin_complex(-z)
            except StripViolation:
                skipped += 1  # -zeta beyond the continuation band
                continue
            rhs = scattering_value(self.spec, -z) * values[z]
            dev_c = max(dev_c, rel(lhs, rhs))
        report.checks["c"] = PropertyCheck("c", dev_c, dev_c < tol,
                                           f"F(-zeta) - S(-zeta) F(zeta), {skipped} points skipped")

        dev_d = abs(self.fmin_complex(1j * math.pi) - 1.0)
        report.checks["d"] = PropertyCheck("d", dev_d, dev_d < tol, "|F(i pi) - 1|")

        far = [(abs(z.real), abs(math.log(abs(values[z])))) for z in pts
               if abs(z.real) >= 1 and values[z] != 0]
        if far:
            xs, ys = np.array(far).T
            slope = max(0.0, float(np.polyfit(xs, ys, 1)[0])) if len(far) > 1 else 0.0
            intercept = float(np.max(ys - slope * xs))
            a, b = slope, max(intercept, 0.0)
            ok = math.isfinite(a) and math.isfinite(b) and bool(np.all(ys <= a * xs + b + 1e-12))
            report.growth_fit = (a, b)
            report.checks["e"] = PropertyCheck("e", 0.0, ok, f"a={a:.4g}, b={b:.4g}")
        else:
            report.checks["e"] = PropertyCheck("e", 0.0, True, "no samples with |Re zeta| >= 1")

        exclude_origin = s_at_zero(self.spec) == -1
        mags = [abs(values[z]) for z in pts if not (exclude_origin and abs(z) < 0.1)]
        min_abs = min(mags, default=math.inf)
        report.checks["a"] = PropertyCheck("a", min_abs, min_abs > tol, "min |F| over samples")
        return report


def strip_samples(n_re: int = 10, n_im: int = 10, re_max: float = 3.0,
                  margin: float = 0.3) -> list[complex]:
    """A rectangular grid inside 0 < Im zeta < pi, kept ``margin`` away from the edges."""
    xs = np.linspace(-re_max, re_max, n_re)
    ys = np.linspace(margin, math.pi - margin, n_im)
    return [complex(x, y) for y in ys for x in xs]


@lru_cache(maxsize=64)
def evaluator_for(spec: ModelSpec, quadrature: QuadratureConfig | None = None) -> MinimalSolution:
    """Shared evaluator per (spec, quadrature) so sweeps reuse the F_min cache."""
    return MinimalSolution(spec, quadrature)


def batch_fmin_shifted(ev: MinimalSolution, thetas: Sequence[float]) -> np.ndarray:
    return ev.fmin_shifted_many(np.asarray(thetas, dtype=float))
