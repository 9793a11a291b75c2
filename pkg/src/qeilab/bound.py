"""Half-line channel kernels and the QEI constant.

Splitting a wave function into its even and odd parts in rapidity turns the
energy density into two kernels on theta, eta > 0,

    h_pm(theta, eta) = cosh^2((theta+eta)/2) F_P(theta-eta)
                       +- cosh^2((theta-eta)/2) F_P(theta+eta),

compared against the rank-one kernels k_pm(theta) k_pm(eta) with
k_pm(theta) = sqrt|h_pm(theta, theta)|. The comparison form Y_phi is
nonnegative, and the Hilbert-Schmidt size of the difference bounds the
energy density from below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridTooSmall, NonConvergent, QuadratureFailure
from .models import Family
from .quadrature import gauss_legendre, gk15_adaptive
from .spectral import Grid, SmearingGaussian
from .stress import FormFactorFP

TWO_PI = 2.0 * math.pi


def _sign(sign) -> float:
    if sign in (1, "+", "plus"):
        return 1.0
    if sign in (-1, "-", "minus"):
        return -1.0
    raise ValueError(f"sign must be + or -, got {sign!r}")


def h_pm(ff, sign, theta, eta):
    s = _sign(sign)
    theta = np.asarray(theta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    fp = ff.fp_many if hasattr(ff, "fp_many") else ff
    return (np.cosh(0.5 * (theta + eta)) ** 2 * fp(theta - eta)
            + s * np.cosh(0.5 * (theta - eta)) ** 2 * fp(theta + eta))


def k_pm(ff, sign, theta):
    s = _sign(sign)
    theta = np.asarray(theta, dtype=float)
    fp = ff.fp_many if hasattr(ff, "fp_many") else ff
    return np.sqrt(np.abs(np.cosh(theta) ** 2 + s * fp(2.0 * theta)))


@dataclass
class HalfLineDecomposition:
    """Even/odd components on the positive half of a symmetric grid."""
    theta: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    @classmethod
    def from_grid_function(cls, grid: Grid, phi) -> "HalfLineDecomposition":
        if grid.N % 2:
            raise GridTooSmall("the half-line split needs an even number of cells")
        phi = np.asarray(phi)
        if phi.shape != (grid.N,):
            raise GridTooSmall(f"phi has shape {phi.shape}, grid has {grid.N} cells")
        half = grid.N // 2
        pos = phi[half:]
        neg = phi[half - 1::-1]
        return cls(grid.midpoints[half:], (pos + neg) / math.sqrt(2.0),
                   (pos - neg) / math.sqrt(2.0))

    def channels(self):
        return ((1.0, self.phi_plus), (-1.0, self.phi_minus))

    def norm_sq(self) -> float:
        return float(np.vdot(self.phi_plus, self.phi_plus).real
                     + np.vdot(self.phi_minus, self.phi_minus).real)


def _smearing_block(theta: np.ndarray, sm: SmearingGaussian | None) -> np.ndarray:
    if sm is None:
        return np.ones((theta.size, theta.size))
    return sm.between_rapidities(theta[:, None], theta[None, :])


def x_phi(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian, phi) -> float:
    """Channel form of <phi, T00(g^2) phi> with the same midpoint rule as the full matrix."""
    dec = HalfLineDecomposition.from_grid_function(grid, phi)
    t = dec.theta
    g2 = _smearing_block(t, sm)
    total = 0.0
    for s, comp in dec.channels():
        if not np.any(comp):
            continue
        ker = h_pm(ff, s, t[:, None], t[None, :]) * g2
        total += np.vdot(comp, ker @ comp).real
    return float(sm.mu ** 2 / TWO_PI * grid.h ** 2 * total)


def y_phi(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian | None, phi,
          mu: float | None = None) -> float:
    """Rank-one comparison form; ``sm=None`` replaces the smearing by 1."""
    dec = HalfLineDecomposition.from_grid_function(grid, phi)
    t = dec.theta
    g2 = _smearing_block(t, sm)
    total = 0.0
    for s, comp in dec.channels():
        u = k_pm(ff, s, t) * comp
        total += np.vdot(u, g2 @ u).real
    mass = mu if mu is not None else (sm.mu if sm is not None else ff.mass)
    return float(mass ** 2 / TWO_PI * grid.h ** 2 * total)


def random_grid_functions(grid: Grid, count: int, seed: int = 0, support: float | None = None):
    """Seeded complex grid functions, optionally zero outside |theta| <= support."""
    rng = np.random.Generator(np.random.Philox(seed))
    out = rng.standard_normal((count, grid.N)) + 1j * rng.standard_normal((count, grid.N))
    if support is not None:
        out[:, np.abs(grid.midpoints) > support] = 0.0
    return out


def _profile_for(ff: FormFactorFP, theta_max: float, step: float):
    """F_P as a callable, closed form or a spline of log F_min for the integral families."""
    if ff.family in (Family.FREE, Family.ISING):
        return ff.fp_many
    nodes = np.arange(0.0, theta_max + 2 * step, step)
    log_f = np.log(ff.evaluator.fmin_shifted_many(nodes))
    spline = CubicSpline(np.concatenate([-nodes[:0:-1], nodes]),
                         np.concatenate([log_f[:0:-1], log_f]))
    poly = ff.polynomial

    def fp(t):
        t = np.abs(np.asarray(t, dtype=float))
        if t.size and t.max() > nodes[-1]:
            raise GridTooSmall(f"F_P table ends at {nodes[-1]:.3g}, requested {t.max():.3g}")
        return poly(np.cosh(t)) * np.exp(spline(t))

    return fp


@dataclass
class CgEstimate:
    c_g: float
    bound: float
    rho_cut: float
    shells: list[float]

    def to_json(self) -> dict:
        return {"c_g": self.c_g, "bound": self.bound, "rho_cut": self.rho_cut,
                "shells": list(self.shells)}


def c_g_estimate(ff: FormFactorFP, sm: SmearingGaussian, *, rel_tol: float = 1e-6,
                 rho_cap: float = 25.0, rho_nodes: int = 24, step: float = 0.02,
                 quad_rtol: float = 1e-8) -> CgEstimate:
    """Double integral of |g~^2|^2 |h_pm - k_pm k_pm|^2 over the positive quadrant.

    Coordinates rho = (theta+eta)/2, tau = theta-eta with |tau| <= 2 rho; the
    rho axis is cut into unit shells and summed until a shell adds less than
    ``rel_tol`` of the total. ``bound`` is the resulting lower bound
    (mu^2/2pi) sqrt(c_g) on the energy density.
    """
    fp = _profile_for(ff, 4.0 * rho_cap + 1.0, step)
    sig = sm.sigma
    x, w = gauss_legendre(rho_nodes)

    def tau_integral(rho: float) -> float:
        sh = math.sinh(rho)
        # past this tau the squared smearing factor is below exp(-80)
        arg = math.sqrt(10.0) / (sig * sh) if sh > 0 else math.inf
        t_end = min(2.0 * rho, 2.0 * math.asinh(arg) if math.isfinite(arg) else math.inf)
        if t_end <= 0:
            return 0.0
        fp_2rho = float(fp(np.array([2.0 * rho]))[0])

        def f(tau):
            th = rho + 0.5 * tau
            et = rho - 0.5 * tau
            fpt = fp(tau)
            fk_th, fk_et = fp(2.0 * th), fp(2.0 * et)
            gauss = np.exp(-8.0 * (sig * sh * np.sinh(0.5 * tau)) ** 2)
            c_sum, c_dif = math.cosh(rho) ** 2, np.cosh(0.5 * tau) ** 2
            acc = 0.0
            for s in (1.0, -1.0):
                h = c_sum * fpt + s * c_dif * fp_2rho
                kk = np.sqrt(np.abs(np.cosh(th) ** 2 + s * fk_th) * np.abs(np.cosh(et) ** 2 + s * fk_et))
                acc = acc + (h - kk) ** 2
            return gauss * acc

        # absolute floor tied to the size cosh^4(rho) of |h - k k|^2 at tau ~ 1
        atol = 1e-14 * math.cosh(rho) ** 4 * t_end
        val, _, _ = gk15_adaptive(f, 0.0, t_end, rtol=quad_rtol, atol=atol,
                                  max_subdivisions=4000)
        return 2.0 * float(val)

    shells: list[float] = []
    total = 0.0
    rho = 0.0
    rising = 0
    while rho < rho_cap:
        lo, hi = rho, rho + 1.0
        pts = lo + 0.5 * (x + 1.0)
        try:
            shell = 0.5 * sum(wi * tau_integral(p) for p, wi in zip(pts, w))
        except QuadratureFailure as exc:
            raise NonConvergent(f"tau integral failed near rho = {lo:.3g}: {exc}") from exc
        if not math.isfinite(shell):
            raise NonConvergent(f"non-finite shell contribution at rho = {lo:.3g}")
        shells.append(shell)
        total += shell
        rho = hi
        if sig * math.sinh(lo) > 2.0 and len(shells) > 1:
            rising = rising + 1 if shell > shells[-2] else 0
            if rising >= 3:
                raise NonConvergent(f"shell contributions keep growing past rho = {hi:.3g}")
        if total > 0 and shell < rel_tol * total and sig * math.sinh(lo) > 1.0:
            break
    else:
        raise NonConvergent(f"tail did not settle below {rel_tol:g} before rho = {rho_cap:g}")
    bound = sm.mu ** 2 / TWO_PI * math.sqrt(total)
    return CgEstimate(total, bound, rho, shells)


@dataclass
class EllScan:
    a_fit: float
    zero_deviation: float
    even_deviation: float

    def to_json(self) -> dict:
        return {"a_fit": self.a_fit, "zero_deviation": self.zero_deviation,
                "even_deviation": self.even_deviation}


def ell_pm(ff, sign, rho, tau):
    rho = np.asarray(rho, dtype=float)
    tau = np.asarray(tau, dtype=float)
    th, et = rho + 0.5 * tau, rho - 0.5 * tau
    return h_pm(ff, sign, th, et) - k_pm(ff, sign, th) * k_pm(ff, sign, et)


def ell_pm_scan(ff, sign, rho_values, tau_values) -> EllScan:
    """Fit of |ell| / (tau^2 cosh^2 rho), plus the ell(rho, 0) = 0 and evenness checks."""
    r, t = np.meshgrid(np.asarray(rho_values, float), np.asarray(tau_values, float), indexing="ij")
    ell = ell_pm(ff, sign, r, t)
    scale = np.cosh(r) ** 2
    nz = t != 0
    a_fit = float(np.max(np.abs(ell[nz]) / (t[nz] ** 2 * scale[nz]))) if nz.any() else 0.0
    rr = np.asarray(rho_values, float)
    zero_dev = float(np.max(np.abs(ell_pm(ff, sign, rr, 0.0)) / np.cosh(rr) ** 2))
    even_dev = float(np.max(np.abs(ell - ell_pm(ff, sign, r, -t)) / scale))
    return EllScan(a_fit, zero_dev, even_dev)
