"""Bump wave functions with negative energy density.

Two narrow bumps at rapidities gamma +- theta_P/2 see, in the limit of
vanishing width, the 2x2 matrix

    M_jk = cosh^2((gamma_j + gamma_k)/2) F_P(gamma_j - gamma_k),

which has a negative direction as soon as |F_P(theta_P)| > 1 and gamma is
large enough. Widely separated bumps at +-j with width a e^{-j} give a
sequence whose energy density is unbounded below when F_P grows like
c cosh(theta) with c > 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import GridTooSmall, WitnessNotFound
from .spectral import Grid, KernelMatrix, SmearingGaussian, assemble_midpoint
from .stress import FormFactorFP

TWO_PI = 2.0 * math.pi
THETA_P_STEP = 0.05
THETA_P_MAX = 10.0
GAMMA_VALUES = tuple(range(1, 31))
MAX_HALVINGS = 12
SEQUENCE_SCALES = (0.25, 0.5, 1.0, 2.0)


def chi(theta):
    """Standard mollifier exp(-1/(1 - theta^2)) on (-1, 1)."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape)
    inside = np.abs(theta) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - theta[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def chi_norm(q: int) -> float:
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    val, _ = quad(lambda t: float(chi(t)) ** q, -1.0, 1.0, epsabs=1e-15, epsrel=1e-13)
    return val ** (1.0 / q)


def chi_q_rho(q: int, rho: float, theta):
    """rho^{-1/q} chi(theta / rho) / ||chi||_q, unit L^q norm."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return rho ** (-1.0 / q) / chi_norm(q) * chi(np.asarray(theta, dtype=float) / rho)


@dataclass(frozen=True)
class BumpState:
    beta: tuple[complex, ...]
    gamma: tuple[float, ...]
    rho: float
    q: int = 1

    def __post_init__(self):
        if len(self.beta) != len(self.gamma) or not self.beta:
            raise ValueError("beta and gamma need equal nonzero length")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.q not in (1, 2):
            raise ValueError("q must be 1 or 2")

    def support(self) -> tuple[float, float]:
        return min(self.gamma) - self.rho, max(self.gamma) + self.rho

    def to_json(self) -> dict:
        return {"beta": [[b.real, b.imag] for b in map(complex, self.beta)],
                "gamma": list(self.gamma), "rho": self.rho, "q": self.q}


def evaluate_bump_state(state: BumpState, theta):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape, dtype=complex)
    for b, g in zip(state.beta, state.gamma):
        out += complex(b) * chi_q_rho(state.q, state.rho, theta - g)
    return out


def det_m_criterion(ff: FormFactorFP, theta_p: float, gamma: float) -> float:
    fp = ff.fp(theta_p)
    return (math.cosh(gamma + 0.5 * theta_p) ** 2 * math.cosh(gamma - 0.5 * theta_p) ** 2
            - math.cosh(gamma) ** 4 * fp * fp)


def two_bump_matrix(ff: FormFactorFP, theta_p: float, gamma: float) -> np.ndarray:
    g = np.array([gamma + 0.5 * theta_p, gamma - 0.5 * theta_p])
    d = g[:, None] - g[None, :]
    return np.cosh(0.5 * (g[:, None] + g[None, :])) ** 2 * ff.fp_many(d)


class _NoneFound:
    """Result of a search whose hypothesis fails on the search grid."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoneFound"

    def __bool__(self):
        return False


NoneFound = _NoneFound()


@dataclass(frozen=True)
class NegativeDirection:
    theta_p: float
    gamma: float
    beta: tuple[complex, complex]
    det: float

    @property
    def centers(self) -> tuple[float, float]:
        return self.gamma + 0.5 * self.theta_p, self.gamma - 0.5 * self.theta_p

    def to_json(self) -> dict:
        return {"theta_P": self.theta_p, "gamma": self.gamma, "det": self.det,
                "beta": [[b.real, b.imag] for b in self.beta]}


def find_negative_direction(ff: FormFactorFP, theta_step: float = THETA_P_STEP,
                            theta_max: float = THETA_P_MAX,
                            gammas: Sequence[float] = GAMMA_VALUES):
    """First theta_P on the grid with |F_P| > 1, then the first gamma with det M < 0."""
    n = int(round(theta_max / theta_step))
    thetas = theta_step * np.arange(1, n + 1)
    fp = ff.fp_many(thetas)
    hits = np.flatnonzero(np.abs(fp) > 1.0)
    if hits.size == 0:
        return NoneFound
    theta_p = float(thetas[hits[0]])
    for gamma in gammas:
        det = det_m_criterion(ff, theta_p, float(gamma))
        if det < 0:
            vals, vecs = np.linalg.eigh(two_bump_matrix(ff, theta_p, float(gamma)))
            v = vecs[:, 0]
            v = v if v[np.argmax(np.abs(v))] >= 0 else -v
            return NegativeDirection(theta_p, float(gamma), (complex(v[0]), complex(v[1])), det)
    return NoneFound


@dataclass
class Witness:
    state: BumpState
    value: float
    direction: NegativeDirection

    def to_json(self) -> dict:
        return {"value": self.value, "state": self.state.to_json(),
                "direction": self.direction.to_json()}


def negative_expectation_witness(ff: FormFactorFP, sm: SmearingGaussian, grid: Grid,
                                 matrix: KernelMatrix | None = None) -> Witness:
    """Shrink a two-bump state until its discretized energy density is negative."""
    direction = find_negative_direction(ff)
    if direction is NoneFound:
        raise WitnessNotFound("|F_P| <= 1 on the search grid, no negative direction")
    m = matrix if matrix is not None else assemble_midpoint(ff, grid, sm)
    theta = grid.midpoints
    rho = 0.5
    last = math.nan
    for _ in range(MAX_HALVINGS + 1):
        state = BumpState(direction.beta, direction.centers, rho, q=1)
        lo, hi = state.support()
        if not grid.covers(lo, hi):
            raise GridTooSmall(f"bumps on [{lo:.3g}, {hi:.3g}] leave the grid [-{grid.R}, {grid.R}]")
        phi = evaluate_bump_state(state, theta)
        if np.any(phi):
            last = m.expectation(phi)
            if last < 0:
                return Witness(state, last, direction)
        rho *= 0.5
    raise WitnessNotFound(f"no negative value after {MAX_HALVINGS} halvings of rho "
                          f"(last value {last:.3g}); decrease sigma or refine the grid")


def _bump_nodes(center: float, rho: float, n: int) -> np.ndarray:
    return center + rho * ((np.arange(n) + 0.5) * 2.0 / n - 1.0)


def no_qei_sequence_value(ff: FormFactorFP, sm: SmearingGaussian, j: int, a: float,
                          grid: Grid, nodes_per_bump: int = 64) -> float:
    """<phi_j, T00(g^2) phi_j> for bumps at +-j of width a e^{-j} with beta = (1, -1)/sqrt2.

    The bumps are far narrower than a grid cell for larger j, so each support
    gets its own midpoint rule with ``nodes_per_bump`` points.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    if not grid.covers(-j - 1.0, j + 1.0):
        raise GridTooSmall(f"grid [-{grid.R}, {grid.R}] must cover [-{j + 1}, {j + 1}]")
    rho = a * math.exp(-j)
    beta = np.array([1.0, -1.0]) / math.sqrt(2.0)
    nodes = np.concatenate([_bump_nodes(float(j), rho, nodes_per_bump),
                            _bump_nodes(-float(j), rho, nodes_per_bump)])
    weight = 2.0 * rho / nodes_per_bump
    phi = np.concatenate([beta[0] * chi_q_rho(2, rho, nodes[:nodes_per_bump] - j),
                          beta[1] * chi_q_rho(2, rho, nodes[nodes_per_bump:] + j)])
    fp = ff.fp_many(np.subtract.outer(nodes, nodes).ravel()).reshape(nodes.size, nodes.size)
    ker = (sm.mu ** 2 / TWO_PI * np.cosh(0.5 * np.add.outer(nodes, nodes)) ** 2 * fp
           * sm.between_rapidities(nodes[:, None], nodes[None, :]))
    return float(weight * weight * (phi @ ker @ phi))


def choose_sequence_scale(sm: SmearingGaussian, js: Sequence[int],
                          scales: Sequence[float] = SEQUENCE_SCALES) -> float:
    """Largest a with g~^2 >= 1/2 across each bump's energy spread, for all j."""
    best = None
    for a in scales:
        ok = True
        for j in js:
            rho = a * math.exp(-j)
            spread = sm.mu * (math.cosh(j + rho) - math.cosh(j - rho))
            if sm.g_tilde_sq(spread) < 0.5:
                ok = False
                break
        if ok:
            best = a
    if best is None:
        raise WitnessNotFound("no scale a keeps the smearing above 1/2 on the bumps")
    return float(best)


def bump_norm_on_grid(state: BumpState, grid: Grid) -> float:
    phi = evaluate_bump_state(state, grid.midpoints)
    return float(grid.h * np.vdot(phi, phi).real)
