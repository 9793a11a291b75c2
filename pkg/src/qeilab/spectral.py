"""Discretized one-particle energy density on a rapidity interval.

The quadratic form <phi, T00(g^2) phi> is projected onto step functions on
N equal cells of [-R, R]. With midpoints theta_j and cell width h the
midpoint-rule matrix is

    M_jk = mu^2/2pi * h * cosh^2((theta_j+theta_k)/2) F_P(theta_j-theta_k)
           * exp(-sigma^2 (cosh theta_j - cosh theta_k)^2),

and its lowest eigenvalue approximates the infimum of the energy density
over normalized one-particle states.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConvergenceFailure, GridTooSmall
from .quadrature import gauss_legendre
from .stress import FormFactorFP

TWO_PI = 2.0 * math.pi
MATRIX_MAGIC = b"QEIM"
_HEADER = struct.Struct("<4sIddd")
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    N: int
    R: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise GridTooSmall(f"grid needs N >= 2 cells, got {self.N}")
        if not self.R > 0:
            raise GridTooSmall(f"cutoff R must be positive, got {self.R}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "R", float(self.R))

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    @property
    def midpoints(self) -> np.ndarray:
        # written around the center so that theta_j = -theta_{N-1-j} exactly
        return (np.arange(self.N) + 0.5 - 0.5 * self.N) * self.h

    def covers(self, lo: float, hi: float) -> bool:
        return -self.R <= lo and hi <= self.R

    def to_json(self) -> dict:
        return {"N": self.N, "R": self.R}


@dataclass(frozen=True)
class SmearingGaussian:
    """g(t) = pi^{-1/4} sqrt(mu / 2 sigma) exp(-mu^2 t^2 / 8 sigma^2), so that
    the Fourier transform of g^2 is exp(-sigma^2 p^2 / mu^2)."""
    sigma: float
    mu: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.mu > 0):
            raise ValueError("sigma and mu must be positive")

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return (math.pi ** -0.25 * math.sqrt(self.mu / (2.0 * self.sigma))
                * np.exp(-(self.mu * t) ** 2 / (8.0 * self.sigma ** 2)))

    def g_tilde_sq(self, p):
        p = np.asarray(p, dtype=float)
        return np.exp(-(self.sigma * p / self.mu) ** 2)

    def between_rapidities(self, theta, eta):
        """g~^2(mu cosh theta - mu cosh eta); mu drops out."""
        d = np.cosh(theta) - np.cosh(eta)
        return np.exp(-(self.sigma * d) ** 2)


@dataclass
class KernelMatrix:
    entries: np.ndarray
    grid: Grid
    smearing: SmearingGaussian
    provenance: str = "midpoint"

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def expectation(self, phi: np.ndarray) -> float:
        """h * phi^* M phi for grid values phi(theta_j)."""
        phi = np.asarray(phi)
        return float(np.real(self.grid.h * np.vdot(phi, self.entries @ phi)))

    def dump(self, path) -> None:
        n = self.N
        iu = np.triu_indices(n)
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MATRIX_MAGIC, n, self.grid.R, self.smearing.sigma,
                                  self.smearing.mu))
            fh.write(self.entries[iu].astype("<f8").tobytes())

    @classmethod
    def load(cls, path, provenance: str = "midpoint") -> "KernelMatrix":
        raw = Path(path).read_bytes()
        magic, n, r, sigma, mu = _HEADER.unpack_from(raw)
        if magic != MATRIX_MAGIC:
            raise ValueError(f"{path}: not a kernel matrix file")
        tri = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if tri.size != n * (n + 1) // 2:
            raise ValueError(f"{path}: expected {n * (n + 1) // 2} values, found {tri.size}")
        m = np.empty((n, n))
        iu = np.triu_indices(n)
        m[iu] = tri
        m.T[iu] = tri
        return cls(m, Grid(n, r), SmearingGaussian(sigma, mu), provenance)


def _fp_on_differences(ff: FormFactorFP, grid: Grid) -> np.ndarray:
    # F_P is even, so the 2N-1 signed differences reduce to N values k*h
    return ff.fp_many(np.arange(grid.N) * grid.h)


def assemble_midpoint(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian,
                      use_symmetry: bool = True) -> KernelMatrix:
    theta = grid.midpoints
    fp = _fp_on_differences(ff, grid)
    pref = sm.mu ** 2 / TWO_PI * grid.h
    if use_symmetry:
        m = kernels.midpoint_kernel(theta, fp, sm.sigma, pref)
    else:
        j, k = np.meshgrid(np.arange(grid.N), np.arange(grid.N), indexing="ij")
        m = (pref * np.cosh(0.5 * (theta[j] + theta[k])) ** 2 * fp[np.abs(j - k)]
             * sm.between_rapidities(theta[j], theta[k]))
    return KernelMatrix(m, grid, sm, "midpoint")


def assemble_exact_cell(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian,
                        quad_order: int = 4) -> KernelMatrix:
    """Cell-averaged matrix elements by tensor Gauss-Legendre on each cell pair."""
    if quad_order < 2:
        raise ValueError("quad_order must be at least 2")
    n, h = grid.N, grid.h
    x, w = gauss_legendre(quad_order)
    off = 0.5 * h * x
    wt = 0.5 * w  # weights on a cell, normalized to sum 1
    theta = grid.midpoints
    # F_P at (j-k) h + off_a - off_b, tabulated per (j-k, a, b)
    shifts = np.arange(-(n - 1), n) * h
    args = shifts[:, None, None] + off[None, :, None] - off[None, None, :]
    fp_tab = ff.fp_many(args.ravel()).reshape(args.shape)
    jk = np.subtract.outer(np.arange(n), np.arange(n)) + (n - 1)
    m = np.zeros((n, n))
    for a in range(quad_order):
        ta = theta + off[a]
        cha = np.cosh(ta)
        for b in range(quad_order):
            tb = theta + off[b]
            d = sm.sigma * np.subtract.outer(cha, np.cosh(tb))
            m += (wt[a] * wt[b]) * (np.cosh(0.5 * np.add.outer(ta, tb)) ** 2
                                    * fp_tab[jk, a, b] * np.exp(-d * d))
    m *= sm.mu ** 2 / TWO_PI * h
    m = 0.5 * (m + m.T)
    return KernelMatrix(m, grid, sm, "exact_cell")


@dataclass
class Plausibility:
    boundary_cells: int
    threshold: float
    boundary_max_ratio: float
    passed: bool

    def to_json(self) -> dict:
        return {"boundary_cells": self.boundary_cells, "threshold": self.threshold,
                "boundary_max_ratio": self.boundary_max_ratio, "pass": self.passed}


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    lowest_vector: np.ndarray | None
    residual: float = math.nan
    plausibility: Plausibility | None = None
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    def to_json(self, include_vector: bool = True) -> dict:
        out = {"lambda_min": self.lambda_min,
               "eigenvalues": self.eigenvalues.tolist(),
               "residual": self.residual}
        if include_vector and self.lowest_vector is not None:
            out["lowest_vector"] = self.lowest_vector.tolist()
        if self.plausibility is not None:
            out["plausibility"] = self.plausibility.to_json()
        return out


def _fix_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    return v if v[i] >= 0 else -v


def eigendecompose(m: KernelMatrix | np.ndarray, want_vectors: bool = True,
                   keep_all_vectors: bool = False) -> SpectralResult:
    """All eigenvalues in ascending order, checked through the lowest residual."""
    a = m.entries if isinstance(m, KernelMatrix) else np.asarray(m, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    v0 = _fix_sign(vecs[:, 0])
    norm = np.linalg.norm(a, 2) if a.shape[0] <= 64 else max(abs(vals[0]), abs(vals[-1]))
    resid = float(np.linalg.norm(a @ v0 - vals[0] * v0))
    if resid > RESIDUAL_TOL * max(norm, 1e-300):
        raise ConvergenceFailure(f"lowest eigenpair residual {resid:.3g} exceeds {RESIDUAL_TOL:g} * |M|")
    return SpectralResult(vals, v0 if want_vectors else None, resid,
                          eigenvectors=vecs if keep_all_vectors else None)


def default_boundary_cells(n: int) -> int:
    return max(3, n // 50)


def plausibility_check(result: SpectralResult, grid: Grid, boundary_cells: int | None = None,
                       threshold: float = 1e-6) -> SpectralResult:
    """Does the lowest eigenvector decay before the cutoff?"""
    if result.lowest_vector is None:
        raise ValueError("plausibility check needs the lowest eigenvector")
    v = np.abs(result.lowest_vector)
    nb = default_boundary_cells(grid.N) if boundary_cells is None else int(boundary_cells)
    nb = max(1, min(nb, grid.N // 2))
    edge = max(v[:nb].max(), v[-nb:].max())
    ratio = float(edge / v.max())
    return replace(result, plausibility=Plausibility(nb, threshold, ratio, ratio < threshold))


def lowest_eigenvalue(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian) -> float:
    return eigendecompose(assemble_midpoint(ff, grid, sm), want_vectors=False).lambda_min


def run_spectral(ff: FormFactorFP, grid: Grid, sm: SmearingGaussian,
                 boundary_cells: int | None = None, threshold: float = 1e-6):
    """Assemble, diagonalize and check plausibility; returns (matrix, result)."""
    m = assemble_midpoint(ff, grid, sm)
    res = plausibility_check(eigendecompose(m), grid, boundary_cells, threshold)
    return m, res


def lowest_eigenvalue_stable(ff: FormFactorFP, sm: SmearingGaussian, N: int, R: float,
                             tolerance: float = 1e-3) -> tuple[float, dict]:
    """lambda_min at (N, R) compared with (2N, R) and (N, R + 1).

    Deltas are relative to |lambda_min|, floored at 1e-8 so that a vanishing
    lowest eigenvalue does not blow up the ratio.
    """
    lam = lowest_eigenvalue(ff, Grid(N, R), sm)
    lam_n = lowest_eigenvalue(ff, Grid(2 * N, R), sm)
    lam_r = lowest_eigenvalue(ff, Grid(N, R + 1.0), sm)
    scale = max(abs(lam), 1e-8)
    d_n = abs(lam_n - lam) / scale
    d_r = abs(lam_r - lam) / scale
    diag = {"lambda_min": lam, "lambda_refined": lam_n, "lambda_extended": lam_r,
            "delta_refined": d_n, "delta_extended": d_r,
            "stable": bool(d_n < tolerance and d_r < tolerance)}
    return lam, diag
