"""Parameter sweeps of the lowest eigenvalue.

A sweep fixes a model template, a polynomial rule, a grid and a smearing
width, and varies one axis:

    coupling_B         sinh-Gordon B, or the single coupling of a generalized model
    n_couplings_real   n couplings B_j = 1, P = ((1+x)/2)^floor(n/2)
    n_couplings_pairs  n pairs B = 1 +- 0.1 k i, P = ((1+x)/2)^n
    sigma              smearing width, with a log-log slope fit
    nu                 P = (1-nu) + nu x, with the QEI threshold and an R+2 recheck
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError, DegenerateFit, DivergentLimit, ModelSpecError
from .minimal import MinimalSolution
from .models import Family, ModelSpec
from .quadrature import QuadratureConfig
from .spectral import Grid, SmearingGaussian, assemble_midpoint, eigendecompose, plausibility_check
from .stress import FormFactorFP, PolynomialP, classify_qei, qei_nu_threshold

AXES = ("coupling_B", "n_couplings_real", "n_couplings_pairs", "sigma", "nu")
CSV_HEADER = ["axis", "value", "lambda_min", "plausibility", "N", "R", "sigma", "mu", "P", "model"]
NU_COLUMNS = ["threshold", "classification", "lambda_min_R_plus_2", "R_relative_change"]
PAIR_STEP = 0.1
SLOPE_FLOOR = 1e-12
TOP_KEYS = {"model", "P", "grid", "smearing", "quadrature", "sweep", "output", "workers", "seed"}


@dataclass(frozen=True)
class SweepPoint:
    axis: str
    value: float
    spec: ModelSpec
    poly: PolynomialP
    grid: Grid
    smearing: SmearingGaussian
    quadrature: QuadratureConfig


@dataclass
class SweepRequest:
    model: ModelSpec
    poly: PolynomialP
    grid: Grid
    sigma: float
    axis: str
    values: list[float]
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    output_path: Path | None = None
    output_format: str = "csv"
    workers: int = 1
    seed: int = 0

    @classmethod
    def from_json(cls, data: dict, base_dir: Path | None = None) -> "SweepRequest":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(data) - TOP_KEYS
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            model = ModelSpec.from_json(data["model"])
            poly = PolynomialP.from_json(data.get("P", [1.0]))
            g = data["grid"]
            grid = Grid(int(g["N"]), float(g["R"]))
            sigma = float(data["smearing"]["sigma"])
            sweep = data["sweep"]
            axis = str(sweep["axis"])
            values = [float(v) for v in sweep["values"]]
            quad = QuadratureConfig.from_json(data.get("quadrature"))
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        out = data.get("output") or {}
        path = out.get("path")
        if path is not None:
            path = Path(path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
        req = cls(model, poly, grid, sigma, axis, values, quad, path,
                  str(out.get("format", "csv")), int(data.get("workers", 1)),
                  int(data.get("seed", 0)))
        req.validate()
        return req

    def validate(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        d = np.diff(self.values)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        fam = self.model.family
        if self.axis == "coupling_B":
            if not all(0 < v < 2 for v in self.values):
                raise ConfigError("coupling values must lie in (0, 2)")
            if fam not in (Family.SINH_GORDON, Family.GENERALIZED_ISING, Family.GENERALIZED_SINH_GORDON):
                raise ConfigError("coupling sweeps need a sinh-Gordon type family")
        elif self.axis in ("n_couplings_real", "n_couplings_pairs"):
            if not all(v >= 1 and float(v).is_integer() for v in self.values):
                raise ConfigError("n must be a positive integer")
            if not fam.generalized:
                raise ConfigError("n-coupling sweeps need a generalized family")
        elif self.axis == "sigma":
            if not all(v > 0 for v in self.values):
                raise ConfigError("sigma values must be positive")
        elif self.axis == "nu":
            if fam not in (Family.FREE, Family.SINH_GORDON):
                raise ConfigError("nu sweeps are defined for Free and SinhGordon")

    def points(self) -> list[SweepPoint]:
        return [self._point(v) for v in self.values]

    def _point(self, v: float) -> SweepPoint:
        spec, poly, sigma = self.model, self.poly, self.sigma
        mass = spec.mass
        try:
            if self.axis == "coupling_B":
                spec = ModelSpec(spec.family, (complex(v),), mass)
            elif self.axis == "n_couplings_real":
                n = int(v)
                spec = ModelSpec(spec.family, (1.0 + 0j,) * n, mass)
                poly = PolynomialP.half_power(n // 2)
            elif self.axis == "n_couplings_pairs":
                n = int(v)
                bs = []
                for k in range(1, n + 1):
                    bs += [complex(1.0, PAIR_STEP * k), complex(1.0, -PAIR_STEP * k)]
                spec = ModelSpec(spec.family, tuple(bs), mass)
                poly = PolynomialP.half_power(n)
            elif self.axis == "sigma":
                sigma = v
            elif self.axis == "nu":
                poly = PolynomialP.affine(v)
        except ModelSpecError as exc:
            raise ConfigError(f"axis value {v}: {exc}") from exc
        return SweepPoint(self.axis, v, spec, poly, self.grid, SmearingGaussian(sigma, mass),
                          self.quadrature)


def _lowest(point: SweepPoint, grid: Grid, ev: MinimalSolution):
    ff = FormFactorFP(ev, point.poly)
    m = assemble_midpoint(ff, grid, point.smearing)
    return plausibility_check(eigendecompose(m), grid)


def run_point(point: SweepPoint) -> dict[str, Any]:
    """One row of a sweep. Module level so that worker processes can pickle it."""
    ev = MinimalSolution(point.spec, point.quadrature)
    res = _lowest(point, point.grid, ev)
    row: dict[str, Any] = {
        "axis": point.axis, "value": point.value, "lambda_min": res.lambda_min,
        "plausibility": res.plausibility.passed, "N": point.grid.N, "R": point.grid.R,
        "sigma": point.smearing.sigma, "mu": point.smearing.mu,
        "P": point.poly.describe(), "model": point.spec.describe(),
    }
    if point.axis == "nu":
        ff = FormFactorFP(ev, point.poly)
        try:
            row["threshold"] = qei_nu_threshold(ev)
        except DivergentLimit:
            row["threshold"] = math.nan
        row["classification"] = classify_qei(ff).kind.value
        wide = Grid(point.grid.N, point.grid.R + 2.0)
        lam2 = _lowest(point, wide, ev).lambda_min
        row["lambda_min_R_plus_2"] = lam2
        row["R_relative_change"] = abs(lam2 - res.lambda_min) / max(abs(res.lambda_min), 1e-12)
    return row


def fit_log_slope(xs, ys) -> float:
    """OLS slope of log|y| against log x, dropping |y| below 1e-12."""
    xs = np.asarray(xs, dtype=float)
    ys = np.abs(np.asarray(ys, dtype=float))
    keep = ys >= SLOPE_FLOOR
    if keep.sum() < 3:
        raise DegenerateFit(f"need at least 3 usable points, have {int(keep.sum())}")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def slope_consistent(slope: float, expected: float = -2.0, tol: float = 0.2) -> bool:
    return abs(slope - expected) <= tol


@dataclass
class SweepResult:
    request: SweepRequest
    rows: list[dict[str, Any]]
    slope: float | None = None
    threshold: float | None = None

    @property
    def columns(self) -> list[str]:
        return CSV_HEADER + (NU_COLUMNS if self.request.axis == "nu" else [])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def summary(self) -> dict[str, Any]:
        out: dict[str, Any] = {"axis": self.request.axis, "points": len(self.rows),
                               "seed": self.request.seed}
        if self.slope is not None:
            out["slope"] = self.slope
            out["slope_consistent"] = slope_consistent(self.slope)
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.request.output_path is not None:
            out["output"] = str(self.request.output_path)
        return out

    def to_json(self) -> dict[str, Any]:
        return {**self.summary(), "rows": self.rows}

    def write(self) -> None:
        path = self.request.output_path
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        if self.request.output_format == "csv":
            path.write_text(self.to_csv())
        else:
            path.write_text(json.dumps(self.to_json(), indent=2, default=_json_default) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def run_sweep(req: SweepRequest) -> SweepResult:
    points = req.points()
    if req.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(req.workers, len(points))) as pool:
            rows = list(pool.map(run_point, points))
    else:
        rows = [run_point(p) for p in points]
    result = SweepResult(req, rows)
    if req.axis == "sigma":
        result.slope = fit_log_slope([r["value"] for r in rows], [r["lambda_min"] for r in rows])
    if req.axis == "nu":
        thr = rows[0].get("threshold")
        result.threshold = None if thr is None or math.isnan(thr) else thr
    return result


def load_request(path) -> SweepRequest:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return SweepRequest.from_json(data, base_dir=path.parent)


__all__ = ["AXES", "CSV_HEADER", "SweepRequest", "SweepResult", "SweepPoint", "run_sweep",
           "run_point", "fit_log_slope", "slope_consistent", "load_request"]
