"""Command line entry point: ``qeilab {eigen,sweep,verify,state,bound}``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import kernels
from .bound import c_g_estimate, random_grid_functions, y_phi
from .errors import ConfigError, ModelSpecError, NonConvergent, QeiLabError, WitnessNotFound
from .minimal import MinimalSolution, strip_samples
from .models import Family, ModelSpec, validate
from .spectral import Grid, SmearingGaussian, assemble_midpoint, eigendecompose, plausibility_check
from .states import negative_expectation_witness
from .stress import (FormFactorFP, PolynomialP, classify_qei, random_rapidity_pairs,
                     verify_tensor_conditions)
from .sweeps import load_request, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_couplings(text: str | None) -> tuple[complex, ...]:
    if not text:
        return ()
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace("i", "j").replace(" ", "")
        try:
            out.append(complex(tok))
        except ValueError:
            raise ConfigError(f"cannot read coupling {tok!r}") from None
    return tuple(out)


def _parse_poly(args) -> PolynomialP:
    if getattr(args, "nu", None) is not None:
        return PolynomialP.affine(args.nu)
    try:
        coeffs = [float(c) for c in args.P.split(",")]
    except ValueError:
        raise ConfigError(f"cannot read P coefficients {args.P!r}") from None
    return PolynomialP(tuple(coeffs))


def _model(args) -> ModelSpec:
    spec = ModelSpec(Family.parse(args.model), _parse_couplings(args.couplings), args.mu)
    validate(spec)
    return spec


def _form_factor(args) -> FormFactorFP:
    return FormFactorFP(MinimalSolution(_model(args)), _parse_poly(args))


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=lambda o: o.item() if isinstance(o, np.generic) else str(o)))


def _add_model_args(p, *, grid=True, N=500, R=7.0):
    p.add_argument("--model", required=True, help="free, ising, sinh-gordon, gen-sinh-gordon, gen-ising")
    p.add_argument("--couplings", default=None, help="comma separated B values, e.g. 1.3+0.4i,1.3-0.4i")
    p.add_argument("--P", default="1", help="comma separated coefficients of P, ascending (default 1)")
    p.add_argument("--nu", type=float, default=None, help="use P(x) = (1-nu) + nu x instead of --P")
    p.add_argument("--mu", type=float, default=1.0, help="particle mass (default 1)")
    if grid:
        p.add_argument("--N", type=int, default=N, help=f"number of cells (default {N})")
        p.add_argument("--R", type=float, default=R, help=f"rapidity cutoff (default {R})")
        p.add_argument("--sigma", type=float, default=0.1, help="smearing width (default 0.1)")


def cmd_eigen(args) -> int:
    ff = _form_factor(args)
    grid = Grid(args.N, args.R)
    sm = SmearingGaussian(args.sigma, args.mu)
    m = assemble_midpoint(ff, grid, sm)
    if args.dump_matrix:
        m.dump(args.dump_matrix)
    res = plausibility_check(eigendecompose(m), grid)
    cls = classify_qei(ff)
    out = {"model": ff.evaluator.spec.to_json(), "P": ff.polynomial.to_json(),
           "N": grid.N, "R": grid.R, "sigma": sm.sigma, "mu": sm.mu,
           "lambda_min": res.lambda_min, "plausibility": res.plausibility.to_json(),
           "classification": cls.to_json(), "backend": kernels.BACKEND}
    if args.json:
        out["eigenvalues"] = res.eigenvalues.tolist()
        out["lowest_vector"] = res.lowest_vector.tolist()
        _emit(out)
    else:
        flag = "pass" if res.plausibility.passed else "FAIL"
        print(f"lambda_min = {res.lambda_min:.10g}  plausibility {flag} "
              f"(ratio {res.plausibility.boundary_max_ratio:.2e})  {cls.kind.value}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    req = load_request(args.config)
    if args.workers is not None:
        req.workers = args.workers
    result = run_sweep(req)
    result.write()
    if req.output_path is None:
        sys.stdout.write(result.to_csv() if req.output_format == "csv" else
                         json.dumps(result.to_json(), indent=2) + "\n")
    else:
        _emit(result.summary())
    return EXIT_OK


def cmd_verify(args) -> int:
    ff = _form_factor(args)
    ev = ff.evaluator
    report = {"model": ev.spec.describe(), "P": ff.polynomial.to_json(), "seed": args.seed}
    ok = True

    mp = ev.verify_minimal_properties(strip_samples(10, 10))
    # (a) and (e) are diagnostics, the identities (b)-(d) decide
    ok &= all(mp.checks[k].passed for k in "bcd")
    report["minimal"] = mp.to_json()

    tc = verify_tensor_conditions(ff, args.mu, random_rapidity_pairs(100, seed=args.seed))
    ok &= tc.passed
    report["tensor"] = tc.to_json()

    grid = Grid(args.N, args.R)
    sm = SmearingGaussian(args.sigma, args.mu)
    ys = [y_phi(ff, grid, sm, p) for p in
          random_grid_functions(grid, args.samples, seed=args.seed, support=args.support)]
    y_min = float(min(ys))
    report["lemma_positivity"] = {"count": len(ys), "min_y": y_min, "pass": y_min >= -1e-10}
    ok &= y_min >= -1e-10
    report["passed"] = bool(ok)
    _emit(report)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_state(args) -> int:
    ff = _form_factor(args)
    try:
        w = negative_expectation_witness(ff, SmearingGaussian(args.sigma, args.mu), Grid(args.N, args.R))
    except WitnessNotFound as exc:
        _emit({"found": False, "reason": str(exc)})
        return EXIT_FAIL
    _emit({"found": True, **w.to_json()})
    return EXIT_OK


def cmd_bound(args) -> int:
    ff = _form_factor(args)
    sm = SmearingGaussian(args.sigma, args.mu)
    grid = Grid(args.N, args.R)
    lam = eigendecompose(assemble_midpoint(ff, grid, sm), want_vectors=False).lambda_min
    try:
        est = c_g_estimate(ff, sm)
    except NonConvergent as exc:
        _emit({"c_g": None, "lambda_min": lam, "chain_ok": False, "reason": str(exc)})
        return EXIT_FAIL
    chain = lam >= -est.c_g
    _emit({"c_g": est.c_g, "bound": est.bound, "lambda_min": lam, "chain_ok": bool(chain),
           "bound_ok": bool(lam >= -est.bound), "rho_cut": est.rho_cut})
    return EXIT_OK if chain else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qeilab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eigen", help="lowest eigenvalue of the discretized energy density")
    _add_model_args(p)
    p.add_argument("--dump-matrix", metavar="PATH", default=None, help="write the matrix in binary form")
    p.add_argument("--json", action="store_true", help="full JSON output including the spectrum")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON config")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--workers", type=int, default=None, help="override the config worker count")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="minimal-solution, tensor and positivity checks")
    _add_model_args(p, N=200, R=6.0)
    p.add_argument("--samples", type=int, default=200, help="random wave functions (default 200)")
    p.add_argument("--support", type=float, default=3.0, help="support radius of random wave functions")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("state", help="two-bump state with negative energy density")
    _add_model_args(p, R=10.0)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("bound", help="QEI constant c_g against the lowest eigenvalue")
    _add_model_args(p)
    p.set_defaults(func=cmd_bound)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelSpecError) as exc:
        print(f"qeilab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QeiLabError as exc:
        print(f"qeilab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
