import csv
import io
import json
import math

import pytest

from qeilab.errors import ConfigError, DegenerateFit
from qeilab.sweeps import (CSV_HEADER, NU_COLUMNS, SweepRequest, fit_log_slope, load_request,
                           run_sweep, slope_consistent)


def config(**over):
    base = {
        "model": {"family": "SinhGordon", "couplings": [[1.0, 0.0]], "mass": 1.0},
        "P": [1.0],
        "grid": {"N": 80, "R": 6.0},
        "smearing": {"sigma": 0.1},
        "sweep": {"axis": "coupling_B", "values": [0.5, 1.0, 1.5]},
        "workers": 1,
        "seed": 0,
    }
    base.update(over)
    return base


def test_request_parsing(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config(output={"path": "o.csv"})))
    req = load_request(path)
    assert req.axis == "coupling_B" and req.grid.N == 80
    assert req.output_path == tmp_path / "o.csv"


@pytest.mark.parametrize("bad", [
    {"sweep": {"axis": "mass", "values": [1.0]}},
    {"sweep": {"axis": "coupling_B", "values": []}},
    {"sweep": {"axis": "coupling_B", "values": [0.5, 1.5, 1.0]}},
    {"sweep": {"axis": "coupling_B", "values": [0.5, 2.0]}},
    {"sweep": {"axis": "nu", "values": [0.1, 0.2]}, "model": {"family": "Ising", "couplings": []}},
    {"sweep": {"axis": "n_couplings_real", "values": [1.5, 2.0]}},
    {"grid": {"N": 1, "R": 5.0}},
    {"smearing": {"sigma": -1.0}},
    {"workers": 0},
    {"colour": "blue"},
    {"output": {"path": "x", "format": "xml"}},
    {"quadrature": {"rtol": 1e-3}},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        SweepRequest.from_json(config(**bad))


def test_missing_key_and_file(tmp_path):
    data = config()
    del data["grid"]
    with pytest.raises(ConfigError):
        SweepRequest.from_json(data)
    with pytest.raises(ConfigError):
        load_request(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ConfigError):
        load_request(tmp_path / "broken.json")


def test_slope_fit():
    xs = [0.01, 0.02, 0.05, 0.1]
    assert fit_log_slope(xs, [x ** -2 for x in xs]) == pytest.approx(-2.0)
    assert not slope_consistent(fit_log_slope(xs, [3.0] * 4))
    with pytest.raises(DegenerateFit):
        fit_log_slope([0.01, 0.1], [1.0, 2.0])
    with pytest.raises(DegenerateFit):
        fit_log_slope(xs, [1.0, 0.0, 0.0, 2.0])


def test_coupling_sweep_csv_deterministic():
    req = SweepRequest.from_json(config())
    a, b = run_sweep(req), run_sweep(req)
    text = a.to_csv()
    assert text == b.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_HEADER
    lam = {float(r[1]): float(r[2]) for r in rows[1:]}
    assert abs(lam[0.5] - lam[1.5]) <= 1e-8 * abs(lam[0.5])
    assert lam[1.0] < lam[0.5]


def test_parallel_matches_serial():
    serial = run_sweep(SweepRequest.from_json(config()))
    par = run_sweep(SweepRequest.from_json(config(workers=2)))
    assert serial.to_csv() == par.to_csv()


def test_sweep_matches_eigen_cli(capsys):
    from qeilab.cli import main
    req = SweepRequest.from_json(config(sweep={"axis": "coupling_B", "values": [0.7]}))
    row = run_sweep(req).rows[0]
    assert main(["eigen", "--model", "sinh-gordon", "--couplings", "0.7", "--N", "80", "--R", "6",
                 "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambda_min"] == row["lambda_min"]


def test_nu_sweep_columns():
    data = config(model={"family": "Free", "couplings": []},
                  sweep={"axis": "nu", "values": [0.0, 0.45]}, grid={"N": 100, "R": 6.0})
    res = run_sweep(SweepRequest.from_json(data))
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == CSV_HEADER + NU_COLUMNS
    assert res.threshold == 0.5
    assert res.rows[0]["lambda_min"] >= -1e-6
    assert res.rows[1]["classification"] == "Holds"


def test_n_couplings_points():
    data = config(model={"family": "GeneralizedSinhGordon", "couplings": [[1.0, 0.0]]},
                  sweep={"axis": "n_couplings_pairs", "values": [1, 2]})
    pts = SweepRequest.from_json(data).points()
    assert pts[1].spec.couplings == (1 + 0.1j, 1 - 0.1j, 1 + 0.2j, 1 - 0.2j)
    assert pts[1].poly.degree == 2
    data["sweep"] = {"axis": "n_couplings_real", "values": [3]}
    pt = SweepRequest.from_json(data).points()[0]
    assert pt.spec.couplings == (1.0, 1.0, 1.0) and pt.poly.degree == 1


def test_sigma_sweep_slope_and_json(tmp_path):
    out = tmp_path / "s.json"
    data = config(sweep={"axis": "sigma", "values": [0.05, 0.1, 0.2]},
                  output={"path": str(out), "format": "json"})
    res = run_sweep(SweepRequest.from_json(data))
    res.write()
    back = json.loads(out.read_text())
    assert math.isfinite(back["slope"]) and len(back["rows"]) == 3


def test_small_sigma_local_slope():
    # the -2 power law is the sigma -> 0 asymptote; larger sigma bends the curve down
    data = config(grid={"N": 500, "R": 10.0},
                  sweep={"axis": "sigma", "values": [0.01, 0.012, 0.014]})
    res = run_sweep(SweepRequest.from_json(data))
    assert abs(res.slope + 2.0) < 0.05
