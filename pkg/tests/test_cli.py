import csv
import json
import math
import subprocess
import sys

import pytest

from fastcontrol.cli import main
from fastcontrol.config import ExperimentConfig
from fastcontrol.errors import ConfigError
from fastcontrol.gram import theorem_rate_constant


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    meta = dict(l[2:].split("=", 1) for l in lines if l.startswith("# "))
    body = [l for l in lines if not l.startswith("#")]
    return meta, list(csv.DictReader(body)), body


def test_spectrum_kdv(tmp_path):
    assert main(["spectrum", "--preset", "periodic-kdv", "--modes", "10", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "spectrum.json").read_text())
    lam = dict(zip(data["indices"], data["lambdas"]))
    assert lam[1] == pytest.approx(1.0) and lam[2] == pytest.approx(8.0)
    _, rows, _ = read_csv(tmp_path / "spectrum_fit.csv")
    vals = {r["quantity"]: float(r["value"]) for r in rows}
    assert vals["exponent"] == pytest.approx(3.0, abs=1e-6)


def test_spectrum_power_law(tmp_path):
    assert main(["spectrum", "--preset", "power-law", "--alpha", "2", "--out", str(tmp_path)]) == 0
    _, rows, _ = read_csv(tmp_path / "spectrum_fit.csv")
    assert float(rows[0]["value"]) == pytest.approx(2.0, abs=1e-6)


def test_bad_fractional_exit_code(tmp_path, capsys):
    assert main(["spectrum", "--preset", "fractional", "--gamma", "0.4", "--out", str(tmp_path)]) == 2
    assert "gamma >= 1" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"bogus": 1}))
    assert main(["spectrum", "--config", str(p)]) == 2


def test_config_file_and_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"preset": "power-law", "alpha": 3, "modes": 4, "t_grid": [0.4, 0.2]}))
    cfg = ExperimentConfig.from_json(str(p)).updated({"modes": 5})
    assert cfg.alpha == 3 and cfg.modes == 5 and cfg.t_grid == (0.4, 0.2)
    with pytest.raises(ConfigError):
        ExperimentConfig(delta=1.5).validate()


def test_precision_exit_code(tmp_path, capsys):
    code = main(["cost-sweep", "--modes", "8", "--t-grid", "0.05", "--digits", "15", "--out", str(tmp_path)])
    assert code == 3
    assert "T=0.05" in capsys.readouterr().err


def test_synth_kdv(tmp_path):
    args = ["synth", "--preset", "periodic-kdv", "--modes", "8", "--T", "0.5", "--out", str(tmp_path)]
    assert main(args) == 0
    _, rows, _ = read_csv(tmp_path / "synth.csv")
    by = {r["method"]: r for r in rows}
    assert float(by["gram"]["l2_norm"]) <= float(by["biorthogonal"]["l2_norm"])
    assert all(float(r["residual"]) <= 1e-4 for r in rows)


def test_synth_zero_state(tmp_path):
    args = ["synth", "--preset", "periodic-kdv", "--modes", "3", "--T", "1", "--y0", "zero", "--out", str(tmp_path)]
    assert main(args) == 0
    _, rows, _ = read_csv(tmp_path / "synth.csv")
    assert all(float(r["l2_norm"]) == 0 and float(r["linf_norm"]) == 0 for r in rows)


def test_synth_bad_y0(tmp_path):
    assert main(["synth", "--modes", "3", "--y0", "1,2", "--out", str(tmp_path)]) == 2


def test_cost_sweep_kdv_abscissa(tmp_path):
    args = ["cost-sweep", "--preset", "periodic-kdv", "--modes", "6", "--t-grid", "0.5,0.35,0.25,0.18,0.12",
            "--out", str(tmp_path)]
    assert main(args) == 0
    meta, fits, _ = read_csv(tmp_path / "cost_sweep_fit.csv")
    row = next(f for f in fits if f["quantity"] == "cost" and f["abscissa"] == "1/(alpha-1)")
    assert float(row["exponent"]) == 0.5 and float(row["r2"]) >= 0.99 and float(row["slope"]) > 0
    assert float(meta["theorem_constant"]) == pytest.approx(theorem_rate_constant(3, "dispersive", True))
    _, rows, _ = read_csv(tmp_path / "cost_sweep.csv")
    assert [float(r["T"]) for r in rows] == sorted(float(r["T"]) for r in rows)
    assert all(float(r["lower_bound"]) <= float(r["cost"]) for r in rows)


@pytest.mark.slow
def test_cost_sweep_biorthogonal_slope(tmp_path):
    args = ["cost-sweep", "--preset", "periodic-kdv", "--modes", "6", "--t-grid", "1.5,1.0,0.7,0.5",
            "--with-biorthogonal", "--out", str(tmp_path)]
    assert main(args) == 0
    meta, fits, _ = read_csv(tmp_path / "cost_sweep_fit.csv")
    row = next(f for f in fits if f["quantity"] == "biorthogonal" and f["abscissa"] == "1/(alpha-1)")
    assert 0 < float(row["slope"]) <= 1.2 * float(meta["theorem_constant"])


def test_cost_sweep_deterministic_and_parallel(tmp_path):
    bodies = []
    for i, w in enumerate(("1", "1", "2")):
        out = tmp_path / str(i)
        assert main(["cost-sweep", "--modes", "5", "--t-grid", "0.3,0.5,0.2", "--seed", "3",
                     "--workers", w, "--out", str(out)]) == 0
        text = (out / "cost_sweep.csv").read_text().splitlines()
        assert text[0].startswith("# timestamp=")
        bodies.append([l for l in text[1:] if not l.startswith(("# workers=", "# out="))])
    assert bodies[0] == bodies[1] == bodies[2]


def test_lemma_verify_default(tmp_path):
    assert main(["lemma-verify", "--out", str(tmp_path)]) == 0
    meta, rows, _ = read_csv(tmp_path / "lemma_verify.csv")
    assert meta["informational"] == "false"
    assert all(r["status"] == "ok" for r in rows)
    i2 = next(r for r in rows if r["group"] == "identity" and r["name"] == "I" and float(r["alpha"]) == 2.0)
    assert float(i2["rhs"]) == pytest.approx(math.pi)


def test_lemma_verify_informational(tmp_path, capsys):
    assert main(["lemma-verify", "--alpha", "1.5", "--out", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err
    meta, rows, _ = read_csv(tmp_path / "lemma_verify.csv")
    assert meta["informational"] == "true"
    assert any(r["status"] == "witness" for r in rows)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "fastcontrol", "spectrum", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "spectrum.json").exists()
