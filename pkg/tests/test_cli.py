import csv
import filecmp
import json

import pytest

from inlslab.cli import main


def _write_config(path, **overrides):
    cfg = {
        "model": {"N": 3, "alpha": 2, "b": 0.3},
        "grid": {"J": 1024, "h": 1 / 64},
        "classify": {"field": "gaussian(0.5,1.0)"},
        "output": {"precision": 12},
    }
    cfg.update(overrides)
    with open(path, "w") as fh:
        json.dump(cfg, fh)
    return path


def test_params_line(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.json")
    assert main(["params", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "s_c=0.65" in out
    assert "two_star=3.4" in out
    assert "theorem_scope=true" in out


def test_unknown_key_exits_2(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"N": 3, "alpha": 2, "b": 0.3, "x": 1}}))
    assert main(["params", "--config", str(path)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_invalid_value_exits_2(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"N": 3, "alpha": -2, "b": 0.3}}))
    assert main(["params", "--config", str(path)]) == 2


def test_missing_config_exits_3(tmp_path, capsys):
    assert main(["params", "--config", str(tmp_path / "nope.json")]) == 3


def test_pairs_outputs(tmp_path):
    cfg = _write_config(tmp_path / "c.json")
    out = tmp_path / "out"
    assert main(["pairs", "--config", str(cfg), "--out", str(out)]) == 0
    with open(out / "pairs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 7
    assert all(r["admissible"] == "true" for r in rows)
    assert all(r["identity_residual"] == "0" for r in rows)
    with open(out / "appendix.csv") as fh:
        arows = list(csv.DictReader(fh))
    assert all(r["equivalent"] == "true" for r in arows)


def test_classify_zero_field(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.json", classify={"field": "zero"})
    assert main(["classify", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    header = out[0].split(",")
    row = dict(zip(header, out[1].split(",")))
    assert row["verdict"] == "GlobalScatters"
    assert float(row["em_product"]) == 0.0


def test_groundstate_outputs_and_determinism(tmp_path):
    cfg = _write_config(
        tmp_path / "c.json",
        grid={"J": 2048, "h": 1 / 128},
        solver={"method": "fixedpoint"},
    )
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["groundstate", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["groundstate", "--config", str(cfg), "--out", str(out2)]) == 0
    for name in ("profile.csv", "identities.csv", "sharp.csv"):
        assert filecmp.cmp(out1 / name, out2 / name, shallow=False), name
    with open(out1 / "identities.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["identity"] for r in rows} == {
        "GS1:fixedpoint",
        "GS2:fixedpoint",
        "EGS:fixedpoint",
    }
    assert all(float(r["rel_residual"]) < 1e-3 for r in rows)


def test_evolve_trace_csv(tmp_path):
    cfg = _write_config(
        tmp_path / "c.json",
        grid={"J": 1024, "h": 1 / 32},
        evolve={"dt": 0.002, "t_end": 0.2, "record_every": 20, "virial_R": 8.0},
    )
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
    with open(out / "trace.csv") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    assert header == [
        "t", "mass", "energy", "grad2", "potential", "gm_product", "zR", "zR_prime", "zR_second",
    ]
    assert len(rows) >= 6
    masses = [float(r[1]) for r in rows]
    assert abs(masses[-1] - masses[0]) / masses[0] < 1e-10
    assert (out / "rigidity.csv").exists()
    assert (out / "scattering.csv").exists()


def test_classify_roundtrip_field_csv(tmp_path, capsys):
    # write a field with the library, feed it back through --field
    import numpy as np

    from inlslab.grid import RadialGrid, field_to_csv, gaussian_field

    g = RadialGrid(J=1024, h=1 / 64, N=3)
    u = g.field(gaussian_field(g, 0.5, 1.0).values.astype(complex))
    fpath = tmp_path / "field.csv"
    field_to_csv(u, fpath)
    cfg = _write_config(tmp_path / "c.json")
    assert main(["classify", "--config", str(cfg), "--field", str(fpath)]) == 0
    out = capsys.readouterr().out
    assert "GlobalScatters" in out


def test_sweep_manifest(tmp_path):
    cfg = _write_config(
        tmp_path / "c.json",
        sweep={"subcommand": "pairs", "alpha": [1.5, 2], "b": [0.2, 0.3]},
    )
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    with open(out / "manifest.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4  # product of list lengths
    assert all(r["status"] == "0" for r in rows)
    # each point directory holds a re-ingestible config
    sub = out / rows[0]["directory"]
    reloaded = json.loads((sub / "config.json").read_text())
    assert reloaded["model"]["alpha"] == 1.5
    assert (sub / "pairs.csv").exists()


def test_sweep_unknown_subcommand(tmp_path):
    cfg = _write_config(tmp_path / "c.json", sweep={"subcommand": "sweep"})
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
