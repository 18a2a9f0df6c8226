import csv
import json
import math

import numpy as np
import pytest

from gaussopt.cli import main
from gaussopt.io import parse_split, split_label

KG_FIRST_COLUMN = {10: 0.01861871, 30: 0.00022978, 50: 0.00001590, 70: 0.00034749, 90: 0.03052751}


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_eop_klein_gordon_column(tmp_path):
    cfg = _write(
        tmp_path / "run.json",
        {
            "model": {"type": "kg", "N": 100, "m": 0.1},
            "splits": ["1+1|1+1"],
            "distances": sorted(KG_FIRST_COLUMN),
            "spread": 0.5,
            "optimizer": {"prune_keep_fraction": 0.5},
        },
    )
    out = tmp_path / "eop.csv"
    assert main(["eop", "--config", cfg, "--out", str(out), "--starts", "8"]) == 0
    rows = _rows(out)
    assert [int(r["d"]) for r in rows] == sorted(KG_FIRST_COLUMN)
    for r in rows:
        assert float(r["eop"]) == pytest.approx(KG_FIRST_COLUMN[int(r["d"])], abs=1e-6)
        assert float(r["eop"]) >= float(r["hashing_bound"])
    meta = json.loads((tmp_path / "eop.csv.meta.json").read_text())
    assert meta["config"]["starts"] == 8
    assert len(meta["runs"]) == 5 and len(meta["runs"][0]["seeds"]) == 8
    assert "numpy" in meta["versions"]


def test_ground_state_ising(tmp_path):
    cfg = _write(tmp_path / "gs.json", {"model": {"type": "ising", "N": 4}, "sizes": [2, 4]})
    out = tmp_path / "gs.csv"
    assert main(["ground-state", "--config", cfg, "--out", str(out), "--starts", "4"]) == 0
    for r in _rows(out):
        assert float(r["abs_error"]) < 1e-8


def test_cop_runs(tmp_path):
    cfg = _write(tmp_path / "cop.json", {"model": {"type": "kg", "N": 20, "m": 0.5}, "n_A": 1, "n_ancilla": [1]})
    out = tmp_path / "cop.csv"
    assert main(["cop", "--config", cfg, "--out", str(out), "--starts", "2"]) == 0
    (row,) = _rows(out)
    assert float(row["cop"]) > 0


def test_exact_eop_runs(tmp_path):
    cfg = _write(tmp_path / "ex.json", {"model": {"type": "ising", "N": 20}, "distances": [3]})
    out = tmp_path / "ex.csv"
    assert main(["exact-eop", "--config", cfg, "--out", str(out), "--starts", "4"]) == 0
    (row,) = _rows(out)
    assert float(row["non_gaussian"]) >= float(row["gaussian"]) - 1e-5


def test_exact_eop_rejects_bosons(tmp_path, capsys):
    cfg = _write(tmp_path / "ex.json", {"model": {"type": "kg", "N": 10}})
    assert main(["exact-eop", "--config", cfg]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ParseError"


def test_flow_conserves_energy(tmp_path):
    model = _write(tmp_path / "h.json", {"kind": "boson", "h": [[0.8, 0.0], [0.0, 0.3]]})
    cfg = _write(tmp_path / "flow.json", {"model": {"type": "file", "path": model}, "steps": 200, "dt": 0.01})
    out = tmp_path / "flow.csv"
    assert main(["flow", "--config", cfg, "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 201
    assert max(abs(float(r["drift"])) for r in rows) < 1e-4


def test_convert_round_trip(tmp_path):
    r, phi = 0.4, 0.3
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    G = [[c + math.cos(phi) * s, math.sin(phi) * s], [math.sin(phi) * s, c - math.cos(phi) * s]]
    src = _write(tmp_path / "in.json", {"kind": "boson", "data": {"covariance": G}})
    mid = tmp_path / "sq.json"
    assert main(["convert", "--from", "covariance", "--to", "squeezing", "--config", src, "--out", str(mid)]) == 0
    sq = json.loads(mid.read_text())
    assert sq["representation"] == "squeezing"
    back_cfg = _write(tmp_path / "back.json", {"kind": "boson", "data": sq["data"]})
    back = tmp_path / "back_out.json"
    assert main(["convert", "--from", "squeezing", "--to", "covariance", "--config", back_cfg, "--out", str(back)]) == 0
    G2 = np.asarray(json.loads(back.read_text())["data"]["covariance"])
    assert np.max(np.abs(G2 - np.asarray(G))) < 1e-10


def test_convert_to_stdout(tmp_path, capsys):
    src = _write(tmp_path / "in.json", {"kind": "fermion", "data": {"J": [[0, 1], [-1, 0]]}})
    assert main(["convert", "--from", "J", "--to", "covariance", "--config", src]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["data"]["covariance"] == [[0, 1], [-1, 0]]


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["eop", "--config", str(bad)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ParseError"


@pytest.mark.parametrize(
    "payload",
    [
        {"model": {"type": "kg", "N": 1}},
        {"model": {"type": "spin"}},
        {"splits": ["1+1"]},
        {"distances": [-1]},
        {"bogus": 1},
    ],
)
def test_bad_descriptors(tmp_path, payload):
    assert main(["eop", "--config", _write(tmp_path / "c.json", payload)]) == 2


def test_bad_arguments():
    assert main(["eop", "--starts", "0"]) == 2
    assert main(["nonsense"]) == 2


def test_split_labels():
    assert parse_split("1+2|2+1") == (1, 2, 2, 1)
    assert split_label(parse_split([2, 2, 1, 3])) == "2+2|1+3"
