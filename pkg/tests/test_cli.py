import json

import numpy as np
import pytest

from mwlab.cli import main
from mwlab.convex import BalancedHull
from mwlab.experiments import random_symbol
from mwlab.grid import AtomField, DyadicGrid, ProductGrid
from mwlab.weights import MatrixWeight


@pytest.fixture
def two_block(tmp_path):
    W = MatrixWeight(DyadicGrid(1, 1), np.stack([np.diag([1.0, 4.0]), np.diag([4.0, 1.0])]), 2.0)
    path = tmp_path / "w.json"
    path.write_text(json.dumps(W.to_json()))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_ap(capsys, two_block):
    code, out = run(capsys, "ap", "--weight", two_block)
    assert code == 0
    assert json.loads(out.out)["ap"] == pytest.approx(2.5)


def test_reduce(capsys, two_block, tmp_path):
    target = tmp_path / "r.json"
    code, _ = run(capsys, "reduce", "--weight", two_block, "--cube", "0:0", "--out", target)
    assert code == 0
    obj = json.loads(target.read_text())
    assert obj["method"] == "closed_form_p2"


def test_bad_cube_exit_code(capsys, two_block):
    code, out = run(capsys, "reduce", "--weight", two_block, "--cube", "3:0")
    assert code == 2
    assert "invalid input" in out.err


def test_missing_file(capsys, tmp_path):
    code, _ = run(capsys, "ap", "--weight", tmp_path / "nope.json")
    assert code == 2


def test_maximal_and_haar(capsys, two_block, tmp_path):
    f = AtomField(DyadicGrid(1, 1), np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))
    fp = tmp_path / "f.json"
    fp.write_text(json.dumps(f.to_json()))
    code, out = run(capsys, "maximal", "--weight", two_block, "--input", fp, "--variant", "convex")
    assert code == 0 and json.loads(out.out)["kind"] == "real"
    code, out = run(capsys, "haar", "--input", fp)
    assert code == 0 and json.loads(out.out)["shape"] == [2, 2]


def test_john(capsys, tmp_path):
    bp = tmp_path / "b.json"
    bp.write_text(json.dumps(BalancedHull(np.eye(2)).to_json()))
    code, out = run(capsys, "john", "--body", bp)
    assert code == 0
    assert json.loads(out.out)["sandwich_factor"] <= np.sqrt(2) * 1.05


def test_bmo_h1_duality(capsys, tmp_path):
    g = ProductGrid(DyadicGrid(1, 1), DyadicGrid(1, 1))
    W = MatrixWeight(g, np.broadcast_to(np.eye(2), g.shape + (2, 2)), 2.0)
    wp = tmp_path / "w.json"
    wp.write_text(json.dumps(W.to_json()))
    B = random_symbol(g, 2, 1, np.random.default_rng(0))
    sp = tmp_path / "s.json"
    sp.write_text(json.dumps(B.to_json()))
    code, out = run(capsys, "bmo", "--symbol", sp, "--weights", wp, wp)
    assert code == 0
    assert json.loads(out.out)["bmo"] == pytest.approx(np.linalg.norm(B.coeffs[0, 0, 0, 0], 2))
    code, out = run(capsys, "duality", "--symbol", sp, "--phi", sp, "--weights", wp, wp)
    assert code == 0 and json.loads(out.out)["pairing"][0] > 0


def test_fs_experiment_determinism(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 3, "p": 3.0, "q": 1.5, "d": 2, "depth": 2, "trials": 2, "K": 2}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["fs", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["fs", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_config(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p": 0.5}))
    code, out = run(capsys, "fs", "--config", cfg)
    assert code == 2
