"""Compute the derived ground-truth values with the brute-force oracles and freeze them.

Writes tests/fixtures/derived.json.  Run from the repository root:

    python scripts/freeze_oracles.py
"""
import json
import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

FS_CASES = [(seed, 3, 1.5, 2.5, 3) for seed in range(3)] + [(seed, 4, 3.0, 1.2, 2) for seed in range(3, 5)]


def eig_2x2_sym(a, b, c):
    """Eigenvalues of [[a,b],[b,c]] from the characteristic polynomial."""
    tr, det = a + c, a * c - b * b
    disc = math.sqrt(tr * tr / 4 - det)
    return [tr / 2 - disc, tr / 2 + disc]


def root_diag(M, s):
    return np.diag(np.diag(M) ** s)


def main():
    out = {}
    out["eig_2112"] = eig_2x2_sym(2.0, 1.0, 2.0)
    out["eig_0110"] = eig_2x2_sym(0.0, 1.0, 0.0)
    out["sqrt_2112"] = oracles.matrix_sqrt_2x2_pd(np.array([[2.0, 1.0], [1.0, 2.0]])).tolist()
    out["ap_two_cell_scalar"] = oracles.ap_bruteforce_1d(
        [np.array([[1.0]]), np.array([[4.0]])], 2.0, 1, root_diag)
    out["ap_two_block"] = oracles.ap_bruteforce_1d(
        [np.diag([1.0, 4.0]), np.diag([4.0, 1.0])], 2.0, 1, root_diag)
    avg = (np.diag([1.0, 4.0]) + np.diag([4.0, 1.0])) / 2
    out["reducing_two_block_p2"] = oracles.matrix_sqrt_2x2_pd(avg).tolist()
    out["lq_two_unit_disks_q2"] = oracles.lq_sum_disks_radius((1.0, 1.0), 2.0)
    out["l1_ball_john_radius"] = oracles.l1_ball_inradius_c2()
    f = np.zeros((2, 2))
    f[0, 0] = 1.0
    out["strong_maximal_left_left"] = oracles.strong_maximal_2x1d(f, 1, 1).tolist()
    out["haar_left_half"] = float(oracles.haar_coeff_1d(np.array([1.0, 0.0]), 1, 0, 0))
    out["maximal_left_half"] = oracles.classical_maximal_1d(np.array([1.0, 0.0]), 1).tolist()
    gens = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    out["zonotope_e1_e2"] = oracles.zonotope_norm_bruteforce(gens, 64)
    fs = []
    for seed, depth, p, q, K in FS_CASES:
        rng = np.random.default_rng(seed)
        fields = [rng.normal(size=2 ** depth) + 1j * rng.normal(size=2 ** depth) for _ in range(K)]
        lhs, rhs = oracles.fs_bruteforce_scalar(fields, depth, p, q)
        fs.append({"seed": seed, "depth": depth, "p": p, "q": q, "K": K, "lhs": lhs, "rhs": rhs})
    out["fs_scalar"] = fs
    path = ROOT / "tests" / "fixtures" / "derived.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
