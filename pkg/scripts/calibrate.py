"""Freeze regression bands for quantities with unspecified constants.

Runs seeded calibration instances (seeds from CAL_BASE upward, disjoint from the
test seeds) and writes tests/fixtures/calibration.json.  Bands are MARGIN times
the observed maximum; for ratios that are 1 in exact arithmetic the margin is
applied to the excess over 1 instead.
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np

from mwlab import probes as P
from mwlab.grid import DyadicGrid

CAL_BASE = 900_000
MARGIN = 1.5
OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "calibration.json"


def key(p, d=None):
    return f"p={p:g}" if d is None else f"p={p:g},d={d}"


def band(obs):
    return MARGIN * obs


def excess_band(obs):
    return 1.0 + MARGIN * max(obs - 1.0, 1e-6)


def cal_lemma(n_random):
    out = {}
    for p in P.PS:
        for d in (1, 2, 3):
            fields = [] if d == 3 else list(P.lattice_fields(DyadicGrid(1, 1), d, p))
            fields += [P.lemma_probe_weight(CAL_BASE + s, p, d) for s in range(n_random)]
            g1 = g2 = 0.0
            for W in fields:
                r = P.lemma_ratios(W)
                g1, g2 = max(g1, r["gamma1"]), max(g2, r["gamma2"])
            out[key(p, d)] = dict(observed_gamma1=g1, observed_gamma2=g2, gamma1=band(g1),
                                  gamma2=band(g2), instances=len(fields))
    return out


def cal_iterated(n_lattice, n_random):
    out = {}
    g = P.product_grid(1, 1, 1, 1)
    for p in P.PS:
        for d in (1, 2):
            limit = None if d == 1 else n_lattice
            fields = list(P.lattice_fields(g, d, p, limit=limit, seed=CAL_BASE))
            fields += [P.bi_probe_weight(CAL_BASE + s, p, d) for s in range(n_random)]
            obs = max(P.iterated_ratio(W) for W in fields)
            out[key(p, d)] = dict(observed=obs, band=excess_band(obs), instances=len(fields))
    return out


def cal_bi(n_random):
    avg, sl = {}, {}
    for p in P.PS:
        for d in (1, 2):
            a = s = 0.0
            for k in range(n_random):
                W = P.bi_probe_weight(CAL_BASE + k, p, d, (2, 2))
                a, s = max(a, P.averaged_ratio(W)), max(s, P.slicing_ratio(W))
            avg[key(p, d)] = dict(observed=a, band=band(a), instances=n_random)
            sl[key(p, d)] = dict(observed=s, band=band(s), instances=n_random)
    return avg, sl


def cal_domination(n_random):
    out = {}
    for p in P.PS:
        for d in (1, 2, 3):
            obs = max(P.domination_probe(CAL_BASE + k, p, d) for k in range(n_random))
            out[key(p, d)] = dict(observed=obs, band=band(obs), instances=n_random)
    return out


def cal_fs(n):
    rows = [P.fs_probe(CAL_BASE + k) for k in range(n)]
    nz = max(r["normalized"] for r in rows)
    nt = max(r["normalized_tilde"] for r in rows)
    per_d = {}
    for d in (1, 2, 3):
        sel = [r["normalized"] for r in rows if r["d"] == d]
        per_d[f"d={d}"] = max(sel) if sel else None
    return dict(observed=nz, band=band(nz), observed_tilde=nt, band_tilde=band(nt),
                observed_per_d=per_d, instances=n)


def cal_duality(n):
    obs = {key(p): 0.0 for p in P.PS}
    for k in range(n):
        r = P.duality_probe(CAL_BASE + k)
        obs[key(r["p"])] = max(obs[key(r["p"])], r["normalized"])
    return {k: dict(observed=v, band=band(v)) for k, v in obs.items()} | {"instances": n}


def cal_shadow(n):
    obs = max(P.shadow_probe(CAL_BASE + k)[0] for k in range(n))
    return dict(observed=obs, band=band(obs), instances=n)


def cal_symmetry(n):
    obs = max(P.symmetry_probe(CAL_BASE + k) for k in range(n))
    return dict(observed=obs, band=band(obs), instances=n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply instance counts")
    ap.add_argument("--out", default=str(OUT))
    args = ap.parse_args(argv)

    def n(v):
        return max(2, int(round(v * args.scale)))

    res = dict(margin=MARGIN, seed_base=CAL_BASE)
    steps = [
        ("lemma", lambda: cal_lemma(n(40))),
        ("iterated", lambda: cal_iterated(n(60), n(15))),
        ("bi", lambda: cal_bi(n(15))),
        ("domination", lambda: cal_domination(n(30))),
        ("fs", lambda: cal_fs(n(300))),
        ("duality", lambda: cal_duality(n(300))),
        ("shadow", lambda: cal_shadow(n(300))),
        ("symmetry", lambda: cal_symmetry(n(150))),
    ]
    for name, fn in steps:
        t = time.time()
        val = fn()
        if name == "bi":
            res["averaged"], res["slicing"] = val
        else:
            res[name] = val
        print(f"{name}: {time.time() - t:.1f}s", flush=True)
    Path(args.out).write_text(json.dumps(res, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
