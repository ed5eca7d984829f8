"""Ratio probes shared by the calibration script and the test suite.

Each probe measures one quantity whose implied constant is not explicit; the
calibration run freezes max (or min) values and tests compare fresh instances
against them.
"""
from __future__ import annotations

import itertools

import numpy as np

from .experiments import ExperimentConfig, gen_weight, random_symbol
from .grid import AtomField, DyadicGrid, ProductGrid
from .hermitian import op_norm
from .operators import classical_maximal, maximal_pointwise, maximal_reducing
from .paraproducts import bmo_prod_norm, shadow_decomposition
from .weights import (
    C_E,
    MatrixWeight,
    ap_characteristic,
    averaged_weight,
    dual_weight,
    iterated_reducing,
    reducing_operator,
    slice_weight,
)


def lattice_matrices(d: int) -> np.ndarray:
    """Atom values for exhaustive calibration: eigenvalues in {1/4, 1, 4}."""
    levels = (0.25, 1.0, 4.0)
    if d == 1:
        return np.array([[[v]] for v in levels], dtype=complex)
    if d != 2:
        raise ValueError("lattice only defined for d <= 2")
    mats = []
    for th in (0.0, np.pi / 4):
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        for a, b in itertools.product(levels, repeat=2):
            if th and a == b:
                continue
            mats.append(R @ np.diag([a, b]) @ R.T)
    return np.array(mats, dtype=complex)


def lattice_fields(grid, d: int, p: float, limit: int | None = None, seed: int = 0):
    """All (or `limit` seeded) weight fields with atom values in the lattice."""
    L = lattice_matrices(d)
    A = int(np.prod(grid.shape))
    total = len(L) ** A
    if limit is None or limit >= total:
        combos = itertools.product(range(len(L)), repeat=A)
    else:
        rng = np.random.default_rng(seed)
        combos = (tuple(rng.integers(len(L), size=A)) for _ in range(limit))
    for idx in combos:
        yield MatrixWeight(grid, L[list(idx)].reshape(grid.shape + (d, d)), p)


def random_weight(grid, d: int, p: float, seed: int, cap: float = 20.0) -> MatrixWeight:
    model = "rotated_diag"
    cfg = ExperimentConfig(p=p, d=d, weight_model=model, cap=cap)
    return gen_weight(cfg, seed, grid)


# ---------------------------------------------------------------- reducing-operator lemma


def lemma_ratios(W: MatrixWeight, method: str = "auto") -> dict:
    """Max over cubes of the exact and calibrated ratios of the inverse/prime lemma.

    exact_inverse = |W_E^{-1} (W'_E)^{-1}|       (<= 1 exactly)
    exact_average = |<W^{1/p}>_E W_E^{-1}|        (<= 1 exactly)
    gamma1 = |W'_E W_E| / C_E^{1/p}
    gamma2 = |W_E <W^{1/p}>_E^{-1}| / C_E^{d/p}
    """
    Wd = dual_weight(W)
    p, d = W.p, W.d
    out = dict(exact_inverse=0.0, exact_average=0.0, gamma1=0.0, gamma2=0.0)
    cubes = W.grid.all_cubes
    for E in cubes:
        M = reducing_operator(W, E, method=method).matrix
        Md = reducing_operator(Wd, E, method=method).matrix
        mask = W.grid.cube_mask(E)
        avg_root = np.mean(W.root[mask], axis=0)
        C = C_E(W, E)
        Minv = np.linalg.inv(M)
        out["exact_inverse"] = max(out["exact_inverse"], op_norm(Minv @ np.linalg.inv(Md)))
        out["exact_average"] = max(out["exact_average"], op_norm(avg_root @ Minv))
        out["gamma1"] = max(out["gamma1"], op_norm(Md @ M) / C ** (1 / p))
        out["gamma2"] = max(out["gamma2"], op_norm(M @ np.linalg.inv(avg_root)) / C ** (d / p))
    return out


def iterated_ratio(W: MatrixWeight, method: str = "auto") -> float:
    """max over rectangles of max(|inner direct^-1|, |direct inner^-1|)."""
    g = W.grid
    worst = 1.0
    for E in g.first.all_cubes:
        for F in g.second.all_cubes:
            inner, direct = iterated_reducing(W, E, F, method=method)
            worst = max(worst, op_norm(inner @ np.linalg.inv(direct)), op_norm(direct @ np.linalg.inv(inner)))
    return float(worst)


def averaged_ratio(W: MatrixWeight) -> float:
    """max over Q in the second factor of [W_Q]_{A_p} / [W]_{A_p, rectangles}."""
    base = ap_characteristic(W, "dyadic", "bi")
    worst = 0.0
    for Q in W.grid.second.all_cubes:
        WQ = averaged_weight(W, Q, slot=2)
        worst = max(worst, ap_characteristic(WQ, "dyadic", "one") / base)
    return worst


def slicing_ratio(W: MatrixWeight) -> float:
    base = ap_characteristic(W, "dyadic", "bi")
    worst = 0.0
    for slot, factor in ((1, W.grid.first), (2, W.grid.second)):
        for x in range(factor.natoms):
            worst = max(worst, ap_characteristic(slice_weight(W, slot, x), "dyadic", "one") / base)
    return worst


# ---------------------------------------------------------------- maximal operators


def reducing_domination_ratio(W: MatrixWeight, f: AtomField) -> float:
    """max_x M~_W f(x) / ([W]^{1/p} M(M_W f)(x))."""
    mt = maximal_reducing(W, f).values
    mw = maximal_pointwise(W, f)
    mm = classical_maximal(mw).values
    ap = ap_characteristic(W)
    return float(np.max(mt / (ap ** (1 / W.p) * mm)))


def duality_lemma_ratio(grid: DyadicGrid, p: float, rng, members: int = 6) -> float:
    """LHS/RHS of the averaged square-function inequality for a random nonnegative family."""
    cubes = grid.haar_cubes
    S = len(grid.signatures)
    ind = grid.indicator[[grid.cube_position[c] for c in cubes]]
    meas = np.array([grid.measure(c) for c in cubes])
    picks = rng.choice(len(cubes) * S, size=min(members, len(cubes) * S), replace=False)
    lhs2 = np.zeros(grid.natoms)
    rhs2 = np.zeros(grid.natoms)
    for k in picks:
        qi, _ = divmod(int(k), S)
        f = np.exp(2.0 * rng.normal(size=grid.natoms)) * (rng.random(grid.natoms) < 0.6)
        avg = np.sum(f * ind[qi]) / ind[qi].sum()
        lhs2 += avg ** 2 * ind[qi] / meas[qi]
        rhs2 += f ** 2 * ind[qi] / meas[qi]
    am = grid.atom_measure
    lhs = (np.sum(lhs2 ** (p / 2)) * am) ** (1 / p)
    rhs = (np.sum(rhs2 ** (p / 2)) * am) ** (1 / p)
    return 0.0 if lhs == 0 else float(lhs / rhs)


# ---------------------------------------------------------------- BMO and shadows


def bmo_symmetry_ratio(B, U: MatrixWeight, V: MatrixWeight) -> float:
    """max(r, 1/r) with r = |B|_(U,V,p) / |B*|_(V',U',p')."""
    a = bmo_prod_norm(B, U, V, "exhaustive")
    b = bmo_prod_norm(B.adjoint(), dual_weight(V), dual_weight(U), "exhaustive")
    if a == 0 and b == 0:
        return 1.0
    r = a / b
    return float(max(r, 1 / r))


def shadow_ratio(Phi, U: MatrixWeight, V: MatrixWeight):
    """(max |tilde Omega_k| / |Omega_k|, decomposition)."""
    sd = shadow_decomposition(Phi, U, V)
    worst = 0.0
    for lv in sd.levels:
        if lv.omega.any():
            worst = max(worst, lv.omega_tilde.sum() / lv.omega.sum())
    return float(worst), sd


def product_grid(n: int, m: int, d1: int, d2: int) -> ProductGrid:
    return ProductGrid(DyadicGrid(n, d1), DyadicGrid(m, d2))


# ---------------------------------------------------------------- seeded instance draws

PS = (1.5, 2.0, 3.0)
QS = (1.5, 2.0, 3.0)


def fs_probe(seed: int, depth: int = 3) -> dict:
    """One FS trial with (p, q, d, model) drawn from the seed."""
    rng = np.random.default_rng([seed, 11])
    p, q = float(rng.choice(PS)), float(rng.choice(QS))
    d = int(rng.integers(1, 4))
    model = "two_block" if d > 1 and rng.random() < 0.3 else "rotated_diag"
    cfg = ExperimentConfig(seed=seed, p=p, q=q, d=d, depth=depth, trials=1, weight_model=model, K=3)
    from .experiments import run_fs_experiment

    row = run_fs_experiment(cfg).rows[0]
    return row


def duality_probe(seed: int) -> dict:
    """One exhaustive-Omega duality trial with (p, d, depths, support) drawn from the seed."""
    rng = np.random.default_rng([seed, 12])
    p = float(rng.choice(PS))
    d = int(rng.integers(1, 3))
    depths = (1, 1) if rng.random() < 0.5 else (2, 2)
    support = int(rng.integers(1, 5))
    cfg = ExperimentConfig(seed=seed, p=p, d=d, depths=depths, support=support, trials=1, cap=8.0)
    from .experiments import run_duality_experiment

    return run_duality_experiment(cfg).rows[0]


def shadow_probe(seed: int):
    """(ratio, decomposition, Phi) for one random Phi with random weights."""
    rng = np.random.default_rng([seed, 13])
    p = float(rng.choice(PS))
    d = int(rng.integers(1, 3))
    depths = (2, 2) if rng.random() < 0.6 else (3, 2)
    cfg = ExperimentConfig(seed=seed, p=p, d=d, depths=depths, cap=8.0)
    g = cfg.bi_grid()
    U = gen_weight(cfg, int(rng.integers(2 ** 62)), g)
    V = gen_weight(cfg, int(rng.integers(2 ** 62)), g)
    Phi = random_symbol(g, d, int(rng.integers(1, 9)), rng)
    ratio, sd = shadow_ratio(Phi, U, V)
    return ratio, sd, Phi


def symmetry_probe(seed: int) -> float:
    rng = np.random.default_rng([seed, 14])
    p = float(rng.choice(PS))
    d = int(rng.integers(1, 3))
    cfg = ExperimentConfig(seed=seed, p=p, d=d, depths=(1, 1), cap=6.0)
    g = cfg.bi_grid()
    U = gen_weight(cfg, int(rng.integers(2 ** 62)), g)
    V = gen_weight(cfg, int(rng.integers(2 ** 62)), g)
    B = random_symbol(g, d, int(rng.integers(1, 4)), rng)
    return bmo_symmetry_ratio(B, U, V)


def domination_probe(seed: int, p: float, d: int) -> float:
    rng = np.random.default_rng([seed, 15])
    g = DyadicGrid(1, 3)
    W = random_weight(g, d, p, int(rng.integers(2 ** 62)))
    from .experiments import random_vector_field

    return reducing_domination_ratio(W, random_vector_field(g, d, rng))


def lemma_probe_weight(seed: int, p: float, d: int) -> MatrixWeight:
    """Random one-parameter weight alternating n=1 depth 2 and n=2 depth 1."""
    g = DyadicGrid(1, 2) if seed % 2 == 0 else DyadicGrid(2, 1)
    return random_weight(g, d, p, seed)


def bi_probe_weight(seed: int, p: float, d: int, depths=(1, 1)) -> MatrixWeight:
    return random_weight(product_grid(1, 1, *depths), d, p, seed)
