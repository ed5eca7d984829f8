"""Random instance generators and the Fefferman-Stein / duality / paraproduct drivers.

All randomness sits in instance generation; every reported number inside a
trial is an exact finite sum.  Reports are written as CSV with repr floats so
identical configs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InvalidModel, SignatureSetTooSmall, SupportTooLargeForExhaustive
from .grid import AtomField, DyadicGrid, ProductGrid, Rect
from .operators import maximal_pointwise, maximal_reducing, mixed_ms
from .paraproducts import (
    KINDS,
    SymbolSpectrum,
    bmo_prod_details,
    duality_pairing,
    h1_norm,
    lp_norm,
    paraproduct,
    weighted_lp_norm,
)
from .weights import MatrixWeight, ap_characteristic, conjugate_exponent

WEIGHT_MODELS = ("rotated_diag", "two_block", "scalar_power")


@dataclass
class ExperimentConfig:
    seed: int = 0
    p: float = 2.0
    q: float = 2.0
    d: int = 2
    n: int = 1
    m: int = 1
    depth: int = 3
    depths: tuple = (2, 2)
    trials: int = 10
    weight_model: str = "rotated_diag"
    family: str = "dyadic"
    K: int = 4
    cap: float = 10.0
    strength: float = 1.0
    alpha: float | None = None
    support: int = 4
    kinds: tuple = KINDS
    output: str | None = None

    def __post_init__(self):
        self.depths = tuple(int(v) for v in self.depths)
        self.kinds = tuple(self.kinds)
        if not (1 < self.p < np.inf and 1 < self.q < np.inf):
            raise InvalidModel("exponents p and q must lie in (1, inf)")
        if self.trials < 1:
            raise InvalidModel("trials must be at least 1")
        if self.weight_model not in WEIGHT_MODELS:
            raise InvalidModel(f"unknown weight model {self.weight_model!r}")
        if self.weight_model == "scalar_power" and self.d != 1:
            raise InvalidModel("scalar_power weights need d = 1")
        if not 1 <= self.K <= 16:
            raise InvalidModel("K must lie in 1..16")
        if self.d < 1:
            raise InvalidModel("d must be positive")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise InvalidModel(f"unknown config keys: {sorted(extra)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["depths"] = list(self.depths)
        out["kinds"] = list(self.kinds)
        return out

    def one_grid(self) -> DyadicGrid:
        return DyadicGrid(self.n, self.depth)

    def bi_grid(self) -> ProductGrid:
        return ProductGrid(DyadicGrid(self.n, self.depths[0]), DyadicGrid(self.m, self.depths[1]))


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2 ** 64 - 1), int(trial), int(stream)])


# ---------------------------------------------------------------- weights


def _atom_coords(grid) -> np.ndarray:
    """(A_total, dims) atom centers in [0,1), flattened like the grid shape."""
    if isinstance(grid, DyadicGrid):
        return (grid.coords + 0.5) / grid.side
    c1 = (grid.first.coords + 0.5) / grid.first.side
    c2 = (grid.second.coords + 0.5) / grid.second.side
    A1, A2 = len(c1), len(c2)
    return np.concatenate([np.repeat(c1, A2, axis=0), np.tile(c2, (A1, 1))], axis=1)


def _smooth_field(grid, rng, count: int) -> np.ndarray:
    """count smooth random functions on the atoms (sums of per-axis random walks)."""
    X = _atom_coords(grid)
    res = 64
    out = np.zeros((X.shape[0], count))
    for k in range(X.shape[1]):
        steps = rng.normal(size=(res, count)) / np.sqrt(res)
        walk = np.cumsum(steps, axis=0)
        walk -= walk.mean(axis=0)
        idx = np.minimum((X[:, k] * res).astype(int), res - 1)
        out += walk[idx]
    return out


def _random_hermitian(d: int, rng) -> np.ndarray:
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (Z + Z.conj().T) / 2


def _unitary_field(theta: np.ndarray, gens: np.ndarray) -> np.ndarray:
    H = np.einsum("xj,jkl->xkl", theta, gens)
    lam, V = np.linalg.eigh(H)
    return (V * np.exp(1j * lam)[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _rotated_diag(grid, d, rng, amplitude: float) -> np.ndarray:
    A = int(np.prod(grid.shape))
    gens = np.stack([_random_hermitian(d, rng) for _ in range(max(1, d - 1))])
    theta = 2.0 * _smooth_field(grid, rng, gens.shape[0])
    loglam = 1.5 * _smooth_field(grid, rng, d)
    U = _unitary_field(theta, gens)
    lam = np.exp(amplitude * loglam)
    vals = (U * lam[:, None, :]) @ np.conj(np.swapaxes(U, -1, -2))
    return vals.reshape(grid.shape + (d, d)) if A else vals


def _two_block(grid, d, rng, strength: float) -> np.ndarray:
    k = np.arange(d)
    lam = 4.0 ** (strength * k / max(d - 1, 1)) if d > 1 else np.array([4.0 ** strength])
    X = _atom_coords(grid)
    left = X[:, 0] < 0.5
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, _ = np.linalg.qr(Z)
    Dl = Q @ np.diag(lam) @ Q.conj().T
    Dr = Q @ np.diag(lam[::-1] if d > 1 else 1.0 / lam) @ Q.conj().T
    vals = np.where(left[:, None, None], Dl, Dr)
    return vals.reshape(grid.shape + (d, d))


def _scalar_power(grid, p: float, rng, alpha: float | None, scale: float) -> np.ndarray:
    X = _atom_coords(grid)
    blocks = [X.shape[1]] if isinstance(grid, DyadicGrid) else [grid.first.n, grid.second.n]
    w = np.ones(X.shape[0])
    start = 0
    for dims in blocks:
        if alpha is None:
            a = rng.uniform(-0.9 * dims, 0.9 * dims * (p - 1.0))
        else:
            a = alpha
        x0 = rng.uniform(0, 1, size=dims) if alpha is None else np.zeros(dims)
        r = np.linalg.norm(X[:, start:start + dims] - x0, axis=1)
        w = w * r ** (scale * a)
        start += dims
    return w.reshape(grid.shape)


def gen_weight(config: ExperimentConfig, seed: int, grid=None, parameter: str = "one") -> MatrixWeight:
    """Random weight of the configured model with [W]_{A_p} clipped to config.cap."""
    if grid is None:
        grid = config.one_grid() if parameter == "one" else config.bi_grid()
    rng = np.random.default_rng(int(seed))
    model = config.weight_model
    if model not in WEIGHT_MODELS:
        raise InvalidModel(f"unknown weight model {model!r}")
    state = rng.bit_generator.state

    def build(scale: float) -> MatrixWeight:
        rng.bit_generator.state = state
        if model == "rotated_diag":
            vals = _rotated_diag(grid, config.d, rng, scale)
        elif model == "two_block":
            vals = _two_block(grid, config.d, rng, config.strength * scale)
        else:
            if config.d != 1:
                raise InvalidModel("scalar_power weights need d = 1")
            vals = _scalar_power(grid, config.p, rng, config.alpha, scale)
        return MatrixWeight(grid, vals, config.p)

    if config.cap <= 1.0:
        return build(0.0)
    scale = 1.0
    for _ in range(40):
        W = build(scale)
        if ap_characteristic(W, "dyadic") <= config.cap:
            return W
        scale *= 0.7
    return build(0.0)


def random_vector_field(grid, d: int, rng, heavy: bool = True) -> AtomField:
    shape = grid.shape + (d,)
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    if heavy:
        v = v * np.exp(rng.normal(size=grid.shape))[..., None]
    return AtomField(grid, v, "vector")


def random_symbol(grid: ProductGrid, d: int, support: int, rng) -> SymbolSpectrum:
    """Random symbol supported on `support` distinct Haar rectangles."""
    S = SymbolSpectrum.zeros(grid, d)
    C = S.coeffs
    Ch1, S1, Ch2, S2 = C.shape[:4]
    total = Ch1 * Ch2
    pick = rng.choice(total, size=min(support, total), replace=False)
    for r in pick:
        a, b = divmod(int(r), Ch2)
        C[a, :, b] = rng.normal(size=(S1, S2, d, d)) + 1j * rng.normal(size=(S1, S2, d, d))
    return S


# ---------------------------------------------------------------- reports


@dataclass
class ExperimentReport:
    name: str
    config: ExperimentConfig
    columns: list
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def write(self, path=None) -> str:
        text = self.to_csv()
        path = path or self.config.output
        if path:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _safe_div(a: float, b: float) -> float:
    return 0.0 if a == 0 else a / b


# ---------------------------------------------------------------- Fefferman-Stein


def fs_exponent(p: float, q: float) -> float:
    return max(1.0 / (q - 1.0), 1.0 / (p - 1.0))


def fs_sides(W: MatrixWeight, fs: list, q: float, family: str = "dyadic", tilde: bool = True):
    """(LHS, RHS, LHS with reducing operators) of the vector-valued maximal inequality."""
    p = W.p
    mx = np.stack([maximal_pointwise(W, f, family).values for f in fs])
    wf = np.stack([np.linalg.norm(np.einsum("...kl,...l->...k", W.root, f.values), axis=-1) for f in fs])
    am = W.grid.atom_measure
    lhs = (np.sum(np.sum(mx ** q, axis=0) ** (p / q)) * am) ** (1 / p)
    rhs = (np.sum(np.sum(wf ** q, axis=0) ** (p / q)) * am) ** (1 / p)
    lt = None
    if tilde:
        mt = np.stack([maximal_reducing(W, f, family).values for f in fs])
        lt = (np.sum(np.sum(mt ** q, axis=0) ** (p / q)) * am) ** (1 / p)
    return float(lhs), float(rhs), None if lt is None else float(lt)


FS_COLUMNS = ["trial", "seed", "d", "p", "q", "K", "family", "model", "ap", "lhs", "rhs", "ratio",
              "normalized", "lhs_tilde", "ratio_tilde", "normalized_tilde"]


def run_fs_experiment(config: ExperimentConfig, tilde: bool = True) -> ExperimentReport:
    rep = ExperimentReport("fs", config, list(FS_COLUMNS))
    expo = fs_exponent(config.p, config.q)
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        wseed = int(rng.integers(2 ** 63))
        W = gen_weight(config, wseed)
        fs = [random_vector_field(W.grid, config.d, rng) for _ in range(config.K)]
        ap = ap_characteristic(W, config.family)
        lhs, rhs, lt = fs_sides(W, fs, config.q, config.family, tilde)
        ratio = lhs / rhs
        row = dict(trial=t, seed=wseed, d=config.d, p=config.p, q=config.q, K=config.K,
                   family=config.family, model=config.weight_model, ap=ap, lhs=lhs, rhs=rhs,
                   ratio=ratio, normalized=ratio / ap ** expo)
        if tilde:
            row.update(lhs_tilde=lt, ratio_tilde=lt / rhs, normalized_tilde=lt / rhs / ap ** expo)
        rep.rows.append(row)
    return rep


# ---------------------------------------------------------------- duality


DUALITY_COLUMNS = ["trial", "seed_u", "seed_v", "d", "p", "support", "pairing", "bmo", "h1", "ap_v",
                   "ratio", "normalized"]


def duality_trial(B, Phi, U, V):
    """(|pairing|, BMO norm, H^1 norm, [V], normalized ratio) for one instance."""
    if len(B.support()) > 10:
        raise SupportTooLargeForExhaustive("duality trials need at most 10 support rectangles")
    ell = abs(duality_pairing(B, Phi))
    bmo = bmo_prod_details(B, U, V, "exhaustive").value
    h1 = h1_norm(Phi, U, V)
    apv = ap_characteristic(V, "dyadic", "bi")
    ratio = _safe_div(ell, bmo * h1)
    return ell, bmo, h1, apv, ratio, _safe_div(ell, apv ** (2.0 / V.p) * bmo * h1)


def run_duality_experiment(config: ExperimentConfig) -> ExperimentReport:
    if config.support > 10:
        raise SupportTooLargeForExhaustive("duality experiments need at most 10 support rectangles")
    rep = ExperimentReport("duality", config, list(DUALITY_COLUMNS))
    grid = config.bi_grid()
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        su, sv = (int(v) for v in rng.integers(2 ** 63, size=2))
        U = gen_weight(config, su, grid)
        V = gen_weight(config, sv, grid)
        B = random_symbol(grid, config.d, config.support, rng)
        Phi = random_symbol(grid, config.d, config.support, rng)
        # overlap the supports so the pairing is not trivially zero
        Phi = SymbolSpectrum(grid, Phi.coeffs + 0.5 * B.coeffs)
        if len(Phi.support()) > 10:
            Phi = SymbolSpectrum(grid, np.where(B.coeffs != 0, Phi.coeffs, 0))
        ell, bmo, h1, apv, ratio, norm = duality_trial(B, Phi, U, V)
        rep.rows.append(dict(trial=t, seed_u=su, seed_v=sv, d=config.d, p=config.p,
                             support=len(B.support()), pairing=ell, bmo=bmo, h1=h1, ap_v=apv,
                             ratio=ratio, normalized=norm))
    return rep


# ---------------------------------------------------------------- paraproducts


PARA_COLUMNS = ["trial", "kind", "status", "d", "p", "bmo", "ap_u", "ap_v", "lhs", "rhs", "ratio",
                "ms_ratio", "ms_normalized", "lower_ratio"]


def mixed_exponent(p: float) -> float:
    return 1 + 2 / p + 1 / (p - 1) if p <= 2 else 0.5 + 1 / p + 2 / (p - 1)


def lower_probe(B: SymbolSpectrum, U: MatrixWeight, V: MatrixWeight, omega: np.ndarray, bmo: float) -> float:
    """max over basis e of |Pi11 f|_{L^p(V)} / |f|_{L^p(U)} / |B| with f = 1_omega U^{-1/p} e."""
    if omega is None or bmo == 0:
        return 0.0
    best = 0.0
    for j in range(B.d):
        e = np.zeros(B.d)
        e[j] = 1.0
        vals = np.where(np.asarray(omega)[..., None], U.inv_root @ e, 0.0)
        f = AtomField(B.grid, vals, "vector")
        num = weighted_lp_norm(paraproduct("11", B, f), V)
        den = weighted_lp_norm(f, U)
        best = max(best, num / den)
    return best / bmo


def run_paraproduct_experiment(config: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport("para", config, list(PARA_COLUMNS))
    grid = config.bi_grid()
    beta = mixed_exponent(config.p)
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        su, sv = (int(v) for v in rng.integers(2 ** 63, size=2))
        U = gen_weight(config, su, grid)
        V = gen_weight(config, sv, grid)
        B = random_symbol(grid, config.d, min(config.support, 10), rng)
        f = random_vector_field(grid, config.d, rng)
        det = bmo_prod_details(B, U, V, "exhaustive")
        bmo = det.value
        apu = ap_characteristic(U, "dyadic", "bi")
        apv = ap_characteristic(V, "dyadic", "bi")
        rhs = weighted_lp_norm(f, U)
        ms = None
        low = lower_probe(B, U, V, det.omega, bmo)
        for kind in config.kinds:
            base = dict(trial=t, kind=kind, d=config.d, p=config.p, bmo=bmo, ap_u=apu, ap_v=apv, rhs=rhs)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                out = paraproduct(kind, B, f)
            if any(issubclass(w.category, SignatureSetTooSmall) for w in caught):
                rep.rows.append(dict(base, status="skipped"))
                continue
            lhs = weighted_lp_norm(out, V)
            row = dict(base, status="ok", lhs=lhs, ratio=_safe_div(lhs, bmo * rhs))
            if kind in ("10", "01", "g10", "g10s", "g01", "g01s"):
                if ms is None:
                    ms = lp_norm(mixed_ms(U, f), config.p) / rhs
                row.update(ms_ratio=ms, ms_normalized=ms / apu ** beta)
            if kind == "11":
                row["lower_ratio"] = low
            rep.rows.append(row)
    return rep
