"""Matrix weight fields, A_p characteristics and reducing operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .convex import Ellipsoid, LqSum, john_ellipsoid, random_directions
from .errors import GridMismatch, OutOfRange, SandwichCertificationFailed
from .grid import AtomField, Cube, DyadicGrid, ProductGrid, Rect, grid_from_json
from .hermitian import eigh_pd, hermitian_part, matrix_from_json, matrix_to_json, op_norm, pd_power, vec_norm

SLACK_TOL = 0.05


def conjugate_exponent(p: float) -> float:
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class MatrixWeight:
    """Positive-definite matrix per atom plus the exponent p."""

    grid: DyadicGrid | ProductGrid
    values: np.ndarray
    p: float = 2.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.p > 1 or not np.isfinite(self.p):
            raise ValueError("exponent p must lie in (1, inf)")
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == len(self.grid.shape):
            vals = vals[..., None, None]
        AtomField(self.grid, vals, "matrix")
        lam, U = eigh_pd(vals)
        object.__setattr__(self, "values", hermitian_part(vals))
        object.__setattr__(self, "_eig", (lam, U))

    @property
    def d(self) -> int:
        return self.values.shape[-1]

    def power(self, s: float) -> np.ndarray:
        """W^s atomwise."""
        key = ("pow", float(s))
        if key not in self._cache:
            lam, U = self._eig
            self._cache[key] = hermitian_part((U * (lam ** s)[..., None, :]) @ np.conj(np.swapaxes(U, -1, -2)))
        return self._cache[key]

    @cached_property
    def root(self) -> np.ndarray:
        """W^{1/p}."""
        return self.power(1.0 / self.p)

    @cached_property
    def inv_root(self) -> np.ndarray:
        """W^{-1/p}."""
        return self.power(-1.0 / self.p)

    def field(self) -> AtomField:
        return AtomField(self.grid, self.values, "matrix")

    def flat(self, arr: np.ndarray) -> np.ndarray:
        """Flatten the grid axes of an atomwise array."""
        return arr.reshape((-1,) + arr.shape[len(self.grid.shape):])

    def region_mask(self, E) -> np.ndarray:
        return region_mask(self.grid, E)

    def to_json(self) -> dict:
        out = self.field().to_json()
        out["p"] = self.p
        return out

    @classmethod
    def from_json(cls, obj: dict, p: float | None = None) -> "MatrixWeight":
        grid = grid_from_json(obj["grid"])
        vals = np.stack([matrix_from_json(a) for a in obj["atoms"]])
        vals = vals.reshape(grid.shape + vals.shape[1:])
        return cls(grid, vals, float(p if p is not None else obj.get("p", 2.0)))


def region_mask(grid, E) -> np.ndarray:
    """Boolean atom mask (grid shape) of a cube, rectangle or None (whole domain)."""
    if E is None:
        return np.ones(grid.shape, dtype=bool)
    if isinstance(grid, DyadicGrid):
        if not isinstance(E, Cube):
            raise GridMismatch("one-parameter grid needs a cube")
        return grid.cube_mask(E)
    if isinstance(E, Rect):
        return grid.rect_mask(E)
    raise GridMismatch("product grid needs a rectangle")


def dual_weight(W: MatrixWeight) -> MatrixWeight:
    """W' = W^{-1/(p-1)} with exponent p'."""
    return MatrixWeight(W.grid, W.power(-1.0 / (W.p - 1.0)), conjugate_exponent(W.p))


# ---------------------------------------------------------------- A_p


def _pair_block(R: np.ndarray, Ri: np.ndarray, pp: float, rows=None) -> np.ndarray:
    """|R_x Ri_y|^{p'} for atoms x in rows and all y."""
    if rows is not None:
        R = R[rows]
    prod = np.einsum("xij,yjk->xyik", R, Ri)
    return op_norm(prod) ** pp


def pair_matrix(W: MatrixWeight, chunk: int = 128) -> np.ndarray:
    """P[x, y] = |W(x)^{1/p} W(y)^{-1/p}|^{p'} over flattened atoms."""
    key = ("pairs",)
    if key in W._cache:
        return W._cache[key]
    R = W.flat(W.root)
    Ri = W.flat(W.inv_root)
    pp = conjugate_exponent(W.p)
    A = R.shape[0]
    if W.d == 1:
        r = R[:, 0, 0].real
        ri = Ri[:, 0, 0].real
        P = np.abs(np.outer(r, ri)) ** pp
    else:
        P = np.empty((A, A))
        for s in range(0, A, chunk):
            P[s:s + chunk] = _pair_block(R, Ri, pp, slice(s, s + chunk))
    W._cache[key] = P
    return P


def _family_masks(grid, family: str, parameter: str):
    if parameter == "one":
        if not isinstance(grid, DyadicGrid):
            raise GridMismatch("one-parameter characteristic needs a dyadic grid")
        F, labels = grid.family(family)
        return F, labels
    if parameter == "bi":
        if not isinstance(grid, ProductGrid):
            raise GridMismatch("biparameter characteristic needs a product grid")
        F1, L1 = grid.first.family(family)
        F2, L2 = grid.second.family(family)
        F = np.einsum("ia,jb->ijab", F1, F2).reshape(F1.shape[0] * F2.shape[0], -1)
        labels = [(a, b) for a in L1 for b in L2]
        return F, labels
    raise ValueError(f"unknown parameter mode {parameter!r}")


def ap_values(W: MatrixWeight, family: str = "dyadic", parameter: str | None = None):
    """Per-region A_p averages and region labels."""
    if parameter is None:
        parameter = "one" if isinstance(W.grid, DyadicGrid) else "bi"
    F, labels = _family_masks(W.grid, family, parameter)
    P = pair_matrix(W)
    counts = F.sum(axis=1)
    inner = (P @ F.T) / counts[None, :]
    ratio = W.p / conjugate_exponent(W.p)
    vals = np.sum(F.T * inner ** ratio, axis=0) / counts
    return vals, labels


def ap_characteristic(W: MatrixWeight, family: str = "dyadic", parameter: str | None = None) -> float:
    vals, _ = ap_values(W, family, parameter)
    return float(vals.max())


def C_E(W: MatrixWeight, E) -> float:
    """The A_p-type average of W restricted to the region E."""
    mask = W.flat(region_mask(W.grid, E))
    P = pair_matrix(W)[np.ix_(mask, mask)]
    inner = P.mean(axis=1)
    return float(np.mean(inner ** (W.p / conjugate_exponent(W.p))))


# ---------------------------------------------------------------- reducing operators


@dataclass(frozen=True)
class ReducingOperator:
    matrix: np.ndarray
    region: object
    p: float
    method: str
    certified_slack: float = 0.0

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> dict:
        return {
            "matrix": matrix_to_json(self.matrix),
            "region": None if self.region is None else str(self.region),
            "p": self.p,
            "method": self.method,
            "certified_slack": self.certified_slack,
        }


def rho(roots: np.ndarray, p: float, E) -> np.ndarray:
    """(avg_x |A_x e|^p)^{1/p} for rows e of E, A_x = roots[x]."""
    AE = np.einsum("xij,nj->nxi", roots, np.atleast_2d(E))
    return np.mean(vec_norm(AE) ** p, axis=1) ** (1.0 / p)


def reducing_from_roots(
    roots: np.ndarray,
    p: float,
    method: str = "auto",
    region=None,
    certify: int = 1000,
    seed: int = 0,
    n_dirs: int = 1024,
    rounds: int = 1,
    tol: float = SLACK_TOL,
) -> ReducingOperator:
    """Reducing operator of the samples A_x = W(x)^{1/p} (equal weights)."""
    roots = np.asarray(roots, dtype=complex)
    d = roots.shape[-1]
    if method == "auto":
        if len(roots) == 1 or np.all(roots == roots[0]):
            # a single distinct sample: the averaged norm is |A e| exactly
            return ReducingOperator(hermitian_part(roots[0]), region, p, "closed_form_constant", 0.0)
        method = "closed" if (d == 1 or abs(p - 2.0) < 1e-15) else "john"
    if method in ("closed", "closed_form_p2"):
        if abs(p - 2.0) < 1e-15:
            M = pd_power(hermitian_part(np.mean(roots @ roots, axis=0)), 0.5)
            return ReducingOperator(M, region, p, "closed_form_p2", 0.0)
        if d == 1:
            w = np.mean(np.abs(roots[:, 0, 0].real) ** p)
            return ReducingOperator(np.array([[w ** (1.0 / p)]], dtype=complex), region, p, "closed_form_scalar", 0.0)
        raise ValueError("closed form only exists for p = 2 or d = 1")
    if method != "john":
        raise ValueError(f"unknown method {method!r}")
    scale = len(roots) ** (-1.0 / p)
    body = LqSum(tuple(Ellipsoid(scale * A) for A in roots), float(p))
    G, factor = john_ellipsoid(body, n_dirs=n_dirs, rounds=rounds, seed=seed)
    M = hermitian_part(G.matrix * factor * (1.0 + 1e-12))
    V = random_directions(d, certify, np.random.default_rng(seed + 7919))
    ratio = vec_norm(V @ M.T) / rho(roots, p, V)
    slack = max(0.0, float(ratio.max()) / np.sqrt(d) - 1.0)
    if ratio.min() < 1.0 - 1e-9 or slack > tol:
        raise SandwichCertificationFailed(
            f"reducing operator sandwich not certified (min ratio {ratio.min():.6g}, slack {slack:.4g})",
            slack=slack,
        )
    return ReducingOperator(M, region, p, "john", slack)


def reducing_operator(
    W: MatrixWeight, E=None, p: float | None = None, method: str = "auto", **kw
) -> ReducingOperator:
    """Reducing operator of W over the region E (cube, rectangle or None)."""
    p = W.p if p is None else float(p)
    key = ("red", E, p, method)
    if key in W._cache and not kw:
        return W._cache[key]
    mask = region_mask(W.grid, E)
    roots = W.root[mask] if p == W.p else W.power(1.0 / p)[mask]
    op = reducing_from_roots(roots, p, method, region=E, **kw)
    if not kw:
        W._cache[key] = op
    return op


def reducing_matrices(W: MatrixWeight, regions, method: str = "auto") -> np.ndarray:
    """Stack of reducing matrices for a list of regions."""
    return np.stack([reducing_operator(W, E, method=method).matrix for E in regions])


def slice_weight(W: MatrixWeight, slot: int, atom) -> MatrixWeight:
    """Restrict a biparameter weight to a fixed atom in the given slot."""
    g = W.grid
    if not isinstance(g, ProductGrid):
        raise GridMismatch("slicing needs a product grid")
    factor = g.first if slot == 1 else g.second
    other = g.second if slot == 1 else g.first
    idx = atom if isinstance(atom, (int, np.integer)) else factor.atom_index(atom)
    if not 0 <= idx < factor.natoms:
        raise OutOfRange(f"atom {atom} outside slot {slot}")
    vals = W.values[idx] if slot == 1 else W.values[:, idx]
    return MatrixWeight(other, vals, W.p)


def averaged_weight(W: MatrixWeight, Q: Cube, slot: int = 2, method: str = "auto") -> MatrixWeight:
    """x -> (reducing operator of the slice at x over Q in the given slot)^p."""
    g = W.grid
    if not isinstance(g, ProductGrid):
        raise GridMismatch("averaging needs a product grid")
    factor = g.second if slot == 2 else g.first
    other = g.first if slot == 2 else g.second
    mask = factor.cube_mask(Q)
    mats = []
    for x in range(other.natoms):
        roots = W.root[x][mask] if slot == 2 else W.root[:, x][mask]
        mats.append(reducing_from_roots(roots, W.p, method).matrix)
    mats = np.stack(mats)
    return MatrixWeight(other, pd_power(mats, W.p), W.p)


def iterated_reducing(W: MatrixWeight, E: Cube, F: Cube, p: float | None = None, method: str = "auto"):
    """(reducing over E of x1 -> W_{x1,F}^p, reducing over E x F)."""
    p = W.p if p is None else p
    if p != W.p:
        W = MatrixWeight(W.grid, W.values, p)
    g = W.grid
    m2 = g.second.cube_mask(F)
    m1 = g.first.cube_mask(E)
    inner_roots = []
    for x in np.flatnonzero(m1):
        inner_roots.append(reducing_from_roots(W.root[x][m2], p, method).matrix)
    inner = reducing_from_roots(np.stack(inner_roots), p, method).matrix
    direct = reducing_operator(W, Rect(E, F), method=method).matrix
    return inner, direct
