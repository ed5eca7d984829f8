"""Maximal operators, square functions, the N_Omega majorant and Haar multipliers.

Scalar outputs are AtomFields of kind 'real'.  All suprema are exact finite
maxima over the chosen cube/rectangle family of the truncated grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import LqSum, matrix_apply
from .errors import EmptyOmega, GridMismatch
from .grid import AtomField, Cube, DyadicGrid, ProductGrid, Rect
from .haar import HaarSpectrum, haar_coeffs, haar_reconstruct, slice_all
from .hermitian import vec_norm
from .weights import MatrixWeight, _family_masks, reducing_from_roots, reducing_operator


def family_for(grid, family: str = "dyadic"):
    """Indicator (F, A) over flattened atoms and labels; rectangles for product grids."""
    if family == "aligned":
        family = "grid_aligned"
    parameter = "one" if isinstance(grid, DyadicGrid) else "bi"
    return _family_masks(grid, family, parameter)


def _flat_vectors(f: AtomField) -> np.ndarray:
    v = np.asarray(f.values)
    A = int(np.prod(f.grid.shape))
    if f.kind in ("real", "scalar"):
        return v.reshape(A, 1).astype(complex)
    return v.reshape(A, -1).astype(complex)


def _scalar_field(grid, flat: np.ndarray) -> AtomField:
    return AtomField(grid, np.asarray(flat, dtype=float).reshape(grid.shape), "real")


def _max_over_containing(F: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """out[x] = max over regions q containing x of vals[x, q] (vals (A, nF) or (nF,))."""
    if vals.ndim == 1:
        vals = np.broadcast_to(vals[None, :], (F.shape[1], F.shape[0]))
    masked = np.where(F.T > 0, vals, -np.inf)
    return masked.max(axis=1)


def _check_same_grid(W, f):
    if W.grid != f.grid:
        raise GridMismatch("weight and function live on different grids")


def classical_maximal(g: AtomField, family: str = "dyadic") -> AtomField:
    """M|g| over the family."""
    F, _ = family_for(g.grid, family)
    a = np.abs(_flat_vectors(g)).reshape(F.shape[1], -1)
    a = vec_norm(a) if a.shape[1] > 1 else a[:, 0]
    avg = (F @ a) / F.sum(axis=1)
    return _scalar_field(g.grid, _max_over_containing(F, avg))


def maximal_pointwise(W: MatrixWeight, f: AtomField, family: str = "dyadic") -> AtomField:
    """x -> max_{Q containing x} avg_Q |W(x)^{1/p} f(y)|."""
    _check_same_grid(W, f)
    F, _ = family_for(W.grid, family)
    R = W.flat(W.root)
    fv = _flat_vectors(f)
    N = vec_norm(np.einsum("xij,yj->xyi", R, fv))
    avg = (N @ F.T) / F.sum(axis=1)[None, :]
    return _scalar_field(W.grid, _max_over_containing(F, avg))


def maximal_strong_dyadic(W: MatrixWeight, f: AtomField) -> AtomField:
    if not isinstance(W.grid, ProductGrid):
        raise GridMismatch("strong maximal function needs a product grid")
    return maximal_pointwise(W, f, "dyadic")


def region_reducing(W: MatrixWeight, family: str, method: str = "auto") -> np.ndarray:
    """Reducing matrices for every region of a family, cached on the weight."""
    key = ("famred", family, method)
    if key not in W._cache:
        F, _ = family_for(W.grid, family)
        roots = W.flat(W.root)
        W._cache[key] = np.stack(
            [reducing_from_roots(roots[F[q] > 0], W.p, method).matrix for q in range(F.shape[0])]
        )
    return W._cache[key]


def maximal_reducing(W: MatrixWeight, f: AtomField, family: str = "dyadic", method: str = "auto") -> AtomField:
    """x -> max_{Q containing x} avg_Q |W_Q f(y)| with reducing operators W_Q."""
    _check_same_grid(W, f)
    F, _ = family_for(W.grid, family)
    Ms = region_reducing(W, family, method)
    fv = _flat_vectors(f)
    norms = vec_norm(np.einsum("qij,yj->qyi", Ms, fv))
    vals = np.sum(norms * F, axis=1) / F.sum(axis=1)
    return _scalar_field(W.grid, _max_over_containing(F, vals))


def zonotope_norms(G: np.ndarray, iters: int = 300, rtol: float = 1e-14) -> np.ndarray:
    """Norms of the Minkowski sums of balanced segments [g_k], batched: G (B, k, d).

    Monotone ascent from the basis vectors and the longest generator, so the
    value is at least max_j sum_k |g_kj|, hence at least (1/d) sum_k |g_k|.
    """
    G = np.asarray(G, dtype=complex)
    B, k, d = G.shape
    if d == 1:
        return np.sum(np.abs(G[..., 0]), axis=1)
    starts = np.broadcast_to(np.eye(d, dtype=complex), (B, d, d))
    longest = G[np.arange(B), np.argmax(vec_norm(G), axis=1)]
    ln = vec_norm(longest)
    longest = np.where(ln[:, None] > 0, longest / np.maximum(ln, 1e-300)[:, None], starts[:, 0])
    U = np.concatenate([starts, longest[:, None, :]], axis=1)

    def supp(U):
        ip = np.einsum("bsd,bkd->bsk", np.conj(U), G)
        return ip, np.abs(ip).sum(axis=2)

    ip, h = supp(U)
    for _ in range(iters):
        a = np.abs(ip)
        phase = np.where(a > 0, np.conj(ip) / np.maximum(a, 1e-300), 0.0)
        S = np.einsum("bsk,bkd->bsd", phase, G)
        sn = vec_norm(S)
        Un = np.where(sn[..., None] > 0, S / np.maximum(sn, 1e-300)[..., None], U)
        ipn, hn = supp(Un)
        better = hn > h
        gain = np.where(better, hn - h, 0.0)
        U = np.where(better[..., None], Un, U)
        ip = np.where(better[..., None], ipn, ip)
        h = np.where(better, hn, h)
        if np.all(gain <= rtol * np.maximum(h, 1e-300)):
            break
    return h.max(axis=1)


@dataclass(frozen=True)
class BodyField:
    """One convex body per atom (flattened row-major)."""

    grid: object
    bodies: tuple

    @property
    def d(self):
        return self.bodies[0].d


def maximal_convex(W: MatrixWeight, F_in, family: str = "dyadic") -> AtomField:
    """x -> |closed hull of the union over Q containing x of A_Q(W(x)^{1/p} F)|.

    A vector field f enters through the balanced segments {lambda f(x)}.
    """
    Fm, _ = family_for(W.grid, family)
    R = W.flat(W.root)
    A = Fm.shape[1]
    out = np.zeros(A)
    if isinstance(F_in, AtomField):
        _check_same_grid(W, F_in)
        fv = _flat_vectors(F_in)
        for q in range(Fm.shape[0]):
            members = np.flatnonzero(Fm[q])
            G = np.einsum("xij,yj->xyi", R[members], fv[members]) / members.size
            val = zonotope_norms(G)
            out[members] = np.maximum(out[members], val)
        return _scalar_field(W.grid, out)
    if isinstance(F_in, BodyField):
        for q in range(Fm.shape[0]):
            members = np.flatnonzero(Fm[q])
            for x in members:
                body = LqSum(tuple(matrix_apply(R[x] / members.size, F_in.bodies[y]) for y in members), 1.0)
                out[x] = max(out[x], body.norm())
        return _scalar_field(W.grid, out)
    raise TypeError("expected a vector AtomField or a BodyField")


# ---------------------------------------------------------------- biparameter helpers


def haar_cube_weights(g: DyadicGrid) -> np.ndarray:
    """(Ch, A) matrix 1_Q(x) / |Q| over Haar cubes."""
    meas = np.array([g.measure(c) for c in g.haar_cubes])
    ind = g.indicator[[g.cube_position[c] for c in g.haar_cubes]]
    return ind / meas[:, None]


def rect_reducing(W: MatrixWeight, cubes1, cubes2, method: str = "auto") -> np.ndarray:
    """Reducing matrices over R1 x R2 for all pairs: (len1, len2, d, d)."""
    key = ("rectred", tuple(cubes1), tuple(cubes2), method)
    if key not in W._cache:
        W._cache[key] = np.stack(
            [np.stack([reducing_operator(W, Rect(a, b), method=method).matrix for b in cubes2]) for a in cubes1]
        )
    return W._cache[key]


def square_function(W: MatrixWeight, g: AtomField, variant: str = "pointwise", method: str = "auto") -> AtomField:
    """Biparameter square function of g twisted by W.

    pointwise: (sum |W(x)^{-1/p} g_R^eps|^2 1_R(x)/|R|)^{1/2}
    reducing:  (sum |W_R g_R^eps|^2 1_R(x)/|R|)^{1/2}
    """
    grid = W.grid
    if not isinstance(grid, ProductGrid):
        raise GridMismatch("square function needs a product grid")
    _check_same_grid(W, g)
    C = haar_coeffs(g).coeffs
    if g.kind in ("real", "scalar"):
        C = C[..., None]
    H1 = haar_cube_weights(grid.first)
    H2 = haar_cube_weights(grid.second)
    if variant == "pointwise":
        T = np.einsum("isjtk,isjtl->ijkl", C, np.conj(C))
        G = np.einsum("ia,jb,ijkl->abkl", H1, H2, T)
        Vi2 = W.power(-2.0 / W.p)
        S2 = np.einsum("abkl,ablk->ab", Vi2, G).real
    elif variant == "reducing":
        Us = rect_reducing(W, grid.first.haar_cubes, grid.second.haar_cubes, method)
        t = np.sum(vec_norm(np.einsum("ijkl,isjtl->isjtk", Us, C)) ** 2, axis=(1, 3))
        S2 = H1.T @ t @ H2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return AtomField(grid, np.sqrt(np.maximum(S2, 0.0)), "real")


def mixed_ms(U: MatrixWeight, f: AtomField, method: str = "auto") -> AtomField:
    """The mixed maximal-square operator [M~S~] of f with reducing operators of U."""
    grid = U.grid
    if not isinstance(grid, ProductGrid):
        raise GridMismatch("mixed operator needs a product grid")
    _check_same_grid(U, f)
    g1, g2 = grid.first, grid.second
    sl = slice_all(f, 2)  # (Ch2, S2, A1, *v)
    if f.kind in ("real", "scalar"):
        sl = sl[..., None]
    avg1 = g1.indicator / g1.indicator.sum(axis=1, keepdims=True)  # (C1, A1)
    means = np.einsum("qa,jsad->qjsd", avg1, sl)  # (C1, Ch2, S2, d)
    Us = rect_reducing(U, g1.all_cubes, g2.haar_cubes, method)  # (C1, Ch2, d, d)
    vals = vec_norm(np.einsum("qjkl,qjsl->qjsk", Us, means))  # (C1, Ch2, S2)
    ind1 = g1.indicator  # (C1, A1)
    sup = np.max(np.where(ind1[:, :, None, None] > 0, vals[:, None], 0.0), axis=0)  # (A1, Ch2, S2)
    H2 = haar_cube_weights(g2)  # (Ch2, A2)
    out2 = np.einsum("ajs,jb->ab", sup ** 2, H2)
    return AtomField(grid, np.sqrt(out2), "real")


def omega_rects(grid: ProductGrid, omega: np.ndarray) -> list[Rect]:
    """Grid rectangles (all levels) contained in the atom set omega."""
    omega = np.asarray(omega, dtype=bool).reshape(grid.shape)
    out = []
    for R in grid.all_rects:
        if np.all(omega[grid.rect_mask(R)]):
            out.append(R)
    return out


def omega_majorant(V: MatrixWeight, omega) -> AtomField:
    """x -> sup over grid rectangles R inside omega and containing x of |V(x)^{-1/p} V_R|."""
    grid = V.grid
    omega = np.asarray(omega, dtype=bool).reshape(grid.shape)
    if not omega.any():
        raise EmptyOmega("omega is empty")
    out = np.zeros(grid.shape)
    Vi = V.inv_root
    for R in omega_rects(grid, omega):
        M = reducing_operator(V, R).matrix
        mask = grid.rect_mask(R)
        vals = np.linalg.svd(Vi[mask] @ M, compute_uv=False)[:, 0]
        out[mask] = np.maximum(out[mask], vals)
    return AtomField(grid, out, "real")


# ---------------------------------------------------------------- Haar multipliers


@dataclass(frozen=True)
class MultiplierSigns:
    """sigma(Q) in {-1, 0, 1} over the Haar cubes of a factor grid."""

    grid: DyadicGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (len(self.grid.haar_cubes),):
            raise GridMismatch("sign sequence does not match the grid")
        if not np.all(np.isin(v, (-1, 0, 1))):
            raise ValueError("multiplier signs must lie in {-1, 0, 1}")
        object.__setattr__(self, "values", v.astype(int))

    @classmethod
    def from_dict(cls, grid: DyadicGrid, signs: dict) -> "MultiplierSigns":
        v = np.zeros(len(grid.haar_cubes), dtype=int)
        for Q, s in signs.items():
            v[grid.haar_position[Q]] = s
        return cls(grid, v)

    @classmethod
    def constant(cls, grid: DyadicGrid, s: int) -> "MultiplierSigns":
        return cls(grid, np.full(len(grid.haar_cubes), s))


def haar_multiplier(sigma: MultiplierSigns, f: AtomField, slot: int | None = None) -> AtomField:
    """sum sigma(Q) h_Q^eps f_Q^eps in the chosen slot, other blocks untouched."""
    S = haar_coeffs(f)
    data = np.array(S.data, copy=True)
    ns = len(sigma.grid.signatures)
    factor = np.concatenate([[1.0], np.repeat(sigma.values.astype(float), ns)])
    if isinstance(f.grid, DyadicGrid):
        if slot not in (None, 1) or sigma.grid != f.grid:
            raise GridMismatch("multiplier does not match the grid")
        data = data * factor.reshape((-1,) + (1,) * (data.ndim - 1))
    else:
        if slot == 1 and sigma.grid == f.grid.first:
            data = data * factor.reshape((-1, 1) + (1,) * (data.ndim - 2))
        elif slot == 2 and sigma.grid == f.grid.second:
            data = data * factor.reshape((1, -1) + (1,) * (data.ndim - 2))
        else:
            raise GridMismatch("multiplier slot does not match the product grid")
    out = haar_reconstruct(HaarSpectrum(S.grid, data, S.kind))
    return out
