"""Exact one-parameter and biparameter Haar transforms on atom fields.

Convention: h_I = (1_{I+} - 1_{I-}) / sqrt|I| with I- the left child, and
h^1_I = 1_I / sqrt|I|.  A tensor signature eps picks h^0 or h^1 per axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, IncompleteSpectrum
from .grid import AtomField, Cube, DyadicGrid, ProductGrid, Rect


def analysis_matrix(g: DyadicGrid) -> np.ndarray:
    """(K, A) rows: the constant 1, then h_Q^eps for (Q, eps) in grid order.

    Orthonormal in L^2 of the unit cube, so coefficients are
    ``Phi @ f * atom_measure`` and reconstruction is ``Phi.T @ c``.
    """
    return _analysis_cache(g)


_CACHE: dict = {}


def _analysis_cache(g: DyadicGrid) -> np.ndarray:
    key = (g.n, g.depth)
    if key not in _CACHE:
        H = g.haar_matrix.reshape(-1, g.natoms)
        _CACHE[key] = np.vstack([np.ones((1, g.natoms)), H])
    return _CACHE[key]


@dataclass(frozen=True)
class HaarSpectrum:
    """Haar coefficients of a field.

    One parameter: ``data`` has shape (K, *vshape), slot 0 the domain mean.
    Biparameter: shape (K1, K2, *vshape); row/column 0 hold the
    mean-in-that-slot blocks, the rest the tensor coefficients f_R^eps.
    """

    grid: DyadicGrid | ProductGrid
    data: np.ndarray
    kind: str = "vector"

    @property
    def biparameter(self) -> bool:
        return isinstance(self.grid, ProductGrid)

    @property
    def mean(self) -> np.ndarray:
        return self.data[0, 0] if self.biparameter else self.data[0]

    @property
    def coeffs(self) -> np.ndarray:
        """Cancellative block: (Ch, S, *v) or (Ch1, S1, Ch2, S2, *v)."""
        if not self.biparameter:
            g = self.grid
            return self.data[1:].reshape((len(g.haar_cubes), len(g.signatures)) + self.data.shape[1:])
        g1, g2 = self.grid.first, self.grid.second
        block = self.data[1:, 1:]
        return block.reshape(
            (len(g1.haar_cubes), len(g1.signatures), len(g2.haar_cubes), len(g2.signatures))
            + block.shape[2:]
        )

    def coeff(self, where, eps) -> np.ndarray:
        if not self.biparameter:
            g = self.grid
            return self.coeffs[g.haar_position[where], g.signatures.index(tuple(eps))]
        g1, g2 = self.grid.first, self.grid.second
        e1, e2 = eps
        return self.coeffs[
            g1.haar_position[where.first],
            g1.signatures.index(tuple(e1)),
            g2.haar_position[where.second],
            g2.signatures.index(tuple(e2)),
        ]

    def items(self):
        """Iterate ((cube or rect), eps, value) over cancellative coefficients."""
        C = self.coeffs
        if not self.biparameter:
            g = self.grid
            for qi, Q in enumerate(g.haar_cubes):
                for si, e in enumerate(g.signatures):
                    yield Q, e, C[qi, si]
            return
        g1, g2 = self.grid.first, self.grid.second
        for i1, Q1 in enumerate(g1.haar_cubes):
            for s1, e1 in enumerate(g1.signatures):
                for i2, Q2 in enumerate(g2.haar_cubes):
                    for s2, e2 in enumerate(g2.signatures):
                        yield Rect(Q1, Q2), (e1, e2), C[i1, s1, i2, s2]


def haar_coeffs(f: AtomField, grid=None) -> HaarSpectrum:
    if grid is not None and grid != f.grid:
        raise GridMismatch("field is not defined on the requested grid")
    g = f.grid
    vals = f.values
    if isinstance(g, DyadicGrid):
        P = analysis_matrix(g)
        data = np.tensordot(P, vals, axes=(1, 0)) * g.atom_measure
    else:
        P1 = analysis_matrix(g.first)
        P2 = analysis_matrix(g.second)
        tmp = np.tensordot(P1, vals, axes=(1, 0)) * g.first.atom_measure
        data = np.moveaxis(np.tensordot(P2, tmp, axes=(1, 1)), 0, 1) * g.second.atom_measure
    return HaarSpectrum(g, data, f.kind)


def haar_reconstruct(S: HaarSpectrum) -> AtomField:
    g = S.grid
    data = np.asarray(S.data)
    if isinstance(g, DyadicGrid):
        P = analysis_matrix(g)
        if data.shape[0] != P.shape[0]:
            raise IncompleteSpectrum("spectrum does not cover the grid")
        vals = np.tensordot(P.T, data, axes=(1, 0))
    else:
        P1 = analysis_matrix(g.first)
        P2 = analysis_matrix(g.second)
        if data.shape[:2] != (P1.shape[0], P2.shape[0]):
            raise IncompleteSpectrum("spectrum does not cover the grid")
        tmp = np.tensordot(P1.T, data, axes=(1, 0))
        vals = np.moveaxis(np.tensordot(P2.T, tmp, axes=(1, 1)), 0, 1)
    kind = S.kind
    if kind == "real" and np.iscomplexobj(vals):
        vals = vals.real
    return AtomField(g, vals, kind)


def spectrum_from_coeffs(grid, coeffs: np.ndarray, mean=None, kind="vector") -> HaarSpectrum:
    """Build a spectrum from a cancellative block (zero residual blocks unless a mean is given)."""
    coeffs = np.asarray(coeffs)
    if isinstance(grid, DyadicGrid):
        K = 1 + len(grid.haar_cubes) * len(grid.signatures)
        vshape = coeffs.shape[2:]
        data = np.zeros((K,) + vshape, dtype=np.result_type(coeffs, complex))
        data[1:] = coeffs.reshape((K - 1,) + vshape)
        if mean is not None:
            data[0] = mean
    else:
        g1, g2 = grid.first, grid.second
        K1 = 1 + len(g1.haar_cubes) * len(g1.signatures)
        K2 = 1 + len(g2.haar_cubes) * len(g2.signatures)
        vshape = coeffs.shape[4:]
        data = np.zeros((K1, K2) + vshape, dtype=np.result_type(coeffs, complex))
        data[1:, 1:] = coeffs.reshape((K1 - 1, K2 - 1) + vshape)
        if mean is not None:
            data[0, 0] = mean
    return HaarSpectrum(grid, data, kind)


def slice_all(f: AtomField, slot: int) -> np.ndarray:
    """All partial Haar coefficients in one slot: (Ch, S, A_other, *v)."""
    g = f.grid
    if not isinstance(g, ProductGrid):
        raise GridMismatch("slice coefficients need a product grid")
    if slot == 1:
        H = g.first.haar_matrix
        return np.tensordot(H, f.values, axes=(2, 0)) * g.first.atom_measure
    if slot == 2:
        H = g.second.haar_matrix
        return np.tensordot(H, f.values, axes=(2, 1)) * g.second.atom_measure
    raise GridMismatch("slot must be 1 or 2")


def slice_coeffs(f: AtomField, slot: int, P: Cube, eps) -> AtomField:
    """x_other -> (f(., x_other), h_P^eps) taken in the chosen slot."""
    g = f.grid
    if not isinstance(g, ProductGrid):
        raise GridMismatch("slice coefficients need a product grid")
    factor = g.first if slot == 1 else g.second
    other = g.second if slot == 1 else g.first
    if P not in factor.haar_position:
        raise GridMismatch(f"cube {P} is not a Haar cube of slot {slot}")
    eps = tuple(eps)
    if eps not in factor.signatures:
        raise GridMismatch(f"invalid signature {eps}")
    h = factor.haar_matrix[factor.haar_position[P], factor.signatures.index(eps)]
    axis = 0 if slot == 1 else 1
    vals = np.tensordot(h, f.values, axes=(0, axis)) * factor.atom_measure
    return AtomField(other, vals, f.kind)


def haar_function(grid: DyadicGrid, Q: Cube, eps) -> np.ndarray:
    """h_Q^eps sampled on atoms."""
    return grid.haar_matrix[grid.haar_position[Q], grid.signatures.index(tuple(eps))]
