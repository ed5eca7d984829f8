"""Small dense Hermitian / positive-definite matrix kernel.

Everything here works on single matrices or on stacks of shape (..., d, d).
Eigendecompositions go through ``numpy.linalg.eigh``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian, NotPositiveDefinite

HERM_TOL = 1e-12
PD_FLOOR = 1e-12


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise NotHermitian(f"expected square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotHermitian("matrix has non-finite entries")
    return A


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def check_hermitian(A: np.ndarray, tol: float = HERM_TOL) -> None:
    scale = np.max(np.abs(A)) if A.size else 0.0
    err = np.max(np.abs(A - adjoint(A))) if A.size else 0.0
    if err > tol * max(scale, 1e-300):
        raise NotHermitian(f"matrix is not Hermitian (asymmetry {err:.3e})")


def eigh_pd(A: np.ndarray, floor: float = PD_FLOOR):
    """Eigendecomposition of a stack of PD matrices with a relative floor check."""
    A = as_matrix(A)
    check_hermitian(A)
    lam, U = np.linalg.eigh(hermitian_part(A))
    top = lam[..., -1:]
    bad = lam <= floor * np.maximum(top, 0.0)
    bad |= lam <= 0
    if np.any(bad):
        worst = float(np.min(lam))
        raise NotPositiveDefinite(
            f"matrix is not positive definite (eigenvalue {worst:.6g})", eigenvalue=worst
        )
    return lam, U


def pd_power(A: np.ndarray, s: float, floor: float = PD_FLOOR) -> np.ndarray:
    """U diag(lam^s) U* for a stack of PD matrices."""
    lam, U = eigh_pd(A, floor)
    return _recompose(U, lam ** s)


def _recompose(U: np.ndarray, vals: np.ndarray) -> np.ndarray:
    out = (U * vals[..., None, :]) @ adjoint(U)
    return hermitian_part(out)


def op_norm(A) -> float | np.ndarray:
    """Largest singular value; batched over leading axes."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    s = np.linalg.svd(A, compute_uv=False)
    out = s[..., 0]
    return float(out) if out.ndim == 0 else out


def vec_norm(v: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=axis))


@dataclass(frozen=True)
class PDMatrix:
    """Positive-definite matrix with cached eigendecomposition."""

    matrix: np.ndarray
    eigvals: np.ndarray = field(repr=False)
    eigvecs: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def power(self, s: float) -> "PDMatrix":
        return frac_power(self, s)

    def to_json(self):
        return matrix_to_json(self.matrix)


def validate_pd(M, floor: float = PD_FLOOR) -> PDMatrix:
    A = as_matrix(M)
    if A.ndim != 2:
        raise NotHermitian("validate_pd expects a single matrix")
    lam, U = eigh_pd(A, floor)
    return PDMatrix(hermitian_part(A), lam, U)


def frac_power(M: PDMatrix | np.ndarray, s: float) -> PDMatrix:
    if not np.isfinite(s) or s == 0:
        raise ValueError("exponent must be finite and nonzero")
    P = M if isinstance(M, PDMatrix) else validate_pd(M)
    vals = P.eigvals ** s
    order = np.argsort(vals)
    U = P.eigvecs[:, order]
    vals = vals[order]
    return PDMatrix(_recompose(U, vals), vals, U)


def matrix_to_json(A) -> list:
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim == 2:
        return arr.astype(complex)
    return arr[..., 0] + 1j * arr[..., 1]
