"""Biparameter paraproducts, product BMO / H^1 norms, the trace pairing and shadows.

Symbols are dense arrays B[i1, s1, i2, s2] of d x d matrices indexed by Haar
cubes and signatures of the two factors.  Every operator is an exact finite sum.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFamily, GridMismatch, SignatureSetTooSmall
from .grid import AtomField, Cube, DyadicGrid, ProductGrid, Rect, xor_one
from .haar import haar_coeffs, slice_all
from .hermitian import matrix_from_json, matrix_to_json, op_norm
from .operators import family_for, haar_multiplier
from .weights import MatrixWeight, reducing_operator

KINDS = ("11", "00", "gamma", "10", "01", "g10", "g10s", "g01", "g01s")
KIND_ALIASES = {"Γ": "gamma", "Γ10": "g10", "Γ10*": "g10s", "Γ01": "g01", "Γ01*": "g01s"}
ADJOINT_KIND = {"11": "00", "00": "11", "gamma": "gamma", "10": "01", "01": "10",
                "g10": "g10s", "g10s": "g10", "g01": "g01s", "g01s": "g01"}


@dataclass(frozen=True, eq=False)
class SymbolSpectrum:
    """Finitely supported (rectangle, signature) -> d x d matrix map."""

    grid: ProductGrid
    coeffs: np.ndarray  # (Ch1, S1, Ch2, S2, d, d)

    def __post_init__(self):
        g1, g2 = self.grid.first, self.grid.second
        C = np.asarray(self.coeffs, dtype=complex)
        want = (len(g1.haar_cubes), len(g1.signatures), len(g2.haar_cubes), len(g2.signatures))
        if C.shape[:4] != want or C.ndim != 6 or C.shape[4] != C.shape[5]:
            raise GridMismatch(f"symbol array of shape {C.shape} does not match grid {want}")
        object.__setattr__(self, "coeffs", C)

    @property
    def d(self) -> int:
        return self.coeffs.shape[-1]

    @classmethod
    def zeros(cls, grid: ProductGrid, d: int) -> "SymbolSpectrum":
        g1, g2 = grid.first, grid.second
        shape = (len(g1.haar_cubes), len(g1.signatures), len(g2.haar_cubes), len(g2.signatures), d, d)
        return cls(grid, np.zeros(shape, dtype=complex))

    @classmethod
    def from_entries(cls, grid: ProductGrid, d: int, entries) -> "SymbolSpectrum":
        """entries: iterable of (Rect, (eps1, eps2), matrix)."""
        S = cls.zeros(grid, d)
        C = S.coeffs
        g1, g2 = grid.first, grid.second
        for R, (e1, e2), M in entries:
            if R.first not in g1.haar_position or R.second not in g2.haar_position:
                raise GridMismatch(f"rectangle {R} carries no Haar functions on this grid")
            C[g1.haar_position[R.first], g1.signatures.index(tuple(e1)),
              g2.haar_position[R.second], g2.signatures.index(tuple(e2))] += np.asarray(M, dtype=complex)
        return S

    @classmethod
    def from_field(cls, b: AtomField) -> "SymbolSpectrum":
        """Biparameter Haar coefficients of a matrix field."""
        if b.kind != "matrix":
            raise GridMismatch("symbol field must be matrix valued")
        return cls(b.grid, haar_coeffs(b).coeffs)

    def adjoint(self) -> "SymbolSpectrum":
        return SymbolSpectrum(self.grid, np.conj(np.swapaxes(self.coeffs, -1, -2)))

    def scaled(self, c) -> "SymbolSpectrum":
        return SymbolSpectrum(self.grid, c * self.coeffs)

    def __add__(self, other: "SymbolSpectrum") -> "SymbolSpectrum":
        return SymbolSpectrum(self.grid, self.coeffs + other.coeffs)

    def support_mask(self) -> np.ndarray:
        """(Ch1, Ch2) rectangles carrying a nonzero coefficient."""
        return np.any(self.coeffs != 0, axis=(1, 3, 4, 5))

    def support(self) -> list[Rect]:
        g1, g2 = self.grid.first, self.grid.second
        i1, i2 = np.nonzero(self.support_mask())
        return [Rect(g1.haar_cubes[a], g2.haar_cubes[b]) for a, b in zip(i1, i2)]

    def items(self):
        g1, g2 = self.grid.first, self.grid.second
        for idx in zip(*np.nonzero(np.any(self.coeffs != 0, axis=(4, 5)))):
            a, s, b, t = idx
            yield (Rect(g1.haar_cubes[a], g2.haar_cubes[b]), (g1.signatures[s], g2.signatures[t]),
                   self.coeffs[idx])

    def to_json(self) -> dict:
        entries = []
        for R, (e1, e2), M in self.items():
            entries.append({
                "R": [R.first.level, *R.first.pos, R.second.level, *R.second.pos],
                "eps": [list(e1), list(e2)],
                "matrix": matrix_to_json(M),
            })
        return {"grid": self.grid.to_json(), "d": self.d, "entries": entries}

    @classmethod
    def from_json(cls, obj, grid: ProductGrid | None = None, d: int | None = None) -> "SymbolSpectrum":
        from .grid import grid_from_json

        if isinstance(obj, dict):
            grid = grid_from_json(obj["grid"]) if "grid" in obj else grid
            d = obj.get("d", d)
            raw = obj["entries"]
        else:
            raw = obj
        if grid is None or not isinstance(grid, ProductGrid):
            raise GridMismatch("symbol needs a product grid")
        n, m = grid.first.n, grid.second.n
        entries = []
        for e in raw:
            r = [int(v) for v in e["R"]]
            if len(r) != 2 + n + m:
                raise GridMismatch(f"rectangle {r} does not fit the grid dimensions")
            R = Rect(Cube(r[0], tuple(r[1:1 + n])), Cube(r[1 + n], tuple(r[2 + n:])))
            eps = e["eps"]
            if len(eps) == 2 and isinstance(eps[0], (list, tuple)):
                e1, e2 = tuple(eps[0]), tuple(eps[1])
            else:
                e1, e2 = tuple(eps[:n]), tuple(eps[n:])
            M = matrix_from_json(e["matrix"])
            entries.append((R, (e1, e2), M))
        if d is None:
            if not entries:
                raise GridMismatch("empty symbol needs an explicit dimension d")
            d = entries[0][2].shape[0]
        return cls.from_entries(grid, int(d), entries)


# ---------------------------------------------------------------- factor tables


@dataclass(frozen=True)
class _Factor:
    H: np.ndarray  # (Ch, S, A) Haar values
    X: np.ndarray  # (Ch, S, S, A) |Q|^{-1/2} h_Q^{1+e+f} for e != f, else 0
    box: np.ndarray  # (Ch, A) 1_Q / |Q|
    avg: np.ndarray  # (Ch, A) averaging weights over Q (atom sums)


_FACTORS: dict = {}


def _factor(g: DyadicGrid) -> _Factor:
    key = (g.n, g.depth)
    if key not in _FACTORS:
        H = g.haar_matrix
        Ch, S, A = H.shape
        meas = np.array([g.measure(c) for c in g.haar_cubes])
        ind = g.indicator[[g.cube_position[c] for c in g.haar_cubes]]
        X = np.zeros((Ch, S, S, A))
        for s, e in enumerate(g.signatures):
            for u, f in enumerate(g.signatures):
                if e != f:
                    X[:, s, u] = H[:, g.signatures.index(xor_one(e, f))] / np.sqrt(meas)[:, None]
        _FACTORS[key] = _Factor(H, X, ind / meas[:, None], ind / ind.sum(axis=1, keepdims=True))
    return _FACTORS[key]


def _as_vector(f: AtomField) -> np.ndarray:
    v = np.asarray(f.values, dtype=complex)
    return v[..., None] if f.kind in ("real", "scalar") else v


def _normalize_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown paraproduct kind {kind!r}")
    return kind


def _needs(kind: str) -> tuple[bool, bool]:
    return {"gamma": (True, True), "g10": (False, True), "g10s": (False, True),
            "g01": (True, False), "g01s": (True, False)}.get(kind, (False, False))


def paraproduct(kind: str, B: SymbolSpectrum, f: AtomField) -> AtomField:
    """Evaluate one of the nine biparameter paraproducts of symbol B on f."""
    kind = _normalize_kind(kind)
    grid = B.grid
    if f.grid != grid:
        raise GridMismatch("symbol and function live on different grids")
    g1, g2 = grid.first, grid.second
    F1, F2 = _factor(g1), _factor(g2)
    need1, need2 = _needs(kind)
    if (need1 and len(g1.signatures) < 2) or (need2 and len(g2.signatures) < 2):
        warnings.warn(SignatureSetTooSmall(f"paraproduct {kind}: empty signature index set, result is zero"))
        return AtomField(grid, np.zeros(grid.shape + (B.d,), dtype=complex), "vector")
    fv = _as_vector(f)
    C = B.coeffs
    es = dict(optimize=True)
    if kind in ("00", "gamma", "g10s", "g01s"):
        fc = haar_coeffs(AtomField(grid, fv, "vector")).coeffs  # (Ch1, S1, Ch2, S2, d)
    if kind in ("10", "g10"):
        sl2 = slice_all(AtomField(grid, fv, "vector"), 2)  # (Ch2, S2, A1, d)
        m10 = np.einsum("ia,jtal->ijtl", F1.avg, sl2, **es)
    if kind in ("01", "g01"):
        sl1 = slice_all(AtomField(grid, fv, "vector"), 1)  # (Ch1, S1, A2, d)
        m01 = np.einsum("jb,isbl->isjl", F2.avg, sl1, **es)

    if kind == "11":
        mean = np.einsum("ia,jb,abl->ijl", F1.avg, F2.avg, fv, **es)
        out = np.einsum("isa,jtb,isjtkl,ijl->abk", F1.H, F2.H, C, mean, **es)
    elif kind == "00":
        out = np.einsum("ia,jb,isjtkl,isjtl->abk", F1.box, F2.box, C, fc, **es)
    elif kind == "gamma":
        out = np.einsum("isua,jtvb,isjtkl,iujvl->abk", F1.X, F2.X, C, fc, **es)
    elif kind == "10":
        out = np.einsum("isa,jb,isjtkl,ijtl->abk", F1.H, F2.box, C, m10, **es)
    elif kind == "01":
        out = np.einsum("ia,jtb,isjtkl,isjl->abk", F1.box, F2.H, C, m01, **es)
    elif kind == "g10":
        out = np.einsum("isa,jtub,isjtkl,ijul->abk", F1.H, F2.X, C, m10, **es)
    elif kind == "g10s":
        out = np.einsum("ia,jtub,isjtkl,isjul->abk", F1.box, F2.X, C, fc, **es)
    elif kind == "g01":
        out = np.einsum("isua,jtb,isjtkl,iujl->abk", F1.X, F2.H, C, m01, **es)
    else:  # g01s
        out = np.einsum("isua,jb,isjtkl,iujtl->abk", F1.X, F2.box, C, fc, **es)
    return AtomField(grid, out, "vector")


def symmetrized_paraproduct(B: SymbolSpectrum, f: AtomField) -> AtomField:
    vals = sum(paraproduct(k, B, f).values for k in ("11", "10", "01", "00"))
    return AtomField(B.grid, vals, "vector")


def inner(f: AtomField, g: AtomField) -> complex:
    """Unweighted L^2 pairing sum_x <f(x), g(x)> |atom|."""
    return complex(np.sum(_as_vector(f) * np.conj(_as_vector(g))) * f.grid.atom_measure)


def _multiply(b: AtomField, f: AtomField) -> AtomField:
    return AtomField(f.grid, np.einsum("...kl,...l->...k", b.values, _as_vector(f)), "vector")


def bicommutator(sigma1, sigma2, b: AtomField, f: AtomField):
    """([T1,[T2,M_b]] f, [T1,[T2,Lambda_b]] f) with Haar multipliers T1, T2."""
    T1 = lambda u: haar_multiplier(sigma1, u, 1)  # noqa: E731
    T2 = lambda u: haar_multiplier(sigma2, u, 2)  # noqa: E731
    Bsym = SymbolSpectrum.from_field(b)

    def double(op, u):
        def inner_comm(v):
            return AtomField(v.grid, T2(op(v)).values - op(T2(v)).values, "vector")

        return AtomField(u.grid, T1(inner_comm(u)).values - inner_comm(T1(u)).values, "vector")

    fv = AtomField(f.grid, _as_vector(f), "vector")
    lhs = double(lambda v: _multiply(b, v), fv)
    rhs = double(lambda v: symmetrized_paraproduct(Bsym, v), fv)
    return lhs, rhs


# ---------------------------------------------------------------- weighted norms


def lp_norm(g: AtomField, p: float) -> float:
    v = np.abs(np.asarray(g.values, dtype=complex))
    if g.kind == "vector":
        v = np.sqrt(np.sum(v ** 2, axis=-1))
    return float((np.sum(v ** p) * g.grid.atom_measure) ** (1.0 / p))


def weighted_lp_norm(f: AtomField, W: MatrixWeight) -> float:
    """(integral |W^{1/p} f|^p)^{1/p}."""
    v = np.einsum("...kl,...l->...k", W.root, _as_vector(f))
    return float((np.sum(np.linalg.norm(v, axis=-1) ** W.p) * f.grid.atom_measure) ** (1.0 / W.p))


def _rect_ops(W: MatrixWeight, B: SymbolSpectrum, inverse: bool = False):
    """Reducing matrices (or inverses) over the support rectangles of B."""
    g1, g2 = B.grid.first, B.grid.second
    i1, i2 = np.nonzero(B.support_mask())
    mats = []
    for a, b in zip(i1, i2):
        M = reducing_operator(W, Rect(g1.haar_cubes[a], g2.haar_cubes[b])).matrix
        mats.append(np.linalg.inv(M) if inverse else M)
    return i1, i2, mats


def _check_weights(B, U, V):
    if U.grid != B.grid or V.grid != B.grid:
        raise GridMismatch("weights and symbol live on different grids")
    if U.p != V.p:
        raise ValueError("U and V must carry the same exponent p")


# ---------------------------------------------------------------- BMO


@dataclass(frozen=True)
class OmegaFamily:
    """Finite family of nonempty atom sets with a provenance tag."""

    grid: ProductGrid
    sets: tuple
    provenance: str = "explicit"

    def __post_init__(self):
        if not self.sets:
            raise EmptyFamily("omega family is empty")
        for s in self.sets:
            s = np.asarray(s)
            if s.shape != self.grid.shape or not s.any():
                raise EmptyFamily("each omega must be a nonempty atom set on the grid")


@dataclass(frozen=True)
class BMOResult:
    value: float
    omega: np.ndarray | None
    mode: str
    family_size: int
    terms: dict = field(default_factory=dict, repr=False)


EXHAUSTIVE_LIMIT = 10
SAMPLED_UNIONS = 512


def bmo_terms(B: SymbolSpectrum, U: MatrixWeight, V: MatrixWeight):
    """Support rectangles, their atom masks and sum_eps |V_R B_R^eps U_R^{-1}|^2."""
    _check_weights(B, U, V)
    g1, g2 = B.grid.first, B.grid.second
    i1, i2, Ui = _rect_ops(U, B, inverse=True)
    rects, masks, t = [], [], []
    for a, b, ui in zip(i1, i2, Ui):
        R = Rect(g1.haar_cubes[a], g2.haar_cubes[b])
        Vm = reducing_operator(V, R).matrix
        blocks = B.coeffs[a, :, b]  # (S1, S2, d, d)
        t.append(float(np.sum(op_norm(Vm @ blocks @ ui) ** 2)))
        rects.append(R)
        masks.append(B.grid.rect_mask(R))
    return rects, masks, np.array(t)


def _value_on(omega: np.ndarray, masks, t, measure: float) -> float:
    total = 0.0
    for m, tv in zip(masks, t):
        if np.all(omega[m]):
            total += tv
    return np.sqrt(total / (omega.sum() * measure))


def bmo_prod_details(B, U, V, family="auto", seed: int = 0) -> BMOResult:
    rects, masks, t = bmo_terms(B, U, V)
    grid = B.grid
    am = grid.atom_measure
    if not rects:
        if isinstance(family, OmegaFamily):
            return BMOResult(0.0, None, family.provenance, len(family.sets))
        return BMOResult(0.0, None, "empty-support", 0)
    k = len(rects)
    if isinstance(family, OmegaFamily):
        best, arg = -1.0, None
        for om in family.sets:
            v = _value_on(np.asarray(om, bool), masks, t, am)
            if v > best:
                best, arg = v, om
        return BMOResult(float(best), arg, family.provenance, len(family.sets))
    if family == "auto":
        family = "exhaustive" if k <= EXHAUSTIVE_LIMIT else "sampled"
    flat = np.array([m.ravel() for m in masks])
    if family == "exhaustive":
        if k > 20:
            raise ValueError("exhaustive omega family limited to 20 support rectangles")
        subsets = (np.array(bits, dtype=bool) for bits in itertools.product((False, True), repeat=k))
        size = 2 ** k - 1
    elif family == "sampled":
        rng = np.random.default_rng(seed)
        singles = [np.eye(k, dtype=bool)[j] for j in range(k)]
        unions = [rng.random(k) < 0.5 for _ in range(SAMPLED_UNIONS)]
        subsets = iter(singles + unions)
        size = k + SAMPLED_UNIONS
    else:
        raise ValueError(f"unknown omega family {family!r}")
    best, arg = -1.0, None
    for sel in subsets:
        if not sel.any():
            continue
        om = np.any(flat[sel], axis=0)
        inside = np.all(flat <= om[None, :], axis=1)
        v = np.sqrt(np.sum(t[inside]) / (om.sum() * am))
        if v > best:
            best, arg = v, om.reshape(grid.shape)
    return BMOResult(float(best), arg, family, size)


def bmo_prod_norm(B, U, V, family="auto", seed: int = 0) -> float:
    """Product BMO norm of B over an omega family (exact sup in exhaustive mode)."""
    return bmo_prod_details(B, U, V, family, seed).value


# ---------------------------------------------------------------- H^1 and duality


def h1_integrand(Phi: SymbolSpectrum, U: MatrixWeight, V: MatrixWeight) -> np.ndarray:
    """F(x) = (sum |V(x)^{-1/p} Phi_R^eps U_R|^2 1_R(x)/|R|)^{1/2} on atoms."""
    _check_weights(Phi, U, V)
    grid = Phi.grid
    g1, g2 = grid.first, grid.second
    F2 = np.zeros(grid.shape)
    Vi = V.inv_root
    i1, i2, Um = _rect_ops(U, Phi)
    for a, b, um in zip(i1, i2, Um):
        R = Rect(g1.haar_cubes[a], g2.haar_cubes[b])
        mask = grid.rect_mask(R)
        mats = (Phi.coeffs[a, :, b] @ um).reshape(-1, Phi.d, Phi.d)  # (S1*S2, d, d)
        prods = np.einsum("xkl,slm->xskm", Vi[mask], mats)
        F2[mask] += np.sum(op_norm(prods) ** 2, axis=1) / grid.measure(R)
    return np.sqrt(F2)


def h1_norm(Phi: SymbolSpectrum, U: MatrixWeight, V: MatrixWeight) -> float:
    return float(np.sum(h1_integrand(Phi, U, V)) * Phi.grid.atom_measure)


def duality_pairing(B: SymbolSpectrum, Phi: SymbolSpectrum) -> complex:
    """sum_R,eps tr(B_R^eps* Phi_R^eps)."""
    if B.grid != Phi.grid:
        raise GridMismatch("symbols live on different grids")
    return complex(np.sum(np.conj(B.coeffs) * Phi.coeffs))


# ---------------------------------------------------------------- shadows


@dataclass(frozen=True)
class ShadowLevel:
    k: int
    omega: np.ndarray
    rects: list
    omega_tilde: np.ndarray


@dataclass(frozen=True)
class ShadowDecomposition:
    levels: list
    integrand: np.ndarray

    def level_of(self, R: Rect) -> list[int]:
        return [lv.k for lv in self.levels if R in lv.rects]


def strong_maximal_indicator(grid: ProductGrid, mask: np.ndarray) -> np.ndarray:
    """M over all grid rectangles applied to the indicator of mask."""
    F, _ = family_for(grid, "dyadic")
    v = np.asarray(mask, dtype=float).ravel()
    avg = (F @ v) / F.sum(axis=1)
    vals = np.where(F > 0, avg[:, None], 0.0).max(axis=0)
    return vals.reshape(grid.shape)


def shadow_decomposition(Phi: SymbolSpectrum, U: MatrixWeight, V: MatrixWeight) -> ShadowDecomposition:
    """Level sets of the H^1 integrand, rectangle classes and their enlargements."""
    F = h1_integrand(Phi, U, V)
    support = Phi.support()
    if not support:
        return ShadowDecomposition([], F)
    grid = Phi.grid
    masks = {R: grid.rect_mask(R) for R in support}

    def frac_above(R, k):
        m = masks[R]
        return np.count_nonzero(F[m] > 2.0 ** k), np.count_nonzero(m)

    ks = set()
    for R in support:
        vals = np.sort(F[masks[R]])[::-1]
        n = vals.size
        t = vals[n // 2]
        k = int(np.ceil(np.log2(t))) - 1
        # settle floating ties against the defining inequalities
        for _ in range(4):
            hi, n_ = frac_above(R, k)
            lo, _n = frac_above(R, k + 1)
            if not 2 * hi > n_:
                k -= 1
            elif 2 * lo > n_:
                k += 1
            else:
                break
        ks.add(k)
    levels = []
    for k in range(min(ks), max(ks) + 1):
        omega = F > 2.0 ** k
        rects = []
        for R in support:
            hi, n_ = frac_above(R, k)
            lo, _ = frac_above(R, k + 1)
            if 2 * lo <= n_ < 2 * hi:
                rects.append(R)
        tilde = strong_maximal_indicator(grid, omega) > 0.5
        levels.append(ShadowLevel(k, omega, rects, tilde))
    return ShadowDecomposition(levels, F)
