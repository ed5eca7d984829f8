"""Balanced convex bodies in C^d described through support functions.

For a direction u the support function is h_K(u) = max_{x in K} Re<x, u>
and ``support_point`` returns a maximizer.  Every body here is balanced, so
h_K(lambda u) = h_K(u) for unimodular lambda.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .errors import (
    CubeOutsideGrid,
    DegenerateBody,
    EmptyList,
    SingularMatrixOnEllipsoid,
)
from .hermitian import (
    adjoint,
    hermitian_part,
    matrix_from_json,
    matrix_to_json,
    pd_power,
    validate_pd,
    vec_norm,
)

_TINY = 1e-300


def _rows(U) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    return U[None, :] if U.ndim == 1 else U


class ConvexBody:
    d: int

    def support(self, U) -> np.ndarray:
        raise NotImplementedError

    def support_point(self, U) -> np.ndarray:
        raise NotImplementedError

    def norm(self) -> float:
        return body_norm(self)


@dataclass(frozen=True)
class ZeroBody(ConvexBody):
    d: int

    def support(self, U):
        return np.zeros(_rows(U).shape[0])

    def support_point(self, U):
        return np.zeros(_rows(U).shape, dtype=complex)

    def to_json(self):
        return {"kind": "zero", "d": self.d}


@dataclass(frozen=True)
class Ellipsoid(ConvexBody):
    """M times the closed unit ball, M positive definite."""

    matrix: np.ndarray

    def __post_init__(self):
        M = validate_pd(self.matrix).matrix
        object.__setattr__(self, "matrix", M)

    @property
    def d(self):
        return self.matrix.shape[0]

    def support(self, U):
        return vec_norm(_rows(U) @ self.matrix.T)

    def support_point(self, U):
        MU = _rows(U) @ self.matrix.T
        nrm = np.maximum(vec_norm(MU), _TINY)
        return (MU / nrm[:, None]) @ self.matrix.T

    def to_json(self):
        return {"kind": "ellipsoid", "d": self.d, "matrix": matrix_to_json(self.matrix)}


@dataclass(frozen=True)
class BalancedHull(ConvexBody):
    """Closed convex hull of {lambda g : |lambda| = 1, g a generator}."""

    generators: np.ndarray
    phase_count: int = 64

    def __post_init__(self):
        G = _rows(self.generators)
        if G.shape[0] == 0 or not np.any(vec_norm(G) > 0):
            raise EmptyList("balanced hull needs a nonzero generator")
        pc = int(self.phase_count)
        if pc < 8 or pc & (pc - 1):
            raise ValueError("phase_count must be a power of two >= 8")
        object.__setattr__(self, "generators", G)

    @property
    def d(self):
        return self.generators.shape[1]

    def _inner(self, U):
        # entry (i, j) = u_i^* g_j
        return np.conj(_rows(U)) @ self.generators.T

    def support(self, U):
        return np.max(np.abs(self._inner(U)), axis=1)

    def support_point(self, U):
        ip = self._inner(U)
        j = np.argmax(np.abs(ip), axis=1)
        z = ip[np.arange(ip.shape[0]), j]
        a = np.abs(z)
        phase = np.where(a > 0, np.conj(z) / np.maximum(a, _TINY), 1.0)
        return self.generators[j] * phase[:, None]

    def phase_points(self) -> np.ndarray:
        """Generators times phase_count roots of unity."""
        w = np.exp(2j * np.pi * np.arange(self.phase_count) / self.phase_count)
        return (w[:, None, None] * self.generators[None]).reshape(-1, self.d)

    def to_json(self):
        return {
            "kind": "hull",
            "d": self.d,
            "generators": [[[float(z.real), float(z.imag)] for z in g] for g in self.generators],
            "phase_count": self.phase_count,
        }


@dataclass(frozen=True)
class LqSum(ConvexBody):
    """l^q Minkowski sum: all sums a_n v_n with v_n in K_n and ||a||_{q'} <= 1.

    Support function (sum_n h_n^q)^{1/q}; q = 1 gives the plain Minkowski sum.
    """

    members: tuple
    q: float = 2.0
    _stack: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.members) == 0:
            raise EmptyList("empty body list")
        if not self.q >= 1:
            raise ValueError("q must be >= 1")
        members = tuple(self.members)
        d = members[0].d
        if any(K.d != d for K in members):
            raise ValueError("bodies must share dimension")
        object.__setattr__(self, "members", members)
        stack = None
        if all(isinstance(K, Ellipsoid) for K in members):
            stack = ("ellipsoid", np.stack([K.matrix for K in members]))
        elif all(isinstance(K, BalancedHull) and K.generators.shape[0] == 1 for K in members):
            stack = ("segment", np.concatenate([K.generators for K in members]))
        object.__setattr__(self, "_stack", stack)

    @property
    def d(self):
        return self.members[0].d

    def _parts(self, U):
        """(N, K) member supports and a callable producing (N, K, d) support points."""
        U = _rows(U)
        if self._stack is not None and self._stack[0] == "ellipsoid":
            Ms = self._stack[1]
            MU = np.einsum("kij,nj->nki", Ms, U)
            h = vec_norm(MU)
            def pts():
                unit = MU / np.maximum(h, _TINY)[..., None]
                return np.einsum("kij,nkj->nki", Ms, unit)
            return h, pts
        if self._stack is not None:
            G = self._stack[1]
            ip = np.conj(U) @ G.T
            h = np.abs(ip)
            def pts():
                phase = np.where(h > 0, np.conj(ip) / np.maximum(h, _TINY), 1.0)
                return phase[..., None] * G[None]
            return h, pts
        h = np.stack([K.support(U) for K in self.members], axis=1)
        return h, lambda: np.stack([K.support_point(U) for K in self.members], axis=1)

    def support(self, U):
        h, _ = self._parts(U)
        if self.q == 1:
            return h.sum(axis=1)
        return np.sum(h ** self.q, axis=1) ** (1.0 / self.q)

    def support_point(self, U):
        h, pts = self._parts(U)
        P = pts()
        if self.q == 1:
            return P.sum(axis=1)
        tot = np.sum(h ** self.q, axis=1) ** (1.0 / self.q)
        a = (h / np.maximum(tot, _TINY)[:, None]) ** (self.q - 1)
        return np.einsum("nk,nkd->nd", a, P)

    def to_json(self):
        return {"kind": "lqsum", "d": self.d, "q": self.q, "members": [K.to_json() for K in self.members]}


def body_from_json(obj: dict) -> ConvexBody:
    kind = obj["kind"]
    if kind == "zero":
        return ZeroBody(int(obj["d"]))
    if kind == "ellipsoid":
        return Ellipsoid(matrix_from_json(obj["matrix"]))
    if kind == "hull":
        arr = np.asarray(obj["generators"], dtype=float)
        G = arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr.astype(complex)
        return BalancedHull(G, int(obj.get("phase_count", 64)))
    if kind == "lqsum":
        return LqSum(tuple(body_from_json(m) for m in obj["members"]), float(obj["q"]))
    raise ValueError(f"unknown body kind {kind!r}")


# ---------------------------------------------------------------- norms


def _ascend(K: ConvexBody, starts: np.ndarray, iters: int = 500, rtol: float = 1e-14):
    """Monotone power ascent u <- s(u)/|s(u)| for max_{|u|=1} h_K(u)."""
    U = _rows(starts)
    U = U / np.maximum(vec_norm(U), _TINY)[:, None]
    h = K.support(U)
    for _ in range(iters):
        S = K.support_point(U)
        nrm = vec_norm(S)
        ok = nrm > 0
        Unew = np.where(ok[:, None], S / np.maximum(nrm, _TINY)[:, None], U)
        hnew = K.support(Unew)
        better = hnew > h
        U = np.where(better[:, None], Unew, U)
        gain = np.where(better, hnew - h, 0.0)
        h = np.where(better, hnew, h)
        if np.all(gain <= rtol * np.maximum(h, _TINY)):
            break
    U, h = _polish(K, U, h)
    i = int(np.argmax(h))
    return float(h[i]), U[i]


def _polish(K: ConvexBody, U: np.ndarray, h: np.ndarray, iters: int = 400):
    """Adaptive-step Riemannian gradient ascent; fixes the slow tail of the power map
    on nearly round bodies."""
    step = np.full(U.shape[0], 1e-3)
    for _ in range(iters):
        S = K.support_point(U)
        radial = np.sum(np.conj(U) * S, axis=1).real
        G = S - radial[:, None] * U
        gn = vec_norm(G)
        Un = U + (step / np.maximum(gn, _TINY))[:, None] * G
        Un = Un / vec_norm(Un)[:, None]
        hn = K.support(Un)
        better = hn > h
        U = np.where(better[:, None], Un, U)
        h = np.where(better, hn, h)
        step = np.where(better, step * 2.0, step * 0.25)
        if np.all(step < 1e-12):
            break
    return U, h


def _norm_starts(K: ConvexBody) -> np.ndarray:
    starts = [np.eye(K.d, dtype=complex)]
    if isinstance(K, LqSum):
        dirs = []
        for M in K.members:
            v = max_norm_selection(M)
            if np.any(v != 0):
                dirs.append(v)
        if dirs:
            D = np.array(dirs)
            nrm = vec_norm(D)
            order = np.argsort(-nrm)[:32]
            starts.append(D[order])
    return np.concatenate(starts)


def body_norm(K: ConvexBody) -> float:
    """|K| = sup{|v| : v in K}."""
    if isinstance(K, ZeroBody):
        return 0.0
    if isinstance(K, Ellipsoid):
        return float(np.linalg.eigvalsh(K.matrix)[-1])
    if isinstance(K, BalancedHull):
        return float(np.max(vec_norm(K.generators)))
    if isinstance(K, LqSum) and K.d == 1:
        return float(K.support(np.ones((1, 1), dtype=complex))[0])
    val, _ = _ascend(K, _norm_starts(K))
    return val


def _tie_break(vectors: np.ndarray) -> np.ndarray:
    """Pick from candidate rows the lexicographic max of coordinate moduli."""
    V = _rows(vectors)
    keep = np.arange(V.shape[0])
    for k in range(V.shape[1]):
        mod = np.abs(V[keep, k])
        top = mod.max()
        keep = keep[mod >= top - 1e-12 * max(top, 1.0)]
        if keep.size == 1:
            break
    return V[keep[0]]


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-14 * max(np.max(np.abs(v)), _TINY))
    if nz.size == 0:
        return v
    z = v[nz[0]]
    return v * (np.conj(z) / abs(z))


def max_norm_selection(K: ConvexBody) -> np.ndarray:
    """A point of K of maximal length, with a deterministic tie-break."""
    if isinstance(K, ZeroBody):
        return np.zeros(K.d, dtype=complex)
    if isinstance(K, Ellipsoid):
        lam, U = np.linalg.eigh(K.matrix)
        top = lam[-1]
        E = U[:, lam >= top * (1 - 1e-12)]
        P = E @ adjoint(E)
        for k in range(K.d):
            col = P[:, k]
            if np.linalg.norm(col) > 1e-12:
                v = col / np.linalg.norm(col)
                break
        return _phase_normalize(top * v)
    if isinstance(K, BalancedHull):
        G = K.generators
        nrm = vec_norm(G)
        cand = G[nrm >= nrm.max() * (1 - 1e-12)]
        cand = np.array([_phase_normalize(g) for g in cand])
        return _phase_normalize(_tie_break(cand))
    _, u = _ascend(K, _norm_starts(K))
    v = K.support_point(u)[0]
    return _phase_normalize(v)


# ---------------------------------------------------------------- calculus


def matrix_apply(A, K: ConvexBody) -> ConvexBody:
    """The body A K = {A v : v in K}."""
    A = np.asarray(A, dtype=complex)
    if isinstance(K, ZeroBody):
        return K
    if isinstance(K, Ellipsoid):
        if abs(np.linalg.det(A)) <= 1e-14 * max(np.abs(A).max(), _TINY) ** K.d:
            raise SingularMatrixOnEllipsoid("matrix is singular on an ellipsoid")
        N = A @ K.matrix
        return Ellipsoid(pd_power(hermitian_part(N @ adjoint(N)), 0.5))
    if isinstance(K, BalancedHull):
        G = K.generators @ A.T
        if not np.any(vec_norm(G) > 0):
            return ZeroBody(A.shape[0])
        return BalancedHull(G, K.phase_count)
    if isinstance(K, LqSum):
        return LqSum(tuple(matrix_apply(A, M) for M in K.members), K.q)
    raise TypeError(f"unsupported body {type(K).__name__}")


def minkowski_lq_sum(bodies, q: float) -> ConvexBody:
    bodies = list(bodies)
    if not bodies:
        raise EmptyList("empty body list")
    if len(bodies) == 1:
        return bodies[0]
    live = [K for K in bodies if not isinstance(K, ZeroBody)]
    if not live:
        return ZeroBody(bodies[0].d)
    return LqSum(tuple(live), float(q))


def segment_body(v) -> ConvexBody:
    """The balanced segment {lambda v : |lambda| <= 1}."""
    v = np.asarray(v, dtype=complex).ravel()
    if not np.any(v != 0):
        return ZeroBody(v.size)
    return BalancedHull(v[None, :])


def average_body(f, Q) -> ConvexBody:
    """A_Q f: all averages over Q of k f with |k| <= 1."""
    grid = f.grid
    try:
        mask = grid.cube_mask(Q)
    except CubeOutsideGrid:
        raise
    vals = np.asarray(f.values)[mask]
    return average_body_values(vals)


def average_body_values(vals: np.ndarray) -> ConvexBody:
    """A_Q of vector samples of equal weight."""
    vals = np.asarray(vals, dtype=complex)
    w = 1.0 / vals.shape[0]
    live = vals[vec_norm(vals) > 0] * w
    if live.shape[0] == 0:
        return ZeroBody(vals.shape[1])
    return LqSum(tuple(BalancedHull(g[None, :]) for g in live), 1.0)


# ---------------------------------------------------------------- John ellipsoid


@lru_cache(maxsize=None)
def quasi_uniform_directions(d: int, count: int = 4096, seed: int = 20240607) -> np.ndarray:
    """Fixed scrambled-Sobol directions on the unit sphere of C^d."""
    sob = qmc.Sobol(2 * d, scramble=True, seed=seed)
    X = sob.random(count)
    X = np.clip(X, 1e-12, 1 - 1e-12)
    Z = _normal.ppf(X)
    V = Z[:, :d] + 1j * Z[:, d:]
    V = V / vec_norm(V)[:, None]
    V.setflags(write=False)
    return V


def random_directions(d: int, count: int, rng) -> np.ndarray:
    V = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    return V / vec_norm(V)[:, None]


@lru_cache(maxsize=None)
def _herm_basis(d: int) -> np.ndarray:
    B = []
    for k in range(d):
        E = np.zeros((d, d), complex)
        E[k, k] = 1
        B.append(E)
    for k in range(d):
        for l in range(k + 1, d):
            E = np.zeros((d, d), complex)
            E[k, l] = E[l, k] = 1
            B.append(E)
            E = np.zeros((d, d), complex)
            E[k, l] = 1j
            E[l, k] = -1j
            B.append(E)
    return np.array(B)


def mvee_centered(points: np.ndarray, gap: float = 1e-9, max_newton: int = 300) -> np.ndarray:
    """Minimum-volume centered complex ellipsoid {x : x* Q x <= 1} containing the points.

    Log-barrier Newton method on the d^2 real coordinates of Hermitian Q.
    Returns Q.
    """
    P = _rows(points)
    N, d = P.shape
    E = _herm_basis(d)
    # c[i, k] = a_i^* E_k a_i (real)
    C = np.einsum("ni,kij,nj->nk", np.conj(P), E, P).real
    X = (P.T @ np.conj(P)) / N
    Q0 = np.linalg.inv(hermitian_part(X))
    Q0 = Q0 * (0.5 / np.max(np.einsum("ni,ij,nj->n", np.conj(P), Q0, P).real))
    theta = _herm_coords(Q0, d)

    def Qof(th):
        return np.tensordot(th, E, axes=1)

    t = 1.0
    newton = 0
    stalled = False
    while True:
        for _ in range(40):
            Q = Qof(theta)
            s = 1.0 - C @ theta
            Qi = np.linalg.inv(Q)
            QiE = np.einsum("ij,kjl->kil", Qi, E)
            g_ld = np.einsum("kii->k", QiE).real
            H_ld = np.einsum("kij,lji->kl", QiE, QiE).real
            grad = -t * g_ld + C.T @ (1.0 / s)
            Cs = C / s[:, None]
            hess = t * H_ld + Cs.T @ Cs
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            lam2 = -grad @ step
            newton += 1
            if not lam2 > max(1e-9, 1e-13 * t) or newton > max_newton:
                break
            f0 = -t * _logdet_pd(Q) - np.sum(np.log(s)) if lam2 >= 0.05 else 0.0
            Cd = C @ step
            pos = Cd > 0
            a = 1.0
            if np.any(pos):
                a = min(1.0, 0.99 * float(np.min(s[pos] / Cd[pos])))
            while a > 1e-10:
                th = theta + a * step
                s1 = 1.0 - C @ th
                if np.all(s1 > 0):
                    ld = _logdet_pd(Qof(th))
                    # inside the quadratic-convergence region of a self-concordant
                    # barrier the damped step needs no sufficient-decrease test
                    if ld is not None and (
                        lam2 < 0.05 or -t * ld - np.sum(np.log(s1)) <= f0 - 0.25 * a * lam2
                    ):
                        break
                a *= 0.5
            if a <= 1e-10:
                stalled = True
                break
            theta = theta + a * step
        if N / t < gap or newton > max_newton or stalled:
            break
        t *= 32.0
    Q = hermitian_part(Qof(theta))
    return Q


def _logdet_pd(Q):
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))


def _herm_coords(Q: np.ndarray, d: int) -> np.ndarray:
    th = [Q[k, k].real for k in range(d)]
    for k in range(d):
        for l in range(k + 1, d):
            th.append(Q[k, l].real)
            th.append(Q[k, l].imag)
    return np.array(th)


def _min_support_on_sphere(K: ConvexBody, Minv: np.ndarray, starts: np.ndarray, iters: int = 300, probes: int = 0,
                           seed: int = 0):
    """Local minimization of h_K(Minv w) over unit w, batched over starts.

    Gradient steps stall at kinks of hull supports, so each step also tries
    `probes` random tangent moves of the same length (a pattern search).
    """
    W = starts / vec_norm(starts)[:, None]
    val = K.support(W @ Minv.T)
    step = np.full(W.shape[0], 0.1)
    rng = np.random.default_rng(seed)
    S, d = W.shape
    for _ in range(iters):
        G = K.support_point(W @ Minv.T) @ np.conj(Minv)
        # Riemannian gradient w.r.t. the real inner product
        radial = np.sum(np.conj(W) * G, axis=1).real
        G = G - radial[:, None] * W
        dirs = [G / np.maximum(vec_norm(G), _TINY)[:, None]]
        for _ in range(probes):
            Z = rng.normal(size=(S, d)) + 1j * rng.normal(size=(S, d))
            Z = Z - np.sum(np.conj(W) * Z, axis=1).real[:, None] * W
            dirs.append(-Z / np.maximum(vec_norm(Z), _TINY)[:, None])
        best_w, best_v = W, val
        for D in dirs:
            Wn = W - step[:, None] * D
            Wn = Wn / vec_norm(Wn)[:, None]
            vn = K.support(Wn @ Minv.T)
            take = vn < best_v
            best_w = np.where(take[:, None], Wn, best_w)
            best_v = np.where(take, vn, best_v)
        better = best_v < val
        W, val = best_w, best_v
        step = np.where(better, step * 1.5, step * 0.5)
        if np.all(step < 1e-10):
            break
    return val, W


def _max_support_on_sphere(K: ConvexBody, Minv: np.ndarray, starts: np.ndarray):
    """max over unit w of h_K(Minv w): the body Minv^* K viewed through its support."""
    T = LinearImage(K, Minv)
    return _ascend(T, starts)


@dataclass(frozen=True)
class LinearImage(ConvexBody):
    """Body with support u -> h_K(A u) (i.e. A^* K)."""

    base: ConvexBody
    A: np.ndarray

    @property
    def d(self):
        return self.A.shape[1]

    def support(self, U):
        return self.base.support(_rows(U) @ self.A.T)

    def support_point(self, U):
        S = self.base.support_point(_rows(U) @ self.A.T)
        return S @ np.conj(self.A)


def _check_full_rank(K: ConvexBody) -> None:
    if isinstance(K, ZeroBody):
        raise DegenerateBody("zero body has empty interior")
    if isinstance(K, BalancedHull):
        if np.linalg.matrix_rank(K.generators, tol=1e-10 * np.abs(K.generators).max()) < K.d:
            raise DegenerateBody("generators do not span C^d")
        return
    V = quasi_uniform_directions(K.d, 1024)
    h = K.support(V)
    if h.min() <= 1e-12 * max(h.max(), _TINY):
        raise DegenerateBody("body has empty interior")


def _smooth(K: ConvexBody) -> bool:
    """Support functions without kinks: ellipsoids and l^q sums of them."""
    if isinstance(K, Ellipsoid):
        return True
    return isinstance(K, LqSum) and K.q > 1 and all(isinstance(M, Ellipsoid) for M in K.members)


def _canonical(K: ConvexBody) -> ConvexBody:
    """Same body with phase-normalized hull generators, so phase choices cannot leak in."""
    if isinstance(K, BalancedHull):
        return BalancedHull(np.array([_phase_normalize(g) for g in K.generators]), K.phase_count)
    if isinstance(K, LqSum):
        return LqSum(tuple(_canonical(M) for M in K.members), K.q)
    return K


def john_ellipsoid(
    K: ConvexBody,
    n_dirs: int = 4096,
    rounds: int = 4,
    certify: int = 4096,
    seed: int = 0,
) -> tuple[Ellipsoid, float]:
    """Maximal-volume complex ellipsoid G inside K and the factor c with K within c G.

    The ellipsoid is the polar of the minimum-volume ellipsoid around the
    sampled boundary points v / h_K(v) of the polar body, refined by adding
    the worst violators found by local search and finally shrunk so that
    h_G <= h_K on every probed direction.  The factor is the maximum of
    h_K(v) / h_G(v), found by monotone ascent.
    """
    if isinstance(K, Ellipsoid):
        return K, 1.0
    K = _canonical(K)
    _check_full_rank(K)
    d = K.d
    rng = np.random.default_rng(seed)
    V = quasi_uniform_directions(d, n_dirs)
    pts = V / K.support(V)[:, None]
    fresh = random_directions(d, certify, rng)
    ratio = np.inf
    M = None
    # kinks in the support function stall plain local search; probe harder there
    smooth = _smooth(K)
    starts, probes = (8, 0) if smooth else (32, 4 * d)
    if not smooth:
        rounds *= 10
    for _ in range(rounds):
        Q = mvee_centered(pts)
        M = pd_power(Q, 0.5)
        Minv = np.linalg.inv(M)
        # ratio |M v| / h_K(v); with v = Minv w this is 1 / h_K(Minv w)
        hv = K.support(fresh @ Minv.T)
        order = np.argsort(hv)[:starts]
        vals, W = _min_support_on_sphere(K, Minv, fresh[order], probes=probes, seed=seed)
        worst = min(float(hv.min()), float(vals.min()))
        ratio = 1.0 / worst
        if ratio <= 1 + 1e-4:
            break
        viol = W[vals < 1.0] @ Minv.T
        viol = np.concatenate([viol, (fresh[hv < 1.0] @ Minv.T)])
        pts = np.concatenate([pts, viol / K.support(viol)[:, None]])
    # certify the inner side from the lowest of all sampled directions
    Minv = np.linalg.inv(M)
    pool = np.concatenate([fresh, V])
    hv = K.support(pool @ Minv.T)
    if smooth:
        vals, _ = _min_support_on_sphere(K, Minv, pool[np.argsort(hv)[:8]])
    else:
        vals, _ = _min_support_on_sphere(K, Minv, pool[np.argsort(hv)[:64]], probes=4 * d, seed=seed)
    worst = min(float(hv.min()), float(vals.min()))
    if worst < 1.0:
        M = M * worst
    Minv = np.linalg.inv(M)
    starts = np.concatenate([np.eye(d, dtype=complex), fresh[np.argsort(-K.support(fresh @ Minv.T))[:8]]])
    factor, _ = _max_support_on_sphere(K, Minv, starts)
    return Ellipsoid(hermitian_part(M)), float(factor)


def sandwich_check(K: ConvexBody, G: Ellipsoid, count: int = 4096, seed: int = 1):
    """(min, max) over sampled directions of h_K / h_G."""
    V = random_directions(K.d, count, np.random.default_rng(seed))
    r = K.support(V) / G.support(V)
    return float(r.min()), float(r.max())
