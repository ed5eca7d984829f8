import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mwlab.convex import (
    BalancedHull,
    Ellipsoid,
    LqSum,
    ZeroBody,
    average_body_values,
    body_from_json,
    body_norm,
    john_ellipsoid,
    matrix_apply,
    minkowski_lq_sum,
    random_directions,
    sandwich_check,
    segment_body,
)
from mwlab.errors import DegenerateBody, EmptyList, SingularMatrixOnEllipsoid
from mwlab.hermitian import vec_norm


def random_body(rng, d):
    if rng.random() < 0.5:
        Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return Ellipsoid(Z @ Z.conj().T + 0.1 * np.eye(d))
    k = int(rng.integers(1, 4))
    return BalancedHull(rng.normal(size=(k, d)) + 1j * rng.normal(size=(k, d)))


def test_lq_sum_of_disks_matches_bruteforce(derived):
    K = minkowski_lq_sum([Ellipsoid(np.eye(1)), Ellipsoid(np.eye(1))], 2.0)
    assert body_norm(K) == pytest.approx(derived["lq_two_unit_disks_q2"], abs=1e-4)
    assert body_norm(K) == pytest.approx(np.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("radii,q", [((1.0, 0.5), 1.5), ((2.0, 1.0), 3.0), ((1.0, 1.0), 1.0)])
def test_lq_sum_scalar_oracle(radii, q):
    K = LqSum(tuple(Ellipsoid(np.array([[r]])) for r in radii), q)
    if q == 1:
        assert body_norm(K) == pytest.approx(sum(radii))
    else:
        assert body_norm(K) == pytest.approx(oracles.lq_sum_disks_radius(radii, q, 180, 2001), rel=1e-5)


def test_zonotope_norm(derived):
    K = LqSum((segment_body([1, 0]), segment_body([0, 1])), 1.0)
    assert body_norm(K) == pytest.approx(derived["zonotope_e1_e2"], rel=1e-3)
    assert body_norm(K) == pytest.approx(np.sqrt(2), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 3), count=st.integers(1, 4),
       q=st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_lq_sum_norm_bounds(seed, d, count, q):
    rng = np.random.default_rng(seed)
    bodies = [random_body(rng, d) for _ in range(count)]
    norms = np.array([body_norm(K) for K in bodies])
    val = body_norm(minkowski_lq_sum(bodies, q))
    assert val >= norms.max() * (1 - 1e-9)
    assert val <= np.sum(norms ** q) ** (1 / q) * (1 + 1e-9)


def test_norm_is_max_support(rng):
    K = LqSum(tuple(random_body(rng, 2) for _ in range(3)), 2.0)
    U = random_directions(2, 20000, rng)
    assert body_norm(K) >= K.support(U).max() * (1 - 1e-12)


def test_support_point_attains_support(rng):
    K = LqSum(tuple(random_body(rng, 3) for _ in range(3)), 1.5)
    U = random_directions(3, 50, rng)
    S = K.support_point(U)
    assert np.allclose(np.sum(np.conj(U) * S, axis=1).real, K.support(U), rtol=1e-9)


def test_matrix_apply_support(rng):
    K = random_body(rng, 2)
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    U = random_directions(2, 40, rng)
    assert np.allclose(matrix_apply(A, K).support(U), K.support(U @ np.conj(A)), rtol=1e-9)


def test_singular_matrix_on_ellipsoid():
    with pytest.raises(SingularMatrixOnEllipsoid):
        matrix_apply(np.array([[1, 0], [0, 0]]), Ellipsoid(np.eye(2)))
    assert isinstance(matrix_apply(np.zeros((2, 2)), segment_body([1, 1])), ZeroBody)


def test_l1_ball_john(derived):
    K = BalancedHull(np.eye(2))
    G, factor = john_ellipsoid(K)
    radius = np.linalg.eigvalsh(G.matrix)
    assert np.allclose(radius, derived["l1_ball_john_radius"], atol=1e-3)
    assert factor <= np.sqrt(2) * 1.05


def test_john_phase_invariance(rng):
    G = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    ph = np.exp(2j * np.pi * rng.random(4))
    A, _ = john_ellipsoid(BalancedHull(G))
    B, _ = john_ellipsoid(BalancedHull(G * ph[:, None]))
    assert np.allclose(A.matrix, B.matrix, atol=1e-8)


def test_john_sandwich(rng):
    K = BalancedHull(rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3)))
    G, factor = john_ellipsoid(K)
    lo, hi = sandwich_check(K, G)
    assert lo >= 1 - 1e-9
    assert hi <= factor * (1 + 1e-9)
    assert factor <= np.sqrt(3) * 1.05


def test_degenerate_hull():
    with pytest.raises(DegenerateBody):
        john_ellipsoid(BalancedHull(np.array([[1, 0, 0], [0, 1, 0]], dtype=complex)))


def test_empty_inputs():
    with pytest.raises(EmptyList):
        minkowski_lq_sum([], 2.0)
    with pytest.raises(EmptyList):
        BalancedHull(np.zeros((1, 2)))


def test_average_body_is_zonotope(rng):
    vals = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    K = average_body_values(vals)
    U = random_directions(2, 30, rng)
    expect = np.mean(np.abs(np.conj(U) @ vals.T), axis=1)
    assert np.allclose(K.support(U), expect, rtol=1e-12)
    assert body_norm(K) <= np.mean(vec_norm(vals)) * (1 + 1e-12)


def test_json_roundtrip(rng):
    K = LqSum((random_body(rng, 2), random_body(rng, 2), ZeroBody(2)), 3.0)
    back = body_from_json(K.to_json())
    U = random_directions(2, 16, rng)
    assert np.allclose(back.support(U), K.support(U))
