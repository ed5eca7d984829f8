import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mwlab.errors import CubeOutsideGrid, GridMismatch, IncompleteSpectrum
from mwlab.grid import AtomField, Cube, DyadicGrid, ProductGrid, Rect, parse_cube, signatures
from mwlab.haar import (
    HaarSpectrum,
    analysis_matrix,
    haar_coeffs,
    haar_function,
    haar_reconstruct,
    slice_coeffs,
)


def vector_field(grid, d, rng):
    shape = grid.shape + (d,)
    return AtomField(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


def test_signatures_order():
    assert signatures(1) == [(0,)]
    assert signatures(2) == [(0, 0), (0, 1), (1, 0)]


def test_left_half_coefficient(derived):
    g = DyadicGrid(1, 1)
    f = AtomField(g, np.array([1.0, 0.0]), "real")
    assert haar_coeffs(f).coeff(Cube(0, (0,)), (0,)) == pytest.approx(derived["haar_left_half"])


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_haar_vectors_match_oracle(depth):
    g = DyadicGrid(1, depth)
    for Q in g.haar_cubes:
        assert np.allclose(haar_function(g, Q, (0,)), oracles.haar_vector(depth, Q.level, Q.pos[0]))


@pytest.mark.parametrize("n,depth", [(1, 1), (1, 4), (2, 1), (2, 3)])
def test_orthonormal(n, depth):
    g = DyadicGrid(n, depth)
    P = analysis_matrix(g)
    assert P.shape == (g.natoms, g.natoms)
    assert np.allclose(P @ P.T * g.atom_measure, np.eye(g.natoms), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 2), depth=st.integers(1, 4), d=st.integers(1, 3))
def test_parseval_and_reconstruction(seed, n, depth, d):
    if n == 2 and depth > 3:
        depth = 3
    rng = np.random.default_rng(seed)
    g = DyadicGrid(n, depth)
    f = vector_field(g, d, rng)
    S = haar_coeffs(f)
    energy = np.sum(np.abs(f.values) ** 2) * g.atom_measure
    assert np.sum(np.abs(S.data) ** 2) == pytest.approx(energy, rel=1e-10)
    assert np.allclose(haar_reconstruct(S).values, f.values, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d1=st.integers(1, 3), d2=st.integers(1, 3), m=st.integers(1, 2))
def test_biparameter_parseval(seed, d1, d2, m):
    rng = np.random.default_rng(seed)
    g = ProductGrid(DyadicGrid(1, d1), DyadicGrid(m, min(d2, 2)))
    f = vector_field(g, 2, rng)
    S = haar_coeffs(f)
    energy = np.sum(np.abs(f.values) ** 2) * g.atom_measure
    assert np.sum(np.abs(S.data) ** 2) == pytest.approx(energy, rel=1e-10)
    assert np.allclose(haar_reconstruct(S).values, f.values, atol=1e-12)


def test_biparameter_coefficient_is_tensor_pairing(rng):
    g = ProductGrid(DyadicGrid(1, 2), DyadicGrid(1, 2))
    f = vector_field(g, 1, rng)
    S = haar_coeffs(f)
    R = Rect(Cube(1, (1,)), Cube(0, (0,)))
    h = np.outer(oracles.haar_vector(2, 1, 1), oracles.haar_vector(2, 0, 0))
    expect = np.tensordot(h, f.values, axes=([0, 1], [0, 1])) * g.atom_measure
    assert np.allclose(S.coeff(R, ((0,), (0,))), expect)


def test_slice_coefficients_compose(rng):
    g = ProductGrid(DyadicGrid(1, 2), DyadicGrid(1, 1))
    f = vector_field(g, 2, rng)
    P, Q = Cube(1, (0,)), Cube(0, (0,))
    inner = slice_coeffs(f, 1, P, (0,))
    both = haar_coeffs(inner).coeff(Q, (0,))
    assert np.allclose(both, haar_coeffs(f).coeff(Rect(P, Q), ((0,), (0,))))


def test_items_cover_all_coefficients(rng):
    g = DyadicGrid(2, 2)
    S = haar_coeffs(vector_field(g, 1, rng))
    assert len(list(S.items())) == g.natoms - 1


def test_errors():
    g = DyadicGrid(1, 2)
    with pytest.raises(CubeOutsideGrid):
        g.cube_mask(Cube(3, (0,)))
    with pytest.raises(CubeOutsideGrid):
        g.cube_mask(Cube(1, (2,)))
    with pytest.raises(GridMismatch):
        AtomField(g, np.zeros(3), "real")
    with pytest.raises(GridMismatch):
        DyadicGrid(3, 1)
    with pytest.raises(IncompleteSpectrum):
        haar_reconstruct(HaarSpectrum(g, np.zeros((2, 1))))
    f = AtomField(g, np.zeros(4), "real")
    with pytest.raises(GridMismatch):
        haar_coeffs(f, DyadicGrid(1, 1))


def test_parse_cube():
    assert parse_cube("2:1") == Cube(2, (1,))
    assert parse_cube("1:0,1x0:0") == Rect(Cube(1, (0, 1)), Cube(0, (0,)))


def test_field_json_roundtrip(rng):
    g = ProductGrid(DyadicGrid(1, 1), DyadicGrid(2, 1))
    f = vector_field(g, 2, rng)
    back = AtomField.from_json(f.to_json())
    assert back.grid == g
    assert np.array_equal(back.values, f.values)
