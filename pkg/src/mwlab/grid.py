"""Truncated dyadic grids on the unit cube and piecewise-constant atom fields.

Atoms of a factor grid of dimension n and depth N are the level-N cells,
flattened row-major over their integer coordinates.  A one-parameter field
has values of shape (A, *vshape); a biparameter field (A1, A2, *vshape).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CubeOutsideGrid, GridMismatch, OutOfRange
from .hermitian import matrix_from_json, matrix_to_json


@dataclass(frozen=True, order=True)
class Cube:
    level: int
    pos: tuple

    def __str__(self):
        return f"{self.level}:" + ",".join(str(i) for i in self.pos)


@dataclass(frozen=True, order=True)
class Rect:
    first: Cube
    second: Cube

    def __str__(self):
        return f"{self.first}x{self.second}"


def signatures(n: int) -> list[tuple]:
    """{0,1}^n without the all-ones tuple, in lexicographic order."""
    return [e for e in itertools.product((0, 1), repeat=n) if not all(e)]


def xor_one(*sigs) -> tuple:
    """Entrywise 1 xor a xor b xor ..."""
    out = []
    for bits in zip(*sigs):
        v = 1
        for b in bits:
            v ^= b
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class DyadicGrid:
    n: int
    depth: int

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridMismatch("grid dimension must be 1 or 2")
        if self.depth < 0:
            raise GridMismatch("depth must be nonnegative")

    @property
    def side(self) -> int:
        return 2 ** self.depth

    @property
    def natoms(self) -> int:
        return self.side ** self.n

    @property
    def shape(self) -> tuple:
        return (self.natoms,)

    @property
    def atom_measure(self) -> float:
        return 2.0 ** (-self.n * self.depth)

    @cached_property
    def coords(self) -> np.ndarray:
        """(A, n) integer coordinates of atoms, row-major."""
        axes = [np.arange(self.side)] * self.n
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def atom_index(self, pos) -> int:
        pos = tuple(int(i) for i in pos)
        if len(pos) != self.n or any(i < 0 or i >= self.side for i in pos):
            raise OutOfRange(f"atom {pos} outside grid")
        idx = 0
        for i in pos:
            idx = idx * self.side + i
        return idx

    @cached_property
    def signatures(self) -> list[tuple]:
        return signatures(self.n)

    def cubes(self, level: int) -> list[Cube]:
        k = 2 ** level
        return [Cube(level, p) for p in itertools.product(range(k), repeat=self.n)]

    @cached_property
    def all_cubes(self) -> list[Cube]:
        """All dyadic cubes of levels 0..depth (atoms included)."""
        return [c for l in range(self.depth + 1) for c in self.cubes(l)]

    @cached_property
    def haar_cubes(self) -> list[Cube]:
        """Cubes carrying Haar functions: levels 0..depth-1."""
        return [c for l in range(self.depth) for c in self.cubes(l)]

    @cached_property
    def cube_position(self) -> dict:
        return {c: i for i, c in enumerate(self.all_cubes)}

    @cached_property
    def haar_position(self) -> dict:
        return {c: i for i, c in enumerate(self.haar_cubes)}

    def check_cube(self, c: Cube) -> None:
        if c.level < 0 or c.level > self.depth or len(c.pos) != self.n:
            raise CubeOutsideGrid(f"cube {c} outside grid")
        if any(i < 0 or i >= 2 ** c.level for i in c.pos):
            raise CubeOutsideGrid(f"cube {c} outside grid")

    def measure(self, c: Cube) -> float:
        return 2.0 ** (-self.n * c.level)

    def cube_mask(self, c: Cube) -> np.ndarray:
        self.check_cube(c)
        shift = self.depth - c.level
        return np.all((self.coords >> shift) == np.asarray(c.pos), axis=1)

    @cached_property
    def indicator(self) -> np.ndarray:
        """(C, A) 0/1 matrix of all dyadic cubes."""
        return np.array([self.cube_mask(c) for c in self.all_cubes], dtype=float)

    @cached_property
    def haar_matrix(self) -> np.ndarray:
        """(Ch, S, A) values of h_Q^eps on atoms."""
        S = len(self.signatures)
        H = np.zeros((len(self.haar_cubes), S, self.natoms))
        for qi, c in enumerate(self.haar_cubes):
            mask = self.cube_mask(c)
            shift = self.depth - c.level - 1
            child = (self.coords[mask] >> shift) & 1
            scale = 1.0 / np.sqrt(self.measure(c))
            for si, eps in enumerate(self.signatures):
                sign = np.ones(child.shape[0])
                for k, e in enumerate(eps):
                    if e == 0:
                        sign = sign * (2 * child[:, k] - 1)
                H[qi, si, mask] = sign * scale
        return H

    def family(self, kind: str = "dyadic"):
        """Indicator matrix (F, A) and labels for a cube family.

        'dyadic': all dyadic cubes of levels 0..depth.
        'grid_aligned': all cubes whose corners lie on the atom lattice.
        """
        if kind == "dyadic":
            return self.indicator, list(self.all_cubes)
        if kind in ("grid_aligned", "aligned"):
            return self._aligned
        raise ValueError(f"unknown family {kind!r}")

    @cached_property
    def _aligned(self):
        rows, labels = [], []
        for size in range(1, self.side + 1):
            for start in itertools.product(range(self.side - size + 1), repeat=self.n):
                lo = np.asarray(start)
                mask = np.all((self.coords >= lo) & (self.coords < lo + size), axis=1)
                rows.append(mask)
                labels.append(("aligned", start, size))
        return np.array(rows, dtype=float), labels

    def to_json(self) -> dict:
        return {"n": self.n, "depth": self.depth}


@dataclass(frozen=True)
class ProductGrid:
    first: DyadicGrid
    second: DyadicGrid

    @property
    def shape(self) -> tuple:
        return (self.first.natoms, self.second.natoms)

    @property
    def atom_measure(self) -> float:
        return self.first.atom_measure * self.second.atom_measure

    @cached_property
    def signatures(self) -> list[tuple]:
        return [(a, b) for a in self.first.signatures for b in self.second.signatures]

    @cached_property
    def all_rects(self) -> list[Rect]:
        return [Rect(a, b) for a in self.first.all_cubes for b in self.second.all_cubes]

    @cached_property
    def haar_rects(self) -> list[Rect]:
        return [Rect(a, b) for a in self.first.haar_cubes for b in self.second.haar_cubes]

    def measure(self, R: Rect) -> float:
        return self.first.measure(R.first) * self.second.measure(R.second)

    def rect_mask(self, R: Rect) -> np.ndarray:
        return np.outer(self.first.cube_mask(R.first), self.second.cube_mask(R.second))

    def to_json(self) -> dict:
        return {
            "n": self.first.n,
            "depth": self.first.depth,
            "m": self.second.n,
            "depth2": self.second.depth,
        }


Grid = DyadicGrid | ProductGrid


def grid_from_json(obj: dict) -> Grid:
    g1 = DyadicGrid(int(obj["n"]), int(obj["depth"]))
    if "m" in obj or "depth2" in obj:
        g2 = DyadicGrid(int(obj.get("m", 1)), int(obj.get("depth2", obj["depth"])))
        return ProductGrid(g1, g2)
    return g1


def parse_cube(text: str) -> Cube | Rect:
    """Parse 'L:i[,j]' or 'L:i[,j]xL2:k[,l]'."""
    parts = text.split("x")
    cubes = []
    for part in parts:
        lvl, _, pos = part.partition(":")
        cubes.append(Cube(int(lvl), tuple(int(t) for t in pos.split(",") if t != "")))
    if len(cubes) == 1:
        return cubes[0]
    if len(cubes) == 2:
        return Rect(cubes[0], cubes[1])
    raise ValueError(f"cannot parse cube {text!r}")


_KIND_RANK = {"scalar": 0, "real": 0, "vector": 1, "matrix": 2}


@dataclass(frozen=True)
class AtomField:
    """One value per finest cell.  kind: 'real', 'scalar', 'vector' or 'matrix'."""

    grid: Grid
    values: np.ndarray
    kind: str = "vector"

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise GridMismatch(f"unknown field kind {self.kind!r}")
        vals = np.asarray(self.values)
        gshape = self.grid.shape
        if vals.shape[: len(gshape)] != gshape:
            raise GridMismatch(f"values shape {vals.shape} does not match grid {gshape}")
        if vals.ndim != len(gshape) + _KIND_RANK[self.kind]:
            raise GridMismatch(f"values rank does not match kind {self.kind}")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        if self.kind in ("scalar", "real"):
            return 1
        return self.values.shape[-1]

    @property
    def vshape(self) -> tuple:
        return self.values.shape[len(self.grid.shape):]

    def to_json(self) -> dict:
        flat = self.values.reshape((-1,) + self.vshape)
        if self.kind == "real":
            atoms = [float(v) for v in flat]
        elif self.kind == "scalar":
            atoms = [[float(np.real(v)), float(np.imag(v))] for v in flat]
        elif self.kind == "vector":
            atoms = [[[float(z.real), float(z.imag)] for z in np.asarray(v, complex)] for v in flat]
        else:
            atoms = [matrix_to_json(v) for v in flat]
        return {"grid": self.grid.to_json(), "d": self.d, "kind": self.kind, "atoms": atoms}

    @classmethod
    def from_json(cls, obj: dict) -> "AtomField":
        grid = grid_from_json(obj["grid"])
        kind = obj.get("kind", "vector")
        atoms = obj["atoms"]
        if kind == "real":
            vals = np.asarray(atoms, dtype=float)
        elif kind == "scalar":
            arr = np.asarray(atoms, dtype=float)
            vals = arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 2 else arr.astype(complex)
        elif kind == "vector":
            arr = np.asarray(atoms, dtype=float)
            vals = arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 else arr.astype(complex)
        else:
            vals = np.stack([matrix_from_json(a) for a in atoms])
        vals = vals.reshape(grid.shape + vals.shape[1:])
        return cls(grid, vals, kind)
