"""Box geometry on the d-dimensional integer lattice and bond-configuration sampling.

Vertices of the radius-n box are the points of [-n, n]^d, indexed in row-major
order over coordinates (axis 0 most significant). Bonds are the nearest-neighbour
pairs with both endpoints inside the box (free boundary), ordered lexicographically
by (lower endpoint index, axis). The ordering is total, deterministic and stable
across runs; the filtration used by the exact module depends on it.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_CELL_BUDGET = 2**27  # max addressable vertices or bonds
DEFAULT_ENUM_CAP = 24        # max bonds for exhaustive configuration sweeps


class SizeOverflowError(ValueError):
    """Vertex or bond count exceeds the configured memory budget."""


class EnumerationCapError(ValueError):
    """Exhaustive configuration sweep requested on a box with too many bonds."""


@dataclass(frozen=True)
class Bond:
    """A lattice bond: endpoint vertex indices (v1 < v2) and the axis joining them."""

    v1: int
    v2: int
    axis: int


@dataclass(frozen=True)
class BoxSpec:
    """Geometry of the radius-n box in d dimensions.

    Derived index tables are built lazily and cached; two specs compare equal
    iff they have the same (d, n).
    """

    d: int
    n: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.n < 1:
            raise ValueError(f"box radius must be >= 1, got {self.n}")

    @property
    def side(self) -> int:
        return 2 * self.n + 1

    @cached_property
    def vertex_count(self) -> int:
        return self.side**self.d

    @cached_property
    def bond_count(self) -> int:
        return 2 * self.d * self.n * self.side ** (self.d - 1)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        # row-major strides of the vertex indexing, axis 0 most significant
        return tuple(self.side ** (self.d - 1 - a) for a in range(self.d))

    def vertex_index(self, coords) -> int:
        if len(coords) != self.d:
            raise ValueError(f"expected {self.d} coordinates, got {len(coords)}")
        idx = 0
        for c, s in zip(coords, self.strides):
            if not -self.n <= c <= self.n:
                raise ValueError(f"coordinate {c} outside [-{self.n}, {self.n}]")
            idx += (c + self.n) * s
        return idx

    def vertex_coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.vertex_count:
            raise ValueError(f"vertex index {index} out of range")
        return tuple((index // s) % self.side - self.n for s in self.strides)

    @cached_property
    def origin_index(self) -> int:
        return self.vertex_index((0,) * self.d)

    # -- bond tables, canonical order = lexicographic (v1 index, axis) --------

    @cached_property
    def _bond_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        d, side, V = self.d, self.side, self.vertex_count
        strides = np.asarray(self.strides, dtype=np.int64)
        idx = np.arange(V, dtype=np.int64)
        valid = np.empty((V, d), dtype=bool)
        for a in range(d):
            valid[:, a] = (idx // strides[a]) % side < side - 1
        flat = valid.ravel()  # vertex-major, axis-minor: exactly the canonical order
        v1 = np.repeat(idx, d)[flat]
        axis = np.tile(np.arange(d, dtype=np.int8), V)[flat]
        v2 = v1 + strides[axis]
        return v1, v2, axis

    @property
    def bond_v1(self) -> np.ndarray:
        return self._bond_table[0]

    @property
    def bond_v2(self) -> np.ndarray:
        return self._bond_table[1]

    @property
    def bond_axis(self) -> np.ndarray:
        return self._bond_table[2]

    @cached_property
    def _bond_lookup(self) -> np.ndarray:
        # (vertex, axis) -> bond index, -1 where no bond leaves in + direction
        lut = np.full((self.vertex_count, self.d), -1, dtype=np.int64)
        v1, _, axis = self._bond_table
        lut[v1, axis] = np.arange(v1.size, dtype=np.int64)
        return lut

    def bond(self, index: int) -> Bond:
        if not 0 <= index < self.bond_count:
            raise ValueError(f"bond index {index} out of range")
        return Bond(int(self.bond_v1[index]), int(self.bond_v2[index]), int(self.bond_axis[index]))

    def bond_index(self, v1: int, axis: int) -> int:
        i = int(self._bond_lookup[v1, axis])
        if i < 0:
            raise ValueError(f"no bond leaves vertex {v1} along axis {axis}")
        return i

    def origin_bond(self, axis: int = 0) -> int:
        """Index of the bond from the origin one unit along `axis`."""
        return self.bond_index(self.origin_index, axis)

    # -- subdivided-grid embedding (used by the cluster labeller) -------------

    @cached_property
    def grid_shape(self) -> tuple[int, ...]:
        return (2 * self.side - 1,) * self.d

    @cached_property
    def grid_cell_count(self) -> int:
        return (2 * self.side - 1) ** self.d

    @cached_property
    def _grid_strides(self) -> np.ndarray:
        g = 2 * self.side - 1
        return np.asarray([g ** (self.d - 1 - a) for a in range(self.d)], dtype=np.int64)

    @cached_property
    def vertex_cells(self) -> np.ndarray:
        """Flat grid-cell index of every vertex (all-even cell coordinates)."""
        idx = np.arange(self.vertex_count, dtype=np.int64)
        strides = np.asarray(self.strides, dtype=np.int64)
        cells = np.zeros(self.vertex_count, dtype=np.int64)
        for a in range(self.d):
            cells += 2 * ((idx // strides[a]) % self.side) * self._grid_strides[a]
        return cells

    @cached_property
    def bond_cells(self) -> np.ndarray:
        """Flat grid-cell index of every bond (odd on its axis, between endpoints)."""
        return self.vertex_cells[self.bond_v1] + self._grid_strides[self.bond_axis]

    def chebyshev_from(self, center: int) -> np.ndarray:
        """Chebyshev (sup-norm) distance of every vertex from `center`."""
        idx = np.arange(self.vertex_count, dtype=np.int64)
        c0 = self.vertex_coords(center)
        dist = np.zeros(self.vertex_count, dtype=np.int64)
        for a, s in enumerate(self.strides):
            coord = (idx // s) % self.side - self.n
            np.maximum(dist, np.abs(coord - c0[a]), out=dist)
        return dist


def build_box(d: int, n: int, cell_budget: int = DEFAULT_CELL_BUDGET) -> BoxSpec:
    """Build the box geometry, failing fast if it would not fit in memory.

    Index tables are materialised eagerly so later per-configuration work never
    pays construction cost.
    """
    if not isinstance(d, int) or not isinstance(n, int):
        raise TypeError("d and n must be integers")
    side = 2 * n + 1
    vertices = side**d if d >= 1 and n >= 1 else 0
    bonds = 2 * d * n * side ** (d - 1) if d >= 1 and n >= 1 else 0
    spec = BoxSpec(d, n)  # validates d, n
    if max(vertices, bonds) > cell_budget:
        raise SizeOverflowError(
            f"box d={d} n={n} has {vertices} vertices / {bonds} bonds, "
            f"over the budget of {cell_budget}"
        )
    spec._bond_table  # noqa: B018 -- force eager construction
    spec.vertex_cells
    spec.bond_cells
    return spec


@dataclass(frozen=True)
class ReplicateStream:
    """Pure random-stream handle: the bond draws of replicate `replicate_index`
    are a function of (master_seed, replicate_index) only, so replicates can be
    computed in any order on any number of workers without changing a bit."""

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.replicate_index < 0:
            raise ValueError("replicate_index must be >= 0")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.replicate_index,))
        return np.random.Generator(np.random.PCG64(ss))


def child_seed(master_seed: int, label: int) -> int:
    """Derive an independent 64-bit seed for a labelled sub-experiment."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(0x5EED, label))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class BondConfig:
    """One open/closed assignment over the bonds of a box, canonical bond order.

    `open_bonds[i]` is True iff bond i is open; open is the state drawn with
    probability p.
    """

    spec: BoxSpec
    open_bonds: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.open_bonds = np.asarray(self.open_bonds, dtype=bool)
        if self.open_bonds.shape != (self.spec.bond_count,):
            raise ValueError(
                f"expected {self.spec.bond_count} bond states, got {self.open_bonds.shape}"
            )

    @classmethod
    def all_closed(cls, spec: BoxSpec) -> "BondConfig":
        return cls(spec, np.zeros(spec.bond_count, dtype=bool))

    @classmethod
    def all_open(cls, spec: BoxSpec) -> "BondConfig":
        return cls(spec, np.ones(spec.bond_count, dtype=bool))

    @classmethod
    def from_bits(cls, spec: BoxSpec, bits: int) -> "BondConfig":
        """Configuration number `bits` in canonical binary order (bond i = bit i)."""
        states = (bits >> np.arange(spec.bond_count, dtype=np.uint64)) & 1
        return cls(spec, states.astype(bool))

    def with_bond(self, index: int, is_open: bool) -> "BondConfig":
        states = self.open_bonds.copy()
        states[index] = is_open
        return BondConfig(self.spec, states)

    def open_count(self) -> int:
        return int(self.open_bonds.sum())


def sample_config(spec: BoxSpec, p: float, stream: ReplicateStream) -> BondConfig:
    """Draw a configuration with each bond independently open with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = stream.generator()
    return BondConfig(spec, rng.random(spec.bond_count) < p)


def enumerate_configs(spec: BoxSpec, cap: int = DEFAULT_ENUM_CAP):
    """Yield all 2^k configurations exactly once, in canonical binary order.

    Bond i is read from bit i of the configuration number (bit 0 = bond 0).
    """
    k = spec.bond_count
    if k > cap:
        raise EnumerationCapError(
            f"box has {k} bonds, over the enumeration cap of {cap}"
        )
    for bits in range(1 << k):
        yield BondConfig.from_bits(spec, bits)
