"""Bond-event detectors and their Monte Carlo scans.

Events probed for a bond b with endpoints v1, v2:

* no_bypass   -- v1 and v2 are NOT joined by an open path avoiding b inside the
                 box ("the bond has no open bypass").
* is_pivotal  -- flipping b alone changes whether v1 and v2 are connected.
                 Equivalent to no_bypass on every configuration; implemented
                 independently (flip + search) so the two detectors cross-check
                 each other.
* two_arm     -- two vertex-disjoint open paths, one from v1 and one from v2,
                 each reaching the Chebyshev sphere of radius m-1 around v1,
                 neither using b.

Scans estimate event probabilities for the bond at the origin over growing box
radii; results are deterministic in (master_seed, replicate_index) regardless
of worker count.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import clusters
from .lattice import Bond, BondConfig, BoxSpec, ReplicateStream, build_box, child_seed, sample_config
from .parallel import run_replicate_chunks
from .stats import EstimateSummary, mean_summary


class GeometryError(ValueError):
    """The requested arm box does not fit inside the configuration's box."""


def _bond_of(spec: BoxSpec, bond) -> tuple[int, Bond]:
    if isinstance(bond, Bond):
        return spec.bond_index(bond.v1, bond.axis), bond
    index = int(bond)
    return index, spec.bond(index)


def no_bypass(config: BondConfig, bond) -> bool:
    """True iff the bond's endpoints are not joined by open bonds other than it.

    The bond's own state is never read.
    """
    bid, b = _bond_of(config.spec, bond)
    labels, _ = clusters.open_vertex_labels(config, exclude=bid)
    return bool(labels[b.v1] != labels[b.v2])


def is_pivotal(config: BondConfig, bond) -> bool:
    """True iff flipping the bond alone changes its endpoints' connectivity."""
    bid, b = _bond_of(config.spec, bond)
    opened = clusters.connected_in_subgraph(config.with_bond(bid, True), b.v1, b.v2)
    closed = clusters.connected_in_subgraph(config.with_bond(bid, False), b.v1, b.v2)
    return opened != closed


def _arm_flow(spec, open_bonds, excluded_bond, v1, v2, arm_mask, sphere_mask) -> bool:
    """Unit-capacity flow check for two vertex-disjoint open arms.

    Vertices are split into in/out nodes of capacity one; a super-source feeds
    v1 and v2, every sphere vertex drains to the sink. Flow value 2 is then
    exactly a pair of vertex-disjoint open paths with the two sources on
    distinct paths (Menger). Paths are confined to the arm box.
    """
    strides = spec.strides
    side = spec.side
    lut = spec._bond_lookup
    d = spec.d

    def open_step(u, w, axis):
        i = int(lut[min(u, w), axis])
        return i >= 0 and i != excluded_bond and bool(open_bonds[i])

    def vertex_nbrs(u):
        for a in range(d):
            ca = (u // strides[a]) % side
            if ca + 1 < side:
                w = u + strides[a]
                if arm_mask[w] and open_step(u, w, a):
                    yield w
            if ca >= 1:
                w = u - strides[a]
                if arm_mask[w] and open_step(w, u, a):
                    yield w

    SRC, SNK = "S", "T"

    def cap(a, b):
        if a == SRC:
            return 1 if b in ((v1, 0), (v2, 0)) else 0
        if b == SNK:
            return 1 if a[1] == 1 and sphere_mask[a[0]] else 0
        if b == SRC or a == SNK:
            return 0
        if a[1] == 0:  # in-node: unit capacity through the vertex only
            return 1 if b == (a[0], 1) else 0
        return 1 if b[1] == 0 and b[0] != a[0] else 0  # out -> neighbouring in

    flow: dict[tuple, int] = {}

    def residual(a, b):
        return cap(a, b) - flow.get((a, b), 0) + flow.get((b, a), 0)

    def candidates(node):
        if node == SRC:
            yield (v1, 0)
            yield (v2, 0)
            return
        v, io = node
        if io == 0:
            yield (v, 1)
            yield SRC
            for w in vertex_nbrs(v):
                yield (w, 1)
        else:
            for w in vertex_nbrs(v):
                yield (w, 0)
            yield (v, 0)
            if sphere_mask[v]:
                yield SNK

    def augment():
        parent = {SRC: None}
        queue = deque([SRC])
        while queue:
            a = queue.popleft()
            for b in candidates(a):
                if b not in parent and residual(a, b) > 0:
                    parent[b] = a
                    if b == SNK:
                        x = b
                        while parent[x] is not None:
                            flow[(parent[x], x)] = flow.get((parent[x], x), 0) + 1
                            x = parent[x]
                        return True
                    queue.append(b)
        return False

    return augment() and augment()


def two_arm(config: BondConfig, bond, radius: int) -> bool:
    """Two vertex-disjoint open arms from the bond's endpoints to the sphere of
    radius `radius - 1` around v1, neither arm using the bond itself.

    Any path leaving the arm box crosses its boundary sphere first, so arms are
    searched inside the arm box without loss. radius == 1 degenerates (the
    sphere is v1 itself, which both arms would share) and returns False.
    """
    spec = config.spec
    bid, b = _bond_of(spec, bond)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    center = spec.vertex_coords(b.v1)
    if any(abs(c) + radius - 1 > spec.n for c in center):
        raise GeometryError(
            f"arm box of radius {radius - 1} around vertex {b.v1} leaves the box"
        )
    if radius == 1:
        return False
    labels, _ = clusters.open_vertex_labels(config, exclude=bid)
    cheb = spec.chebyshev_from(b.v1)
    sphere_mask = cheb == radius - 1
    sphere_labels = labels[sphere_mask]
    lab1, lab2 = labels[b.v1], labels[b.v2]
    if lab1 != lab2:
        # different clusters: arms can never collide, each just has to get there
        return bool(np.any(sphere_labels == lab1) and np.any(sphere_labels == lab2))
    if not np.any(sphere_labels == lab1):
        return False
    arm_mask = cheb <= radius - 1
    return _arm_flow(spec, config.open_bonds, bid, b.v1, b.v2, arm_mask, sphere_mask)


@dataclass(frozen=True)
class RadiusEstimate:
    """One scan row: probability estimate for the origin bond at a box radius."""

    radius: int
    summary: EstimateSummary


def _no_bypass_chunk(d: int, m: int, p: float, seed: int, start: int, stop: int) -> np.ndarray:
    # buffered inner loop: this is the hot path of the kappa-prime pipeline
    spec = build_box(d, m)
    bid = spec.origin_bond(0)
    b = spec.bond(bid)
    template = np.zeros(spec.grid_cell_count, dtype=np.uint8)
    template[spec.vertex_cells] = 1
    keep = np.arange(spec.bond_count) != bid
    bond_cells = spec.bond_cells[keep]
    structure = clusters._structure(d)
    labels = np.empty(spec.grid_shape, dtype=np.int32)
    labels_flat = labels.reshape(-1)
    c1 = spec.vertex_cells[b.v1]
    c2 = spec.vertex_cells[b.v2]
    out = np.empty(stop - start, dtype=np.uint8)
    for r in range(start, stop):
        rng = ReplicateStream(seed, r).generator()
        draw = rng.random(spec.bond_count) < p
        grid = template.copy()
        grid[bond_cells[draw[keep]]] = 1
        ndimage.label(grid.reshape(spec.grid_shape), structure=structure, output=labels)
        out[r - start] = labels_flat[c1] != labels_flat[c2]
    return out


def _two_arm_chunk(d: int, m: int, p: float, seed: int, start: int, stop: int) -> np.ndarray:
    spec = build_box(d, m)
    bid = spec.origin_bond(0)
    out = np.empty(stop - start, dtype=np.uint8)
    for r in range(start, stop):
        config = sample_config(spec, p, ReplicateStream(seed, r))
        out[r - start] = two_arm(config, bid, m)
    return out


def no_bypass_estimate(d: int, radius: int, p: float, replicates: int,
                       master_seed: int, workers: int = 1) -> EstimateSummary:
    """Estimate P(no bypass for the origin bond) in the box of the given radius."""
    seed = child_seed(master_seed, radius)
    hits = run_replicate_chunks(_no_bypass_chunk, (d, radius, p, seed), replicates, workers)
    return mean_summary(hits, seed)


def scan_no_bypass(d: int, p: float, radii, replicates, master_seed: int,
                   workers: int = 1) -> list[RadiusEstimate]:
    """No-bypass probability of the origin bond over growing box radii.

    The events are nested (a bypass in a small box is one in any larger box), so
    the point estimates decrease in the radius up to sampling noise and squeeze
    down on the infinite-lattice probability. `replicates` may be a single count
    or one count per radius.
    """
    radii = [int(m) for m in radii]
    if sorted(radii) != radii or len(set(radii)) != len(radii):
        raise ValueError("radii must be strictly increasing")
    counts = [int(replicates)] * len(radii) if np.isscalar(replicates) else [int(r) for r in replicates]
    if len(counts) != len(radii):
        raise ValueError("one replicate count per radius required")
    return [
        RadiusEstimate(m, no_bypass_estimate(d, m, p, r, master_seed, workers))
        for m, r in zip(radii, counts)
    ]


def scan_two_arm(d: int, p: float, radii, replicates, master_seed: int,
                 workers: int = 1) -> list[RadiusEstimate]:
    """Two-arm probability of the origin bond, one box of radius m per entry."""
    radii = [int(m) for m in radii]
    counts = [int(replicates)] * len(radii) if np.isscalar(replicates) else [int(r) for r in replicates]
    if len(counts) != len(radii):
        raise ValueError("one replicate count per radius required")
    rows = []
    for m, r in zip(radii, counts):
        seed = child_seed(master_seed, m)
        hits = run_replicate_chunks(_two_arm_chunk, (d, m, p, seed), r, workers)
        rows.append(RadiusEstimate(m, mean_summary(hits, seed)))
    return rows
