import numpy as np
import pytest

from percolab.clusters import (
    UnionFind,
    connected_in_subgraph,
    count_clusters,
    count_clusters_reference,
)
from percolab.lattice import BondConfig, ReplicateStream, build_box, sample_config


def canonical(labels: np.ndarray) -> np.ndarray:
    """Relabel components in order of first appearance for comparisons."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels.tolist()):
        out[i] = mapping.setdefault(lab, len(mapping))
    return out


def test_all_closed_all_open():
    spec = build_box(2, 1)
    assert count_clusters(BondConfig.all_closed(spec)).count == 9
    assert count_clusters(BondConfig.all_open(spec)).count == 1


def test_single_bond_on_line():
    spec = build_box(1, 1)
    bid = spec.bond_index(spec.vertex_index((-1,)), 0)  # bond (-1, 0)
    cfg = BondConfig.all_closed(spec).with_bond(bid, True)
    labeling = count_clusters(cfg)
    assert labeling.count == 2
    assert sorted(labeling.sizes.tolist()) == [1, 2]


def test_d1_closed_form():
    # on a path graph the count is always (2n+1) - (open bonds)
    spec = build_box(1, 8)
    for r in range(40):
        cfg = sample_config(spec, 0.45, ReplicateStream(11, r))
        assert count_clusters(cfg).count == spec.vertex_count - cfg.open_count()


@pytest.mark.parametrize("d,n,p", [(1, 4, 0.5), (2, 2, 0.4), (2, 3, 0.6), (3, 1, 0.3), (3, 2, 0.7)])
def test_grid_matches_union_find(d, n, p):
    spec = build_box(d, n)
    for r in range(12):
        cfg = sample_config(spec, p, ReplicateStream(2024, r))
        got = count_clusters(cfg)
        ref = count_clusters_reference(cfg)
        assert got.count == ref.count
        assert np.array_equal(canonical(got.component_id), canonical(ref.component_id))
        assert got.sizes.sum() == spec.vertex_count
        # sizes agree once both labelings are put in first-appearance order
        order_got = canonical(got.component_id)
        sizes_got = np.bincount(order_got)
        order_ref = canonical(ref.component_id)
        sizes_ref = np.bincount(order_ref)
        assert np.array_equal(sizes_got, sizes_ref)


def test_labels_match_connectivity():
    spec = build_box(2, 2)
    cfg = sample_config(spec, 0.5, ReplicateStream(5, 0))
    labeling = count_clusters(cfg)
    rng = np.random.default_rng(0)
    for _ in range(30):
        u, v = rng.integers(0, spec.vertex_count, size=2)
        same = labeling.component_id[u] == labeling.component_id[v]
        assert same == connected_in_subgraph(cfg, int(u), int(v))


def test_union_find_merge_invariant():
    uf = UnionFind(6)
    assert uf.union(0, 1)
    assert not uf.union(1, 0)
    assert uf.union(2, 3)
    assert uf.union(0, 2)
    assert uf.count == 6 - uf.merges == 3
    assert uf.size[uf.find(3)] == 4


def test_connected_in_subgraph_trivial():
    spec = build_box(2, 1)
    assert connected_in_subgraph(BondConfig.all_open(spec), 0, spec.vertex_count - 1)
    assert not connected_in_subgraph(BondConfig.all_closed(spec), 0, 1)
    assert connected_in_subgraph(BondConfig.all_closed(spec), 4, 4)


def test_connected_in_subgraph_excluded_bond():
    # on a path graph there is no alternative route around an excluded bond
    spec = build_box(1, 2)
    cfg = BondConfig.all_open(spec)
    u, v = spec.vertex_index((0,)), spec.vertex_index((1,))
    bid = spec.bond_index(u, 0)
    assert connected_in_subgraph(cfg, u, v)
    assert not connected_in_subgraph(cfg, u, v, excluded=(bid,))


def test_component_ids_deterministic():
    spec = build_box(2, 3)
    cfg = sample_config(spec, 0.5, ReplicateStream(9, 3))
    a = count_clusters(cfg)
    b = count_clusters(cfg)
    assert a.count == b.count
    assert np.array_equal(a.component_id, b.component_id)
    assert np.array_equal(a.sizes, b.sizes)
