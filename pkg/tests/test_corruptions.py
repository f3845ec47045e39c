"""Corruption operators: severity tables, determinism, lineage, bounds."""

from __future__ import annotations

import numpy as np
import pytest

from wiremetrics.corruptions import (
    SEVERITIES,
    add_edges,
    corrupt,
    deform,
    make_spec,
    perturb,
    remove_vertices,
)
from wiremetrics.geometry import Wireframe, point_segment_distance

HOUSE = Wireframe(
    [
        [0, 0, 0], [6, 0, 0], [6, 8, 0], [0, 8, 0],
        [0, 0, 3], [6, 0, 3], [6, 8, 3], [0, 8, 3],
        [3, 0, 4.5], [3, 8, 4.5],
    ],
    [
        (0, 1), (1, 2), (2, 3), (3, 0),
        (4, 5), (5, 6), (6, 7), (7, 4),
        (0, 4), (1, 5), (2, 6), (3, 7),
        (4, 8), (5, 8), (6, 9), (7, 9), (8, 9),
    ],
)


def test_severity_parameters_are_monotone():
    for kind, key in (("add", "rho"), ("remove", "rho"), ("perturb", "sigma_frac")):
        vals = [make_spec(kind, s, 0).params[key] for s in SEVERITIES]
        assert vals[0] < vals[1] < vals[2]
    jit = [make_spec("deform", s, 0).params["jitter_frac"] for s in SEVERITIES]
    assert jit[0] < jit[1] < jit[2]


def test_make_spec_validates():
    with pytest.raises(ValueError, match="kind"):
        make_spec("melt", "low", 0)
    with pytest.raises(ValueError, match="severity"):
        make_spec("add", "extreme", 0)


@pytest.mark.parametrize("kind", ["deform", "perturb", "add", "remove"])
@pytest.mark.parametrize("severity", ["low", "medium", "high"])
def test_determinism_byte_identical(kind, severity):
    spec = make_spec(kind, severity, seed=123)
    w1, l1 = corrupt(HOUSE, spec)
    w2, l2 = corrupt(HOUSE, spec)
    assert w1 == w2
    assert w1.vertices.tobytes() == w2.vertices.tobytes()
    assert l1.vertex_provenance == l2.vertex_provenance
    w3, _ = corrupt(HOUSE, make_spec(kind, severity, seed=124))
    assert w1 != w3 or kind == "remove"  # remove can only differ in choice of victims


def test_provenance_covers_every_output_vertex():
    for kind in ("deform", "perturb", "add", "remove"):
        out, lin = corrupt(HOUSE, make_spec(kind, "medium", 7))
        assert set(lin.vertex_provenance) == set(range(out.n_vertices))


# ---------------------------------------------------------------------------
# deform
# ---------------------------------------------------------------------------


def test_deform_single_edge_low_severity():
    w = Wireframe([[0, 0, 0], [4, 0, 0]], [(0, 1)])
    out, lin = deform(w, make_spec("deform", "low", 1))
    assert out.n_edges == 2  # chain of 2 sub-edges
    assert out.n_vertices == 3
    inserted = [i for i, src in lin.vertex_provenance.items() if src == "inserted"]
    assert len(inserted) == 1
    # the split point deviates from the straight edge by at most 1% of the diagonal
    dev = point_segment_distance(out.vertices[inserted[0]], [0, 0, 0], [4, 0, 0])
    assert dev <= 0.01 * 4.0 + 1e-12


def test_deform_retains_original_vertices_exactly():
    out, lin = deform(HOUSE, make_spec("deform", "high", 3))
    for new, src in lin.vertex_provenance.items():
        if src != "inserted":
            assert (out.vertices[new] == HOUSE.vertices[src]).all()
    assert out.n_vertices > HOUSE.n_vertices


def test_deform_splits_half_the_edges():
    out, _ = deform(HOUSE, make_spec("deform", "medium", 5))
    n_sel = round(0.5 * HOUSE.n_edges)
    # each selected edge of k splits adds k-1 vertices and k-1 edges
    assert out.n_vertices == HOUSE.n_vertices + n_sel * 2
    assert out.n_edges == HOUSE.n_edges + n_sel * 2


def test_deform_empty_input_flagged_identity():
    w = Wireframe(np.zeros((0, 3)), [])
    out, lin = deform(w, make_spec("deform", "low", 0))
    assert out == w and "empty-input" in lin.flags


# ---------------------------------------------------------------------------
# perturb
# ---------------------------------------------------------------------------


def test_perturb_partitions_incident_edges():
    # degree-4 hub: clones' degrees must sum to 4 and each clone gets >= 1
    star = Wireframe(
        [[0, 0, 0], [2, 0, 0], [-2, 0, 0], [0, 2, 0], [0, -2, 0]],
        [(0, 1), (0, 2), (0, 3), (0, 4)],
    )
    out, lin = perturb(star, make_spec("perturb", "high", 11))
    clones = [i for i, src in lin.vertex_provenance.items() if src == 0]
    assert 2 <= len(clones) <= 3
    degs = out.degrees()
    assert sum(degs[c] for c in clones) == 4
    assert all(degs[c] >= 1 for c in clones)
    assert out.n_edges == star.n_edges


def test_perturb_never_selects_leaves():
    # center has degree 4, every leaf degree 1 -> only the center is eligible
    star = Wireframe(
        [[0, 0, 0], [2, 0, 0], [-2, 0, 0], [0, 2, 0], [0, -2, 0]],
        [(0, 1), (0, 2), (0, 3), (0, 4)],
    )
    for seed in range(10):
        _, lin = perturb(star, make_spec("perturb", "high", seed))
        sources = [src for src in lin.vertex_provenance.values() if src != "inserted"]
        clone_sources = [s for s in sources if sources.count(s) > 1]
        assert set(clone_sources) == {0}


def test_perturb_offsets_bounded_by_three_sigma():
    spec = make_spec("perturb", "high", 13)
    out, lin = perturb(HOUSE, spec)
    bound = 3 * spec.params["sigma_frac"] * HOUSE.bbox_diagonal() + 1e-9
    prov_counts = {}
    for src in lin.vertex_provenance.values():
        prov_counts[src] = prov_counts.get(src, 0) + 1
    for new, src in lin.vertex_provenance.items():
        if prov_counts[src] > 1:  # clone of a split vertex
            assert np.linalg.norm(out.vertices[new] - HOUSE.vertices[src]) <= bound


def test_perturb_without_junctions_flagged_identity():
    chainless = Wireframe([[0, 0, 0], [1, 0, 0]], [(0, 1)])
    out, lin = perturb(chainless, make_spec("perturb", "low", 0))
    assert out == chainless and "no-eligible-vertices" in lin.flags


# ---------------------------------------------------------------------------
# add
# ---------------------------------------------------------------------------


def test_add_edges_strict_superset_and_count():
    spec = make_spec("add", "low", 17)
    out, _ = add_edges(HOUSE, spec)
    assert set(HOUSE.edges) < set(out.edges)
    assert out.n_edges == HOUSE.n_edges + round(0.10 * HOUSE.n_edges)
    assert out.n_vertices == HOUSE.n_vertices


def test_add_edges_never_duplicates():
    out, _ = add_edges(HOUSE, make_spec("add", "high", 19))
    assert len(set(out.edges)) == out.n_edges


def test_add_edges_complete_graph_flagged():
    tri = Wireframe([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [(0, 1), (0, 2), (1, 2)])
    out, lin = add_edges(tri, make_spec("add", "low", 0))
    assert out == tri and "complete-graph" in lin.flags


def test_add_edges_needs_two_vertices():
    with pytest.raises(ValueError):
        add_edges(Wireframe([[0, 0, 0]], []), make_spec("add", "low", 0))


# ---------------------------------------------------------------------------
# remove
# ---------------------------------------------------------------------------


def test_remove_vertices_counts_and_reindexing():
    spec = make_spec("remove", "low", 23)
    out, lin = remove_vertices(HOUSE, spec)
    assert out.n_vertices == HOUSE.n_vertices - 1  # round(0.1 * 10) = 1
    for i, j in out.edges:
        assert 0 <= i < out.n_vertices and 0 <= j < out.n_vertices
    # edges map injectively into input edges through provenance
    mapped = {
        tuple(sorted((lin.vertex_provenance[i], lin.vertex_provenance[j])))
        for i, j in out.edges
    }
    assert len(mapped) == out.n_edges
    assert mapped <= set(HOUSE.edges)


def test_remove_vertices_keeps_at_least_two():
    pair = Wireframe([[0, 0, 0], [1, 0, 0]], [(0, 1)])
    out, lin = remove_vertices(pair, make_spec("remove", "high", 0))
    assert out == pair and "nothing-removable" in lin.flags
    tri = Wireframe([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [(0, 1)])
    out2, _ = remove_vertices(tri, make_spec("remove", "high", 1))
    assert out2.n_vertices == 2


def test_remove_vertices_is_induced_subgraph():
    out, lin = remove_vertices(HOUSE, make_spec("remove", "medium", 29))
    kept = {src for src in lin.vertex_provenance.values()}
    expected = {
        (i, j) for i, j in HOUSE.edges if i in kept and j in kept
    }
    mapped = {
        tuple(sorted((lin.vertex_provenance[i], lin.vertex_provenance[j])))
        for i, j in out.edges
    }
    assert mapped == expected
