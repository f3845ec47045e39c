"""Seeded corruption operators that degrade a wireframe in controlled ways.

Four families, each at three severities:

  * ``deform``  - split edges into jittered chains (geometry bends, topology
                  stays connected),
  * ``perturb`` - split junction vertices into displaced clones and divide
                  their incident edges among them,
  * ``add``     - wire up spurious edges between existing vertices,
  * ``remove``  - drop vertices together with their incident edges.

Every operator is a pure function of (input, spec): identical seeds give
byte-identical outputs.  A ``CorruptionLineage`` records, for every output
vertex, which input vertex it came from (or that it was inserted), which is
what downstream monotonicity checks and provenance audits consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Wireframe

KINDS = ("deform", "perturb", "add", "remove")
SEVERITIES = ("low", "medium", "high")

# Magnitude table; fractions are of the bbox diagonal (jitter/sigma), of the
# eligible-vertex count (select), of |E| (add) or |V| (remove).
_PARAMS = {
    "deform": {
        "low": {"splits": 2, "jitter_frac": 0.01, "edge_frac": 0.5},
        "medium": {"splits": 3, "jitter_frac": 0.03, "edge_frac": 0.5},
        "high": {"splits": 4, "jitter_frac": 0.06, "edge_frac": 0.5},
    },
    "perturb": {
        "low": {"select_frac": 0.2, "sigma_frac": 0.02},
        "medium": {"select_frac": 0.4, "sigma_frac": 0.05},
        "high": {"select_frac": 0.6, "sigma_frac": 0.10},
    },
    "add": {
        "low": {"rho": 0.10},
        "medium": {"rho": 0.25},
        "high": {"rho": 0.50},
    },
    "remove": {
        "low": {"rho": 0.10},
        "medium": {"rho": 0.25},
        "high": {"rho": 0.50},
    },
}


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str
    severity: str
    seed: int
    params: dict = field(default_factory=dict)


@dataclass
class CorruptionLineage:
    """Provenance of a corrupted wireframe.

    ``vertex_provenance`` maps every output vertex index to its source
    vertex index, or to the string "inserted".
    """

    source_id: str
    spec: CorruptionSpec
    vertex_provenance: dict
    flags: tuple[str, ...] = ()


def make_spec(kind: str, severity: str, seed: int) -> CorruptionSpec:
    if kind not in KINDS:
        raise ValueError(f"unknown corruption kind {kind!r}; known: {KINDS}")
    if severity not in SEVERITIES:
        raise ValueError(f"unknown severity {severity!r}; known: {SEVERITIES}")
    return CorruptionSpec(kind, severity, int(seed), dict(_PARAMS[kind][severity]))


def _identity(w: Wireframe, spec: CorruptionSpec, source_id: str, *flags: str):
    prov = {i: i for i in range(w.n_vertices)}
    return w, CorruptionLineage(source_id, spec, prov, flags)


def _clipped_normal(rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
    """Isotropic Gaussian offsets with norm clipped at 3 sigma."""
    off = rng.normal(0.0, sigma, size=(size, 3))
    norms = np.linalg.norm(off, axis=1, keepdims=True)
    bound = 3.0 * sigma
    return off * np.minimum(1.0, bound / np.maximum(norms, 1e-300))


def deform(w: Wireframe, spec: CorruptionSpec, source_id: str | None = None):
    """Replace a fraction of edges by chains of jittered sub-edges."""
    source_id = source_id or w.digest()
    if w.n_edges == 0:
        return _identity(w, spec, source_id, "empty-input")
    rng = np.random.default_rng(spec.seed)
    k = int(spec.params["splits"])
    sigma = spec.params["jitter_frac"] * w.bbox_diagonal() / 3.0
    n_sel = max(1, round(spec.params["edge_frac"] * w.n_edges))
    selected = sorted(rng.choice(w.n_edges, size=n_sel, replace=False).tolist())

    verts = [v for v in w.vertices]
    prov = {i: i for i in range(w.n_vertices)}
    edges: list[tuple[int, int]] = []
    sel_set = set(selected)
    for e, (i, j) in enumerate(w.edges):
        if e not in sel_set:
            edges.append((i, j))
            continue
        t = np.linspace(0.0, 1.0, k + 1)[1:-1]
        straight = w.vertices[i] + t[:, None] * (w.vertices[j] - w.vertices[i])
        jittered = straight + _clipped_normal(rng, sigma, len(t))
        chain = [i]
        for p in jittered:
            prov[len(verts)] = "inserted"
            chain.append(len(verts))
            verts.append(p)
        chain.append(j)
        edges.extend(zip(chain, chain[1:]))
    out = Wireframe(np.asarray(verts), edges)
    return out, CorruptionLineage(source_id, spec, prov)


def perturb(w: Wireframe, spec: CorruptionSpec, source_id: str | None = None):
    """Split junction vertices (degree >= 2) into displaced clones."""
    source_id = source_id or w.digest()
    degrees = w.degrees()
    eligible = [v for v in range(w.n_vertices) if degrees[v] >= 2]
    if not eligible:
        return _identity(w, spec, source_id, "no-eligible-vertices")
    rng = np.random.default_rng(spec.seed)
    sigma = spec.params["sigma_frac"] * w.bbox_diagonal()
    n_sel = max(1, round(spec.params["select_frac"] * len(eligible)))
    selected = sorted(rng.choice(len(eligible), size=n_sel, replace=False).tolist())
    selected = [eligible[s] for s in selected]
    sel_set = set(selected)

    verts: list[np.ndarray] = []
    prov: dict[int, object] = {}
    remap: dict[int, int] = {}
    for old in range(w.n_vertices):
        if old in sel_set:
            continue
        remap[old] = len(verts)
        prov[len(verts)] = old
        verts.append(w.vertices[old])

    # clone each selected vertex and deal its incident edges out
    incident = {v: [] for v in selected}
    for e, (i, j) in enumerate(w.edges):
        if i in sel_set:
            incident[i].append(e)
        if j in sel_set:
            incident[j].append(e)
    endpoint_clone: dict[tuple[int, int], int] = {}  # (edge id, old vertex) -> new idx
    for old in selected:
        deg = len(incident[old])
        n_clones = min(int(rng.integers(2, 4)), deg)
        offsets = _clipped_normal(rng, sigma, n_clones)
        clone_ids = []
        for c in range(n_clones):
            prov[len(verts)] = old
            clone_ids.append(len(verts))
            verts.append(w.vertices[old] + offsets[c])
        order = rng.permutation(len(incident[old]))
        for slot, pos in enumerate(order):
            e = incident[old][pos]
            clone = clone_ids[slot] if slot < n_clones else clone_ids[int(rng.integers(0, n_clones))]
            endpoint_clone[(e, old)] = clone

    edges = []
    for e, (i, j) in enumerate(w.edges):
        a = endpoint_clone[(e, i)] if i in sel_set else remap[i]
        b = endpoint_clone[(e, j)] if j in sel_set else remap[j]
        edges.append((a, b))
    out = Wireframe(np.asarray(verts), edges)
    return out, CorruptionLineage(source_id, spec, prov)


def add_edges(w: Wireframe, spec: CorruptionSpec, source_id: str | None = None):
    """Add spurious edges between existing, not-yet-connected vertex pairs."""
    source_id = source_id or w.digest()
    if w.n_vertices < 2:
        raise ValueError("add_edges needs at least 2 vertices")
    existing = set(w.edges)
    candidates = [
        (i, j)
        for i in range(w.n_vertices)
        for j in range(i + 1, w.n_vertices)
        if (i, j) not in existing
    ]
    if not candidates:
        return _identity(w, spec, source_id, "complete-graph")
    rng = np.random.default_rng(spec.seed)
    n_add = min(max(1, round(spec.params["rho"] * w.n_edges)), len(candidates))
    chosen = rng.choice(len(candidates), size=n_add, replace=False)
    new_edges = list(w.edges) + [candidates[c] for c in chosen]
    out = Wireframe(w.vertices, new_edges)
    prov = {i: i for i in range(w.n_vertices)}
    return out, CorruptionLineage(source_id, spec, prov)


def remove_vertices(w: Wireframe, spec: CorruptionSpec, source_id: str | None = None):
    """Delete vertices (and incident edges), keeping at least two vertices."""
    source_id = source_id or w.digest()
    n_del = min(max(1, round(spec.params["rho"] * w.n_vertices)), max(w.n_vertices - 2, 0))
    if n_del == 0:
        return _identity(w, spec, source_id, "nothing-removable")
    rng = np.random.default_rng(spec.seed)
    doomed = set(rng.choice(w.n_vertices, size=n_del, replace=False).tolist())
    remap: dict[int, int] = {}
    prov: dict[int, object] = {}
    verts = []
    for old in range(w.n_vertices):
        if old in doomed:
            continue
        remap[old] = len(verts)
        prov[len(verts)] = old
        verts.append(w.vertices[old])
    edges = [
        (remap[i], remap[j]) for i, j in w.edges if i not in doomed and j not in doomed
    ]
    out = Wireframe(np.asarray(verts).reshape(len(verts), 3), edges)
    return out, CorruptionLineage(source_id, spec, prov)


_OPERATORS = {
    "deform": deform,
    "perturb": perturb,
    "add": add_edges,
    "remove": remove_vertices,
}

CORRUPTION_KINDS = tuple(_OPERATORS)


def corrupt(w: Wireframe, spec: CorruptionSpec, source_id: str | None = None):
    """Apply the operator named by ``spec.kind``."""
    if spec.kind not in _OPERATORS:
        raise ValueError(f"unknown corruption kind {spec.kind!r}")
    return _OPERATORS[spec.kind](w, spec, source_id)
