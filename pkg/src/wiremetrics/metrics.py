"""Similarity metrics between a predicted wireframe and a reference wireframe.

Families:
  * corner / edge precision-recall-F1 under a match threshold,
  * chamfer-style assignment distances over sampled edge points,
  * symmetric Hausdorff over sampled edge points,
  * wireframe edit distance (vertex moves + vertex/edge insertions and
    deletions) under interchangeable vertex-matching strategies,
  * spectral distance between length-weighted graph Laplacians,
  * Jaccard distance of capsule-union volumes (Monte Carlo).

Every public metric is registered in ``METRICS`` and reachable through
``evaluate(name, pred, gt)`` which wraps the raw value in a ``MetricResult``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .geometry import (
    PointSample,
    Wireframe,
    capsule_volume,
    sample_edges,
    segment_hausdorff,
    wireframe_rng,
)

# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass
class MetricResult:
    """A metric evaluation: value plus orientation and the params that made it."""

    name: str
    value: float
    direction: str  # "lower" (dissimilarity) or "higher" (score)
    params: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()


@dataclass
class PrfReport:
    """Precision / recall / F1 of a one-to-one greedy matching."""

    precision: float
    recall: float
    f1: float
    mean_offset: float
    matched: int
    flags: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# corner / edge precision-recall
# ---------------------------------------------------------------------------


def _greedy_one_to_one(cost: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Greedily match rows to columns by increasing cost, one use each.

    Candidates above `threshold` are ignored.  Ties break on (cost, row,
    col) so the result is deterministic.
    """
    if cost.size == 0:
        return []
    rows, cols = np.nonzero(cost <= threshold)
    order = np.lexsort((cols, rows, cost[rows, cols]))
    row_used = np.zeros(cost.shape[0], dtype=bool)
    col_used = np.zeros(cost.shape[1], dtype=bool)
    pairs = []
    for k in order:
        r, c = rows[k], cols[k]
        if not row_used[r] and not col_used[c]:
            row_used[r] = col_used[c] = True
            pairs.append((int(r), int(c)))
    return pairs


def _prf_from_matches(n_pred: int, n_gt: int, offsets: list[float]) -> PrfReport:
    flags = []
    if n_pred == 0:
        flags.append("empty-prediction")
    if n_gt == 0:
        flags.append("empty-reference")
    m = len(offsets)
    precision = m / n_pred if n_pred else 0.0
    recall = m / n_gt if n_gt else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    mean_offset = float(np.mean(offsets)) if offsets else 0.0
    return PrfReport(precision, recall, f1, mean_offset, m, tuple(flags))


@functools.lru_cache(maxsize=4096)
def corner_prf(pred: Wireframe, gt: Wireframe, threshold: float = 0.1) -> PrfReport:
    """Vertex-level PRF: greedy one-to-one matching within `threshold` meters.

    Cached on the (value-hashed) inputs: precision, recall, F1 and offset are
    registered as four separate metrics that share this one matching.
    """
    if pred.n_vertices == 0 or gt.n_vertices == 0:
        return _prf_from_matches(pred.n_vertices, gt.n_vertices, [])
    diff = pred.vertices[:, None, :] - gt.vertices[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    pairs = _greedy_one_to_one(dist, threshold)
    return _prf_from_matches(
        pred.n_vertices, gt.n_vertices, [float(dist[r, c]) for r, c in pairs]
    )


def _edge_hausdorff_matrix(pred: Wireframe, gt: Wireframe) -> np.ndarray:
    """(n_pred_edges, n_gt_edges) matrix of exact segment Hausdorff distances."""
    pe = np.asarray(pred.edges)
    ge = np.asarray(gt.edges)
    pa, pb = pred.vertices[pe[:, 0]], pred.vertices[pe[:, 1]]
    ga, gb = gt.vertices[ge[:, 0]], gt.vertices[ge[:, 1]]

    def to_segments(points, a, b):
        # distance from each point (n,3) to each segment (m,3),(m,3) -> (n,m)
        d = b - a
        denom = np.einsum("md,md->m", d, d)
        diff = points[:, None, :] - a[None, :, :]
        t = np.einsum("nmd,md->nm", diff, d)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(denom > 0, t / denom, 0.0)
        t = np.clip(t, 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
        return np.linalg.norm(points[:, None, :] - closest, axis=2)

    d_pa = to_segments(pa, ga, gb)  # pred endpoints -> gt segments
    d_pb = to_segments(pb, ga, gb)
    d_ga = to_segments(ga, pa, pb).T  # gt endpoints -> pred segments
    d_gb = to_segments(gb, pa, pb).T
    return np.maximum(np.maximum(d_pa, d_pb), np.maximum(d_ga, d_gb))


@functools.lru_cache(maxsize=4096)
def edge_prf(pred: Wireframe, gt: Wireframe, threshold: float = 0.25) -> PrfReport:
    """Edge-level PRF: segments match when their Hausdorff distance <= threshold."""
    if pred.n_edges == 0 or gt.n_edges == 0:
        return _prf_from_matches(pred.n_edges, gt.n_edges, [])
    dist = _edge_hausdorff_matrix(pred, gt)
    pairs = _greedy_one_to_one(dist, threshold)
    return _prf_from_matches(pred.n_edges, gt.n_edges, [float(dist[r, c]) for r, c in pairs])


# ---------------------------------------------------------------------------
# chamfer family over point sets
# ---------------------------------------------------------------------------

_CHAMFER_MODES = ("nearest", "mutual", "optimal", "preregistered")


def _as_points(x) -> np.ndarray:
    if isinstance(x, PointSample):
        return x.points
    return np.atleast_2d(np.asarray(x, dtype=np.float64))


def _pairwise_minkowski(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return cdist(a, b)
    if p == 1.0:
        return cdist(a, b, "cityblock")
    if math.isinf(p):
        return cdist(a, b, "chebyshev")
    return cdist(a, b, "minkowski", p=p)


def chamfer(a, b, mode: str = "nearest", p: float = 2.0, symmetric: bool = True) -> float:
    """Mean assignment cost between two point sets.

    ``mode`` selects the assignment family: 'nearest' (each source point to
    its nearest target; optionally symmetrized), 'mutual' (mean over
    mutual-nearest pairs only), 'optimal' (bijective minimum-cost matching),
    'preregistered' (points paired by index).  ``p`` is the Minkowski norm
    order (p >= 1).
    """
    if mode not in _CHAMFER_MODES:
        raise ValueError(f"unknown chamfer mode {mode!r}")
    if p < 1:
        raise ValueError("norm order p must be >= 1")
    pa, pb = _as_points(a), _as_points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("chamfer requires non-empty point sets")
    if mode in ("optimal", "preregistered") and len(pa) != len(pb):
        raise ValueError(f"{mode} chamfer requires equal point counts ({len(pa)} vs {len(pb)})")

    if mode == "preregistered":
        diff = np.abs(pa - pb)
        if p == 2.0:
            per = np.sqrt((diff * diff).sum(axis=1))
        elif math.isinf(p):
            per = diff.max(axis=1)
        else:
            per = (diff**p).sum(axis=1) ** (1.0 / p)
        return float(per.mean())

    dist = _pairwise_minkowski(pa, pb, p)
    if mode == "nearest":
        fwd = dist.min(axis=1).mean()
        if not symmetric:
            return float(fwd)
        return float((fwd + dist.min(axis=0).mean()) / 2.0)
    if mode == "mutual":
        nn_ab = dist.argmin(axis=1)
        nn_ba = dist.argmin(axis=0)
        rows = np.arange(len(pa))
        mutual = nn_ba[nn_ab] == rows
        return float(dist[rows[mutual], nn_ab[mutual]].mean())
    rows, cols = linear_sum_assignment(dist)
    return float(dist[rows, cols].mean())


def _empty_penalty(pred: Wireframe, gt: Wireframe) -> tuple[float, tuple[str, ...]]:
    """Convention when either side has no edges: reference bbox diameter."""
    flags = []
    if pred.n_edges == 0:
        flags.append("empty-prediction")
    if gt.n_edges == 0:
        flags.append("empty-reference")
    value = gt.bbox_diagonal() if gt.n_edges else 0.0
    return value, ("empty-input-penalty", *flags)


@functools.lru_cache(maxsize=512)
def _deterministic_sample(w: Wireframe, density: float) -> PointSample:
    """Memoized deterministic edge sampling (hausdorff + chamfer share it)."""
    return sample_edges(w, density=density)


def edge_chamfer(
    pred: Wireframe,
    gt: Wireframe,
    density: float = 4.0,
    mode: str = "nearest",
    p: float = 2.0,
) -> float:
    """Chamfer distance over deterministic edge samples of both wireframes."""
    if pred.n_edges == 0 or gt.n_edges == 0:
        return _empty_penalty(pred, gt)[0]
    sa = _deterministic_sample(pred, density)
    sb = _deterministic_sample(gt, density)
    return chamfer(sa, sb, mode=mode, p=p, symmetric=True)


def hausdorff(pred: Wireframe, gt: Wireframe, density: float = 4.0) -> float:
    """Symmetric Hausdorff distance over deterministic edge samples."""
    if pred.n_edges == 0 or gt.n_edges == 0:
        return _empty_penalty(pred, gt)[0]
    pa = _deterministic_sample(pred, density).points
    pb = _deterministic_sample(gt, density).points
    dist = cdist(pa, pb)
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


# ---------------------------------------------------------------------------
# wireframe edit distance
# ---------------------------------------------------------------------------

_WED_VARIANTS = ("preregistered", "nearest", "mutual", "optimal")


def _match_vertices(pred: Wireframe, gt: Wireframe, variant: str) -> dict[int, int]:
    """Map pred vertex index -> gt vertex index under the chosen strategy.

    'nearest' is many-to-one; the other strategies are injective.
    """
    if pred.n_vertices == 0 or gt.n_vertices == 0:
        return {}
    dist = np.linalg.norm(pred.vertices[:, None, :] - gt.vertices[None, :, :], axis=2)
    if variant == "preregistered":
        # Stand-in for externally provided correspondences: the i-th input
        # vertex of one wireframe corresponds to the i-th of the other,
        # independent of geometry (and therefore brittle under re-indexing,
        # which is the point of carrying this variant).
        return {u: u for u in range(min(pred.n_vertices, gt.n_vertices))}
    if variant == "nearest":
        return {u: int(dist[u].argmin()) for u in range(pred.n_vertices)}
    if variant == "mutual":
        # Mutual-nearest pairs seed the matching, then it is completed to
        # full min(n, m) cardinality (nearest-unmatched, input order) so all
        # injective variants share identical insert/delete counts and the
        # optimal assignment lower-bounds them.
        nn_pg = dist.argmin(axis=1)
        nn_gp = dist.argmin(axis=0)
        mapping = {
            u: int(nn_pg[u]) for u in range(pred.n_vertices) if nn_gp[nn_pg[u]] == u
        }
        taken = np.zeros(gt.n_vertices, dtype=bool)
        taken[list(mapping.values())] = True
        for u in range(pred.n_vertices):
            if u in mapping:
                continue
            if taken.all():
                break
            row = np.where(taken, np.inf, dist[u])
            g = int(row.argmin())
            mapping[u] = g
            taken[g] = True
        return mapping
    rows, cols = linear_sum_assignment(dist)
    return {int(u): int(g) for u, g in zip(rows, cols)}


def wed(
    pred: Wireframe,
    gt: Wireframe,
    variant: str = "optimal",
    vertex_cost: float = 1.0,
    normalize: bool = True,
) -> float:
    """Wireframe edit distance.

    Cost model (shared by every variant; only the vertex matching differs):
    matched vertices pay their displacement, unmatched vertices pay
    ``vertex_cost`` each (deletion on the predicted side, insertion on the
    reference side), and every predicted edge that does not land on a
    distinct uncovered reference edge pays its length, as does every
    uncovered reference edge.  ``normalize`` divides by total reference
    edge length.
    """
    if variant not in _WED_VARIANTS:
        raise ValueError(f"unknown wed variant {variant!r}")
    if normalize and gt.total_edge_length() == 0.0:
        raise ValueError("cannot normalize: reference wireframe has no edge length")

    mapping = _match_vertices(pred, gt, variant)
    dist_moved = sum(
        float(np.linalg.norm(pred.vertices[u] - gt.vertices[g])) for u, g in mapping.items()
    )
    n_deleted = pred.n_vertices - len(mapping)
    n_inserted = gt.n_vertices - len(set(mapping.values()))

    gt_edge_set = set(gt.edges)
    covered: set[tuple[int, int]] = set()
    edge_cost = 0.0
    pred_lengths = pred.edge_lengths()
    for e, (u, v) in enumerate(pred.edges):
        image = None
        if u in mapping and v in mapping and mapping[u] != mapping[v]:
            gu, gv = mapping[u], mapping[v]
            image = (gu, gv) if gu < gv else (gv, gu)
        if image is not None and image in gt_edge_set and image not in covered:
            covered.add(image)
        else:
            edge_cost += float(pred_lengths[e])  # deleted predicted edge
    gt_lengths = gt.edge_lengths()
    for e, edge in enumerate(gt.edges):
        if edge not in covered:
            edge_cost += float(gt_lengths[e])  # inserted reference edge

    total = dist_moved + vertex_cost * (n_deleted + n_inserted) + edge_cost
    if normalize:
        total /= gt.total_edge_length()
    return float(total)


# ---------------------------------------------------------------------------
# spectral distance
# ---------------------------------------------------------------------------


def weighted_laplacian(wireframe: Wireframe) -> np.ndarray:
    """L = D - A with A[i, j] = Euclidean edge length, D the weighted degree."""
    n = wireframe.n_vertices
    adj = np.zeros((n, n))
    for (i, j), length in zip(wireframe.edges, wireframe.edge_lengths()):
        adj[i, j] = adj[j, i] = length
    return np.diag(adj.sum(axis=1)) - adj


@functools.lru_cache(maxsize=2048)
def _sorted_spectrum(w: Wireframe) -> np.ndarray:
    """Ascending Laplacian eigenvalues, memoized (the l1/l2 metrics share it)."""
    if w.n_vertices == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(weighted_laplacian(w))


def spectral_distance(a: Wireframe, b: Wireframe, p: float = 2.0) -> float:
    """p-Wasserstein distance between sorted Laplacian spectra.

    The shorter spectrum is zero-padded to the common size n and the value
    is ``(mean(|lambda_i - mu_i|^p))**(1/p)`` over ascending eigenvalues.
    """
    if p < 1:
        raise ValueError("norm order p must be >= 1")
    ev_a = _sorted_spectrum(a)
    ev_b = _sorted_spectrum(b)
    n = max(len(ev_a), len(ev_b))
    if n == 0:
        return 0.0
    pad_a = np.sort(np.concatenate([ev_a, np.zeros(n - len(ev_a))]))
    pad_b = np.sort(np.concatenate([ev_b, np.zeros(n - len(ev_b))]))
    return float((np.abs(pad_a - pad_b) ** p).mean() ** (1.0 / p))


# ---------------------------------------------------------------------------
# capsule-union Jaccard distance
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=512)
def _capsule_frames(w: Wireframe) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-edge (start, axis, length) with geometrically ordered endpoints."""
    e = np.asarray(w.edges)
    a = w.vertices[e[:, 0]].copy()
    b = w.vertices[e[:, 1]].copy()
    flip = np.array([tuple(q) < tuple(p) for p, q in zip(a, b)])
    a[flip], b[flip] = b[flip].copy(), a[flip].copy()
    axis = b - a
    length = np.linalg.norm(axis, axis=1)
    for arr in (a, axis, length):
        arr.setflags(write=False)
    return a, axis, length


def _capsule_sqdist(points: np.ndarray, starts, axes, lengths) -> np.ndarray:
    """(n_points, n_capsules) squared distances to each capsule core segment.

    Expressed through two (n, 3) @ (3, c) products so no (n, c, 3)
    intermediate is ever materialized; cancellation noise is ~1e-10 on the
    squared scale, irrelevant to radius-threshold tests.
    """
    denom = (axes * axes).sum(axis=1)
    s = points @ axes.T - (starts * axes).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0, s / denom, 0.0)
    np.clip(t, 0.0, 1.0, out=t)
    gap = (
        (points * points).sum(axis=1)[:, None]
        + (starts * starts).sum(axis=1)
        - 2.0 * (points @ starts.T)
    )
    sq = gap + t * (t * denom - 2.0 * s)
    return np.maximum(sq, 0.0, out=sq)


def _orthobasis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0])
    if abs(axis @ helper) > 0.9 * np.linalg.norm(axis):
        helper = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    e2 /= np.linalg.norm(e2)
    return e1, e2


@functools.lru_cache(maxsize=64)
def _jaccard_side(w: Wireframe, radius: float, n: int, seed: int):
    """Volume-weighted capsule draws with 1/multiplicity weights.

    Returns (points, weights, union_volume_estimate).  The union volume is
    ``sum(capsule volumes) * mean(weight)`` which is exact in expectation.
    """
    rng = wireframe_rng(seed, w)
    starts, axes, lengths = _capsule_frames(w)
    vols = np.array([capsule_volume(L, radius) for L in lengths])
    total_vol = float(vols.sum())
    counts = rng.multinomial(n, vols / total_vol)
    chunks = []
    for c, k in enumerate(counts):
        if k == 0:
            continue
        L = lengths[c]
        v_sph = 4.0 / 3.0 * math.pi * radius**3
        p_cyl = (vols[c] - v_sph) / vols[c]
        u = rng.uniform(size=k)
        in_cyl = u < p_cyl
        pts = np.empty((k, 3))
        d_unit = axes[c] / L if L > 0 else np.array([0.0, 0.0, 1.0])
        e1, e2 = _orthobasis(d_unit)
        n_cyl = int(in_cyl.sum())
        if n_cyl:
            t = rng.uniform(size=n_cyl)
            rad = radius * np.sqrt(rng.uniform(size=n_cyl))
            ang = rng.uniform(0, 2 * math.pi, size=n_cyl)
            offset = rad[:, None] * (np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2)
            pts[in_cyl] = starts[c] + t[:, None] * axes[c] + offset
        n_sph = k - n_cyl
        if n_sph:
            direction = rng.normal(size=(n_sph, 3))
            direction /= np.linalg.norm(direction, axis=1, keepdims=True)
            rr = radius * rng.uniform(size=n_sph) ** (1.0 / 3.0)
            ball = rr[:, None] * direction
            # points in the +axis half-ball attach to the far cap
            far = ball @ d_unit >= 0
            centers = np.where(far[:, None], starts[c] + axes[c], starts[c])
            pts[~in_cyl] = centers + ball
        chunks.append(pts)
    points = np.vstack(chunks)
    mult = (_capsule_sqdist(points, starts, axes, lengths) <= radius * radius).sum(axis=1)
    weights = 1.0 / np.maximum(mult, 1)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights, total_vol * float(weights.mean())


def _membership_rate(points, weights, other: Wireframe, radius: float) -> float:
    starts, axes, lengths = _capsule_frames(other)
    inside = (_capsule_sqdist(points, starts, axes, lengths) <= radius * radius).any(axis=1)
    return float((weights * inside).sum() / weights.sum())


def jaccard_distance(
    a: Wireframe,
    b: Wireframe,
    radius: float = 0.25,
    n_samples: int = 65536,
    seed: int = 0,
) -> float:
    """1 - IoU of capsule unions (radius around every edge), Monte Carlo.

    ``n_samples/2`` volume-weighted draws per side with multiplicity
    weights estimate each union volume and the cross-membership rates;
    the intersection volume averages the two cross estimates.  The RNG
    substream of each side is tied to its geometry digest, so the value is
    symmetric in argument order and exactly zero for identical inputs.
    """
    if a.n_edges == 0 and b.n_edges == 0:
        return 0.0
    if a.n_edges == 0 or b.n_edges == 0:
        return 1.0
    half = max(1, n_samples // 2)
    pa, wa, vol_a = _jaccard_side(a, radius, half, seed)
    pb, wb, vol_b = _jaccard_side(b, radius, half, seed)
    p_ab = _membership_rate(pa, wa, b, radius)
    p_ba = _membership_rate(pb, wb, a, radius)
    vol_inter = (vol_a * p_ab + vol_b * p_ba) / 2.0
    vol_union = vol_a + vol_b - vol_inter
    if vol_union <= 0:
        return 0.0
    iou = min(1.0, max(0.0, vol_inter / vol_union))
    return 1.0 - iou


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def _prf_value(field_name: str, prf_fn):
    def run(pred, gt, **kw):
        report = prf_fn(pred, gt, **kw)
        return getattr(report, field_name), report.flags

    return run


def _plain(fn):
    def run(pred, gt, **kw):
        return fn(pred, gt, **kw), ()

    return run


def _with_empty_flags(fn):
    def run(pred, gt, **kw):
        flags = ()
        if pred.n_edges == 0 or gt.n_edges == 0:
            flags = _empty_penalty(pred, gt)[1]
        return fn(pred, gt, **kw), flags

    return run


@dataclass(frozen=True)
class MetricSpec:
    fn: object
    direction: str
    defaults: dict


METRICS: dict[str, MetricSpec] = {
    "corner_precision": MetricSpec(_prf_value("precision", corner_prf), "higher", {"threshold": 0.1}),
    "corner_recall": MetricSpec(_prf_value("recall", corner_prf), "higher", {"threshold": 0.1}),
    "corner_f1": MetricSpec(_prf_value("f1", corner_prf), "higher", {"threshold": 0.1}),
    "corner_offset": MetricSpec(_prf_value("mean_offset", corner_prf), "lower", {"threshold": 0.1}),
    "edge_precision": MetricSpec(_prf_value("precision", edge_prf), "higher", {"threshold": 0.25}),
    "edge_recall": MetricSpec(_prf_value("recall", edge_prf), "higher", {"threshold": 0.25}),
    "edge_f1": MetricSpec(_prf_value("f1", edge_prf), "higher", {"threshold": 0.25}),
    "wed_prereg": MetricSpec(
        _plain(wed), "lower", {"variant": "preregistered", "vertex_cost": 1.0, "normalize": True}
    ),
    "wed_mnn": MetricSpec(
        _plain(wed), "lower", {"variant": "mutual", "vertex_cost": 1.0, "normalize": True}
    ),
    "wed_nearest": MetricSpec(
        _plain(wed), "lower", {"variant": "nearest", "vertex_cost": 1.0, "normalize": True}
    ),
    "wed_optimal": MetricSpec(
        _plain(wed), "lower", {"variant": "optimal", "vertex_cost": 1.0, "normalize": True}
    ),
    "spectral_l1": MetricSpec(_plain(spectral_distance), "lower", {"p": 1.0}),
    "spectral_l2": MetricSpec(_plain(spectral_distance), "lower", {"p": 2.0}),
    "jaccard": MetricSpec(
        _plain(jaccard_distance), "lower", {"radius": 0.25, "n_samples": 65536, "seed": 0}
    ),
    "hausdorff": MetricSpec(_with_empty_flags(hausdorff), "lower", {"density": 4.0}),
    "chamfer": MetricSpec(
        _with_empty_flags(edge_chamfer), "lower", {"density": 4.0, "mode": "nearest", "p": 2.0}
    ),
}

# Operation-level metrics usable as standalone judges (strictly sensitive to
# structural damage, unlike bare precision/recall/offset components).
JUDGE_METRICS = (
    "corner_f1",
    "edge_f1",
    "chamfer",
    "hausdorff",
    "wed_prereg",
    "wed_mnn",
    "wed_nearest",
    "wed_optimal",
    "spectral_l1",
    "spectral_l2",
    "jaccard",
)


def evaluate(name: str, pred: Wireframe, gt: Wireframe, **overrides) -> MetricResult:
    """Run a registered metric and wrap the outcome in a MetricResult."""
    if name not in METRICS:
        raise KeyError(f"unknown metric {name!r}; known: {sorted(METRICS)}")
    spec = METRICS[name]
    params = {**spec.defaults, **overrides}
    value, flags = spec.fn(pred, gt, **params)
    return MetricResult(name, float(value), spec.direction, params, flags)
