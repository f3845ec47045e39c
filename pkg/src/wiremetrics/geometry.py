"""Wireframe geometry primitives: loading, validation, sampling, capsules.

A wireframe is a set of 3D vertices plus undirected straight edges between
vertex indices.  Everything downstream (metrics, corruption operators, the
property battery, the pairwise-comparison service) goes through the types
in this module.

Supported interchange formats:
  * native JSON: ``{"vertices": [[x, y, z], ...], "edges": [[i, j], ...]}``
    with 0-based indices,
  * an OBJ subset: ``v x y z`` and ``l i j [k ...]`` records with 1-based
    indices plus ``#`` comments.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class WireframeError(ValueError):
    """Base class for wireframe loading/validation problems."""


class WireframeParseError(WireframeError):
    """A wireframe file could not be parsed; message carries a line number."""


class WireframeValidationError(WireframeError):
    """Parsed data violates the wireframe contract (indices, finiteness, loops)."""


def _canonical_edges(edges, n_vertices: int) -> tuple[tuple[int, int], ...]:
    """Sort each pair (i < j), drop duplicates, order lexicographically."""
    canon = set()
    for k, pair in enumerate(edges):
        try:
            i, j = int(pair[0]), int(pair[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise WireframeValidationError(f"edge #{k} is not an index pair: {pair!r}") from exc
        if i == j:
            raise WireframeValidationError(f"edge #{k} is a self-loop at vertex {i}")
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            raise WireframeValidationError(
                f"edge #{k} ({i}, {j}) references a vertex outside 0..{n_vertices - 1}"
            )
        canon.add((i, j) if i < j else (j, i))
    return tuple(sorted(canon))


@dataclass(eq=False)
class Wireframe:
    """Immutable 3D wireframe.

    ``vertices`` is an (n, 3) float64 array in input order (order is
    significant for provenance and pre-registered matching); ``edges`` holds
    undirected index pairs canonicalized to i < j, deduplicated, sorted.
    Isolated vertices are allowed.
    """

    vertices: np.ndarray
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        if verts.size == 0:
            verts = verts.reshape(0, 3)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise WireframeValidationError(f"vertices must be (n, 3), got {verts.shape}")
        if not np.all(np.isfinite(verts)):
            bad = int(np.argwhere(~np.isfinite(verts).all(axis=1))[0][0])
            raise WireframeValidationError(f"vertex #{bad} has a non-finite coordinate")
        verts.setflags(write=False)
        self.vertices = verts
        self.edges = _canonical_edges(self.edges, len(verts))

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Wireframe):
            return NotImplemented
        return self.edges == other.edges and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.edges))

    # -- basic measures ---------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_lengths(self) -> np.ndarray:
        if not self.edges:
            return np.zeros(0)
        e = np.asarray(self.edges)
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    def total_edge_length(self) -> float:
        return float(self.edge_lengths().sum())

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_vertices == 0:
            z = np.zeros(3)
            return z, z
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def bbox_diagonal(self) -> float:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def translated(self, offset) -> "Wireframe":
        return Wireframe(self.vertices + np.asarray(offset, dtype=np.float64), self.edges)

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": [[float(c) for c in v] for v in self.vertices],
            "edges": [[int(i), int(j)] for i, j in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    def digest(self) -> str:
        """Translation-invariant content digest.

        Coordinates are taken relative to the bbox minimum and rounded to
        1e-6 m before hashing, so rigidly translated copies share a digest
        and argument-order-sensitive consumers (e.g. seeded Monte Carlo)
        can behave symmetrically.
        """
        if self.n_vertices:
            rel = np.round(self.vertices - self.vertices.min(axis=0), 6) + 0.0
        else:
            rel = np.zeros((0, 3))
        h = hashlib.blake2b(digest_size=16)
        h.update(rel.tobytes())
        h.update(json.dumps(self.edges).encode())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# parsing / saving
# ---------------------------------------------------------------------------


def parse_wireframe_json(text: str) -> Wireframe:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireframeParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise WireframeParseError("JSON wireframe must be an object with 'vertices' and 'edges'")
    return Wireframe(np.asarray(data["vertices"], dtype=np.float64), data["edges"])


def parse_obj_lines(text: str) -> Wireframe:
    """Parse the `v`/`l` OBJ subset (1-based indices, `#` comments)."""
    vertices: list[list[float]] = []
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]
        if kind == "v":
            if len(args) != 3:
                raise WireframeParseError(f"line {lineno}: 'v' needs exactly 3 coordinates")
            try:
                vertices.append([float(t) for t in args])
            except ValueError as exc:
                raise WireframeParseError(f"line {lineno}: bad coordinate in {raw!r}") from exc
        elif kind == "l":
            if len(args) < 2:
                raise WireframeParseError(f"line {lineno}: 'l' needs at least 2 indices")
            try:
                idx = [int(t) for t in args]
            except ValueError as exc:
                raise WireframeParseError(f"line {lineno}: bad index in {raw!r}") from exc
            for a, b in zip(idx, idx[1:]):
                for v in (a, b):
                    if v < 1 or v > len(vertices):
                        raise WireframeParseError(
                            f"line {lineno}: index {v} outside 1..{len(vertices)}"
                        )
                edges.append((a - 1, b - 1))
        else:
            raise WireframeParseError(f"line {lineno}: unsupported record {kind!r}")
    try:
        return Wireframe(np.asarray(vertices, dtype=np.float64).reshape(len(vertices), 3), edges)
    except WireframeValidationError as exc:
        raise WireframeParseError(str(exc)) from exc


def load_wireframe(path, fmt: str = "auto") -> Wireframe:
    """Load a wireframe from `path`; fmt is 'auto', 'json' or 'obj'."""
    path = Path(path)
    text = path.read_text()
    if fmt == "auto":
        if path.suffix.lower() == ".json":
            fmt = "json"
        elif path.suffix.lower() == ".obj":
            fmt = "obj"
        else:
            stripped = text.lstrip()
            fmt = "json" if stripped.startswith("{") else "obj"
    if fmt == "json":
        return parse_wireframe_json(text)
    if fmt == "obj":
        return parse_obj_lines(text)
    raise ValueError(f"unknown format {fmt!r}")


def save_wireframe(wireframe: Wireframe, path) -> None:
    """Write canonical JSON; load(save(w)) round-trips bit-identically."""
    Path(path).write_text(wireframe.to_json())


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


@dataclass
class PointSample:
    """Points sampled along wireframe edges.

    ``points`` is (m, 3); ``edge_index`` maps each point to the edge it was
    drawn from.  ``mode`` is 'deterministic' or 'random'.
    """

    points: np.ndarray
    edge_index: np.ndarray
    mode: str
    density: float | None = None
    count: int | None = None
    seed: int | None = None


def _ordered_endpoints(wireframe: Wireframe, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    # Geometric (lexicographic) order, so vertex renumbering cannot change
    # the generated points.
    p, q = wireframe.vertices[i], wireframe.vertices[j]
    if tuple(q) < tuple(p):
        p, q = q, p
    return p, q


def sample_edges(
    wireframe: Wireframe,
    density: float = 4.0,
    mode: str = "deterministic",
    seed: int = 0,
    count: int | None = None,
) -> PointSample:
    """Sample points along every edge.

    Deterministic mode places ``ceil(length * density) + 1`` evenly spaced
    points per edge, endpoints included.  Random mode draws points uniformly
    along the wireframe with per-edge allocation proportional to length; the
    total is ``count`` when given, else ``round(total_length * density)``.
    """
    if mode not in ("deterministic", "random"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    if density <= 0 and count is None:
        raise ValueError("density must be positive")
    if not wireframe.edges:
        return PointSample(np.zeros((0, 3)), np.zeros(0, dtype=int), mode, density, count, seed)

    lengths = wireframe.edge_lengths()
    pts: list[np.ndarray] = []
    idx: list[np.ndarray] = []

    if mode == "deterministic":
        for e, (i, j) in enumerate(wireframe.edges):
            p, q = _ordered_endpoints(wireframe, i, j)
            k = int(math.ceil(lengths[e] * density)) + 1 if lengths[e] > 0 else 1
            t = np.linspace(0.0, 1.0, k)
            pts.append(p + t[:, None] * (q - p))
            idx.append(np.full(k, e, dtype=int))
        return PointSample(np.vstack(pts), np.concatenate(idx), mode, density, None, None)

    total_len = float(lengths.sum())
    n_total = count if count is not None else max(1, round(total_len * density))
    rng = np.random.default_rng(seed)
    probs = lengths / total_len if total_len > 0 else np.full(len(lengths), 1.0 / len(lengths))
    chosen = rng.choice(len(wireframe.edges), size=n_total, p=probs)
    t = rng.uniform(size=n_total)
    for e in range(len(wireframe.edges)):
        mask = chosen == e
        if not mask.any():
            continue
        p, q = _ordered_endpoints(wireframe, *wireframe.edges[e])
        pts.append(p + t[mask, None] * (q - p))
        idx.append(np.full(int(mask.sum()), e, dtype=int))
    return PointSample(np.vstack(pts), np.concatenate(idx), mode, density, n_total, seed)


# ---------------------------------------------------------------------------
# segment / capsule geometry
# ---------------------------------------------------------------------------


def point_segment_distance(points, a, b):
    """Distance from point(s) to the closed segment [a, b].

    Accepts a single (3,) point or an (m, 3) batch; returns a scalar or an
    (m,) array correspondingly.
    """
    p = np.asarray(points, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = b - a
    denom = float(d @ d)
    if denom == 0.0:
        dist = np.linalg.norm(p - a, axis=1)
    else:
        t = np.clip((p - a) @ d / denom, 0.0, 1.0)
        dist = np.linalg.norm(p - (a + t[:, None] * d), axis=1)
    return float(dist[0]) if single else dist


def segment_hausdorff(a0, a1, b0, b1) -> float:
    """Exact Hausdorff distance between two closed 3D segments.

    Distance-to-a-segment is convex, so the directed maxima are attained at
    source endpoints; four point-to-segment distances are enough.
    """
    return float(
        max(
            point_segment_distance(a0, b0, b1),
            point_segment_distance(a1, b0, b1),
            point_segment_distance(b0, a0, a1),
            point_segment_distance(b1, a0, a1),
        )
    )


def point_in_capsule(points, a, b, radius: float):
    """Closed membership test: distance to the segment core <= radius."""
    d = point_segment_distance(points, a, b)
    if np.isscalar(d):
        return bool(d <= radius)
    return d <= radius


def capsule_volume(length: float, radius: float) -> float:
    """Cylinder plus two hemispherical caps."""
    return math.pi * radius * radius * length + 4.0 / 3.0 * math.pi * radius**3


def wireframe_rng(seed: int, wireframe: Wireframe) -> np.random.Generator:
    """RNG substream tied to a wireframe's translation-invariant digest.

    Identical geometry (up to rigid translation) gets an identical stream,
    which makes seeded Monte Carlo estimators symmetric in argument order
    and exactly self-consistent on identical inputs.
    """
    digest_int = int(wireframe.digest(), 16)
    return np.random.default_rng(np.random.SeedSequence([seed, digest_int]))
