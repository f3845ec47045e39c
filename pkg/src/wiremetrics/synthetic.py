"""Seeded synthetic house wireframes for batteries, demos, and fixtures.

Each house is a gabled or hipped main block plus a smaller gabled annex,
optionally a porch frame and a chimney loop, randomly rotated about z and
translated.  Dimensions are drawn so that every instance keeps:

  * >= 20 vertices and >= 30 edges (enough eligible material for ten
    cumulative perturbation steps in any battery test),
  * minimum edge length around 0.8 m and vertex separation >= ~0.8 m,
  * a bounding-box diagonal inside [8, 22] m, so meter-scale thresholds stay
    meaningful and diagonal-relative offsets (e.g. 1%) stay below them.
"""

from __future__ import annotations

import numpy as np

from .geometry import Wireframe


def _box_with_roof(rng, width, length, wall, ridge_h, hipped):
    """Vertices/edges of a rectangular block with a gable or hip roof."""
    w, l, h = width, length, wall
    verts = [
        (0, 0, 0), (w, 0, 0), (w, l, 0), (0, l, 0),
        (0, 0, h), (w, 0, h), (w, l, h), (0, l, h),
    ]
    edges = [
        (0, 1), (1, 2), (2, 3), (3, 0),       # sill
        (4, 5), (5, 6), (6, 7), (7, 4),       # eaves
        (0, 4), (1, 5), (2, 6), (3, 7),       # studs
    ]
    inset = rng.uniform(1.2, min(2.5, length / 4)) if hipped else 0.0
    r0 = (w / 2, inset, h + ridge_h)
    r1 = (w / 2, l - inset, h + ridge_h)
    verts += [r0, r1]
    edges += [(8, 9), (8, 4), (8, 5), (9, 6), (9, 7)]
    return verts, edges


def _append(verts, edges, new_verts, new_edges):
    base = len(verts)
    verts.extend(new_verts)
    edges.extend((i + base, j + base) for i, j in new_edges)


def generate_house(seed: int) -> Wireframe:
    rng = np.random.default_rng(seed)
    width = rng.uniform(5.5, 8.5)
    length = rng.uniform(7.0, 11.5)
    wall = rng.uniform(2.5, 4.0)
    ridge_h = rng.uniform(1.2, 2.2)
    hipped = rng.uniform() < 0.4

    verts, edges = _box_with_roof(rng, width, length, wall, ridge_h, hipped)

    # annex: smaller gabled block butted against the east wall
    aw = rng.uniform(2.5, 4.0)
    al = rng.uniform(3.0, min(5.0, length - 2.5))
    ah = rng.uniform(2.2, wall - 0.2)
    ar = rng.uniform(0.8, 1.5)
    y0 = rng.uniform(1.0, length - al - 1.0)
    a_verts, a_edges = _box_with_roof(rng, aw, al, ah, ar, hipped=False)
    a_verts = [(x + width, y + y0, z) for x, y, z in a_verts]
    _append(verts, edges, a_verts, a_edges)

    if rng.uniform() < 0.5:  # porch frame on the south face
        x1 = rng.uniform(0.8, width / 2 - 0.8)
        x2 = x1 + rng.uniform(1.6, width / 2)
        depth = rng.uniform(1.2, 2.0)
        hp = rng.uniform(2.2, min(2.8, wall))
        p_verts = [
            (x1, -depth, 0), (x2, -depth, 0), (x1, -depth, hp), (x2, -depth, hp)
        ]
        p_edges = [(0, 2), (1, 3), (2, 3)]
        _append(verts, edges, p_verts, p_edges)

    if rng.uniform() < 0.4:  # chimney loop poking through the west slope
        side = rng.uniform(0.8, 1.2)
        cx = rng.uniform(0.8, width / 2 - side - 0.2)
        cy = rng.uniform(2.0, length - 2.0 - side)
        zb = wall + ridge_h * (cx + side / 2) / (width / 2)
        zt = zb + rng.uniform(1.0, 1.6)
        c_verts = [
            (cx, cy, zb), (cx + side, cy, zb), (cx + side, cy + side, zb), (cx, cy + side, zb),
            (cx, cy, zt), (cx + side, cy, zt), (cx + side, cy + side, zt), (cx, cy + side, zt),
        ]
        c_edges = [(0, 4), (1, 5), (2, 6), (3, 7), (4, 5), (5, 6), (6, 7), (7, 4)]
        _append(verts, edges, c_verts, c_edges)

    pts = np.asarray(verts, dtype=np.float64)
    theta = rng.uniform(0, 2 * np.pi)
    rot = np.array(
        [[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]]
    )
    pts = pts @ rot.T + rng.uniform(-5, 5, size=3) * np.array([1, 1, 0])
    return Wireframe(pts, edges)


def generate_corpus(n: int = 128, seed: int = 0) -> list[Wireframe]:
    """n independent houses; house i uses a child seed derived from (seed, i)."""
    root = np.random.SeedSequence(seed)
    return [generate_house(child) for child in root.generate_state(n)]
