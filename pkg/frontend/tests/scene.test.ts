import { describe, expect, it } from "vitest";
import * as THREE from "three";
import type { WireframeJson } from "../src/api.js";
import {
  BACKGROUND_COLOR,
  CANDIDATE_STYLE,
  GROUND_TRUTH_STYLE,
  buildViewportScene,
  wireframeBounds,
  wireframeGroup,
} from "../src/scene.js";

const HOUSE: WireframeJson = {
  vertices: [
    [0, 0, 0],
    [4, 0, 0],
    [4, 0, 3],
    [0, 0, 3],
    [2, 2.5, 1.5],
  ],
  edges: [
    [0, 1],
    [1, 2],
    [2, 3],
    [0, 3],
    [0, 4],
    [1, 4],
    [2, 4],
    [3, 4],
  ],
};

const EMPTY: WireframeJson = { vertices: [], edges: [] };

function lineSegments(group: THREE.Group): THREE.LineSegments {
  const obj = group.children.find((c) => c instanceof THREE.LineSegments);
  expect(obj).toBeDefined();
  return obj as THREE.LineSegments;
}

function points(group: THREE.Group): THREE.Points {
  const obj = group.children.find((c) => c instanceof THREE.Points);
  expect(obj).toBeDefined();
  return obj as THREE.Points;
}

describe("wireframe scene objects", () => {
  it("lays out one segment per edge with endpoint coordinates from the vertex table", () => {
    const group = wireframeGroup(HOUSE, GROUND_TRUTH_STYLE);
    const positions = lineSegments(group).geometry.getAttribute("position");
    expect(positions.count).toBe(HOUSE.edges.length * 2);
    // spot-check the roof edge 3-4: [0,0,3] -> [2,2.5,1.5]
    const k = 7;
    expect([positions.getX(2 * k), positions.getY(2 * k), positions.getZ(2 * k)]).toEqual([0, 0, 3]);
    expect([positions.getX(2 * k + 1), positions.getY(2 * k + 1), positions.getZ(2 * k + 1)]).toEqual([
      2, 2.5, 1.5,
    ]);
  });

  it("draws every vertex as a point", () => {
    const group = wireframeGroup(HOUSE, CANDIDATE_STYLE);
    const positions = points(group).geometry.getAttribute("position");
    expect(positions.count).toBe(HOUSE.vertices.length);
  });

  it("rejects an edge that references a missing vertex", () => {
    const broken: WireframeJson = { vertices: [[0, 0, 0]], edges: [[0, 5]] };
    expect(() => wireframeGroup(broken, GROUND_TRUTH_STYLE)).toThrow(/missing vertex/);
  });

  it("styles ground truth and candidate distinctly", () => {
    expect(GROUND_TRUTH_STYLE.lineColor).not.toBe(CANDIDATE_STYLE.lineColor);
    const gt = lineSegments(wireframeGroup(HOUSE, GROUND_TRUTH_STYLE));
    const cand = lineSegments(wireframeGroup(HOUSE, CANDIDATE_STYLE));
    const gtColor = (gt.material as THREE.LineBasicMaterial).color.getHex();
    const candColor = (cand.material as THREE.LineBasicMaterial).color.getHex();
    expect(gtColor).toBe(GROUND_TRUTH_STYLE.lineColor);
    expect(candColor).toBe(CANDIDATE_STYLE.lineColor);
  });

  it("superimposes candidate on ground truth in one scene", () => {
    const { scene, candidateEmpty } = buildViewportScene(HOUSE, HOUSE);
    expect(candidateEmpty).toBe(false);
    expect(scene.children).toHaveLength(2);
    expect((scene.background as THREE.Color).getHex()).toBe(BACKGROUND_COLOR);
  });

  it("flags an empty candidate and renders ground truth only", () => {
    const { scene, candidateEmpty } = buildViewportScene(HOUSE, EMPTY);
    expect(candidateEmpty).toBe(true);
    expect(scene.children).toHaveLength(1);
  });

  it("computes bounds that cover the model", () => {
    const { center, radius } = wireframeBounds(HOUSE);
    expect(center.toArray()).toEqual([2, 1.25, 1.5]);
    for (const v of HOUSE.vertices) {
      expect(center.distanceTo(new THREE.Vector3(...v))).toBeLessThanOrEqual(radius + 1e-12);
    }
  });

  it("falls back to unit bounds for an empty model", () => {
    const { center, radius } = wireframeBounds(EMPTY);
    expect(center.toArray()).toEqual([0, 0, 0]);
    expect(radius).toBe(1);
  });
});
