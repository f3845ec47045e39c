/** Three.js scene objects for a wireframe pair viewport.
 *
 * Each viewport superimposes the candidate reconstruction on the ground
 * truth.  The ground truth always uses the fixed reference style (dim grey)
 * and the candidate a contrasting accent, so a perfect reconstruction reads
 * as a single two-tone overlay and a bad one visibly diverges.
 */
import * as THREE from "three";
import type { WireframeJson } from "./api.js";

export interface WireStyle {
  lineColor: number;
  lineOpacity: number;
  vertexColor: number;
  vertexSize: number;
}

export const GROUND_TRUTH_STYLE: WireStyle = {
  lineColor: 0x9aa0a6,
  lineOpacity: 0.8,
  vertexColor: 0xc6cace,
  vertexSize: 0.06,
};

export const CANDIDATE_STYLE: WireStyle = {
  lineColor: 0xff8c3a,
  lineOpacity: 0.95,
  vertexColor: 0xffb347,
  vertexSize: 0.08,
};

export const BACKGROUND_COLOR = 0x14161a;

/** LineSegments + vertex Points for one wireframe, in the given style. */
export function wireframeGroup(frame: WireframeJson, style: WireStyle): THREE.Group {
  const group = new THREE.Group();

  const segmentPositions = new Float32Array(frame.edges.length * 6);
  for (let k = 0; k < frame.edges.length; k++) {
    const edge = frame.edges[k];
    if (!edge) continue;
    const a = frame.vertices[edge[0]];
    const b = frame.vertices[edge[1]];
    if (!a || !b) {
      throw new Error(`edge ${k} references a missing vertex`);
    }
    segmentPositions.set(a, k * 6);
    segmentPositions.set(b, k * 6 + 3);
  }
  const lineGeometry = new THREE.BufferGeometry();
  lineGeometry.setAttribute("position", new THREE.BufferAttribute(segmentPositions, 3));
  const lineMaterial = new THREE.LineBasicMaterial({
    color: style.lineColor,
    transparent: style.lineOpacity < 1,
    opacity: style.lineOpacity,
  });
  group.add(new THREE.LineSegments(lineGeometry, lineMaterial));

  const vertexPositions = new Float32Array(frame.vertices.length * 3);
  for (let k = 0; k < frame.vertices.length; k++) {
    const v = frame.vertices[k];
    if (v) {
      vertexPositions.set(v, k * 3);
    }
  }
  const pointGeometry = new THREE.BufferGeometry();
  pointGeometry.setAttribute("position", new THREE.BufferAttribute(vertexPositions, 3));
  const pointMaterial = new THREE.PointsMaterial({
    color: style.vertexColor,
    size: style.vertexSize,
    sizeAttenuation: true,
  });
  group.add(new THREE.Points(pointGeometry, pointMaterial));

  return group;
}

export interface ViewportScene {
  scene: THREE.Scene;
  /** True when the candidate has no geometry at all (failed reconstruction). */
  candidateEmpty: boolean;
}

export function buildViewportScene(gt: WireframeJson, candidate: WireframeJson): ViewportScene {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(BACKGROUND_COLOR);
  scene.add(wireframeGroup(gt, GROUND_TRUTH_STYLE));
  const candidateEmpty = candidate.vertices.length === 0;
  if (!candidateEmpty) {
    scene.add(wireframeGroup(candidate, CANDIDATE_STYLE));
  }
  return { scene, candidateEmpty };
}

export interface SceneBounds {
  center: THREE.Vector3;
  radius: number;
}

/** Bounding sphere of the ground truth; candidates are pre-aligned to it. */
export function wireframeBounds(gt: WireframeJson): SceneBounds {
  if (gt.vertices.length === 0) {
    return { center: new THREE.Vector3(), radius: 1 };
  }
  const box = new THREE.Box3();
  const v = new THREE.Vector3();
  for (const vertex of gt.vertices) {
    box.expandByPoint(v.set(vertex[0], vertex[1], vertex[2]));
  }
  const center = new THREE.Vector3();
  box.getCenter(center);
  const size = new THREE.Vector3();
  box.getSize(size);
  return { center, radius: Math.max(size.length() / 2, 1) };
}
