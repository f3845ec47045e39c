/** Shared-pose camera rig for the dual viewports.
 *
 * There is exactly one master pose (orbit target + spherical offset + zoom);
 * every gesture mutates the master and is then broadcast to all registered
 * cameras.  Both viewports therefore always render from identical poses —
 * not merely similar ones: the same numbers flow through the same code path,
 * so serialized states compare bitwise equal.
 */
import * as THREE from "three";

export interface CameraPose {
  position: [number, number, number];
  quaternion: [number, number, number, number];
  target: [number, number, number];
  zoom: number;
}

export function cameraPose(camera: THREE.PerspectiveCamera, target: THREE.Vector3): CameraPose {
  return {
    position: [camera.position.x, camera.position.y, camera.position.z],
    quaternion: [camera.quaternion.x, camera.quaternion.y, camera.quaternion.z, camera.quaternion.w],
    target: [target.x, target.y, target.z],
    zoom: camera.zoom,
  };
}

const MIN_PHI = 0.05;
const MAX_PHI = Math.PI - 0.05;
const MIN_RADIUS = 0.05;
const MAX_RADIUS = 500;

export interface CameraRig {
  register(camera: THREE.PerspectiveCamera): void;
  /** Recenter on a subject: camera pulled back far enough to see a sphere. */
  setFrame(center: THREE.Vector3, radius: number): void;
  orbit(deltaAzimuth: number, deltaPolar: number): void;
  pan(deltaX: number, deltaY: number): void;
  dolly(factor: number): void;
  /** Adopt an externally-mutated camera (e.g. orbit controls) as the master pose. */
  adoptPose(camera: THREE.PerspectiveCamera, target: THREE.Vector3): void;
  target(): THREE.Vector3;
  poses(): CameraPose[];
  onSync(listener: () => void): () => void;
  readonly syncing: boolean;
}

export function createCameraRig(): CameraRig {
  const cameras: THREE.PerspectiveCamera[] = [];
  const center = new THREE.Vector3(0, 0, 0);
  const spherical = new THREE.Spherical(10, Math.PI / 3, Math.PI / 4);
  let zoom = 1;
  let syncing = false;
  const listeners: Array<() => void> = [];

  const scratch = new THREE.Vector3();

  function broadcast(): void {
    syncing = true;
    try {
      scratch.setFromSpherical(spherical);
      for (const camera of cameras) {
        camera.position.set(center.x + scratch.x, center.y + scratch.y, center.z + scratch.z);
        camera.up.set(0, 1, 0);
        camera.zoom = zoom;
        camera.lookAt(center);
        camera.updateProjectionMatrix();
      }
      for (const listener of listeners) {
        listener();
      }
    } finally {
      syncing = false;
    }
  }

  return {
    get syncing() {
      return syncing;
    },

    register(camera: THREE.PerspectiveCamera): void {
      cameras.push(camera);
      broadcast();
    },

    setFrame(subjectCenter: THREE.Vector3, radius: number): void {
      center.copy(subjectCenter);
      spherical.radius = Math.min(MAX_RADIUS, Math.max(MIN_RADIUS, radius * 2.8));
      spherical.theta = Math.PI / 4;
      spherical.phi = Math.PI / 3;
      zoom = 1;
      broadcast();
    },

    orbit(deltaAzimuth: number, deltaPolar: number): void {
      spherical.theta += deltaAzimuth;
      spherical.phi = Math.min(MAX_PHI, Math.max(MIN_PHI, spherical.phi + deltaPolar));
      broadcast();
    },

    pan(deltaX: number, deltaY: number): void {
      // move the target in the current view plane, scaled by distance so the
      // gesture feels constant regardless of zoom level
      const offset = scratch.setFromSpherical(spherical);
      const forward = offset.clone().negate().normalize();
      const right = forward.clone().cross(new THREE.Vector3(0, 1, 0)).normalize();
      const up = right.clone().cross(forward).normalize();
      const scale = spherical.radius * 0.002;
      center.addScaledVector(right, -deltaX * scale);
      center.addScaledVector(up, deltaY * scale);
      broadcast();
    },

    dolly(factor: number): void {
      spherical.radius = Math.min(MAX_RADIUS, Math.max(MIN_RADIUS, spherical.radius * factor));
      broadcast();
    },

    adoptPose(camera: THREE.PerspectiveCamera, target: THREE.Vector3): void {
      center.copy(target);
      scratch.copy(camera.position).sub(target);
      spherical.setFromVector3(scratch);
      spherical.phi = Math.min(MAX_PHI, Math.max(MIN_PHI, spherical.phi));
      zoom = camera.zoom;
      broadcast();
    },

    target(): THREE.Vector3 {
      return center.clone();
    },

    poses(): CameraPose[] {
      return cameras.map((camera) => cameraPose(camera, center));
    },

    onSync(listener: () => void): () => void {
      listeners.push(listener);
      return () => {
        const i = listeners.indexOf(listener);
        if (i >= 0) {
          listeners.splice(i, 1);
        }
      };
    },
  };
}
