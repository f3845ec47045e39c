/** DOM assembly: two synchronized viewports, choice buttons, break modal,
 * toast, and completion screen, all driven off the session state machine.
 *
 * The renderer is injectable so the full app can run headless (tests pass a
 * stub; the browser entry point passes a WebGL renderer factory).  Orbit
 * controls are attached only when requested — gestures always funnel through
 * the shared camera rig, which is what keeps the two viewports in lockstep.
 */
import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { ApiClient, Choice, PairPayload } from "./api.js";
import { createCameraRig, type CameraRig } from "./camera.js";
import { buildViewportScene, wireframeBounds } from "./scene.js";
import { createAnnotationSession, type AnnotationSession, type SessionView } from "./session.js";

export interface RendererLike {
  domElement: HTMLCanvasElement;
  setSize(width: number, height: number, updateStyle?: boolean): void;
  setPixelRatio(ratio: number): void;
  render(scene: THREE.Scene, camera: THREE.Camera): void;
  dispose(): void;
}

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  rater: string;
  createRenderer: (canvas: HTMLCanvasElement) => RendererLike;
  /** Wire up pointer-driven orbit controls (browser only). */
  attachControls?: boolean;
}

export interface Viewport {
  canvas: HTMLCanvasElement;
  renderer: RendererLike;
  camera: THREE.PerspectiveCamera;
  scene: THREE.Scene | null;
  notice: HTMLElement;
}

export interface AnnotationApp {
  element: HTMLElement;
  session: AnnotationSession;
  rig: CameraRig;
  viewports: [Viewport, Viewport];
  draw(): void;
  dispose(): void;
}

const TEMPLATE = `
<header class="topbar">
  <span class="brand">wireframe pair rating</span>
  <span class="house" data-role="house"></span>
  <span class="tally" data-role="tally"></span>
</header>
<main class="viewports">
  <section class="viewport" data-side="left">
    <canvas></canvas>
    <div class="empty-notice" data-role="empty-left" hidden>
      Incomplete reconstruction &mdash; this side produced no geometry.
    </div>
    <footer class="side-label">left</footer>
  </section>
  <section class="viewport" data-side="right">
    <canvas></canvas>
    <div class="empty-notice" data-role="empty-right" hidden>
      Incomplete reconstruction &mdash; this side produced no geometry.
    </div>
    <footer class="side-label">right</footer>
  </section>
</main>
<nav class="choices">
  <button type="button" data-choice="left">&#9664; left is closer</button>
  <button type="button" data-choice="equal">too close to call</button>
  <button type="button" data-choice="right">right is closer &#9654;</button>
</nav>
<p class="hint">
  keys: &#8592; left &middot; &#8594; right &middot; E equal &mdash;
  grey = reference model, orange = reconstruction
</p>
<div class="toast" data-role="toast" hidden></div>
<div class="overlay" data-role="loading"><div class="modal"><p>Loading&hellip;</p></div></div>
<div class="overlay" data-role="break" hidden>
  <div class="modal">
    <h2>Take a short break</h2>
    <p>You have rated quite a few pairs in a row. Stretch, rest your eyes,
       and continue when you are ready.</p>
    <button type="button" data-role="break-continue">Continue rating</button>
  </div>
</div>
<div class="overlay" data-role="done" hidden>
  <div class="modal">
    <h2>Session complete</h2>
    <p data-role="done-stats"></p>
  </div>
</div>
<div class="overlay" data-role="error" hidden>
  <div class="modal"><h2>Something went wrong</h2><p data-role="error-message"></p></div>
</div>
`;

function roleElement(root: HTMLElement, role: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(`[data-role="${role}"]`);
  if (!el) {
    throw new Error(`template is missing role ${role}`);
  }
  return el;
}

export function createAnnotationApp(options: AppOptions): AnnotationApp {
  const { root, api, rater, createRenderer, attachControls = false } = options;
  root.classList.add("annotator");
  root.innerHTML = TEMPLATE;

  const houseLabel = roleElement(root, "house");
  const tallyLabel = roleElement(root, "tally");
  const toast = roleElement(root, "toast");
  const loadingOverlay = roleElement(root, "loading");
  const breakOverlay = roleElement(root, "break");
  const doneOverlay = roleElement(root, "done");
  const doneStats = roleElement(root, "done-stats");
  const errorOverlay = roleElement(root, "error");
  const errorMessage = roleElement(root, "error-message");
  const buttons = Array.from(root.querySelectorAll<HTMLButtonElement>("button[data-choice]"));

  const rig = createCameraRig();
  const session = createAnnotationSession(api, rater);

  const viewports = (["left", "right"] as const).map((side) => {
    const section = root.querySelector<HTMLElement>(`.viewport[data-side="${side}"]`);
    const canvas = section?.querySelector("canvas");
    if (!section || !canvas) {
      throw new Error(`template is missing the ${side} viewport`);
    }
    const renderer = createRenderer(canvas);
    const camera = new THREE.PerspectiveCamera(40, 4 / 3, 0.01, 2000);
    rig.register(camera);
    return {
      canvas,
      renderer,
      camera,
      scene: null,
      notice: roleElement(root, `empty-${side}`),
    } as Viewport;
  }) as [Viewport, Viewport];

  const disposers: Array<() => void> = [];

  function draw(): void {
    for (const viewport of viewports) {
      if (viewport.scene) {
        viewport.renderer.render(viewport.scene, viewport.camera);
      }
    }
  }

  disposers.push(rig.onSync(draw));

  function resize(): void {
    for (const viewport of viewports) {
      const host = viewport.canvas.parentElement;
      const width = host?.clientWidth || 640;
      const height = host?.clientHeight || 480;
      viewport.renderer.setSize(width, height, false);
      viewport.camera.aspect = width / Math.max(height, 1);
      viewport.camera.updateProjectionMatrix();
    }
    draw();
  }

  if (attachControls) {
    for (const viewport of viewports) {
      const controls = new OrbitControls(viewport.camera, viewport.canvas);
      controls.target.copy(rig.target());
      controls.addEventListener("change", () => {
        if (!rig.syncing) {
          rig.adoptPose(viewport.camera, controls.target);
        }
      });
      disposers.push(rig.onSync(() => controls.target.copy(rig.target())));
      disposers.push(() => controls.dispose());
    }
    const doc = root.ownerDocument;
    const win = doc.defaultView;
    if (win) {
      win.addEventListener("resize", resize);
      disposers.push(() => win.removeEventListener("resize", resize));
    }
  }

  let shownToken: string | null = null;
  let initialServed: number | null = null;

  function showPair(pair: PairPayload): void {
    if (pair.pair_token === shownToken) {
      return;
    }
    shownToken = pair.pair_token;
    houseLabel.textContent = pair.house_id;
    const sides: [PairPayload["left"], PairPayload["right"]] = [pair.left, pair.right];
    viewports.forEach((viewport, i) => {
      const frame = sides[i];
      if (!frame) return;
      const { scene, candidateEmpty } = buildViewportScene(pair.gt, frame);
      viewport.scene = scene;
      viewport.notice.hidden = !candidateEmpty;
    });
    const bounds = wireframeBounds(pair.gt);
    rig.setFrame(bounds.center, bounds.radius);
    draw();
  }

  function render(view: SessionView): void {
    if (view.progress && initialServed === null) {
      initialServed = view.progress.served;
    }
    loadingOverlay.hidden = view.phase !== "loading" && view.phase !== "idle";
    breakOverlay.hidden = view.phase !== "break";
    doneOverlay.hidden = view.phase !== "done";
    errorOverlay.hidden = view.phase !== "error";

    if (view.progress) {
      tallyLabel.textContent = `${(initialServed ?? 0) + view.answered} / ${view.progress.total}`;
    }
    toast.hidden = view.toast === null;
    toast.textContent = view.toast ?? "";

    for (const button of buttons) {
      button.disabled = view.phase !== "pair" || view.submitting;
    }

    if (view.phase === "pair" && view.pair) {
      showPair(view.pair);
    } else if (view.phase === "done" && view.progress) {
      const p = view.progress;
      let text = `You answered ${p.served} of ${p.total} planned pairs.`;
      if (p.consistency_rate !== null && Number.isFinite(p.consistency_rate)) {
        text += ` Self-agreement on re-shown pairs: ${(p.consistency_rate * 100).toFixed(1)}%.`;
      }
      doneStats.textContent = text;
    } else if (view.phase === "error") {
      errorMessage.textContent = view.error ?? "unknown error";
    }
  }

  disposers.push(session.subscribe(render));

  for (const button of buttons) {
    button.addEventListener("click", () => {
      void session.choose(button.dataset["choice"] as Choice);
    });
  }
  roleElement(root, "break-continue").addEventListener("click", () => {
    session.acknowledgeBreak();
  });

  function onKey(event: KeyboardEvent): void {
    const phase = session.view().phase;
    if (phase === "break" && event.key === "Enter") {
      session.acknowledgeBreak();
      return;
    }
    if (phase !== "pair") {
      return;
    }
    if (event.key === "ArrowLeft") {
      void session.choose("left");
    } else if (event.key === "ArrowRight") {
      void session.choose("right");
    } else if (event.key === "e" || event.key === "E") {
      void session.choose("equal");
    }
  }
  root.ownerDocument.addEventListener("keydown", onKey);
  disposers.push(() => root.ownerDocument.removeEventListener("keydown", onKey));

  resize();
  render(session.view());

  return {
    element: root,
    session,
    rig,
    viewports,
    draw,
    dispose(): void {
      for (const dispose of disposers.splice(0)) {
        dispose();
      }
      for (const viewport of viewports) {
        viewport.renderer.dispose();
      }
    },
  };
}
