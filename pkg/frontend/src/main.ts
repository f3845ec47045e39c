/** Browser entry point.
 *
 * Query parameters:
 *   rater  — opaque rater id (required; a small form asks for it if absent)
 *   api    — base URL of the annotation service (default: same origin)
 */
import * as THREE from "three";
import { createApiClient } from "./api.js";
import { createAnnotationApp } from "./app.js";

function mount(root: HTMLElement, rater: string, apiBase: string): void {
  const app = createAnnotationApp({
    root,
    api: createApiClient(apiBase),
    rater,
    createRenderer: (canvas) => {
      const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
      renderer.setPixelRatio(window.devicePixelRatio || 1);
      return renderer;
    },
    attachControls: true,
  });
  const loop = (): void => {
    app.draw();
    window.requestAnimationFrame(loop);
  };
  window.requestAnimationFrame(loop);
  void app.session.start();
}

function askForRater(root: HTMLElement): void {
  root.innerHTML = `
    <div class="overlay"><div class="modal">
      <h2>Who is rating?</h2>
      <p>Enter the rater id you were given.</p>
      <form data-role="rater-form">
        <input type="text" name="rater" autocomplete="off" autofocus />
        <button type="submit">Start</button>
      </form>
    </div></div>`;
  const form = root.querySelector<HTMLFormElement>('[data-role="rater-form"]');
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const value = new FormData(form).get("rater");
    if (typeof value === "string" && value.trim()) {
      const params = new URLSearchParams(window.location.search);
      params.set("rater", value.trim());
      window.location.search = params.toString();
    }
  });
}

const root = document.getElementById("app");
if (root) {
  const params = new URLSearchParams(window.location.search);
  const rater = params.get("rater");
  const apiBase = params.get("api") ?? "";
  if (rater) {
    mount(root, rater, apiBase);
  } else {
    askForRater(root);
  }
}
