// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";
import type { ApiClient, Choice, DonePayload, PairPayload, WireframeJson } from "../src/api.js";
import { TokenRejectedError } from "../src/api.js";
import { createAnnotationApp, type RendererLike } from "../src/app.js";

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
  ],
};

const EMPTY: WireframeJson = { vertices: [], edges: [] };

function pair(token: string, overrides: Partial<PairPayload> = {}): PairPayload {
  return {
    done: false,
    pair_token: token,
    house_id: `house-${token}`,
    left: HOUSE,
    right: HOUSE,
    gt: HOUSE,
    break_advisory: false,
    ...overrides,
  };
}

const DONE: DonePayload = { done: true };

interface FakeBackendOptions {
  rejectFirstSubmit?: boolean;
  deferSubmits?: boolean;
}

function fakeBackend(queue: Array<PairPayload | DonePayload>, options: FakeBackendOptions = {}) {
  const submitted: Array<{ token: string; choice: Choice }> = [];
  let rejectedOnce = false;
  let release: (() => void) | null = null;
  let pairFetches = 0;
  const api: ApiClient = {
    async fetchPair() {
      pairFetches += 1;
      return queue.shift() ?? DONE;
    },
    async submitChoice(token, choice) {
      if (options.deferSubmits) {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      if (options.rejectFirstSubmit && !rejectedOnce) {
        rejectedOnce = true;
        throw new TokenRejectedError("superseded");
      }
      submitted.push({ token, choice });
    },
    async fetchProgress() {
      return { served: submitted.length, total: 9, consistency_rate: 0.91 };
    },
  };
  return {
    api,
    submitted,
    get pairFetches() {
      return pairFetches;
    },
    release() {
      release?.();
      release = null;
    },
  };
}

function stubRenderer(canvas: HTMLCanvasElement): RendererLike {
  return {
    domElement: canvas,
    setSize: vi.fn(),
    setPixelRatio: vi.fn(),
    render: vi.fn(),
    dispose: vi.fn(),
  };
}

function mount(queue: Array<PairPayload | DonePayload>, options: FakeBackendOptions = {}) {
  const backend = fakeBackend(queue, options);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = createAnnotationApp({
    root,
    api: backend.api,
    rater: "r-dom",
    createRenderer: stubRenderer,
  });
  return { backend, root, app };
}

function visible(root: HTMLElement, role: string): boolean {
  return !root.querySelector<HTMLElement>(`[data-role="${role}"]`)!.hidden;
}

function choiceButton(root: HTMLElement, choice: Choice): HTMLButtonElement {
  return root.querySelector<HTMLButtonElement>(`button[data-choice="${choice}"]`)!;
}

describe("annotation app DOM", () => {
  it("renders a pair into both viewports with the house id and live tally", async () => {
    const { root, app } = mount([pair("t1")]);
    await app.session.start();
    expect(root.querySelectorAll("canvas")).toHaveLength(2);
    expect(root.querySelector('[data-role="house"]')!.textContent).toBe("house-t1");
    expect(root.querySelector('[data-role="tally"]')!.textContent).toBe("0 / 9");
    expect(app.viewports[0].scene).not.toBeNull();
    expect(app.viewports[1].scene).not.toBeNull();
    expect(choiceButton(root, "left").disabled).toBe(false);
    expect(visible(root, "loading")).toBe(false);
    app.dispose();
  });

  it("never puts method identity, lineage, or repeat markers into the DOM", async () => {
    const { root, app } = mount([pair("t1"), pair("t2")]);
    await app.session.start();
    choiceButton(root, "left").click();
    await app.session.settle();
    const html = root.innerHTML.toLowerCase();
    for (const needle of ["method", "sanity", "repeat", "lineage", "corrupt"]) {
      expect(html).not.toContain(needle);
    }
    app.dispose();
  });

  it("draws each viewport through its own renderer with its own camera", async () => {
    const { app } = mount([pair("t1")]);
    await app.session.start();
    app.draw();
    const [a, b] = app.viewports;
    expect(vi.mocked(a.renderer.render)).toHaveBeenCalledWith(a.scene, a.camera);
    expect(vi.mocked(b.renderer.render)).toHaveBeenCalledWith(b.scene, b.camera);
    app.dispose();
  });

  it("shows the incomplete-reconstruction notice only for an empty side", async () => {
    const { root, app } = mount([pair("t1", { right: EMPTY })]);
    await app.session.start();
    expect(visible(root, "empty-left")).toBe(false);
    expect(visible(root, "empty-right")).toBe(true);
    expect(root.querySelector('[data-role="empty-right"]')!.textContent).toMatch(
      /incomplete reconstruction/i,
    );
    app.dispose();
  });

  it("submits exactly once under a double-click burst, buttons disabled in flight", async () => {
    const { backend, root, app } = mount([pair("t1"), pair("t2")], { deferSubmits: true });
    await app.session.start();
    const button = choiceButton(root, "left");
    button.click();
    expect(button.disabled).toBe(true);
    button.click();
    choiceButton(root, "right").click();
    backend.release();
    await app.session.settle();
    expect(backend.submitted).toEqual([{ token: "t1", choice: "left" }]);
    expect(choiceButton(root, "left").disabled).toBe(false);
    app.dispose();
  });

  it("holds the break modal up before revealing the advisory pair", async () => {
    const { root, app } = mount([pair("t1", { break_advisory: true }), pair("t2")]);
    await app.session.start();
    expect(visible(root, "break")).toBe(true);
    // the flagged pair itself is not on screen yet
    expect(root.querySelector('[data-role="house"]')!.textContent).toBe("");
    expect(choiceButton(root, "left").disabled).toBe(true);

    root.querySelector<HTMLButtonElement>('[data-role="break-continue"]')!.click();
    expect(visible(root, "break")).toBe(false);
    expect(root.querySelector('[data-role="house"]')!.textContent).toBe("house-t1");
    expect(choiceButton(root, "left").disabled).toBe(false);
    app.dispose();
  });

  it("shows a toast and recovers when a submit is rejected", async () => {
    const { backend, root, app } = mount([pair("t1"), pair("t1b"), pair("t2")], {
      rejectFirstSubmit: true,
    });
    await app.session.start();
    choiceButton(root, "equal").click();
    await app.session.settle();
    expect(visible(root, "toast")).toBe(true);
    expect(root.querySelector('[data-role="toast"]')!.textContent).toMatch(/not accepted/);
    expect(root.querySelector('[data-role="house"]')!.textContent).toBe("house-t1b");

    choiceButton(root, "equal").click();
    await app.session.settle();
    expect(visible(root, "toast")).toBe(false);
    expect(backend.submitted).toEqual([{ token: "t1b", choice: "equal" }]);
    app.dispose();
  });

  it("ends on a completion screen with progress stats", async () => {
    const { root, app } = mount([pair("t1")]);
    await app.session.start();
    choiceButton(root, "right").click();
    await app.session.settle();
    expect(visible(root, "done")).toBe(true);
    const stats = root.querySelector('[data-role="done-stats"]')!.textContent!;
    expect(stats).toContain("1 of 9");
    expect(stats).toContain("91.0%");
    expect(choiceButton(root, "left").disabled).toBe(true);
    app.dispose();
  });

  it("supports keyboard shortcuts for left/right/equal and Enter on the break modal", async () => {
    const { backend, root, app } = mount([
      pair("t1"),
      pair("t2"),
      pair("t3", { break_advisory: true }),
      pair("t4"),
    ]);
    await app.session.start();

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowLeft" }));
    await app.session.settle();
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowRight" }));
    await app.session.settle();
    expect(backend.submitted.map((s) => s.choice)).toEqual(["left", "right"]);

    expect(visible(root, "break")).toBe(true);
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowLeft" })); // ignored during break
    expect(backend.submitted).toHaveLength(2);
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "Enter" }));
    expect(visible(root, "break")).toBe(false);

    document.dispatchEvent(new KeyboardEvent("keydown", { key: "e" }));
    await app.session.settle();
    expect(backend.submitted.map((s) => s.choice)).toEqual(["left", "right", "equal"]);
    app.dispose();

    // after dispose, keys must be inert
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowLeft" }));
    expect(backend.submitted).toHaveLength(3);
  });

  it("keeps both viewport cameras in identical poses through scripted gestures", async () => {
    const { app } = mount([pair("t1")]);
    await app.session.start();
    const gestures: Array<() => void> = [
      () => app.rig.orbit(0.4, -0.2),
      () => app.rig.pan(80, -30),
      () => app.rig.dolly(0.7),
      () => app.rig.orbit(-1.1, 0.5),
      () => app.rig.dolly(1.9),
      () => app.rig.pan(-45, 60),
    ];
    for (const gesture of gestures) {
      gesture();
      const [a, b] = app.rig.poses();
      expect(a).toEqual(b);
    }
    app.dispose();
  });

  it("reframes the camera on the ground truth when a new pair arrives", async () => {
    const shifted: WireframeJson = {
      vertices: HOUSE.vertices.map(([x, y, z]) => [x + 50, y, z] as [number, number, number]),
      edges: HOUSE.edges,
    };
    const { root, app } = mount([pair("t1"), pair("t2", { gt: shifted, left: shifted, right: shifted })]);
    await app.session.start();
    const before = app.rig.target().toArray();
    choiceButton(root, "left").click();
    await app.session.settle();
    const after = app.rig.target().toArray();
    expect(after[0]).toBeCloseTo(before[0]! + 50, 9);
    app.dispose();
  });
});
