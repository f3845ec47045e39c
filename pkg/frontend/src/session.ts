/** Client-side annotation session: a small state machine over the API.
 *
 * Phases: loading -> (pair | break)* -> done, with "error" terminal on
 * unexpected failures.  A pair whose payload carries the break advisory is
 * held back behind the break modal and revealed on acknowledgement.  Submits
 * are guarded: while one is in flight, further choices are no-ops, which is
 * what makes double-clicks produce exactly one record.
 */
import type { ApiClient, Choice, PairPayload, ProgressPayload } from "./api.js";
import { TokenRejectedError } from "./api.js";

export type SessionPhase = "idle" | "loading" | "pair" | "break" | "done" | "error";

export interface SessionView {
  phase: SessionPhase;
  pair: PairPayload | null;
  submitting: boolean;
  toast: string | null;
  /** Choices accepted by the server during this client's lifetime. */
  answered: number;
  /** Fetched once at start (for the header) and again at completion. */
  progress: ProgressPayload | null;
  error: string | null;
}

export interface AnnotationSession {
  view(): SessionView;
  subscribe(listener: (view: SessionView) => void): () => void;
  start(): Promise<void>;
  choose(choice: Choice): Promise<void>;
  acknowledgeBreak(): void;
  /** Resolves once all in-flight work (submits, refetches) has finished. */
  settle(): Promise<void>;
}

export function createAnnotationSession(api: ApiClient, rater: string): AnnotationSession {
  const state: SessionView = {
    phase: "idle",
    pair: null,
    submitting: false,
    toast: null,
    answered: 0,
    progress: null,
    error: null,
  };
  let pendingBreakPair: PairPayload | null = null;
  let inFlight: Promise<void> | null = null;
  const listeners: Array<(view: SessionView) => void> = [];

  function notify(): void {
    const snapshot = view();
    for (const listener of [...listeners]) {
      listener(snapshot);
    }
  }

  function view(): SessionView {
    return { ...state };
  }

  async function fetchNext(): Promise<void> {
    const payload = await api.fetchPair(rater);
    if (payload.done) {
      state.pair = null;
      state.progress = await api.fetchProgress(rater);
      state.phase = "done";
      return;
    }
    if (payload.break_advisory) {
      pendingBreakPair = payload;
      state.pair = null;
      state.phase = "break";
      return;
    }
    state.pair = payload;
    state.phase = "pair";
  }

  function run(work: () => Promise<void>): Promise<void> {
    let op: Promise<void> | null = null;
    op = (async () => {
      try {
        await work();
      } catch (err) {
        state.phase = "error";
        state.error = err instanceof Error ? err.message : String(err);
      } finally {
        if (inFlight === op) {
          inFlight = null;
        }
        notify();
      }
    })();
    inFlight = op;
    return op;
  }

  return {
    view,

    subscribe(listener: (view: SessionView) => void): () => void {
      listeners.push(listener);
      return () => {
        const i = listeners.indexOf(listener);
        if (i >= 0) {
          listeners.splice(i, 1);
        }
      };
    },

    start(): Promise<void> {
      state.phase = "loading";
      notify();
      return run(async () => {
        state.progress = await api.fetchProgress(rater);
        await fetchNext();
      });
    },

    choose(choice: Choice): Promise<void> {
      if (state.phase !== "pair" || state.submitting || state.pair === null) {
        return Promise.resolve();
      }
      const token = state.pair.pair_token;
      state.submitting = true;
      notify();
      return run(async () => {
        try {
          await api.submitChoice(token, choice);
          state.answered += 1;
          state.toast = null;
          await fetchNext();
        } catch (err) {
          if (err instanceof TokenRejectedError) {
            // the serve was superseded (double submit from another tab, or a
            // stale token after reconnect): surface it and re-fetch — the
            // server re-serves the unanswered pair under a fresh token
            state.toast = "That submission was not accepted; the pair has been reloaded.";
            await fetchNext();
          } else {
            throw err;
          }
        } finally {
          state.submitting = false;
        }
      });
    },

    acknowledgeBreak(): void {
      if (state.phase !== "break" || pendingBreakPair === null) {
        return;
      }
      state.pair = pendingBreakPair;
      pendingBreakPair = null;
      state.phase = "pair";
      notify();
    },

    async settle(): Promise<void> {
      while (inFlight !== null) {
        await inFlight;
      }
    },
  };
}
