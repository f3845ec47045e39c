/** Typed client for the three annotation-service endpoints.
 *
 * The server is the blinding boundary: a pair payload carries geometry and a
 * one-shot token, nothing else.  The client enforces that contract by
 * rejecting payloads with unexpected keys, so any accidental server-side
 * leak fails loudly instead of silently reaching the DOM.
 */

export type Vec3 = [number, number, number];
export type EdgePair = [number, number];

export interface WireframeJson {
  vertices: Vec3[];
  edges: EdgePair[];
}

export interface PairPayload {
  done: false;
  pair_token: string;
  house_id: string;
  left: WireframeJson;
  right: WireframeJson;
  gt: WireframeJson;
  break_advisory: boolean;
}

export interface DonePayload {
  done: true;
}

export interface ProgressPayload {
  served: number;
  total: number;
  consistency_rate: number | null;
}

export type Choice = "left" | "right" | "equal";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

/** A submit hit a token the server no longer honours (spent or superseded). */
export class TokenRejectedError extends ApiError {
  constructor(message: string) {
    super(message, 409);
    this.name = "TokenRejectedError";
  }
}

export interface ApiClient {
  fetchPair(rater: string): Promise<PairPayload | DonePayload>;
  submitChoice(pairToken: string, choice: Choice): Promise<void>;
  fetchProgress(rater: string): Promise<ProgressPayload>;
}

const PAIR_KEYS = ["done", "pair_token", "house_id", "left", "right", "gt", "break_advisory"];

function asWireframe(value: unknown, label: string): WireframeJson {
  const obj = value as { vertices?: unknown; edges?: unknown };
  if (!obj || !Array.isArray(obj.vertices) || !Array.isArray(obj.edges)) {
    throw new ApiError(`${label} is not a wireframe payload`, 0);
  }
  for (const v of obj.vertices) {
    if (!Array.isArray(v) || v.length !== 3) {
      throw new ApiError(`${label} has a malformed vertex`, 0);
    }
  }
  for (const e of obj.edges) {
    if (!Array.isArray(e) || e.length !== 2) {
      throw new ApiError(`${label} has a malformed edge`, 0);
    }
  }
  return obj as WireframeJson;
}

export function validatePairPayload(raw: unknown): PairPayload | DonePayload {
  const obj = raw as Record<string, unknown>;
  if (!obj || typeof obj !== "object" || typeof obj["done"] !== "boolean") {
    throw new ApiError("pair response missing 'done' flag", 0);
  }
  if (obj["done"] === true) {
    return { done: true };
  }
  const keys = Object.keys(obj).sort();
  const expected = [...PAIR_KEYS].sort();
  if (keys.length !== expected.length || keys.some((k, i) => k !== expected[i])) {
    throw new ApiError(`pair payload keys ${JSON.stringify(keys)} != expected ${JSON.stringify(expected)}`, 0);
  }
  if (typeof obj["pair_token"] !== "string" || typeof obj["house_id"] !== "string") {
    throw new ApiError("pair payload token/house malformed", 0);
  }
  return {
    done: false,
    pair_token: obj["pair_token"],
    house_id: obj["house_id"],
    left: asWireframe(obj["left"], "left candidate"),
    right: asWireframe(obj["right"], "right candidate"),
    gt: asWireframe(obj["gt"], "ground truth"),
    break_advisory: Boolean(obj["break_advisory"]),
  };
}

export function createApiClient(baseUrl: string, fetchImpl: typeof fetch = fetch): ApiClient {
  const base = baseUrl.replace(/\/$/, "");

  async function getJson(path: string): Promise<unknown> {
    const res = await fetchImpl(`${base}${path}`);
    if (!res.ok) {
      throw new ApiError(`GET ${path} -> ${res.status}`, res.status);
    }
    return res.json();
  }

  return {
    async fetchPair(rater: string): Promise<PairPayload | DonePayload> {
      const raw = await getJson(`/api/pair?rater=${encodeURIComponent(rater)}`);
      return validatePairPayload(raw);
    },

    async submitChoice(pairToken: string, choice: Choice): Promise<void> {
      const res = await fetchImpl(`${base}/api/choice`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ pair_token: pairToken, choice }),
      });
      if (res.status === 409) {
        throw new TokenRejectedError(`choice rejected: ${await res.text()}`);
      }
      if (!res.ok) {
        throw new ApiError(`POST /api/choice -> ${res.status}`, res.status);
      }
    },

    async fetchProgress(rater: string): Promise<ProgressPayload> {
      const raw = (await getJson(`/api/progress?rater=${encodeURIComponent(rater)}`)) as Record<string, unknown>;
      return {
        served: Number(raw["served"]),
        total: Number(raw["total"]),
        consistency_rate: raw["consistency_rate"] == null ? null : Number(raw["consistency_rate"]),
      };
    },
  };
}
