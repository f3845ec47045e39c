import { describe, expect, it } from "vitest";
import { ApiError, TokenRejectedError, createApiClient, validatePairPayload } from "../src/api.js";

const WIRE = { vertices: [[0, 0, 0], [1, 0, 0]], edges: [[0, 1]] };

function pairPayload(extra: Record<string, unknown> = {}): Record<string, unknown> {
  return {
    done: false,
    pair_token: "tok-1",
    house_id: "h-0",
    left: WIRE,
    right: WIRE,
    gt: WIRE,
    break_advisory: false,
    ...extra,
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("pair payload validation", () => {
  it("accepts the exact blinded payload shape", () => {
    const parsed = validatePairPayload(pairPayload());
    expect(parsed.done).toBe(false);
    if (!parsed.done) {
      expect(parsed.house_id).toBe("h-0");
      expect(parsed.left.edges).toHaveLength(1);
    }
  });

  it("accepts the completion marker", () => {
    expect(validatePairPayload({ done: true })).toEqual({ done: true });
  });

  it("rejects a payload carrying any unexpected key (blinding tripwire)", () => {
    for (const leak of ["method_id", "is_repeat", "sanity", "lineage"]) {
      expect(() => validatePairPayload(pairPayload({ [leak]: "x" }))).toThrow(ApiError);
    }
  });

  it("rejects a payload missing a required key", () => {
    const partial = pairPayload();
    delete partial["gt"];
    expect(() => validatePairPayload(partial)).toThrow(/keys/);
  });

  it("rejects malformed geometry", () => {
    expect(() => validatePairPayload(pairPayload({ left: { vertices: [[0, 0]], edges: [] } }))).toThrow(
      /vertex/,
    );
  });
});

describe("api client", () => {
  it("fetches and validates a pair", async () => {
    const calls: string[] = [];
    const client = createApiClient("http://svc", (async (input: RequestInfo | URL) => {
      calls.push(String(input));
      return jsonResponse(pairPayload());
    }) as typeof fetch);
    const pair = await client.fetchPair("r one");
    expect(pair.done).toBe(false);
    expect(calls).toEqual(["http://svc/api/pair?rater=r%20one"]);
  });

  it("maps 409 on submit to TokenRejectedError", async () => {
    const client = createApiClient("", (async () =>
      new Response("spent", { status: 409 })) as typeof fetch);
    await expect(client.submitChoice("tok", "left")).rejects.toBeInstanceOf(TokenRejectedError);
  });

  it("maps other submit failures to ApiError", async () => {
    const client = createApiClient("", (async () =>
      new Response("boom", { status: 500 })) as typeof fetch);
    await expect(client.submitChoice("tok", "left")).rejects.toBeInstanceOf(ApiError);
    await expect(client.submitChoice("tok", "left")).rejects.not.toBeInstanceOf(TokenRejectedError);
  });

  it("posts the choice body the service expects", async () => {
    let captured: { url: string; body: unknown } | null = null;
    const client = createApiClient("http://svc/", (async (input: RequestInfo | URL, init?: RequestInit) => {
      captured = { url: String(input), body: JSON.parse(String(init?.body)) };
      return jsonResponse({ accepted: true });
    }) as typeof fetch);
    await client.submitChoice("tok-9", "equal");
    expect(captured).toEqual({
      url: "http://svc/api/choice",
      body: { pair_token: "tok-9", choice: "equal" },
    });
  });

  it("parses progress including a null consistency rate", async () => {
    const client = createApiClient("", (async () =>
      jsonResponse({ served: 3, total: 10, consistency_rate: null })) as typeof fetch);
    expect(await client.fetchProgress("r")).toEqual({ served: 3, total: 10, consistency_rate: null });
  });
});
