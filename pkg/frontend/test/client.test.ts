import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, isStaleSession, type FetchLike } from "../src/client.js";

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
  headers: Record<string, string> | undefined;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Fetch stub answering every call with the queued responses, in order. */
function stubFetch(responses: Array<Response | (() => Promise<Response>)>) {
  const calls: RecordedCall[] = [];
  const fetchImpl: FetchLike = (url, init) => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
      headers: init?.headers as Record<string, string> | undefined,
    });
    const next = responses.shift();
    if (!next) throw new Error("stub ran out of responses");
    return typeof next === "function" ? next() : Promise.resolve(next);
  };
  return { calls, fetchImpl };
}

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (error: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

const flush = () => new Promise((r) => setTimeout(r, 0));

describe("api client", () => {
  it("creates sessions with prompt and sample count", async () => {
    const { calls, fetchImpl } = stubFetch([
      jsonResponse({ session_id: "s1", state: { session_id: "s1" } }, 201),
    ]);
    const client = new ApiClient("http://api.test/", fetchImpl);

    const created = await client.createSession("Tell me a bio of Rodrigo.", 5);
    expect(created.session_id).toBe("s1");
    expect(calls[0]).toMatchObject({
      url: "http://api.test/api/sessions",
      method: "POST",
      body: { prompt: "Tell me a bio of Rodrigo.", num_samples: 5 },
      headers: { "content-type": "application/json" },
    });
  });

  it("reads sessions without a body or content type", async () => {
    const { calls, fetchImpl } = stubFetch([jsonResponse({ state: {} })]);
    const client = new ApiClient("", fetchImpl);
    await client.getSession("s1");
    expect(calls[0]!.url).toBe("/api/sessions/s1");
    expect(calls[0]!.method).toBe("GET");
    expect(calls[0]!.body).toBeUndefined();
    expect(calls[0]!.headers).toBeUndefined();
  });

  it("posts brush selections and confirmations", async () => {
    const { calls, fetchImpl } = stubFetch([
      jsonResponse({ suggested_question: "Q?", token: "t0" }),
      jsonResponse({ annotation: { id: "ann:x" } }),
    ]);
    const client = new ApiClient("", fetchImpl);

    const suggestion = await client.suggestBrush("s1", 0, 21, 31);
    expect(suggestion.token).toBe("t0");
    await client.confirmBrush("s1", suggestion.token);

    expect(calls[0]).toMatchObject({
      url: "/api/sessions/s1/brush",
      body: { sentence_index: 0, start: 21, end: 31 },
    });
    expect(calls[1]).toMatchObject({
      url: "/api/sessions/s1/brush/confirm",
      body: { token: "t0" },
    });
  });

  it("posts edits under new_text", async () => {
    const { calls, fetchImpl } = stubFetch([jsonResponse({ state: {} })]);
    const client = new ApiClient("", fetchImpl);
    await client.applyEdit("s1", "New text.");
    expect(calls[0]).toMatchObject({
      url: "/api/sessions/s1/edit",
      method: "POST",
      body: { new_text: "New text." },
    });
  });

  it("escapes the evidence target in the query string", async () => {
    const { calls, fetchImpl } = stubFetch([
      jsonResponse({ evidence: { target: "cluster:a:0", items: [] } }),
    ]);
    const client = new ApiClient("", fetchImpl);
    await client.fetchEvidence("s1", "cluster:a:0");
    expect(calls[0]!.url).toBe("/api/sessions/s1/evidence?target=cluster%3Aa%3A0");
  });

  it("turns error envelopes into typed errors", async () => {
    const { fetchImpl } = stubFetch([
      jsonResponse(
        { code: "session_not_found", message: "no session s9", detail: { session_id: "s9" } },
        404,
      ),
    ]);
    const client = new ApiClient("", fetchImpl);

    const error = await client.getSession("s9").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    const apiError = error as ApiError;
    expect(apiError.status).toBe(404);
    expect(apiError.code).toBe("session_not_found");
    expect(apiError.message).toBe("no session s9");
    expect(apiError.detail).toEqual({ session_id: "s9" });
    expect(isStaleSession(apiError)).toBe(true);
  });

  it("treats other failures as non-stale", async () => {
    const { fetchImpl } = stubFetch([
      jsonResponse({ code: "validation", message: "bad", detail: {} }, 400),
    ]);
    const client = new ApiClient("", fetchImpl);
    const error = await client.applyEdit("s1", "").catch((e: unknown) => e);
    expect(isStaleSession(error)).toBe(false);
    expect(isStaleSession(new Error("network"))).toBe(false);
  });

  it("runs one mutation at a time per session", async () => {
    const first = deferred<Response>();
    const second = deferred<Response>();
    const { calls, fetchImpl } = stubFetch([() => first.promise, () => second.promise]);
    const client = new ApiClient("", fetchImpl);

    const editPromise = client.applyEdit("s1", "One.");
    const brushPromise = client.suggestBrush("s1", 0, 0, 4);
    await flush();
    // The brush call must not reach the wire while the edit is in flight.
    expect(calls.length).toBe(1);
    expect(calls[0]!.url).toBe("/api/sessions/s1/edit");

    first.resolve(jsonResponse({ state: {} }));
    await editPromise;
    await flush();
    expect(calls.length).toBe(2);
    expect(calls[1]!.url).toBe("/api/sessions/s1/brush");

    second.resolve(jsonResponse({ suggested_question: "Q?", token: "t" }));
    await expect(brushPromise).resolves.toMatchObject({ token: "t" });
  });

  it("keeps the queue alive after a failed mutation", async () => {
    const { calls, fetchImpl } = stubFetch([
      jsonResponse({ code: "verification", message: "backend down", detail: {} }, 502),
      jsonResponse({ state: {} }),
    ]);
    const client = new ApiClient("", fetchImpl);

    const failing = client.applyEdit("s1", "One.");
    const following = client.applyEdit("s1", "Two.");
    await expect(failing).rejects.toBeInstanceOf(ApiError);
    await expect(following).resolves.toEqual({ state: {} });
    expect(calls.length).toBe(2);
  });

  it("sequences sessions independently and lets reads bypass the queue", async () => {
    const blocked = deferred<Response>();
    const calls: string[] = [];
    const fetchImpl: FetchLike = (url) => {
      calls.push(url);
      if (url === "/api/sessions/s1/edit" && calls.filter((u) => u === url).length === 1) {
        return blocked.promise;
      }
      return Promise.resolve(jsonResponse({ state: {} }));
    };
    const client = new ApiClient("", fetchImpl);

    const slowEdit = client.applyEdit("s1", "One.");
    const queuedEdit = client.applyEdit("s1", "Two.");
    const otherSession = client.applyEdit("s2", "Other.");
    const read = client.getSession("s1");
    await flush();
    // s2's mutation and s1's read both proceed while s1's first edit is in
    // flight; s1's second edit stays queued behind it.
    expect(calls.sort()).toEqual([
      "/api/sessions/s1",
      "/api/sessions/s1/edit",
      "/api/sessions/s2/edit",
    ]);

    blocked.resolve(jsonResponse({ state: {} }));
    await Promise.all([slowEdit, queuedEdit, otherSession, read]);
    expect(calls.filter((u) => u === "/api/sessions/s1/edit").length).toBe(2);
  });
});
