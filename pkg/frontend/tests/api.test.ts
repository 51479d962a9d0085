import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError, Client } from "../src/api.js";
import type { RunRecord } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
    text: async () => JSON.stringify(body),
  } as unknown as Response;
}

function recordSequence(statuses: string[]): { fetchFn: typeof fetch; urls: string[] } {
  let call = 0;
  const urls: string[] = [];
  const fetchFn = (async (url: RequestInfo | URL) => {
    urls.push(String(url));
    const status = statuses[Math.min(call, statuses.length - 1)];
    call += 1;
    return jsonResponse({ id: "r000001", kind: "optimize", network: "n", status });
  }) as typeof fetch;
  return { fetchFn, urls };
}

describe("pollRun", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("polls until done, growing the wait by the backoff factor", async () => {
    const { fetchFn, urls } = recordSequence([
      "queued",
      "running",
      "running",
      "running",
      "done",
    ]);
    const client = new Client("http://svc", fetchFn);
    const seen: string[] = [];
    const promise = client.pollRun("r000001", {
      intervalMs: 1000,
      backoff: 2,
      onUpdate: (r: RunRecord) => seen.push(r.status),
    });
    // first request fires immediately
    await vi.advanceTimersByTimeAsync(0);
    expect(urls).toHaveLength(1);
    // next polls wait 1000, then 2000, then 4000
    await vi.advanceTimersByTimeAsync(999);
    expect(urls).toHaveLength(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(urls).toHaveLength(2);
    await vi.advanceTimersByTimeAsync(2000);
    expect(urls).toHaveLength(3);
    await vi.advanceTimersByTimeAsync(4000);
    expect(urls).toHaveLength(4);
    await vi.advanceTimersByTimeAsync(8000);
    const final = await promise;
    expect(final.status).toBe("done");
    expect(seen).toEqual(["queued", "running", "running", "running", "done"]);
  });

  it("caps the wait at maxIntervalMs", async () => {
    const { fetchFn, urls } = recordSequence(["running", "running", "running", "done"]);
    const client = new Client("http://svc", fetchFn);
    const promise = client.pollRun("r000001", {
      intervalMs: 4000,
      backoff: 10,
      maxIntervalMs: 5000,
    });
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(4000); // first wait
    expect(urls).toHaveLength(2);
    await vi.advanceTimersByTimeAsync(5000); // capped, not 40000
    expect(urls).toHaveLength(3);
    await vi.advanceTimersByTimeAsync(5000);
    await expect(promise).resolves.toMatchObject({ status: "done" });
  });

  it("returns failed records instead of polling forever", async () => {
    const { fetchFn } = recordSequence(["failed"]);
    const client = new Client("http://svc", fetchFn);
    const promise = client.pollRun("r000001");
    await vi.advanceTimersByTimeAsync(0);
    await expect(promise).resolves.toMatchObject({ status: "failed" });
  });

  it("aborting cancels the wait and stops fetching", async () => {
    const { fetchFn, urls } = recordSequence(["running", "running", "done"]);
    const client = new Client("http://svc", fetchFn);
    const abort = new AbortController();
    const promise = client.pollRun("r000001", {
      intervalMs: 1000,
      signal: abort.signal,
    });
    const guarded = promise.catch((err: unknown) => err);
    await vi.advanceTimersByTimeAsync(0);
    expect(urls).toHaveLength(1);
    abort.abort();
    const err = await guarded;
    expect(err).toBeInstanceOf(Error);
    expect((err as Error).name).toBe("AbortError");
    await vi.advanceTimersByTimeAsync(60_000);
    expect(urls).toHaveLength(1);
  });
});

describe("request errors", () => {
  it("carries the server's error message and violations", async () => {
    const fetchFn = (async () =>
      jsonResponse(
        {
          error: "network is not well-formed",
          violations: [{ code: "self-loop", element: "W->W", message: "loop" }],
        },
        422,
      )) as typeof fetch;
    const client = new Client("http://svc", fetchFn);
    const err = await client.putNetwork("plant", "{}").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.message).toMatch(/not well-formed/);
    expect(apiErr.violations[0]!.code).toBe("self-loop");
  });

  it("keeps the status code when the body is not JSON", async () => {
    const fetchFn = (async () =>
      ({
        ok: false,
        status: 503,
        json: async () => {
          throw new Error("no body");
        },
        text: async () => "",
      }) as unknown as Response) as typeof fetch;
    const client = new Client("http://svc", fetchFn);
    const err = await client.listNetworks().catch((e: unknown) => e);
    expect((err as ApiError).status).toBe(503);
  });

  it("builds urls against the base, tolerating a trailing slash", async () => {
    const urls: string[] = [];
    const fetchFn = (async (url: RequestInfo | URL) => {
      urls.push(String(url));
      return jsonResponse({ networks: [] });
    }) as typeof fetch;
    await new Client("http://svc:8080/", fetchFn).listNetworks();
    expect(urls).toEqual(["http://svc:8080/networks"]);
  });
});
