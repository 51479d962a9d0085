/** Typed client for the waternet service HTTP API. */

import type { RunBody, RunRecord, Violation } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly violations: Violation[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function fail(res: Response): Promise<never> {
  let message = `${res.status}`;
  let violations: Violation[] = [];
  try {
    const body = (await res.json()) as {
      error?: string;
      violations?: Violation[];
    };
    if (body.error) message = body.error;
    if (Array.isArray(body.violations)) violations = body.violations;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, message, violations);
}

export interface PollOptions {
  /** First wait in ms; each later wait grows by the backoff factor. */
  intervalMs?: number;
  backoff?: number;
  maxIntervalMs?: number;
  signal?: AbortSignal;
  onUpdate?: (record: RunRecord) => void;
}

const sleep = (ms: number, signal?: AbortSignal) =>
  new Promise<void>((resolve, reject) => {
    const timer = setTimeout(() => {
      signal?.removeEventListener("abort", onAbort);
      resolve();
    }, ms);
    const onAbort = () => {
      clearTimeout(timer);
      reject(new DOMException("polling cancelled", "AbortError"));
    };
    signal?.addEventListener("abort", onAbort, { once: true });
  });

export class Client {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchFn(this.url(path), init);
    if (!res.ok) await fail(res);
    return res;
  }

  /** Stores a document; the server re-serializes to canonical form. */
  async putNetwork(id: string, text: string): Promise<void> {
    await this.request(`/networks/${id}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: text,
    });
  }

  /** Canonical bytes as stored; byte-exact across reloads. */
  async getNetworkText(id: string): Promise<string> {
    const res = await this.request(`/networks/${id}`);
    return res.text();
  }

  async listNetworks(): Promise<string[]> {
    const res = await this.request("/networks");
    const body = (await res.json()) as { networks: string[] };
    return body.networks;
  }

  async deleteNetwork(id: string): Promise<void> {
    await this.request(`/networks/${id}`, { method: "DELETE" });
  }

  async createRun(body: RunBody): Promise<RunRecord> {
    const res = await this.request("/runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await res.json()) as RunRecord;
  }

  async getRun(id: string): Promise<RunRecord> {
    const res = await this.request(`/runs/${id}`);
    return (await res.json()) as RunRecord;
  }

  async listRuns(): Promise<RunRecord[]> {
    const res = await this.request("/runs");
    const body = (await res.json()) as { runs: RunRecord[] };
    return body.runs;
  }

  /** Raw result payload bytes for a done run (any kind). */
  async getResultText(id: string): Promise<string> {
    const res = await this.request(`/runs/${id}/solution`);
    return res.text();
  }

  /**
   * Polls a run to a terminal state. Waits grow from intervalMs by the
   * backoff factor up to maxIntervalMs; an abort signal stops cleanly.
   */
  async pollRun(id: string, opts: PollOptions = {}): Promise<RunRecord> {
    const backoff = opts.backoff ?? 1.5;
    const cap = opts.maxIntervalMs ?? 10_000;
    let wait = opts.intervalMs ?? 1_000;
    for (;;) {
      const record = await this.getRun(id);
      opts.onUpdate?.(record);
      if (record.status === "done" || record.status === "failed") return record;
      await sleep(wait, opts.signal);
      wait = Math.min(wait * backoff, cap);
    }
  }
}
