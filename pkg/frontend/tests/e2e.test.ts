/**
 * End-to-end: drives a live service instance through the real client.
 * Covers the editor round trip, optimize flow parity, and the trials
 * conservation invariant.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { NetworkEditor } from "../src/editor.js";
import { KeyValueStore, LayoutStore } from "../src/graph.js";
import { OptimizePanel } from "../src/optimize.js";
import { TrialsPanel, conservationHolds } from "../src/trials.js";
import { mixerDoc, optionDoc } from "./fixtures.js";

const HOOK_MS = 120_000;
const TEST_MS = 120_000;

class MemoryStore implements KeyValueStore {
  data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      probe.close(() => resolve(address.port));
    });
  });
}

let child: ChildProcess | undefined;
let storeDir = "";
let client: Client;
let serverLog = "";

async function waitReady(base: string): Promise<void> {
  const deadline = Date.now() + 90_000;
  for (;;) {
    if (child?.exitCode !== null && child?.exitCode !== undefined) {
      throw new Error(`service exited early (${child.exitCode}): ${serverLog}`);
    }
    try {
      const res = await fetch(`${base}/networks`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service never became ready: ${serverLog}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}

beforeAll(async () => {
  storeDir = await mkdtemp(join(tmpdir(), "waternet-e2e-"));
  const port = await freePort();
  child = spawn(
    "python3",
    ["-m", "waternet", "serve", "--store", storeDir, "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  const keep = (chunk: Buffer) => {
    serverLog = (serverLog + chunk.toString()).slice(-4096);
  };
  child.stdout?.on("data", keep);
  child.stderr?.on("data", keep);
  const base = `http://127.0.0.1:${port}`;
  client = new Client(base);
  await waitReady(base);
}, HOOK_MS);

afterAll(async () => {
  if (child && child.exitCode === null) {
    const gone = new Promise((resolve) => child?.once("exit", resolve));
    child.kill("SIGTERM");
    await gone;
  }
  if (storeDir) await rm(storeDir, { recursive: true, force: true });
}, HOOK_MS);

describe("live service", () => {
  it(
    "edit-save-reload preserves the canonical document byte-exactly",
    async () => {
      // seed with deliberately non-canonical bytes; the server reformats
      await client.putNetwork("mix", JSON.stringify(mixerDoc()));
      const layouts = new LayoutStore(new MemoryStore());

      const editor = new NetworkEditor(client, layouts);
      await editor.load("mix");
      const form = editor.openForm("B");
      form.setScalar("supply", 0.75);
      editor.applyForm("B", form);
      editor.graph.moveNode("B", 333, 111);
      expect(await editor.save()).toBe(true);
      const firstStored = await client.getNetworkText("mix");
      expect(firstStored.endsWith("\n")).toBe(true);
      expect((JSON.parse(firstStored) as ReturnType<typeof mixerDoc>).components["B"]!.supply).toBe(0.75);
      // layout-only edits never reach the server
      expect(firstStored).not.toMatch(/333/);

      // reload into a fresh editor and save with no edits
      const again = new NetworkEditor(client, layouts);
      await again.load("mix");
      expect(again.graph.nodes.get("B")!.x).toBe(333);
      expect(await again.save()).toBe(true);
      const secondStored = await client.getNetworkText("mix");
      expect(secondStored).toBe(firstStored);
      expect(Buffer.from(secondStored)).toEqual(Buffer.from(firstStored));
    },
    TEST_MS,
  );

  it(
    "optimize panel flows equal the service solution",
    async () => {
      await client.putNetwork("mix", JSON.stringify(mixerDoc()));
      const panel = new OptimizePanel(client);
      panel.config.parts = 2;
      panel.config.maxTime = 60;
      await panel.launch("mix");
      expect(panel.failureDetail).toBe("");
      expect(panel.phase).toBe("done");
      expect(panel.solution?.status).toBe("optimal");

      const runs = await client.listRuns();
      const run = runs.find(
        (r) => r.kind === "optimize" && r.network === "mix" && r.status === "done",
      );
      expect(run).toBeDefined();
      const served = JSON.parse(await client.getResultText(run!.id)) as {
        flows: Record<string, number>;
      };
      expect(panel.flows).toEqual(served.flows);
      expect(Object.keys(panel.flows).length).toBeGreaterThan(0);
      // metrics rows echo the served numbers verbatim
      const statusRow = panel.metrics().find((row) => row.label === "status");
      expect(statusRow?.value).toBe("optimal");
    },
    TEST_MS,
  );

  it(
    "trials frequencies sum to the optimal count under exclusive mode",
    async () => {
      await client.putNetwork("choice", JSON.stringify(optionDoc()));
      const panel = new TrialsPanel(client);
      panel.trials = 12;
      panel.seed = 11;
      panel.parts = 2;
      panel.maxTime = 30;
      // supply quality high enough that the weak route always violates
      // the discharge limit, forcing every feasible trial onto route_a
      panel.addParameter({
        target: "S",
        field: "quality",
        pollutant: "cod",
        low: 70,
        high: 90,
        distribution: "uniform",
      });
      await panel.launch("choice");
      expect(panel.failureDetail).toBe("");
      expect(panel.phase).toBe("done");
      const report = panel.report!;
      expect(report.trials).toBe(12);
      expect(conservationHolds(report)).toBe(true);
      const summed = Object.values(report.frequencies).reduce((a, b) => a + b, 0);
      expect(summed).toBe(report.counts["optimal"]);
      expect(report.counts["optimal"]).toBe(12);
      expect(report.frequencies["route_a"]).toBe(12);
      expect(report.frequencies["route_b"]).toBe(0);
      const rows = panel.frequencyRows();
      expect(rows[0]).toEqual({ option: "route_a", count: 12, share: 1 });
    },
    TEST_MS,
  );
});
