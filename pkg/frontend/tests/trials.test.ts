import { describe, expect, it } from "vitest";

import type { Client } from "../src/api.js";
import { TrialsPanel, conservationHolds } from "../src/trials.js";
import type { RunBody, RunRecord, TrialReport } from "../src/types.js";

const REPORT: TrialReport = {
  trials: 10,
  seed: 7,
  parts: 4,
  optionsCompared: ["route_a", "route_b"],
  counts: { optimal: 8, infeasible: 2 },
  frequencies: { route_a: 5, route_b: 3 },
  objective_mean: 41.5,
  kpi_means: { fresh_intake: 12.5 },
  per_trial: [],
};

function stubClient(report: TrialReport) {
  const bodies: RunBody[] = [];
  const statuses: string[] = ["queued", "running", "done"];
  const client = {
    async createRun(body: RunBody): Promise<RunRecord> {
      bodies.push(body);
      return { id: "r000002", kind: "trials", network: body.network, status: "queued" };
    },
    async pollRun(
      id: string,
      opts?: { onUpdate?: (r: RunRecord) => void },
    ): Promise<RunRecord> {
      let rec: RunRecord = { id, kind: "trials", network: "n", status: "queued" };
      for (const status of statuses) {
        rec = { id, kind: "trials", network: "n", status: status as RunRecord["status"] };
        opts?.onUpdate?.(rec);
      }
      return rec;
    },
    async getResultText(): Promise<string> {
      return JSON.stringify(report, null, 2) + "\n";
    },
  } as unknown as Client;
  return { client, bodies };
}

describe("TrialsPanel", () => {
  it("builds the run body from the form fields", () => {
    const panel = new TrialsPanel({} as Client);
    panel.trials = 50;
    panel.seed = 3;
    panel.parts = 2;
    panel.maxTime = 15;
    panel.addParameter({
      target: "WWS_1",
      field: "supply",
      low: 40,
      high: 80,
      distribution: "uniform",
    });
    panel.addParameter({
      target: "WWS_1",
      field: "quality",
      pollutant: "cod",
      low: 100,
      high: 300,
      distribution: "normal",
    });
    expect(panel.body("plant")).toEqual({
      kind: "trials",
      network: "plant",
      jobs: 1,
      config: {
        trials: 50,
        seed: 3,
        parts: 2,
        mode: "exclusive",
        parameters: [
          { target: "WWS_1", field: "supply", low: 40, high: 80, distribution: "uniform" },
          {
            target: "WWS_1",
            field: "quality",
            pollutant: "cod",
            low: 100,
            high: 300,
            distribution: "normal",
          },
        ],
        limits: { max_time: 15 },
      },
    });
  });

  it("rejects a parameter range with low above high", () => {
    const panel = new TrialsPanel({} as Client);
    expect(() =>
      panel.addParameter({
        target: "WWS_1",
        field: "supply",
        low: 80,
        high: 40,
        distribution: "uniform",
      }),
    ).toThrow(/low/);
    expect(panel.parameters).toHaveLength(0);
  });

  it("removeParameter drops exactly the chosen row", () => {
    const panel = new TrialsPanel({} as Client);
    panel.addParameter({ target: "A", field: "supply", low: 1, high: 2, distribution: "uniform" });
    panel.addParameter({ target: "B", field: "demand", low: 3, high: 4, distribution: "uniform" });
    panel.removeParameter(0);
    expect(panel.parameters).toHaveLength(1);
    expect(panel.parameters[0]!.target).toBe("B");
  });

  it("launch polls to completion and parses the report", async () => {
    const { client, bodies } = stubClient(REPORT);
    const panel = new TrialsPanel(client);
    panel.trials = 10;
    panel.seed = 7;
    panel.parts = 4;
    await panel.launch("plant");
    expect(bodies).toHaveLength(1);
    expect(panel.phase).toBe("done");
    expect(panel.progress).toBe("done");
    expect(panel.report).toEqual(REPORT);
  });

  it("orders frequency rows by count, then name, with trial shares", async () => {
    const { client } = stubClient({
      ...REPORT,
      frequencies: { route_b: 3, route_a: 3, route_c: 4 },
      counts: { optimal: 10 },
    });
    const panel = new TrialsPanel(client);
    await panel.launch("plant");
    expect(panel.frequencyRows()).toEqual([
      { option: "route_c", count: 4, share: 0.4 },
      { option: "route_a", count: 3, share: 0.3 },
      { option: "route_b", count: 3, share: 0.3 },
    ]);
  });

  it("conservation: frequencies sum to the optimal count, and only that", () => {
    expect(conservationHolds(REPORT)).toBe(true);
    expect(
      conservationHolds({ ...REPORT, counts: { optimal: 9, infeasible: 1 } }),
    ).toBe(false);
    // the "none" bucket participates in the sum like any other
    expect(
      conservationHolds({
        ...REPORT,
        frequencies: { route_a: 5, route_b: 2, none: 1 },
      }),
    ).toBe(true);
    expect(conservationHolds({ ...REPORT, counts: {} })).toBe(false);
  });
});
