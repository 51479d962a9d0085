/**
 * Optimize panel: configure a run, launch it, poll to completion, and
 * expose the flows and metrics for rendering. At most one run is in
 * flight; every number shown comes from the service response.
 */

import type { Client } from "./api.js";
import type { ObjectiveDoc, OptimizeBody, SolutionDoc } from "./types.js";

export type PanelPhase = "idle" | "running" | "done" | "failed";

export interface OptimizeConfig {
  parts: number;
  backend: "exact" | "external";
  mode: "exclusive" | "all";
  maxTime: number;
  maxGap: number;
  budget: number;
}

export const DEFAULT_CONFIG: OptimizeConfig = {
  parts: 8,
  backend: "exact",
  mode: "exclusive",
  maxTime: 90,
  maxGap: 0.01,
  budget: 1 << 20,
};

export interface MetricRow {
  label: string;
  value: string;
}

export class OptimizePanel {
  phase: PanelPhase = "idle";
  config: OptimizeConfig = { ...DEFAULT_CONFIG };
  objective?: ObjectiveDoc;
  solution: SolutionDoc | null = null;
  /** Edge overlay; empty unless the last run ended optimal or timed out. */
  flows: Record<string, number> = {};
  banner = "";
  failureDetail = "";
  private abort?: AbortController;

  constructor(private readonly client: Client) {}

  /** Config edits are only allowed while no run is in flight. */
  canLaunch(): boolean {
    return this.phase !== "running";
  }

  setSense(sense: "min" | "max"): void {
    if (this.objective) this.objective.sense = sense;
    // changing the question always re-arms the launcher
    if (this.phase === "done" || this.phase === "failed") this.phase = "idle";
  }

  async launch(networkId: string): Promise<void> {
    if (!this.canLaunch()) throw new Error("a run is already in flight");
    this.phase = "running";
    this.solution = null;
    this.flows = {};
    this.banner = "";
    this.failureDetail = "";
    this.abort = new AbortController();
    try {
      const body: OptimizeBody = {
        kind: "optimize",
        network: networkId,
        parts: this.config.parts,
        backend: this.config.backend,
        mode: this.config.mode,
        limits: {
          max_time: this.config.maxTime,
          max_gap: this.config.maxGap,
          budget: this.config.budget,
        },
      };
      const record = await this.client.createRun(body);
      const final = await this.client.pollRun(record.id, {
        signal: this.abort.signal,
      });
      if (final.status === "failed") {
        this.phase = "failed";
        this.failureDetail = final.detail ?? "run failed";
        return;
      }
      const solution = JSON.parse(await this.client.getResultText(final.id)) as SolutionDoc;
      this.solution = solution;
      if (solution.status === "infeasible" || solution.status === "unbounded") {
        // no stale numbers under an infeasibility banner
        this.banner = `model is ${solution.status}`;
        this.flows = {};
      } else {
        this.flows = { ...solution.flows };
      }
      this.phase = "done";
    } catch (err) {
      this.phase = "failed";
      this.failureDetail = err instanceof Error ? err.message : String(err);
    } finally {
      this.abort = undefined;
    }
  }

  /** Navigation away stops the poll loop. */
  cancel(): void {
    this.abort?.abort();
  }

  /** Back to the configuration menu. */
  reset(): void {
    this.cancel();
    this.phase = "idle";
    this.solution = null;
    this.flows = {};
    this.banner = "";
    this.failureDetail = "";
  }

  metrics(): MetricRow[] {
    const sol = this.solution;
    if (!sol) return [];
    const fmt = (v: number | null) => (v === null ? "-" : String(v));
    return [
      { label: "status", value: sol.status },
      { label: "objective", value: fmt(sol.objective) },
      { label: "gap", value: fmt(sol.gap) },
      { label: "leaf programs", value: String(sol.leaf_count) },
    ];
  }
}
