/**
 * Trials panel: build a randomized study config, launch it as a service
 * run, poll progress, and shape the report into a frequency table and
 * bar chart rows.
 */

import type { Client } from "./api.js";
import type {
  ParameterSpecBody,
  RunStatus,
  TrialReport,
  TrialsBody,
} from "./types.js";

export interface ParameterRow {
  target: string;
  field: string;
  pollutant?: string;
  low: number;
  high: number;
  distribution: "uniform" | "normal";
}

export interface FrequencyRow {
  option: string;
  count: number;
  /** Share of all trials, for the bar chart; 0..1. */
  share: number;
}

export class TrialsPanel {
  trials = 100;
  seed = 0;
  parts = 8;
  mode: "exclusive" | "all" = "exclusive";
  jobs = 1;
  maxTime = 90;
  parameters: ParameterRow[] = [];

  phase: "idle" | "running" | "done" | "failed" = "idle";
  progress: RunStatus | "" = "";
  report: TrialReport | null = null;
  failureDetail = "";
  private abort?: AbortController;

  constructor(private readonly client: Client) {}

  addParameter(row: ParameterRow): void {
    if (!(row.low <= row.high)) throw new Error("low must not exceed high");
    this.parameters.push({ ...row });
  }

  removeParameter(index: number): void {
    this.parameters.splice(index, 1);
  }

  body(networkId: string): TrialsBody {
    const parameters: ParameterSpecBody[] = this.parameters.map((p) => {
      const spec: ParameterSpecBody = {
        target: p.target,
        field: p.field,
        low: p.low,
        high: p.high,
        distribution: p.distribution,
      };
      if (p.pollutant) spec.pollutant = p.pollutant;
      return spec;
    });
    return {
      kind: "trials",
      network: networkId,
      jobs: this.jobs,
      config: {
        trials: this.trials,
        seed: this.seed,
        parts: this.parts,
        mode: this.mode,
        parameters,
        limits: { max_time: this.maxTime },
      },
    };
  }

  async launch(networkId: string): Promise<void> {
    if (this.phase === "running") throw new Error("a study is already in flight");
    this.phase = "running";
    this.report = null;
    this.failureDetail = "";
    this.progress = "queued";
    this.abort = new AbortController();
    try {
      const record = await this.client.createRun(this.body(networkId));
      const final = await this.client.pollRun(record.id, {
        signal: this.abort.signal,
        onUpdate: (r) => {
          this.progress = r.status;
        },
      });
      if (final.status === "failed") {
        this.phase = "failed";
        this.failureDetail = final.detail ?? "study failed";
        return;
      }
      this.report = JSON.parse(await this.client.getResultText(final.id)) as TrialReport;
      this.phase = "done";
    } catch (err) {
      this.phase = "failed";
      this.failureDetail = err instanceof Error ? err.message : String(err);
    } finally {
      this.abort = undefined;
    }
  }

  cancel(): void {
    this.abort?.abort();
  }

  /** Table and bar chart share the same rows, widest bar first. */
  frequencyRows(): FrequencyRow[] {
    if (!this.report) return [];
    const total = this.report.trials;
    return Object.entries(this.report.frequencies)
      .map(([option, count]) => ({
        option,
        count,
        share: total > 0 ? count / total : 0,
      }))
      .sort((a, b) => b.count - a.count || a.option.localeCompare(b.option));
  }
}

/**
 * In exclusive mode every optimal trial picks exactly one bucket, so the
 * frequency column must sum to the optimal count.
 */
export function conservationHolds(report: TrialReport): boolean {
  const sum = Object.values(report.frequencies).reduce((a, b) => a + b, 0);
  return sum === (report.counts["optimal"] ?? 0);
}
