/** Document and API payload shapes, mirroring the service wire format. */

export type Tag =
  | "fresh_water_source"
  | "wastewater_source"
  | "treatment"
  | "application"
  | "discharge";

export const TAGS: Tag[] = [
  "fresh_water_source",
  "wastewater_source",
  "treatment",
  "application",
  "discharge",
];

export interface PollutantDoc {
  id: string;
  name?: string;
  unit?: string;
}

/** Per-pollutant maps hold raw numbers keyed by pollutant id. */
export interface ComponentDoc {
  tag: Tag;
  capacity?: number;
  supply?: number;
  demand?: number;
  outflow_rate?: number;
  outflow_fixed?: number;
  removal_rate?: Record<string, number>;
  exit_quality?: Record<string, number>;
  quality?: Record<string, number>;
  quality_min?: Record<string, number>;
  quality_max?: Record<string, number>;
  fixed_cost?: number;
  variable_cost?: number;
  fixed_energy?: number;
  variable_energy?: number;
}

export interface EdgeDoc {
  from: string;
  to: string;
  capacity?: number;
  option?: string;
}

export interface ObjectiveDoc {
  kind: "total_flow" | "cost" | "energy";
  sense: "min" | "max";
  scope: string[];
}

export interface NetworkDoc {
  pollutants: PollutantDoc[];
  components: Record<string, ComponentDoc>;
  edges: EdgeDoc[];
  objective?: ObjectiveDoc;
}

export type RunKind = "optimize" | "trials" | "compare";
export type RunStatus = "queued" | "running" | "done" | "failed";

export interface RunRecord {
  id: string;
  kind: RunKind;
  network: string;
  status: RunStatus;
  result_status?: string;
  detail?: string;
}

export interface SolveLimitsBody {
  max_time?: number;
  max_gap?: number;
  budget?: number;
}

export interface OptimizeBody {
  kind?: "optimize";
  network: string;
  parts?: number;
  backend?: "exact" | "external";
  mode?: "exclusive" | "all";
  limits?: SolveLimitsBody;
}

export interface ParameterSpecBody {
  target: string;
  field: string;
  pollutant?: string;
  low: number;
  high: number;
  distribution?: "uniform" | "normal";
}

export interface TrialConfigBody {
  trials?: number;
  seed?: number;
  parts?: number;
  optionsCompared?: string[];
  mode?: "exclusive" | "all";
  parameters?: ParameterSpecBody[];
  limits?: SolveLimitsBody;
}

export interface TrialsBody {
  kind: "trials";
  network: string;
  config: TrialConfigBody;
  jobs?: number;
}

export interface CompareBody {
  kind: "compare";
  network: string;
  config: { variant: string };
  parts?: number;
  limits?: SolveLimitsBody;
}

export type RunBody = OptimizeBody | TrialsBody | CompareBody;

export interface SolutionDoc {
  status: "optimal" | "infeasible" | "unbounded" | "timed_out";
  objective: number | null;
  gap: number | null;
  leaf_count: number;
  flows: Record<string, number>;
  concentrations: Record<string, number>;
  edge_active: Record<string, number>;
  mix_parts: Record<string, number>;
}

export interface PerTrialRow {
  trial: number;
  status: string;
  option: string | null;
  objective: number | null;
}

export interface TrialReport {
  trials: number;
  seed: number;
  parts: number;
  optionsCompared: string[];
  counts: Record<string, number>;
  frequencies: Record<string, number>;
  objective_mean: number | null;
  kpi_means: Record<string, number>;
  per_trial: PerTrialRow[];
}

export interface KpiSide {
  status: string;
  objective: number | null;
  kpis: Record<string, number> | null;
}

export interface CompareReport {
  base: KpiSide;
  variant: KpiSide;
  delta: Record<string, number> | null;
}

export interface Violation {
  code: string;
  element: string;
  message: string;
}
