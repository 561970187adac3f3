/** JSON shapes returned by the exploration service. */

export interface ParameterPoint {
  buffer_depth: number;
  parallelism_p: number;
  data_width: number;
}

export interface WorkloadSpec {
  kernel_kind: string;
  length_l: number;
  data_width: number;
  name: string;
}

export interface ResourceTable {
  bram_18k: number;
  dsp: number;
  ff: number;
  lut: number;
}

export interface Metrics {
  total_cycles: number;
  wall_time_ns: number;
  resources: ResourceTable;
  utilization_pct: ResourceTable;
  timing_pass: boolean;
  feasible: boolean;
}

export type Verdict = "accepted" | "rejected" | "failed" | "pending";

export interface DataPoint {
  point_id: string;
  design_id: string;
  configuration: ParameterPoint;
  workload: WorkloadSpec;
  device: string;
  metrics: Metrics;
  verdict: Verdict;
  source: string;
  rationale: string | null;
  created_at: string;
}

export interface RunSummary {
  run_id: string;
  design_id: string;
  total_cycles: number;
  utilization_pct: ResourceTable;
  feasible: boolean;
  source_files: string[];
}

export interface RunDetail {
  summary: RunSummary;
  design: Record<string, unknown>;
  report: {
    module_cycles: Record<string, number>;
    total_cycles: number;
    initiation_interval: number;
    wall_time_ns: number;
    resources: ResourceTable;
    utilization_pct: ResourceTable;
    timing_pass: boolean;
    feasible: boolean;
    objective: number | null;
  };
}

export interface RunSource {
  run_id: string;
  files: Record<string, string>;
}

export interface ExplorationSummary {
  iteration: number;
  evaluations: number;
  best: { point: ParameterPoint; objective: number | null } | null;
  pending_verdicts: string[];
  [key: string]: unknown;
}

export interface StepResult {
  iteration: number;
  best: { point: ParameterPoint; objective: number | null } | null;
}

export interface ApiErrorBody {
  status: number;
  code: string;
  message: string;
}
