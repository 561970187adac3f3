import type { DataPoint, RunDetail } from "../src/types.js";

/** The shipped vector-multiply fixture exactly as the service reports it
 * (depth 1024, one lane, 32-bit on the xc7z020-class device). */
export const VECMUL_POINT: DataPoint = {
  point_id: "cd58a4ef13169249-analytical-0001",
  design_id: "cd58a4ef131692490000000000000000000000000000000000000000000000cd",
  configuration: { buffer_depth: 1024, parallelism_p: 1, data_width: 32 },
  workload: { kernel_kind: "vecmul", length_l: 1023, data_width: 32, name: "vecmul-1023" },
  device: "xc7z020-clg400-1",
  metrics: {
    total_cycles: 2060,
    wall_time_ns: 10300.0,
    resources: { bram_18k: 6, dsp: 3, ff: 993, lut: 1113 },
    utilization_pct: { bram_18k: 2, dsp: 1, ff: 0, lut: 2 },
    timing_pass: true,
    feasible: true,
  },
  verdict: "pending",
  source: "analytical",
  rationale: null,
  created_at: "1970-01-01T00:00:01+00:00",
};

export const VECMUL_RUN_DETAIL: RunDetail = {
  summary: {
    run_id: "0001-cd58a4ef1316",
    design_id: VECMUL_POINT.design_id,
    total_cycles: 2060,
    utilization_pct: { bram_18k: 2, dsp: 1, ff: 0, lut: 2 },
    feasible: true,
    source_files: ["accelerator.sc", "driver.cc", "build_manifest.json"],
  },
  design: {},
  report: {
    module_cycles: { HW_MAIN: 3, Send: 1030, Compute: 1036, Recv: 2059 },
    total_cycles: 2060,
    initiation_interval: 2060,
    wall_time_ns: 10300.0,
    resources: { bram_18k: 6, dsp: 3, ff: 993, lut: 1113 },
    utilization_pct: { bram_18k: 2, dsp: 1, ff: 0, lut: 2 },
    timing_pass: true,
    feasible: true,
    objective: 2060,
  },
};

export function makePoint(overrides: Partial<DataPoint>): DataPoint {
  return { ...structuredClone(VECMUL_POINT), ...overrides };
}
