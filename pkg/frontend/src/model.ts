/** Pure view-model helpers. Every displayed value is the server's value
 * passed through String() — the client never recomputes a metric. */

import type { DataPoint, ResourceTable, RunDetail, Verdict } from "./types.js";

export interface CandidateRow {
  pointId: string;
  designId: string;
  /** e.g. "depth=1024 P=1 width=32" */
  parameterSummary: string;
  totalCycles: number;
  /** e.g. ["BRAM 2%", "DSP 1%", "FF 0%", "LUT 2%"] — server percentages verbatim */
  utilizationBadges: string[];
  feasible: boolean;
  verdict: Verdict;
}

const RESOURCE_LABELS: [keyof ResourceTable, string][] = [
  ["bram_18k", "BRAM"],
  ["dsp", "DSP"],
  ["ff", "FF"],
  ["lut", "LUT"],
];

export function utilizationBadges(utilization: ResourceTable): string[] {
  return RESOURCE_LABELS.map(([key, label]) => `${label} ${utilization[key]}%`);
}

export function toCandidateRow(point: DataPoint): CandidateRow {
  const c = point.configuration;
  return {
    pointId: point.point_id,
    designId: point.design_id,
    parameterSummary: `depth=${c.buffer_depth} P=${c.parallelism_p} width=${c.data_width}`,
    totalCycles: point.metrics.total_cycles,
    utilizationBadges: utilizationBadges(point.metrics.utilization_pct),
    feasible: point.metrics.feasible,
    verdict: point.verdict,
  };
}

export type SortKey = "objective" | "utilization";

/** Sort rows for the runs table. Objective = server total_cycles with
 * infeasible rows last; utilization = server-reported max percentage.
 * Ties break on pointId so ordering is stable across reloads. */
export function sortRows(rows: CandidateRow[], key: SortKey): CandidateRow[] {
  const value = (row: CandidateRow): number => {
    if (key === "objective") {
      return row.feasible ? row.totalCycles : Number.POSITIVE_INFINITY;
    }
    return Math.max(...row.utilizationBadges.map((b) => Number(b.split(" ")[1].replace("%", ""))));
  };
  return [...rows].sort((a, b) => value(a) - value(b) || (a.pointId < b.pointId ? -1 : 1));
}

export interface DetailField {
  label: string;
  value: string;
}

/** Flatten a run detail into label/value pairs for rendering. Values are
 * stringified verbatim from the report. */
export function detailFields(detail: RunDetail): DetailField[] {
  const report = detail.report;
  const fields: DetailField[] = [];
  for (const [name, cycles] of Object.entries(report.module_cycles)) {
    fields.push({ label: `cycles ${name}`, value: String(cycles) });
  }
  fields.push({ label: "total cycles", value: String(report.total_cycles) });
  fields.push({ label: "wall time (ns)", value: String(report.wall_time_ns) });
  for (const [key, label] of RESOURCE_LABELS) {
    fields.push({ label, value: String(report.resources[key]) });
    fields.push({ label: `${label} %`, value: `${report.utilization_pct[key]}%` });
  }
  fields.push({ label: "timing", value: report.timing_pass ? "pass" : "fail" });
  fields.push({ label: "feasible", value: String(report.feasible) });
  fields.push({
    label: "objective",
    value: report.objective === null ? "infeasible" : String(report.objective),
  });
  return fields;
}

/** Serializes mutations: at most one in-flight request, later calls while
 * busy are refused (the caller disables the button / drops the click). */
export class MutationGuard {
  private busy = false;

  get isBusy(): boolean {
    return this.busy;
  }

  async run<T>(action: () => Promise<T>): Promise<T | undefined> {
    if (this.busy) {
      return undefined;
    }
    this.busy = true;
    try {
      return await action();
    } finally {
      this.busy = false;
    }
  }
}
