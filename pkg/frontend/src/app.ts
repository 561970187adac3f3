/** Single-page review dashboard. Reads everything from the service and
 * writes only verdicts and exploration control; reloading the page always
 * reproduces the server's view. */

import { ApiClient, ApiError } from "./api.js";
import { MutationGuard, SortKey, detailFields, sortRows, toCandidateRow } from "./model.js";
import type { CandidateRow } from "./model.js";

const POLL_MS = 2000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className !== undefined) node.className = className;
  return node;
}

export class App {
  private readonly guard = new MutationGuard();
  private rows: CandidateRow[] = [];
  private sortKey: SortKey = "objective";
  private explorationId: string | null = null;
  private pollTimer: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.replaceChildren(
      this.buildControls(),
      el("div", undefined, "error-bar"),
      el("table", undefined, "runs-table"),
      el("div", undefined, "detail-pane"),
      el("div", undefined, "verdict-panel"),
    );
    await this.refresh();
  }

  private showError(err: unknown): void {
    const bar = this.root.querySelector(".error-bar")!;
    bar.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  }

  private clearError(): void {
    this.root.querySelector(".error-bar")!.textContent = "";
  }

  private buildControls(): HTMLElement {
    const bar = el("div", undefined, "controls");
    const sortObjective = el("button", "sort by objective");
    sortObjective.onclick = () => this.setSort("objective");
    const sortUtil = el("button", "sort by utilization");
    sortUtil.onclick = () => this.setSort("utilization");
    const step = el("button", "step exploration");
    step.id = "step-button";
    step.onclick = () => void this.step(step);
    bar.append(sortObjective, sortUtil, step);
    return bar;
  }

  private setSort(key: SortKey): void {
    this.sortKey = key;
    this.renderTable();
  }

  async refresh(): Promise<void> {
    try {
      const points = await this.api.listDataPoints({ limit: 500 });
      this.rows = points.map(toCandidateRow);
      this.renderTable();
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  private renderTable(): void {
    const table = this.root.querySelector<HTMLTableElement>(".runs-table")!;
    table.replaceChildren();
    const header = el("tr");
    for (const title of ["point", "parameters", "cycles", "utilization", "feasible", "verdict"]) {
      header.append(el("th", title));
    }
    table.append(header);
    for (const row of sortRows(this.rows, this.sortKey)) {
      const tr = el("tr", undefined, `verdict-${row.verdict}`);
      tr.append(
        el("td", row.pointId),
        el("td", row.parameterSummary),
        el("td", String(row.totalCycles)),
        el("td", row.utilizationBadges.join(" ")),
        el("td", String(row.feasible)),
        el("td", row.verdict),
      );
      tr.onclick = () => void this.select(row);
      table.append(tr);
    }
  }

  private async select(row: CandidateRow): Promise<void> {
    const pane = this.root.querySelector(".detail-pane")!;
    pane.replaceChildren(el("h2", row.pointId));
    const runId = await this.findRunId(row.designId);
    if (runId !== null) {
      try {
        const detail = await this.api.getRun(runId);
        const dl = el("dl");
        for (const field of detailFields(detail)) {
          dl.append(el("dt", field.label), el("dd", field.value));
        }
        pane.append(dl);
        const source = await this.api.getRunSource(runId);
        for (const [name, text] of Object.entries(source.files)) {
          pane.append(el("h3", name));
          const pre = el("pre", text, "source-view");
          pane.append(pre);
        }
      } catch (err) {
        this.showError(err);
      }
    }
    this.renderVerdictPanel(row);
  }

  private async findRunId(designId: string): Promise<string | null> {
    const runs = await this.api.listRuns();
    const match = runs.find((r) => r.design_id === designId);
    return match ? match.run_id : null;
  }

  private renderVerdictPanel(row: CandidateRow): void {
    const panel = this.root.querySelector(".verdict-panel")!;
    panel.replaceChildren();
    const notes = el("textarea");
    notes.placeholder = "notes";
    const submit = (verdict: "accepted" | "rejected") => () =>
      void this.guard.run(async () => {
        try {
          await this.api.submitVerdict(row.pointId, verdict, notes.value);
          await this.refresh();
          this.clearError();
        } catch (err) {
          this.showError(err);
        }
      });
    const accept = el("button", "accept");
    accept.onclick = submit("accepted");
    const reject = el("button", "reject");
    reject.onclick = submit("rejected");
    panel.append(notes, accept, reject);
  }

  private async step(button: HTMLButtonElement): Promise<void> {
    if (this.guard.isBusy) return;
    button.disabled = true;
    try {
      await this.guard.run(async () => {
        if (this.explorationId === null) {
          const created = await this.api.createExploration(defaultExplorationConfig());
          this.explorationId = created.exploration_id;
          this.startPolling();
        }
        const result = await this.api.stepExploration(this.explorationId);
        const status = this.root.querySelector(".controls")!;
        let label = status.querySelector(".best");
        if (!label) {
          label = el("span", undefined, "best");
          status.append(label);
        }
        label.textContent =
          result.best === null
            ? `iteration ${result.iteration}: no feasible point yet`
            : `iteration ${result.iteration}: best ${result.best.objective} cycles`;
        await this.refresh();
      });
    } catch (err) {
      this.showError(err);
    } finally {
      button.disabled = false;
    }
  }

  private startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = window.setInterval(() => void this.refresh(), POLL_MS);
  }
}

function defaultExplorationConfig(): Record<string, unknown> {
  return {
    workload: { kernel_kind: "vecmul", length_l: 1023, data_width: 32, name: "vecmul-1023" },
    device: {
      name: "xc7z020-clg400-1",
      bram_18k: 280,
      dsp: 220,
      ff: 106400,
      lut: 53200,
      clock_target_ns: 5.0,
    },
    directives: { buffer_depth: [1024, 2048], parallelism_p: [1, 2, 4], data_width: [32] },
    strategy: "exhaustive",
    max_iterations: 12,
  };
}

export function mount(): void {
  const root = document.getElementById("app");
  if (root !== null) {
    void new App(new ApiClient(), root).start();
  }
}
