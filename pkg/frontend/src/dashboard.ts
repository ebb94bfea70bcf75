// Campaign dashboard: trial table with observation entry, suggestion
// control, status badge and the two charts. All numbers come from the
// service; the dashboard only renders.

import { ApiError, CampaignApi } from "./api";
import { convergenceChart, tradeoffChart } from "./charts";
import type { CampaignView, ConvergenceView, ParetoPoint } from "./types";

const TERMINAL = new Set(["converged", "threshold_met", "budget_exhausted"]);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export class CampaignDashboard {
  readonly root: HTMLElement;
  private statusBadge: HTMLElement;
  private banner: HTMLElement;
  private table: HTMLElement;
  private suggestButton: HTMLButtonElement;
  private tradeoffHost: HTMLElement;
  private convergenceHost: HTMLElement;
  private state: CampaignView | null = null;
  private pareto: ParetoPoint[] = [];
  private convergence: ConvergenceView = { iterations: [], proposal_distances: [] };

  constructor(private api: CampaignApi, readonly campaignId: string) {
    this.root = el("section", { class: "dashboard" });
    this.statusBadge = el("span", { class: "badge", id: "status-badge" });
    const heading = el("h2", {}, `Campaign ${campaignId} `);
    heading.append(this.statusBadge);
    this.banner = el("p", { class: "banner", role: "alert", id: "conflict-banner" });
    this.table = el("div", { class: "trials" });
    this.suggestButton = el("button", { type: "button", id: "request-suggestions" },
      "Request next settings");
    this.suggestButton.addEventListener("click", () => void this.requestSuggestions());
    this.tradeoffHost = el("div", { id: "tradeoff-chart" });
    this.convergenceHost = el("div", { id: "convergence-chart" });
    this.root.append(
      heading,
      this.banner,
      this.suggestButton,
      this.table,
      el("h3", {}, "Trade-off"),
      this.tradeoffHost,
      el("h3", {}, "Convergence"),
      this.convergenceHost,
    );
  }

  async refresh(): Promise<void> {
    this.state = await this.api.getCampaign(this.campaignId);
    if (this.state.trials.some((t) => t.status === "observed")) {
      this.pareto = (await this.api.getPareto(this.campaignId)).points;
      this.convergence = await this.api.getConvergence(this.campaignId);
    } else {
      this.pareto = [];
      this.convergence = { iterations: [], proposal_distances: [] };
    }
    this.render();
  }

  /** Apply a server-returned campaign state without refetching. */
  reconcile(state: CampaignView): void {
    this.state = state;
    this.render();
  }

  private objectiveNames(): string[] {
    return this.state ? this.state.config.objectives.map((o) => o.name) : [];
  }

  render(): void {
    if (!this.state) return;
    const st = this.state;
    this.statusBadge.textContent = st.status.replace("_", " ");
    this.statusBadge.setAttribute("data-status", st.status);
    this.statusBadge.className = `badge ${TERMINAL.has(st.status) ? "badge-final" : ""}`;

    const pending = st.trials.filter((t) => t.status === "pending");
    this.suggestButton.disabled =
      pending.length > 0 || TERMINAL.has(st.status) || st.status === "created";

    this.table.replaceChildren();
    const header = el("div", { class: "trial-row trial-header" });
    const factorNames = st.config.space.factors.map((f) => f.name);
    header.append(
      el("span", {}, "trial"),
      el("span", {}, factorNames.join(" / ")),
      el("span", {}, this.objectiveNames().join(" / ")),
    );
    this.table.append(header);
    for (const trial of st.trials) {
      const row = el("div", { class: `trial-row trial-${trial.status}`, "data-trial": trial.id });
      // settings shown at machine-entry precision; exact values in the tooltip
      const settingsCell = el("span", {
        title: trial.settings.map((v) => String(v)).join(" / "),
      }, trial.settings.map((v) => v.toFixed(1)).join(" / "));
      row.append(el("span", {}, `${trial.id} (${trial.provenance})`), settingsCell);
      if (trial.responses) {
        row.append(el("span", { "data-role": "responses" },
          trial.responses.map((v) => String(v)).join(" / ")));
      } else {
        row.append(this.observationForm(trial.id));
      }
      this.table.append(row);
    }

    const thresholds = st.config.objectives.map((o) => o.threshold ?? null);
    if (this.objectiveNames().length >= 2) {
      const ids = new Set(this.pareto.map((p) => p.id));
      this.tradeoffHost.innerHTML = tradeoffChart(st.trials, ids, thresholds, this.objectiveNames());
    } else {
      this.tradeoffHost.innerHTML = "";
    }
    this.convergenceHost.innerHTML = convergenceChart(
      this.convergence.iterations, this.objectiveNames(),
    );
  }

  private observationForm(trialId: string): HTMLElement {
    const form = el("form", { class: "observe-form", "data-trial": trialId });
    const inputs: HTMLInputElement[] = [];
    for (const name of this.objectiveNames()) {
      const input = el("input", {
        type: "text",
        "aria-label": `${trialId} ${name}`,
        name,
      });
      inputs.push(input);
      form.append(input);
    }
    form.append(el("button", { type: "submit" }, "Save"));
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const values = inputs.map((i) => Number(i.value));
      if (inputs.some((i) => i.value.trim() === "") || values.some((v) => !Number.isFinite(v))) {
        form.setAttribute("data-error", "responses must be numeric");
        return;
      }
      void this.submitObservation(trialId, values);
    });
    return form;
  }

  async submitObservation(trialId: string, responses: number[]): Promise<void> {
    if (!this.state) return;
    this.banner.textContent = "";
    // optimistic: mark the row observed locally, then reconcile with the server
    const optimistic: CampaignView = {
      ...this.state,
      trials: this.state.trials.map((t) =>
        t.id === trialId ? { ...t, responses, status: "observed" as const } : t,
      ),
    };
    this.reconcile(optimistic);
    try {
      const server = await this.api.postObservation(this.campaignId, trialId, responses);
      this.reconcile(server);
      if (server.trials.some((t) => t.status === "observed")) {
        this.pareto = (await this.api.getPareto(this.campaignId)).points;
        this.convergence = await this.api.getConvergence(this.campaignId);
        this.render();
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.banner.textContent = `Observation conflict: ${err.detail} — refreshing.`;
        await this.refresh();
      } else {
        this.banner.textContent = String(err);
        await this.refresh();
      }
    }
  }

  async requestSuggestions(): Promise<void> {
    this.banner.textContent = "";
    try {
      await this.api.requestSuggestions(this.campaignId);
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.banner.textContent = `Cannot suggest yet: ${err.detail}`;
        await this.refresh();
      } else {
        this.banner.textContent = String(err);
      }
    }
  }
}
