// Campaign creation form. Validation happens before any request is sent;
// server-side 422s are surfaced inline on the form.

import { ApiError, CampaignApi } from "./api";
import type { CampaignRequest, FactorConfig } from "./types";

export interface WizardCallbacks {
  onCreated: (id: string) => void;
}

interface FactorRowRefs {
  name: HTMLInputElement;
  unit: HTMLInputElement;
  low: HTMLInputElement;
  high: HTMLInputElement;
  error: HTMLElement;
}

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

function labelled(labelText: string, input: HTMLElement, id: string): HTMLElement {
  const wrap = el("div", { class: "field" });
  const label = el("label", { for: id }, labelText);
  input.setAttribute("id", id);
  wrap.append(label, input);
  return wrap;
}

export class CampaignWizard {
  readonly root: HTMLElement;
  private factorRows: FactorRowRefs[] = [];
  private factorsBody: HTMLElement;
  private objective1Threshold: HTMLInputElement;
  private objective2Threshold: HTMLInputElement;
  private modeSelect: HTMLSelectElement;
  private alphaInput: HTMLInputElement;
  private seedCount: HTMLInputElement;
  private batchSize: HTMLInputElement;
  private maxTrials: HTMLInputElement;
  private seedInput: HTMLInputElement;
  private formError: HTMLElement;
  private boxSummary: HTMLElement;

  constructor(private api: CampaignApi, private callbacks: WizardCallbacks) {
    this.root = el("section", { class: "wizard" });
    this.root.append(el("h2", {}, "New campaign"));

    const form = el("form", { id: "wizard-form" });
    this.factorsBody = el("div", { class: "factors" });
    form.append(el("h3", {}, "Factors"), this.factorsBody);

    const addFactor = el("button", { type: "button", id: "add-factor" }, "Add factor");
    addFactor.addEventListener("click", () => this.addFactorRow());
    form.append(addFactor);

    this.modeSelect = el("select");
    for (const mode of ["single", "multi"]) {
      this.modeSelect.append(el("option", { value: mode }, mode));
    }
    this.modeSelect.value = "multi";
    this.alphaInput = el("input", { type: "number", step: "any", value: "2" });
    this.objective1Threshold = el("input", { type: "text", value: "7" });
    this.objective2Threshold = el("input", { type: "text", value: "33" });
    this.seedCount = el("input", { type: "number", value: "12" });
    this.batchSize = el("input", { type: "number", value: "2" });
    this.maxTrials = el("input", { type: "number", value: "22" });
    this.seedInput = el("input", { type: "number", value: "0" });

    form.append(
      el("h3", {}, "Campaign"),
      labelled("Mode", this.modeSelect, "mode"),
      labelled("Axial distance (alpha)", this.alphaInput, "alpha"),
      labelled("Temperature differential threshold", this.objective1Threshold, "thr-dt"),
      labelled("Cycle time threshold", this.objective2Threshold, "thr-cycle"),
      labelled("Seed experiments", this.seedCount, "seed-count"),
      labelled("Batch size", this.batchSize, "batch-size"),
      labelled("Trial budget", this.maxTrials, "max-trials"),
      labelled("Random seed", this.seedInput, "seed"),
    );

    this.formError = el("p", { class: "error", id: "wizard-error", role: "alert" });
    this.boxSummary = el("p", { class: "box-summary", id: "box-summary" });
    const submit = el("button", { type: "submit", id: "create-campaign" }, "Create campaign");
    form.append(submit, this.formError, this.boxSummary);
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submit();
    });
    this.root.append(form);

    // the reference moulding process as the starting configuration
    this.addFactorRow({ name: "mould_temp_C", unit: "degC", cube_low: 65, cube_high: 85 });
    this.addFactorRow({ name: "cooling_s", unit: "s", cube_low: 20, cube_high: 30 });
    this.addFactorRow({ name: "holding_s", unit: "s", cube_low: 3, cube_high: 6 });
    this.addFactorRow({ name: "barrel_temp_C", unit: "degC", cube_low: 205, cube_high: 225 });
    this.renderBoxSummary();
  }

  addFactorRow(preset?: FactorConfig): void {
    const idx = this.factorRows.length;
    const row = el("div", { class: "factor-row" });
    const name = el("input", { type: "text", "aria-label": `factor ${idx} name` });
    const unit = el("input", { type: "text", "aria-label": `factor ${idx} unit` });
    const low = el("input", { type: "text", "aria-label": `factor ${idx} low level` });
    const high = el("input", { type: "text", "aria-label": `factor ${idx} high level` });
    const error = el("span", { class: "error", "data-role": "factor-error" });
    if (preset) {
      name.value = preset.name;
      unit.value = preset.unit;
      low.value = String(preset.cube_low);
      high.value = String(preset.cube_high);
    }
    for (const input of [low, high]) {
      input.addEventListener("change", () => this.renderBoxSummary());
    }
    row.append(name, unit, low, high, error);
    this.factorsBody.append(row);
    this.factorRows.push({ name, unit, low, high, error });
  }

  /** Natural-unit search box implied by the cube levels and alpha. */
  private boxBounds(): { name: string; lo: number; hi: number }[] {
    const alpha = Number(this.alphaInput.value);
    return this.readFactors()
      .filter((f) => Number.isFinite(f.cube_low) && Number.isFinite(f.cube_high))
      .map((f) => {
        const center = (f.cube_low + f.cube_high) / 2;
        const half = (f.cube_high - f.cube_low) / 2;
        return { name: f.name, lo: center - alpha * half, hi: center + alpha * half };
      });
  }

  renderBoxSummary(): void {
    const parts = this.boxBounds().map((b) => `${b.name}: ${b.lo}–${b.hi}`);
    this.boxSummary.textContent = parts.length ? `Campaign box — ${parts.join(" / ")}` : "";
  }

  private readFactors(): FactorConfig[] {
    return this.factorRows
      .filter((r) => r.name.value.trim() !== "")
      .map((r) => ({
        name: r.name.value.trim(),
        unit: r.unit.value.trim(),
        cube_low: Number(r.low.value),
        cube_high: Number(r.high.value),
      }));
  }

  /** Client-side validation; marks rows and returns overall validity. */
  validate(): boolean {
    let ok = true;
    for (const row of this.factorRows) {
      row.error.textContent = "";
      if (row.name.value.trim() === "") continue;
      const lo = Number(row.low.value);
      const hi = Number(row.high.value);
      if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
        row.error.textContent = "levels must be numeric";
        ok = false;
      } else if (lo >= hi) {
        row.error.textContent = "low level must be below high level";
        ok = false;
      }
    }
    this.formError.textContent = "";
    if (this.modeSelect.value === "multi") {
      for (const input of [this.objective1Threshold, this.objective2Threshold]) {
        if (!Number.isFinite(Number(input.value)) || input.value.trim() === "") {
          this.formError.textContent = "thresholds must be numeric in multi mode";
          ok = false;
        }
      }
    }
    if (this.readFactors().length === 0) {
      this.formError.textContent = "at least one factor is required";
      ok = false;
    }
    return ok;
  }

  buildRequest(): CampaignRequest {
    const multi = this.modeSelect.value === "multi";
    const objectives = multi
      ? [
          { name: "dt_C", unit: "degC", threshold: Number(this.objective1Threshold.value) },
          { name: "cycle_s", unit: "s", threshold: Number(this.objective2Threshold.value) },
        ]
      : [{ name: "dt_C", unit: "degC" }];
    return {
      factors: this.readFactors(),
      objectives,
      alpha: Number(this.alphaInput.value),
      mode: multi ? "multi" : "single",
      seed_count: Number(this.seedCount.value),
      batch_size: Number(this.batchSize.value),
      max_trials: Number(this.maxTrials.value),
      seed: Number(this.seedInput.value),
      seed_from: "ccd",
    };
  }

  async submit(): Promise<void> {
    if (!this.validate()) return; // invalid input: no request leaves the page
    this.renderBoxSummary();
    try {
      const { id } = await this.api.createCampaign(this.buildRequest());
      this.callbacks.onCreated(id);
    } catch (err) {
      if (err instanceof ApiError) {
        this.formError.textContent = err.detail;
      } else {
        this.formError.textContent = String(err);
      }
    }
  }
}
