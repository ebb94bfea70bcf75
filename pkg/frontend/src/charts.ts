// SVG chart rendering. Pure string builders: state in, markup out.
// Pareto membership comes exclusively from the service's /pareto payload —
// the console never computes dominance itself.

import type { ConvergenceRow, TrialView } from "./types";

const W = 420;
const H = 300;
const PAD = 40;

interface Scale {
  (v: number): number;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v: number) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function bounds(values: number[]): [number, number] {
  if (values.length === 0) return [0, 1];
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const margin = 0.05 * (hi - lo || 1);
  return [lo - margin, hi + margin];
}

/**
 * Scatter of the two observed responses with the server-reported
 * non-dominated trials highlighted and threshold reference lines.
 * x = second objective (cycle time), y = first (temperature differential).
 */
export function tradeoffChart(
  trials: TrialView[],
  paretoIds: Set<string>,
  thresholds: (number | null)[],
  names: string[],
): string {
  const observed = trials.filter((t) => t.responses !== null);
  const ys = observed.map((t) => t.responses![0]);
  const xs = observed.map((t) => t.responses![1]);
  const [xLo, xHi] = bounds(xs.concat(thresholds[1] != null ? [thresholds[1]] : []));
  const [yLo, yHi] = bounds(ys.concat(thresholds[0] != null ? [thresholds[0]] : []));
  const sx = linearScale(xLo, xHi, PAD, W - 10);
  const sy = linearScale(yLo, yHi, H - PAD, 10);

  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${W} ${H}" role="img" aria-label="objective trade-off">`);
  parts.push(`<line x1="${PAD}" y1="${H - PAD}" x2="${W - 10}" y2="${H - PAD}" stroke="#333"/>`);
  parts.push(`<line x1="${PAD}" y1="10" x2="${PAD}" y2="${H - PAD}" stroke="#333"/>`);
  parts.push(`<text x="${W / 2}" y="${H - 6}" text-anchor="middle" font-size="11">${names[1] ?? "objective 2"}</text>`);
  parts.push(`<text x="12" y="${H / 2}" font-size="11" transform="rotate(-90 12 ${H / 2})" text-anchor="middle">${names[0] ?? "objective 1"}</text>`);
  if (thresholds[0] != null) {
    const y = sy(thresholds[0]);
    parts.push(`<line class="threshold" x1="${PAD}" y1="${y}" x2="${W - 10}" y2="${y}" stroke="green" stroke-dasharray="4 3"/>`);
  }
  if (thresholds[1] != null) {
    const x = sx(thresholds[1]);
    parts.push(`<line class="threshold" x1="${x}" y1="10" x2="${x}" y2="${H - PAD}" stroke="green" stroke-dasharray="4 3"/>`);
  }
  for (const t of observed) {
    const highlighted = paretoIds.has(t.id);
    const cls = highlighted ? "pareto" : "dominated";
    const fill = highlighted ? "#1f77b4" : "#bbbbbb";
    const r = highlighted ? 5 : 3.5;
    parts.push(
      `<circle class="${cls}" data-trial="${t.id}" cx="${sx(t.responses![1])}" ` +
        `cy="${sy(t.responses![0])}" r="${r}" fill="${fill}"><title>${t.id}</title></circle>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Best-so-far line chart per objective over campaign iterations. */
export function convergenceChart(rows: ConvergenceRow[], names: string[]): string {
  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 ${W} ${H}" role="img" aria-label="convergence">`);
  parts.push(`<line x1="${PAD}" y1="${H - PAD}" x2="${W - 10}" y2="${H - PAD}" stroke="#333"/>`);
  parts.push(`<line x1="${PAD}" y1="10" x2="${PAD}" y2="${H - PAD}" stroke="#333"/>`);
  const usable = rows.filter((r) => r.best.every((b) => b !== null));
  if (usable.length > 0) {
    const sx = linearScale(0, Math.max(usable[usable.length - 1].iteration, 1), PAD, W - 10);
    const colors = ["#1f77b4", "#ff7f0e", "#2ca02c"];
    for (let j = 0; j < names.length; j++) {
      const values = usable.map((r) => r.best[j] as number);
      const [lo, hi] = bounds(values);
      const sy = linearScale(lo, hi, H - PAD, 10);
      const points = usable
        .map((r) => `${sx(r.iteration)},${sy(r.best[j] as number)}`)
        .join(" ");
      parts.push(
        `<polyline class="series" data-objective="${names[j]}" points="${points}" ` +
          `fill="none" stroke="${colors[j % colors.length]}" stroke-width="2"/>`,
      );
    }
  } else {
    parts.push(`<text x="${W / 2}" y="${H / 2}" text-anchor="middle">no observations yet</text>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
