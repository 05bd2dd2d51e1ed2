/**
 * DOM builders for the explorer panels.
 *
 * Every value that came from the service is rendered through fmt(), which
 * is String() and nothing else: no rounding, no recomputation. The only
 * client-side arithmetic is the delta column and chart geometry, both
 * display aids that never replace a service number.
 */
import type {
  CounterfactualResponse,
  GrowthDoc,
  ModelDetail,
  PointDoc,
} from "./api.js";
import { ApiError } from "./api.js";

/** Verbatim rendering of a service value. */
export function fmt(value: number | string | boolean): string {
  return String(value);
}

export function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function el(html: string): HTMLElement {
  const host = document.createElement("div");
  host.innerHTML = html.trim();
  return host.firstElementChild as HTMLElement;
}

export function featureNames(D: number): string[] {
  return Array.from({ length: D }, (_, d) => `x${d}`);
}

/**
 * Side-by-side feature table: source, counterfactual, delta, plus the
 * witness row and the dataset baseline when the response carries them.
 * Rows where the counterfactual moved get the "changed" class.
 */
export function renderResultTable(
  source: number[],
  response: CounterfactualResponse,
  names?: string[],
): HTMLTableElement {
  const result = response.result;
  const labels = names ?? featureNames(source.length);
  const witness = response.witness_instance;
  const dataset =
    response.baselines && !("error" in response.baselines.dataset)
      ? response.baselines.dataset
      : undefined;

  const head = ["feature", "source", "counterfactual", "delta"];
  if (witness) head.push("witness row");
  if (dataset) head.push("dataset baseline");

  const rows = source.map((s, d) => {
    const v = result.x[d];
    const changed = v !== s;
    const cells = [
      `<th>${esc(labels[d])}</th>`,
      `<td>${fmt(s)}</td>`,
      `<td>${fmt(v)}</td>`,
      `<td>${changed ? fmt(v - s) : "0"}</td>`,
    ];
    if (witness) cells.push(`<td>${fmt(witness[d])}</td>`);
    if (dataset) cells.push(`<td>${fmt(dataset.x[d])}</td>`);
    return `<tr${changed ? ' class="changed"' : ""}>${cells.join("")}</tr>`;
  });

  return el(`
    <table class="result-table">
      <thead><tr>${head.map((h) => `<th>${esc(h)}</th>`).join("")}</tr></thead>
      <tbody>${rows.join("")}</tbody>
    </table>
  `) as HTMLTableElement;
}

/** Scalar response fields, one row each, values verbatim. */
export function renderResultStats(response: CounterfactualResponse): HTMLTableElement {
  const r = response.result;
  const rows: Array<[string, string]> = [
    ["distance", fmt(r.distance)],
    ["method", fmt(r.method)],
    ["region", r.region.map(fmt).join(", ")],
    ["witness", fmt(r.witness)],
    ["feasible", fmt(r.feasible)],
    ["scanned", fmt(r.scanned)],
    ["anytime", fmt(r.anytime)],
    ["elapsed_ms", fmt(response.elapsed_ms)],
  ];
  if (response.baselines) {
    const dataset = response.baselines.dataset;
    if ("error" in dataset) {
      rows.push(["dataset baseline", esc(dataset.error)]);
    } else {
      rows.push(
        ["dataset distance", fmt(dataset.distance)],
        ["dataset witness", fmt(dataset.witness)],
        ["dataset scanned", fmt(dataset.scanned)],
        ["dataset elapsed_ms", fmt(dataset.elapsed_ms)],
      );
    }
  }
  return el(`
    <table class="result-stats">
      <tbody>
        ${rows.map(([k, v]) => `<tr><th>${esc(k)}</th><td>${v}</td></tr>`).join("")}
      </tbody>
    </table>
  `) as HTMLTableElement;
}

/** Predicted output for a point, as returned by the predict endpoint. */
export function renderPrediction(title: string, doc: PointDoc): HTMLElement {
  const p = doc.prediction;
  const output =
    p.label !== undefined
      ? `label <strong>${fmt(p.label)}</strong>`
      : `value <strong>${fmt(p.value ?? NaN)}</strong>`;
  return el(`
    <div class="prediction">
      <span class="prediction-title">${esc(title)}</span>
      ${output}
      <span class="vector">[${p.vector.map(fmt).join(", ")}]</span>
      <span class="region">region ${doc.region.map(fmt).join(", ")}</span>
    </div>
  `);
}

export function renderModelCard(detail: ModelDetail): HTMLElement {
  const groups = Object.entries(detail.groups)
    .map(([k, v]) => `<tr><th>${esc(k)}</th><td>${fmt(v)}</td></tr>`)
    .join("");
  return el(`
    <div class="model-card">
      <h3>${esc(detail.name)} <span class="model-id">${esc(detail.id)}</span></h3>
      <table class="model-stats"><tbody>
        <tr><th>task</th><td>${esc(detail.task)}</td></tr>
        <tr><th>features</th><td>${fmt(detail.D)}</td></tr>
        <tr><th>trees</th><td>${fmt(detail.T)}</td></tr>
        <tr><th>rows</th><td>${fmt(detail.N)}</td></tr>
        <tr><th>live regions</th><td>${fmt(detail.M)}</td></tr>
        <tr><th>mean depth</th><td>${fmt(detail.stats.mean_depth)}</td></tr>
        <tr><th>mean leaves</th><td>${fmt(detail.stats.mean_leaves)}</td></tr>
      </tbody></table>
      <h4>${detail.task === "classification" ? "regions per class" : "live output range"}</h4>
      <table class="model-groups"><tbody>${groups}</tbody></table>
    </div>
  `);
}

/** Growth-curve table plus a polyline sketch (geometry is a display aid). */
export function renderGrowth(doc: GrowthDoc): HTMLElement {
  const rows = doc.steps
    .map(
      (s) => `
      <tr${s.capped ? ' class="capped"' : ""}>
        <td>${fmt(s.step)}</td><td>${fmt(s.upper_bound)}</td>
        <td>${fmt(s.nonempty)}</td><td>${fmt(s.live)}</td>
      </tr>`,
    )
    .join("");
  const max = Math.max(1, ...doc.steps.map((s) => s.nonempty));
  const px = (i: number) => 10 + (i * 180) / Math.max(1, doc.steps.length - 1);
  const py = (v: number) => 58 - (v * 48) / max;
  const line = (pick: (s: GrowthDoc["steps"][number]) => number) =>
    doc.steps.map((s, i) => `${px(i)},${py(pick(s))}`).join(" ");
  return el(`
    <div class="growth">
      <svg viewBox="0 0 200 64" class="growth-chart" role="img">
        <polyline points="${line((s) => s.nonempty)}" class="line-nonempty" fill="none"></polyline>
        <polyline points="${line((s) => s.live)}" class="line-live" fill="none"></polyline>
      </svg>
      <table class="growth-table">
        <thead><tr><th>step</th><th>bound</th><th>nonempty</th><th>live</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
    </div>
  `);
}

/** Inline error box; every failed response surfaces here. */
export function renderError(err: unknown): HTMLElement {
  const text =
    err instanceof ApiError
      ? `HTTP ${err.status}: ${err.detail}`
      : err instanceof Error
        ? err.message
        : String(err);
  return el(`<div class="error-box">${esc(text)}</div>`);
}
