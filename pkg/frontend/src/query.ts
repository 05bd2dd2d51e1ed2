/**
 * Build a query document from raw form state.
 *
 * Empty optional fields are omitted so the emitted document stays exactly
 * the exchange format the CLI and library accept. Feature ids become
 * string keys; blank interval or bound endpoints become "inf" / "-inf".
 */
import type { Metric, Numberish, QueryDoc, Task, TargetDoc } from "./api.js";

export interface ConstraintRow {
  locked: boolean;
  lo: string;
  hi: string;
}

export interface QueryForm {
  task: Task;
  source: number[];
  targetClasses: number[];
  intervals: Array<[string, string]>;
  metric: Metric;
  weights: string;
  constraints: ConstraintRow[];
  margin: string;
  budgetRegions: string;
  budgetMillis: string;
}

export class QueryFormError extends Error {}

export function emptyForm(task: Task, D: number): QueryForm {
  return {
    task,
    source: new Array(D).fill(0),
    targetClasses: [],
    intervals: [["", ""]],
    metric: "l2sq",
    weights: "",
    constraints: Array.from({ length: D }, () => ({ locked: false, lo: "", hi: "" })),
    margin: "",
    budgetRegions: "",
    budgetMillis: "",
  };
}

function parseNumber(raw: string, what: string): number {
  const value = Number(raw.trim());
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new QueryFormError(`${what}: "${raw}" is not a number`);
  }
  return value;
}

function parseEndpoint(raw: string, fallback: "inf" | "-inf", what: string): Numberish {
  const text = raw.trim();
  if (text === "") return fallback;
  if (text === "inf" || text === "+inf") return "inf";
  if (text === "-inf") return "-inf";
  return parseNumber(text, what);
}

function buildTarget(form: QueryForm): TargetDoc {
  if (form.task === "classification") {
    if (form.targetClasses.length === 0) {
      throw new QueryFormError("pick at least one target class");
    }
    return { classes: [...form.targetClasses].sort((a, b) => a - b) };
  }
  const intervals: Numberish[][] = [];
  for (const [lo, hi] of form.intervals) {
    if (lo.trim() === "" && hi.trim() === "") continue;
    intervals.push([
      parseEndpoint(lo, "-inf", "interval lower endpoint"),
      parseEndpoint(hi, "inf", "interval upper endpoint"),
    ]);
  }
  if (intervals.length === 0) {
    throw new QueryFormError("give at least one target interval endpoint");
  }
  return { intervals };
}

export function buildQueryDoc(form: QueryForm): QueryDoc {
  const doc: QueryDoc = {
    source: [...form.source],
    target: buildTarget(form),
    metric: form.metric,
  };

  if (form.weights.trim() !== "") {
    doc.weights = form.weights
      .split(",")
      .map((part, i) => parseNumber(part, `weight ${i}`));
    if (doc.weights.length !== form.source.length) {
      throw new QueryFormError(
        `${doc.weights.length} weights for ${form.source.length} features`,
      );
    }
  }

  const fix: Record<string, number> = {};
  const bounds: Record<string, [Numberish, Numberish]> = {};
  form.constraints.forEach((row, d) => {
    if (row.locked) {
      fix[String(d)] = form.source[d];
      return;
    }
    if (row.lo.trim() === "" && row.hi.trim() === "") return;
    bounds[String(d)] = [
      parseEndpoint(row.lo, "-inf", `feature ${d} lower bound`),
      parseEndpoint(row.hi, "inf", `feature ${d} upper bound`),
    ];
  });
  if (Object.keys(fix).length > 0) doc.fix = fix;
  if (Object.keys(bounds).length > 0) doc.bounds = bounds;

  if (form.margin.trim() !== "") {
    doc.margin = parseNumber(form.margin, "margin");
  }

  const budget: { regions?: number; millis?: number } = {};
  if (form.budgetRegions.trim() !== "") {
    budget.regions = parseNumber(form.budgetRegions, "region budget");
  }
  if (form.budgetMillis.trim() !== "") {
    budget.millis = parseNumber(form.budgetMillis, "time budget");
  }
  if (budget.regions !== undefined || budget.millis !== undefined) {
    doc.budget = budget;
  }

  return doc;
}
