/**
 * Typed client for the counterfactual search service.
 *
 * Request and response shapes mirror the service exchange formats exactly;
 * nothing here recomputes distances or predictions. Unbounded interval
 * endpoints cross JSON as the strings "inf" / "-inf".
 */

export type Task = "classification" | "regression";
export type Metric = "l2sq" | "l1";
export type Numberish = number | string;

export interface ModelSummary {
  id: string;
  name: string;
  task: Task;
  D: number;
  K: number;
  T: number;
  N: number;
  M: number;
  loaded_at: string;
}

export interface ForestStats {
  trees: number;
  mean_depth: number;
  mean_leaves: number;
}

export interface ModelDetail extends ModelSummary {
  stats: ForestStats;
  groups: Record<string, number>;
}

export interface PredictionDoc {
  vector: number[];
  label?: number;
  value?: number;
}

export interface InstanceDoc {
  index: number;
  x: number[];
  prediction: PredictionDoc;
  region: number[];
}

export interface PointDoc {
  x: number[];
  prediction: PredictionDoc;
  region: number[];
}

export type TargetDoc = { classes: number[] } | { intervals: Numberish[][] };

export interface QueryDoc {
  source: number[];
  target: TargetDoc;
  metric?: Metric;
  weights?: number[];
  fix?: Record<string, number>;
  bounds?: Record<string, [Numberish, Numberish]>;
  margin?: number;
  budget?: { regions?: number; millis?: number };
}

export interface ResultDoc {
  x: number[];
  distance: number;
  region: number[];
  witness: number;
  feasible: boolean;
  scanned: number;
  anytime: boolean;
  method: string;
}

export interface BaselineDoc extends ResultDoc {
  elapsed_ms: number;
}

export interface CounterfactualResponse {
  result: ResultDoc;
  elapsed_ms: number;
  witness_instance?: number[];
  baselines?: { dataset: BaselineDoc | { error: string } };
}

export interface GrowthStepDoc {
  step: number;
  upper_bound: number;
  nonempty: number;
  live: number;
  capped: boolean;
}

export interface GrowthDoc {
  mode: string;
  cap: number;
  steps: GrowthStepDoc[];
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface ServiceClient {
  listModels(): Promise<ModelSummary[]>;
  loadModelByPath(modelPath: string, dataPath: string, header: boolean, labelCol: number | null): Promise<ModelDetail>;
  uploadModel(model: File, data: File, header: boolean, labelCol: number | null): Promise<ModelDetail>;
  getModel(id: string): Promise<ModelDetail>;
  deleteModel(id: string): Promise<void>;
  getInstance(id: string, n: number): Promise<InstanceDoc>;
  predictPoint(id: string, x: number[]): Promise<PointDoc>;
  counterfactual(id: string, query: QueryDoc, withBaselines: boolean): Promise<CounterfactualResponse>;
  growth(id: string, mode: string, cap?: number): Promise<GrowthDoc>;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  if (res.status === 204) return undefined as T;
  let body: unknown = null;
  try {
    body = await res.json();
  } catch {
    body = null;
  }
  if (!res.ok) {
    const detail =
      body !== null && typeof body === "object" && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : res.statusText;
    throw new ApiError(res.status, detail);
  }
  return body as T;
}

const JSON_HEADERS = { "Content-Type": "application/json" };

/** The UI is served under /ui, the API at the server root. */
export function makeClient(base = ".."): ServiceClient {
  return {
    async listModels() {
      const doc = await request<{ models: ModelSummary[] }>(`${base}/models`);
      return doc.models;
    },

    loadModelByPath(modelPath, dataPath, header, labelCol) {
      const body: Record<string, unknown> = { model_path: modelPath, data_path: dataPath, header };
      if (labelCol !== null) body.label_col = labelCol;
      return request<ModelDetail>(`${base}/models`, {
        method: "POST",
        headers: JSON_HEADERS,
        body: JSON.stringify(body),
      });
    },

    uploadModel(model, data, header, labelCol) {
      const form = new FormData();
      form.append("model", model);
      form.append("data", data);
      if (header) form.append("header", "true");
      if (labelCol !== null) form.append("label_col", String(labelCol));
      return request<ModelDetail>(`${base}/models`, { method: "POST", body: form });
    },

    getModel(id) {
      return request<ModelDetail>(`${base}/models/${id}`);
    },

    deleteModel(id) {
      return request<void>(`${base}/models/${id}`, { method: "DELETE" });
    },

    getInstance(id, n) {
      return request<InstanceDoc>(`${base}/models/${id}/instances/${n}`);
    },

    predictPoint(id, x) {
      return request<PointDoc>(`${base}/models/${id}/predict?x=${encodeURIComponent(x.join(","))}`);
    },

    counterfactual(id, query, withBaselines) {
      const body = withBaselines ? { ...query, with_baselines: true } : query;
      return request<CounterfactualResponse>(`${base}/models/${id}/counterfactual`, {
        method: "POST",
        headers: JSON_HEADERS,
        body: JSON.stringify(body),
      });
    },

    growth(id, mode, cap) {
      const params = new URLSearchParams({ mode });
      if (cap !== undefined) params.set("cap", String(cap));
      return request<GrowthDoc>(`${base}/models/${id}/regions/growth?${params}`);
    },
  };
}
