/**
 * Explorer wiring: load models, edit a source instance, constrain features,
 * submit counterfactual queries, and branch from earlier queries.
 *
 * One query is rendered at a time: each submission bumps a sequence number
 * and a response only renders while its number is still the latest, so a
 * later submission cancels the pending render without touching the server.
 */
import type {
  CounterfactualResponse,
  ModelDetail,
  ModelSummary,
  QueryDoc,
  ServiceClient,
  Task,
} from "./api.js";
import { buildQueryDoc, emptyForm, type QueryForm } from "./query.js";
import {
  esc,
  featureNames,
  fmt,
  renderError,
  renderGrowth,
  renderModelCard,
  renderPrediction,
  renderResultStats,
  renderResultTable,
} from "./render.js";

export interface HistoryEntry {
  id: number;
  modelId: string;
  query: QueryDoc;
  withBaselines: boolean;
  response: CounterfactualResponse;
}

export interface ExplorerState {
  models: ModelSummary[];
  model: ModelDetail | null;
  form: QueryForm | null;
  ranges: Array<{ lo: number; hi: number }> | null;
  withBaselines: boolean;
  history: HistoryEntry[];
  seq: number;
}

const RANGE_SAMPLE = 24;

const SKELETON = `
  <header class="topbar">
    <h1>live-region counterfactual explorer</h1>
    <div class="status" data-role="status"></div>
  </header>
  <section class="panel" data-role="load-panel">
    <h2>models</h2>
    <div class="row">
      <select data-role="model-select"></select>
      <button data-role="refresh">refresh</button>
      <button data-role="unload">unload</button>
    </div>
    <form class="row" data-role="path-form">
      <input name="model_path" placeholder="model path on server" required>
      <input name="data_path" placeholder="data path on server" required>
      <label><input type="checkbox" name="header"> header row</label>
      <input name="label_col" placeholder="label col" size="6">
      <button>load by path</button>
    </form>
    <form class="row" data-role="upload-form">
      <input type="file" name="model" required>
      <input type="file" name="data" required>
      <label><input type="checkbox" name="header"> header row</label>
      <input name="label_col" placeholder="label col" size="6">
      <button>upload</button>
    </form>
    <div data-role="load-error"></div>
  </section>
  <section class="panel" data-role="model-panel" hidden>
    <div data-role="model-card"></div>
    <div class="row">
      <label>instance <input data-role="instance-n" type="number" min="0" value="0" size="8"></label>
      <button data-role="instance-load">use as source</button>
      <button data-role="growth-show">region growth</button>
    </div>
    <div data-role="instance-info"></div>
    <div data-role="growth-host"></div>
  </section>
  <section class="panel" data-role="query-panel" hidden>
    <h2>query</h2>
    <div data-role="source-editor"></div>
    <div data-role="target-editor"></div>
    <details open>
      <summary>constraints</summary>
      <div data-role="constraint-editor"></div>
    </details>
    <div class="row options">
      <label>metric
        <select data-role="metric">
          <option value="l2sq">squared L2</option>
          <option value="l1">L1</option>
        </select>
      </label>
      <label>weights <input data-role="weights" placeholder="w0,w1,…" size="12"></label>
      <label>margin <input data-role="margin" size="6"></label>
      <label>region budget <input data-role="budget-regions" size="6"></label>
      <label>time budget ms <input data-role="budget-millis" size="6"></label>
      <label><input type="checkbox" data-role="baselines" checked> baselines</label>
      <button data-role="submit">find counterfactual</button>
    </div>
    <div data-role="query-error"></div>
  </section>
  <section class="panel" data-role="result-panel" hidden>
    <h2>result</h2>
    <div data-role="result-host"></div>
    <div data-role="predictions"></div>
  </section>
  <section class="panel" data-role="history-panel" hidden>
    <h2>history</h2>
    <ol data-role="history-list"></ol>
  </section>
`;

export function createExplorer(root: HTMLElement, api: ServiceClient) {
  root.innerHTML = SKELETON;
  const pick = <T extends HTMLElement>(role: string) =>
    root.querySelector(`[data-role="${role}"]`) as T;

  const state: ExplorerState = {
    models: [],
    model: null,
    form: null,
    ranges: null,
    withBaselines: true,
    history: [],
    seq: 0,
  };

  const status = pick<HTMLElement>("status");
  const modelSelect = pick<HTMLSelectElement>("model-select");
  const loadError = pick<HTMLElement>("load-error");
  const queryError = pick<HTMLElement>("query-error");
  const resultHost = pick<HTMLElement>("result-host");
  const predictions = pick<HTMLElement>("predictions");
  const historyList = pick<HTMLOListElement>("history-list");

  function showError(host: HTMLElement, err: unknown) {
    host.replaceChildren(renderError(err));
  }

  function setStatus(text: string) {
    status.textContent = text;
  }

  // ---- model management ----

  async function refreshModels() {
    try {
      state.models = await api.listModels();
      loadError.replaceChildren();
    } catch (err) {
      showError(loadError, err);
      return;
    }
    modelSelect.replaceChildren(
      ...state.models.map((m) => {
        const opt = document.createElement("option");
        opt.value = m.id;
        opt.textContent = `${m.id} ${m.name} (${m.task}, D=${m.D}, M=${m.M})`;
        if (state.model && state.model.id === m.id) opt.selected = true;
        return opt;
      }),
    );
  }

  async function selectModel(id: string) {
    let detail: ModelDetail;
    try {
      detail = await api.getModel(id);
    } catch (err) {
      showError(loadError, err);
      return;
    }
    state.model = detail;
    state.form = emptyForm(detail.task as Task, detail.D);
    state.ranges = null;
    pick<HTMLElement>("model-panel").hidden = false;
    pick<HTMLElement>("query-panel").hidden = false;
    pick<HTMLElement>("model-card").replaceChildren(renderModelCard(detail));
    pick<HTMLElement>("growth-host").replaceChildren();
    pick<HTMLElement>("instance-info").replaceChildren();
    await sampleRanges(detail);
    buildQueryEditors();
    setStatus(`${detail.id} ready`);
  }

  /** Observed per-feature ranges from a spread of dataset rows (display aid). */
  async function sampleRanges(detail: ModelDetail) {
    const count = Math.min(RANGE_SAMPLE, detail.N);
    const picks = new Set<number>();
    for (let i = 0; i < count; i++) {
      picks.add(Math.floor((i * (detail.N - 1)) / Math.max(1, count - 1)));
    }
    try {
      const rows = await Promise.all([...picks].map((n) => api.getInstance(detail.id, n)));
      const lo = [...rows[0].x];
      const hi = [...rows[0].x];
      for (const row of rows) {
        row.x.forEach((v, d) => {
          lo[d] = Math.min(lo[d], v);
          hi[d] = Math.max(hi[d], v);
        });
      }
      state.ranges = lo.map((v, d) => ({ lo: v, hi: hi[d] }));
      if (state.form) state.form.source = [...rows[0].x];
    } catch {
      state.ranges = null;
    }
  }

  // ---- query editors ----

  function buildQueryEditors() {
    const model = state.model;
    const form = state.form;
    if (!model || !form) return;
    const names = featureNames(model.D);

    const sourceHost = pick<HTMLElement>("source-editor");
    sourceHost.innerHTML = `<h3>source</h3><div class="feature-grid">${names
      .map((name, d) => {
        const range = state.ranges?.[d];
        const hint = range ? `observed ${fmt(range.lo)} to ${fmt(range.hi)}` : "";
        return `
          <label>${name}
            <input data-feature="${d}" value="${fmt(form.source[d])}" title="${hint}">
            <small>${hint}</small>
          </label>`;
      })
      .join("")}</div>`;
    sourceHost.querySelectorAll<HTMLInputElement>("input[data-feature]").forEach((input) => {
      input.addEventListener("change", () => {
        const d = Number(input.dataset.feature);
        const v = Number(input.value);
        if (Number.isFinite(v)) form.source[d] = v;
      });
    });

    const targetHost = pick<HTMLElement>("target-editor");
    if (model.task === "classification") {
      targetHost.innerHTML = `<h3>target classes</h3><div class="row">${Array.from(
        { length: model.K },
        (_, k) => {
          const live = model.groups[String(k)] ?? 0;
          const on = form.targetClasses.includes(k) ? " checked" : "";
          return `<label><input type="checkbox" data-class="${k}"${on}> ${k} <small>(${fmt(
            live,
          )} live)</small></label>`;
        },
      ).join("")}</div>`;
      targetHost.querySelectorAll<HTMLInputElement>("input[data-class]").forEach((box) => {
        box.addEventListener("change", () => {
          const k = Number(box.dataset.class);
          form.targetClasses = box.checked
            ? [...form.targetClasses, k]
            : form.targetClasses.filter((c) => c !== k);
        });
      });
    } else {
      const [lo0, hi0] = form.intervals[0] ?? ["", ""];
      targetHost.innerHTML = `<h3>target interval</h3><div class="row">
        <input data-role="interval-lo" placeholder="lower or -inf" size="10" value="${esc(lo0)}">
        <input data-role="interval-hi" placeholder="upper or inf" size="10" value="${esc(hi0)}">
        <small>live outputs ${esc2(model.groups["min"])} to ${esc2(model.groups["max"])}</small>
      </div>`;
      const lo = targetHost.querySelector<HTMLInputElement>('[data-role="interval-lo"]')!;
      const hi = targetHost.querySelector<HTMLInputElement>('[data-role="interval-hi"]')!;
      const sync = () => {
        form.intervals = [[lo.value, hi.value]];
      };
      lo.addEventListener("change", sync);
      hi.addEventListener("change", sync);
    }

    const constraintHost = pick<HTMLElement>("constraint-editor");
    constraintHost.innerHTML = `<table class="constraint-table">
      <thead><tr><th>feature</th><th>lock</th><th>min</th><th>max</th></tr></thead>
      <tbody>${names
        .map((name, d) => {
          const row = form.constraints[d];
          return `
        <tr>
          <th>${name}</th>
          <td><input type="checkbox" data-lock="${d}"${row.locked ? " checked" : ""}></td>
          <td><input data-lo="${d}" size="8" value="${esc(row.lo)}"></td>
          <td><input data-hi="${d}" size="8" value="${esc(row.hi)}"></td>
        </tr>`;
        })
        .join("")}</tbody>
    </table>`;
    constraintHost.querySelectorAll<HTMLInputElement>("input").forEach((input) => {
      input.addEventListener("change", () => {
        const row = (field: string) => form.constraints[Number(input.dataset[field])];
        if (input.dataset.lock !== undefined) row("lock").locked = input.checked;
        else if (input.dataset.lo !== undefined) row("lo").lo = input.value;
        else if (input.dataset.hi !== undefined) row("hi").hi = input.value;
      });
    });
  }

  function esc2(value: number | undefined): string {
    return value === undefined ? "?" : fmt(value);
  }

  function readOptions() {
    const form = state.form;
    if (!form) return;
    form.metric = pick<HTMLSelectElement>("metric").value as QueryForm["metric"];
    form.weights = pick<HTMLInputElement>("weights").value;
    form.margin = pick<HTMLInputElement>("margin").value;
    form.budgetRegions = pick<HTMLInputElement>("budget-regions").value;
    form.budgetMillis = pick<HTMLInputElement>("budget-millis").value;
    state.withBaselines = pick<HTMLInputElement>("baselines").checked;
  }

  // ---- submission ----

  async function submit(): Promise<HistoryEntry | null> {
    const model = state.model;
    const form = state.form;
    if (!model || !form) return null;
    readOptions();
    let query: QueryDoc;
    try {
      query = buildQueryDoc(form);
      queryError.replaceChildren();
    } catch (err) {
      showError(queryError, err);
      return null;
    }

    const my = ++state.seq;
    setStatus("searching…");
    try {
      const response = await api.counterfactual(model.id, query, state.withBaselines);
      if (my !== state.seq) return null;
      const entry: HistoryEntry = {
        id: my,
        modelId: model.id,
        query,
        withBaselines: state.withBaselines,
        response,
      };
      state.history.unshift(entry);
      renderResult(entry);
      renderHistory();
      setStatus("done");
      void showPredictions(my, model.id, query.source, response.result.x);
      return entry;
    } catch (err) {
      if (my === state.seq) {
        showError(queryError, err);
        setStatus("failed");
      }
      return null;
    }
  }

  async function showPredictions(my: number, id: string, source: number[], x: number[]) {
    try {
      const [src, ce] = await Promise.all([
        api.predictPoint(id, source),
        api.predictPoint(id, x),
      ]);
      if (my !== state.seq) return;
      predictions.replaceChildren(
        renderPrediction("source", src),
        renderPrediction("counterfactual", ce),
      );
    } catch (err) {
      if (my === state.seq) showError(predictions, err);
    }
  }

  function renderResult(entry: HistoryEntry) {
    pick<HTMLElement>("result-panel").hidden = false;
    resultHost.replaceChildren(
      renderResultTable(entry.query.source, entry.response),
      renderResultStats(entry.response),
    );
    predictions.replaceChildren();
  }

  function renderHistory() {
    pick<HTMLElement>("history-panel").hidden = state.history.length === 0;
    historyList.replaceChildren(
      ...state.history.map((entry) => {
        const item = document.createElement("li");
        const r = entry.response.result;
        item.innerHTML = `
          <span>#${entry.id} ${entry.modelId} d=${fmt(r.distance)} scanned=${fmt(r.scanned)}</span>
          <button data-entry="${entry.id}">branch</button>`;
        item.querySelector("button")!.addEventListener("click", () => restore(entry));
        return item;
      }),
    );
  }

  /** Put a past query back into the editors so it can be tweaked and rerun. */
  function restore(entry: HistoryEntry) {
    const model = state.model;
    if (!model || model.id !== entry.modelId || !state.form) return;
    const q = entry.query;
    const form = emptyForm(model.task as Task, model.D);
    form.source = [...q.source];
    if ("classes" in q.target) form.targetClasses = [...q.target.classes];
    else form.intervals = q.target.intervals.map(([lo, hi]) => [String(lo), String(hi)]);
    form.metric = q.metric ?? "l2sq";
    form.weights = q.weights ? q.weights.join(",") : "";
    form.margin = q.margin !== undefined ? String(q.margin) : "";
    form.budgetRegions = q.budget?.regions !== undefined ? String(q.budget.regions) : "";
    form.budgetMillis = q.budget?.millis !== undefined ? String(q.budget.millis) : "";
    for (const [d, pair] of Object.entries(q.bounds ?? {})) {
      form.constraints[Number(d)] = { locked: false, lo: String(pair[0]), hi: String(pair[1]) };
    }
    for (const d of Object.keys(q.fix ?? {})) {
      form.constraints[Number(d)].locked = true;
    }
    state.form = form;
    buildQueryEditors();
    syncOptionInputs();
    renderResult(entry);
    renderHistory();
  }

  function syncOptionInputs() {
    const form = state.form;
    if (!form) return;
    pick<HTMLSelectElement>("metric").value = form.metric;
    pick<HTMLInputElement>("weights").value = form.weights;
    pick<HTMLInputElement>("margin").value = form.margin;
    pick<HTMLInputElement>("budget-regions").value = form.budgetRegions;
    pick<HTMLInputElement>("budget-millis").value = form.budgetMillis;
  }

  // ---- static wiring ----

  pick<HTMLButtonElement>("refresh").addEventListener("click", () => void refreshModels());
  modelSelect.addEventListener("change", () => void selectModel(modelSelect.value));
  pick<HTMLButtonElement>("unload").addEventListener("click", async () => {
    if (!modelSelect.value) return;
    try {
      await api.deleteModel(modelSelect.value);
      if (state.model && state.model.id === modelSelect.value) {
        state.model = null;
        state.form = null;
        pick<HTMLElement>("model-panel").hidden = true;
        pick<HTMLElement>("query-panel").hidden = true;
      }
      await refreshModels();
    } catch (err) {
      showError(loadError, err);
    }
  });

  pick<HTMLFormElement>("path-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const data = new FormData(ev.target as HTMLFormElement);
    const labelCol = String(data.get("label_col") ?? "").trim();
    try {
      const detail = await api.loadModelByPath(
        String(data.get("model_path")),
        String(data.get("data_path")),
        data.get("header") !== null,
        labelCol === "" ? null : Number(labelCol),
      );
      await refreshModels();
      modelSelect.value = detail.id;
      await selectModel(detail.id);
    } catch (err) {
      showError(loadError, err);
    }
  });

  pick<HTMLFormElement>("upload-form").addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const formEl = ev.target as HTMLFormElement;
    const data = new FormData(formEl);
    const model = data.get("model");
    const csv = data.get("data");
    if (!(model instanceof File) || !(csv instanceof File)) return;
    const labelCol = String(data.get("label_col") ?? "").trim();
    try {
      const detail = await api.uploadModel(
        model,
        csv,
        data.get("header") !== null,
        labelCol === "" ? null : Number(labelCol),
      );
      await refreshModels();
      modelSelect.value = detail.id;
      await selectModel(detail.id);
    } catch (err) {
      showError(loadError, err);
    }
  });

  pick<HTMLButtonElement>("instance-load").addEventListener("click", async () => {
    const model = state.model;
    if (!model) return;
    const n = Number(pick<HTMLInputElement>("instance-n").value);
    try {
      const inst = await api.getInstance(model.id, n);
      if (state.form) state.form.source = [...inst.x];
      buildQueryEditors();
      pick<HTMLElement>("instance-info").replaceChildren(
        renderPrediction(`row ${inst.index}`, inst),
      );
    } catch (err) {
      showError(pick<HTMLElement>("instance-info"), err);
    }
  });

  pick<HTMLButtonElement>("growth-show").addEventListener("click", async () => {
    const model = state.model;
    if (!model) return;
    try {
      const doc = await api.growth(model.id, "by-trees");
      pick<HTMLElement>("growth-host").replaceChildren(renderGrowth(doc));
    } catch (err) {
      showError(pick<HTMLElement>("growth-host"), err);
    }
  });

  pick<HTMLButtonElement>("submit").addEventListener("click", () => void submit());

  void refreshModels();

  return { state, refreshModels, selectModel, submit, restore };
}
