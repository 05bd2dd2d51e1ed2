"""HTTP service exposing model loading and counterfactual search.

Models are parsed and indexed once at load time and kept in memory under
generated ids. The counterfactual endpoint accepts the same query document
as the library and returns the same result document, plus timing metadata
and optional baselines for display.

Run with ``uvicorn lire.service:app`` or ``python -m lire.service``; the
server binds loopback by default.
"""
from __future__ import annotations

import functools
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse

from .dataio import load_csv, load_csv_text
from .engine import (
    LiveRegionIndex,
    build_index,
    dataset_search,
    find_ce,
    query_from_doc,
)
from .errors import (
    CESearchError,
    DimensionMismatchError,
    ForestFormatError,
    IndexFormatError,
    LireError,
    QueryValidationError,
    TargetTaskMismatchError,
)
from .forest import (
    TASK_CLASSIFICATION,
    Forest,
    check_instance,
    forest_stats,
    leaf_tuple,
    load_forest,
    parse_forest,
    predict,
)
from .regions import DEFAULT_CAP, MODE_BY_DEPTH, MODE_BY_TREES, region_growth_curve


@dataclass
class ModelEntry:
    id: str
    name: str
    forest: Forest
    X: np.ndarray
    index: LiveRegionIndex
    loaded_at: str


class Registry:
    """Thread-safe in-memory model store with sequential ids."""

    def __init__(self):
        self._lock = threading.Lock()
        self._models: dict[str, ModelEntry] = {}
        self._next = 1

    def add(self, name: str, forest: Forest, X: np.ndarray) -> ModelEntry:
        index = build_index(forest, X)
        with self._lock:
            mid = f"m{self._next}"
            self._next += 1
            entry = ModelEntry(
                mid, name, forest, X, index,
                datetime.now(timezone.utc).isoformat(timespec="seconds"),
            )
            self._models[mid] = entry
        return entry

    def get(self, mid: str) -> ModelEntry:
        with self._lock:
            entry = self._models.get(mid)
        if entry is None:
            raise HTTPException(404, f"unknown model {mid!r}")
        return entry

    def remove(self, mid: str) -> None:
        with self._lock:
            if mid not in self._models:
                raise HTTPException(404, f"unknown model {mid!r}")
            del self._models[mid]

    def all(self) -> list[ModelEntry]:
        with self._lock:
            return sorted(self._models.values(), key=lambda e: int(e.id[1:]))


def _guard(fn):
    @functools.wraps(fn)
    async def wrapper(*args, **kwargs):
        try:
            return await fn(*args, **kwargs)
        except HTTPException:
            raise
        except TargetTaskMismatchError as exc:
            raise HTTPException(409, str(exc)) from exc
        except CESearchError as exc:
            raise HTTPException(422, str(exc)) from exc
        except (
            QueryValidationError,
            ForestFormatError,
            IndexFormatError,
            DimensionMismatchError,
            ValueError,
            OSError,
        ) as exc:
            raise HTTPException(400, str(exc)) from exc
        except LireError as exc:
            raise HTTPException(500, f"internal error: {exc}") from exc

    return wrapper


def _summary(entry: ModelEntry) -> dict:
    return {
        "id": entry.id,
        "name": entry.name,
        "task": entry.forest.task,
        "D": entry.forest.D,
        "K": entry.forest.K,
        "T": entry.forest.T,
        "N": int(len(entry.X)),
        "M": entry.index.M,
        "loaded_at": entry.loaded_at,
    }


def _prediction_doc(forest: Forest, x: np.ndarray) -> dict:
    pred = predict(forest, x)
    doc = {"vector": [float(v) for v in pred.vector]}
    if forest.task == TASK_CLASSIFICATION:
        doc["label"] = pred.label
    else:
        doc["value"] = pred.value
    return doc


def _truthy(raw) -> bool:
    return str(raw).strip().lower() in ("1", "true", "yes", "on")


def create_app(registry: Registry | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="lire", docs_url=None, redoc_url=None)
    reg = registry or Registry()
    app.state.registry = reg

    try:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )
    except ImportError:
        pass

    @app.exception_handler(Exception)
    async def _internal(_req, exc):
        return JSONResponse(status_code=500, content={"detail": f"internal error: {exc}"})

    @app.post("/models", status_code=201)
    @_guard
    async def post_model(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            model_file = form.get("model")
            data_file = form.get("data")
            if model_file is None or data_file is None:
                raise HTTPException(400, "multipart upload needs 'model' and 'data' files")
            forest = parse_forest((await model_file.read()).decode("utf-8"))
            X = load_csv_text(
                (await data_file.read()).decode("utf-8"),
                header=_truthy(form.get("header", "")),
                label_col=int(form["label_col"]) if form.get("label_col") else None,
            )
            name = getattr(model_file, "filename", "") or "upload"
        else:
            try:
                body = await request.json()
            except Exception as exc:
                raise HTTPException(400, f"malformed JSON body: {exc}") from exc
            if not isinstance(body, dict) or "model_path" not in body or "data_path" not in body:
                raise HTTPException(400, "JSON load needs 'model_path' and 'data_path'")
            forest = load_forest(body["model_path"])
            X = load_csv(
                body["data_path"],
                header=bool(body.get("header", False)),
                label_col=body.get("label_col"),
            )
            name = os.path.basename(str(body["model_path"]))
        entry = reg.add(name, forest, X)
        st = forest_stats(entry.forest)
        return {
            **_summary(entry),
            "stats": {
                "trees": st.n_trees,
                "mean_depth": st.mean_depth,
                "mean_leaves": st.mean_leaves,
            },
        }

    @app.get("/models")
    @_guard
    async def list_models():
        return {"models": [_summary(e) for e in reg.all()]}

    @app.get("/models/{mid}")
    @_guard
    async def get_model(mid: str):
        entry = reg.get(mid)
        st = forest_stats(entry.forest)
        return {
            **_summary(entry),
            "stats": {
                "trees": st.n_trees,
                "mean_depth": st.mean_depth,
                "mean_leaves": st.mean_leaves,
            },
            "groups": {str(k): v for k, v in entry.index.group_sizes().items()},
        }

    @app.delete("/models/{mid}", status_code=204)
    @_guard
    async def delete_model(mid: str):
        reg.remove(mid)
        return Response(status_code=204)

    @app.get("/models/{mid}/instances/{n}")
    @_guard
    async def get_instance(mid: str, n: int):
        entry = reg.get(mid)
        if not 0 <= n < len(entry.X):
            raise HTTPException(404, f"instance {n} out of range for {len(entry.X)} rows")
        x = entry.X[n]
        return {
            "index": n,
            "x": [float(v) for v in x],
            "prediction": _prediction_doc(entry.forest, x),
            "region": [int(k) for k in leaf_tuple(entry.forest, x)],
        }

    @app.post("/models/{mid}/counterfactual")
    @_guard
    async def counterfactual(mid: str, request: Request):
        entry = reg.get(mid)
        try:
            body = await request.json()
        except Exception as exc:
            raise HTTPException(400, f"malformed JSON body: {exc}") from exc
        if not isinstance(body, dict):
            raise HTTPException(400, "body must be a query object")
        body = dict(body)
        with_baselines = bool(body.pop("with_baselines", False))
        query = query_from_doc(body)
        t0 = time.perf_counter()
        res = find_ce(entry.forest, entry.index, query)
        elapsed = (time.perf_counter() - t0) * 1000.0
        out = {"result": res.to_doc(), "elapsed_ms": elapsed}
        if with_baselines:
            out["witness_instance"] = [float(v) for v in entry.X[res.witness]]
            try:
                t0 = time.perf_counter()
                base = dataset_search(entry.forest, entry.X, query)
                out["baselines"] = {
                    "dataset": {
                        **base.to_doc(),
                        "elapsed_ms": (time.perf_counter() - t0) * 1000.0,
                    }
                }
            except CESearchError as exc:
                out["baselines"] = {"dataset": {"error": str(exc)}}
        return out

    @app.get("/models/{mid}/regions/growth")
    @_guard
    async def growth(mid: str, mode: str = MODE_BY_TREES, cap: int = DEFAULT_CAP):
        entry = reg.get(mid)
        if mode not in (MODE_BY_TREES, MODE_BY_DEPTH):
            raise HTTPException(400, f"mode must be {MODE_BY_TREES} or {MODE_BY_DEPTH}")
        if cap < 1:
            raise HTTPException(400, "cap must be positive")
        curve = region_growth_curve(entry.forest, entry.X, mode, cap)
        return curve.to_doc()

    @app.get("/models/{mid}/predict")
    @_guard
    async def predict_point(mid: str, x: str):
        entry = reg.get(mid)
        try:
            point = np.array([float(p) for p in x.split(",")], dtype=np.float64)
        except ValueError as exc:
            raise HTTPException(400, f"bad point: {exc}") from exc
        point = check_instance(entry.forest, point)
        return {
            "x": [float(v) for v in point],
            "prediction": _prediction_doc(entry.forest, point),
            "region": [int(k) for k in leaf_tuple(entry.forest, point)],
        }

    ui = ui_dir or os.environ.get("LIRE_UI_DIR") or "frontend/dist"
    if os.path.isdir(ui):
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app


app = create_app()


def serve(host: str = "127.0.0.1", port: int = 8321) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    serve()
