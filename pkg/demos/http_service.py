"""Drive the HTTP service in-process.

The service wraps the engine for clients that hold no Python: upload or
register a model with its dataset, then query predictions, counterfactuals
with baselines, and region growth over plain JSON. This demo uses the test
client so it needs no open port; `python -m lire.service` (or
`uvicorn lire.service:app`) serves the same API over the network.
"""
import json
from pathlib import Path

from fastapi.testclient import TestClient

from lire.service import Registry, create_app

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    app = create_app(Registry())
    with TestClient(app) as client:
        r = client.post(
            "/models",
            json={
                "model_path": str(FIXTURES / "toy_forest.json"),
                "data_path": str(FIXTURES / "toy_data.csv"),
            },
        )
        doc = r.json()
        mid = doc["id"]
        print(f"registered model {mid}: {doc['T']} trees, D={doc['D']}, M={doc['M']} live regions")

        r = client.get(f"/models/{mid}/predict", params={"x": "0.2,0.1"})
        print(f"predict [0.2, 0.1]: {r.json()}")

        r = client.post(
            f"/models/{mid}/counterfactual",
            json={
                "source": [0.2, 0.1],
                "target": {"classes": [1]},
                "with_baselines": True,
            },
        )
        doc = r.json()
        print("\ncounterfactual response:")
        print(json.dumps(doc, indent=2))

        r = client.get(f"/models/{mid}/regions/growth")
        print(f"\nregion growth: {r.json()}")


if __name__ == "__main__":
    main()
