import pytest

fastapi_testclient = pytest.importorskip("fastapi.testclient")

from halolab.csvio import CSV_HEADER
from halolab.service import app

client = fastapi_testclient.TestClient(app)


def test_health():
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json()["status"] == "ok"


def test_run_endpoint_returns_rows_and_csv():
    r = client.post("/run", json={"nx": 16, "block": 8, "steps": 2,
                                  "node_power_w": 277.0})
    assert r.status_code == 200
    body = r.json()
    assert len(body["rows"]) == 1
    row = body["rows"][0]
    assert row["wall_s"] > 0 and row["energy_j"] > 0
    assert len(row["state_hash"]) == 64
    assert body["csv"].splitlines()[0] == CSV_HEADER


def test_run_endpoint_rejects_bad_grid():
    r = client.post("/run", json={"nx": 17, "block": 8})
    assert r.status_code == 422


def test_run_endpoint_rejects_bad_strategy():
    r = client.post("/run", json={"strategy": "psychic"})
    assert r.status_code == 422


def test_sweep_endpoint():
    r = client.post("/sweep", json={
        "nx": 16, "block": 8, "steps": 2, "reps": 2,
        "configs": [[1, 1], [2, 1]],
        "strategies": ["fused", "split_overlap"]})
    assert r.status_code == 200
    body = r.json()
    assert len(body["rows"]) == 2 * 2 * 2
    assert len(body["medians"]) == 4
    # identical physics across all layouts
    assert len({row["state_hash"] for row in body["rows"]}) == 1


def test_validate_endpoint_fast_checks(monkeypatch):
    # patch out the convergence study; it is minutes-scale and covered by
    # the acceptance suite
    import halolab.service as service
    from halolab.validate import CheckResult

    monkeypatch.setattr(
        service, "run_validation",
        lambda: [CheckResult("stub", True, "patched")])
    r = client.post("/validate")
    assert r.status_code == 200
    assert r.json()["passed"] is True
