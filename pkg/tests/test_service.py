import numpy as np
import pytest
from fastapi.testclient import TestClient

from prefsynth.service import create_app
from prefsynth.sessions import SessionConfig, run_scripted_session

FAST_SAMPLER = {"chains": 2, "burn_in": 100, "samples": 100}

GENERIC_CONFIG = {
    "dim": 2,
    "seed": 5,
    "max_queries": 50,
    "sampler": FAST_SAMPLER,
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=str(tmp_path / "sessions"))
    with TestClient(app) as c:
        yield c


def create_generic(client, **overrides):
    cfg = {**GENERIC_CONFIG, **overrides}
    resp = client.post("/sessions", json={"mode": "generic_pairs", "config": cfg})
    assert resp.status_code == 201
    return resp.json()


def test_create_and_describe(client):
    body = create_generic(client)
    sid = body["id"]
    assert body["mode"] == "generic_pairs"
    assert body["query_count"] == 0
    assert body["estimate"]["query_count"] == 0
    desc = client.get(f"/sessions/{sid}")
    assert desc.status_code == 200
    assert desc.json()["status"] == "computing"


def test_invalid_config_rejected(client):
    resp = client.post(
        "/sessions", json={"mode": "generic_pairs", "config": {"frobnicate": 1}}
    )
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_config"


def test_unknown_session_404(client):
    assert client.get("/sessions/deadbeef").status_code == 404
    assert client.get("/sessions/deadbeef/query").status_code == 404
    assert client.get("/sessions/deadbeef/estimate").status_code == 404
    assert (
        client.post(
            "/sessions/deadbeef/response", json={"query_id": 1, "choice": "A"}
        ).status_code
        == 404
    )
    assert client.delete("/sessions/deadbeef").status_code == 404


def test_query_response_cycle(client):
    sid = create_generic(client)["id"]
    q1 = client.get(f"/sessions/{sid}/query").json()
    assert q1["query_id"] == 1
    # repeated GET returns the identical outstanding query
    assert client.get(f"/sessions/{sid}/query").json() == q1
    assert client.get(f"/sessions/{sid}").json()["status"] == "awaiting_response"
    est = client.post(
        f"/sessions/{sid}/response", json={"query_id": 1, "choice": "A"}
    )
    assert est.status_code == 200
    assert est.json()["query_count"] == 1
    q2 = client.get(f"/sessions/{sid}/query").json()
    assert q2["query_id"] == 2


def test_stale_and_invalid_submissions(client):
    sid = create_generic(client)["id"]
    client.get(f"/sessions/{sid}/query")
    resp = client.post(f"/sessions/{sid}/response", json={"query_id": 7, "choice": "A"})
    assert resp.status_code == 409
    assert resp.json()["code"] == "stale_query"
    assert resp.json()["field"] == "query_id"
    resp = client.post(f"/sessions/{sid}/response", json={"query_id": 1, "choice": "X"})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_choice"
    before = client.get(f"/sessions/{sid}/estimate").json()
    # duplicate submit after success is a stale-query conflict, state unchanged
    ok = client.post(f"/sessions/{sid}/response", json={"query_id": 1, "choice": "A"})
    assert ok.status_code == 200
    dup = client.post(f"/sessions/{sid}/response", json={"query_id": 1, "choice": "A"})
    assert dup.status_code == 409
    assert client.get(f"/sessions/{sid}/estimate").json() == ok.json()
    assert before["query_count"] == 0


def test_done_session_conflicts(client):
    sid = create_generic(client, max_queries=1)["id"]
    client.get(f"/sessions/{sid}/query")
    client.post(f"/sessions/{sid}/response", json={"query_id": 1, "choice": "B"})
    resp = client.get(f"/sessions/{sid}/query")
    assert resp.status_code == 409
    assert resp.json()["code"] == "done"
    assert client.get(f"/sessions/{sid}").json()["status"] == "done"


def test_delete_session(client):
    sid = create_generic(client)["id"]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}").status_code == 404


def test_http_session_matches_library(client):
    rng = np.random.default_rng(3)
    choices = ["A" if rng.random() < 0.5 else "B" for _ in range(20)]
    sid = create_generic(client, seed=21)["id"]
    for qid, choice in enumerate(choices, start=1):
        payload = client.get(f"/sessions/{sid}/query").json()
        assert payload["query_id"] == qid
        client.post(
            f"/sessions/{sid}/response", json={"query_id": qid, "choice": choice}
        )
    http_final = client.get(f"/sessions/{sid}/estimate").json()

    lib_final = run_scripted_session(
        SessionConfig.from_dict({"mode": "generic_pairs", **GENERIC_CONFIG, "seed": 21}),
        choices,
    )
    assert http_final == lib_final  # bit-identical via JSON float round-trip


def test_restart_resumes_from_snapshots(tmp_path):
    data_dir = str(tmp_path / "sessions")
    app = create_app(data_dir=data_dir)
    with TestClient(app) as client:
        sid = create_generic(client)["id"]
        for qid in (1, 2, 3):
            client.get(f"/sessions/{sid}/query")
            client.post(
                f"/sessions/{sid}/response", json={"query_id": qid, "choice": "A"}
            )
        est = client.get(f"/sessions/{sid}/estimate").json()
        next_payload = client.get(f"/sessions/{sid}/query").json()

    fresh = create_app(data_dir=data_dir)
    with TestClient(fresh) as client:
        assert client.get(f"/sessions/{sid}/estimate").json() == est
        # the outstanding (unanswered) query is re-derived deterministically
        assert client.get(f"/sessions/{sid}/query").json() == next_payload


def test_gain_tuning_session_over_http(client):
    resp = client.post(
        "/sessions",
        json={
            "mode": "gain_tuning",
            "config": {"seed": 1, "sampler": FAST_SAMPLER},
        },
    )
    assert resp.status_code == 201
    sid = resp.json()["id"]
    payload = client.get(f"/sessions/{sid}/query").json()
    assert payload["mode"] == "gain_tuning"
    assert len(payload["gains_a"]) == 3
    est = client.post(
        f"/sessions/{sid}/response", json={"query_id": 1, "choice": "B"}
    ).json()
    assert len(est["gains"]) == 3
