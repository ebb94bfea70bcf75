import pytest
from fastapi.testclient import TestClient

from adoe.api import create_app
from adoe.store import CampaignStore


@pytest.fixture()
def client(tmp_path):
    return TestClient(create_app(CampaignStore(tmp_path / "store")))


TINY = {
    "factors": [
        {"name": "a", "unit": "", "cube_low": 0.0, "cube_high": 1.0},
        {"name": "b", "unit": "", "cube_low": 0.0, "cube_high": 1.0},
    ],
    "objectives": [{"name": "y"}],
    "alpha": 1.0,
    "mode": "single",
    "seed_count": 4,
    "batch_size": 2,
    "max_trials": 12,
    "seed": 0,
    "seed_from": "box",
}

MOULDING = {
    "factors": [
        {"name": "mould_temp_C", "unit": "degC", "cube_low": 65, "cube_high": 85},
        {"name": "cooling_s", "unit": "s", "cube_low": 20, "cube_high": 30},
        {"name": "holding_s", "unit": "s", "cube_low": 3, "cube_high": 6},
        {"name": "barrel_temp_C", "unit": "degC", "cube_low": 205, "cube_high": 225},
    ],
    "objectives": [
        {"name": "dt_C", "threshold": 7.0},
        {"name": "cycle_s", "threshold": 33.0},
    ],
    "alpha": 2.0,
    "mode": "multi",
    "seed_count": 3,
    "max_trials": 22,
    "seed": 1,
    "seed_from": "ccd",
    "center_runs": 7,
}


def observe_all(client, cid, value=1.0):
    state = client.get(f"/api/campaigns/{cid}").json()
    for t in state["trials"]:
        if t["status"] == "pending":
            n = 1 if len(state["config"]["objectives"]) == 1 else 2
            client.post(
                f"/api/campaigns/{cid}/trials/{t['id']}/observation",
                json={"responses": [value] * n},
            )


def test_create_and_get(client):
    r = client.post("/api/campaigns", json=TINY)
    assert r.status_code == 201
    cid = r.json()["id"]
    got = client.get(f"/api/campaigns/{cid}")
    assert got.status_code == 200
    body = got.json()
    assert body["status"] == "seeding"
    assert len(body["trials"]) == 4
    assert body["trials"][0]["status"] == "pending"
    assert client.get("/api/campaigns").json()["ids"] == [cid]


def test_unknown_campaign_404(client):
    assert client.get("/api/campaigns/zzz").status_code == 404
    assert client.post("/api/campaigns/zzz/suggestions").status_code == 404


def test_invalid_config_422(client):
    bad = dict(TINY, mode="multi")  # multi with a single objective
    assert client.post("/api/campaigns", json=bad).status_code == 422
    worse = dict(TINY, factors=[])
    assert client.post("/api/campaigns", json=worse).status_code == 422


def test_observation_conflicts_and_validation(client):
    cid = client.post("/api/campaigns", json=TINY).json()["id"]
    r = client.post("/api/campaigns/{}/trials/t001/observation".format(cid),
                    json={"responses": [1.5]})
    assert r.status_code == 200
    again = client.post("/api/campaigns/{}/trials/t001/observation".format(cid),
                        json={"responses": [1.5]})
    assert again.status_code == 409
    missing = client.post("/api/campaigns/{}/trials/t099/observation".format(cid),
                          json={"responses": [1.5]})
    assert missing.status_code == 404
    wrong_len = client.post("/api/campaigns/{}/trials/t002/observation".format(cid),
                            json={"responses": [1.0, 2.0]})
    assert wrong_len.status_code == 422
    not_number = client.post("/api/campaigns/{}/trials/t002/observation".format(cid),
                             json={"responses": ["hot"]})
    assert not_number.status_code == 422


def test_suggestions_blocked_while_pending(client):
    cid = client.post("/api/campaigns", json=TINY).json()["id"]
    r = client.post(f"/api/campaigns/{cid}/suggestions")
    assert r.status_code == 409
    assert "t001" in r.json()["detail"]


def test_suggestion_flow_and_count(client):
    cid = client.post("/api/campaigns", json=TINY).json()["id"]
    observe_all(client, cid)
    r = client.post(f"/api/campaigns/{cid}/suggestions", params={"count": 1})
    assert r.status_code == 200
    trials = r.json()["trials"]
    assert len(trials) == 1
    assert trials[0]["provenance"] == "suggested"
    state = client.get(f"/api/campaigns/{cid}").json()
    assert state["status"] == "awaiting_observations"


def test_threshold_met_through_api(client):
    cid = client.post("/api/campaigns", json=MOULDING).json()["id"]
    state = client.get(f"/api/campaigns/{cid}").json()
    pending = [t["id"] for t in state["trials"]]
    for tid in pending[:-1]:
        client.post(f"/api/campaigns/{cid}/trials/{tid}/observation",
                    json={"responses": [7.77, 28.8]})
    r = client.post(f"/api/campaigns/{cid}/trials/{pending[-1]}/observation",
                    json={"responses": [6.51, 32.9]})
    assert r.json()["status"] == "threshold_met"


def test_analysis_insufficient_then_available(client):
    cid = client.post("/api/campaigns", json=TINY).json()["id"]
    assert client.get(f"/api/campaigns/{cid}/analysis").status_code == 409
    observe_all(client, cid)
    # 4 observations > 3 linear-model terms: linear analysis becomes available
    r = client.get(f"/api/campaigns/{cid}/analysis")
    assert r.status_code == 200
    body = r.json()
    assert body["model_terms"][0] == "intercept"
    assert "y" in body["responses"]
    assert 0.0 <= body["responses"]["y"]["r2"] <= 1.0


def test_pareto_endpoint(client):
    cid = client.post("/api/campaigns", json=MOULDING).json()["id"]
    state = client.get(f"/api/campaigns/{cid}").json()
    values = [[8.0, 30.0], [7.0, 29.0], [9.0, 28.0]]  # first row is dominated
    for t, v in zip(state["trials"], values):
        client.post(f"/api/campaigns/{cid}/trials/{t['id']}/observation",
                    json={"responses": v})
    pts = client.get(f"/api/campaigns/{cid}/pareto").json()["points"]
    got = sorted(tuple(p["objectives"]) for p in pts)
    assert got == [(7.0, 29.0), (9.0, 28.0)]


def test_convergence_endpoint(client):
    cid = client.post("/api/campaigns", json=TINY).json()["id"]
    observe_all(client, cid, value=2.0)
    body = client.get(f"/api/campaigns/{cid}/convergence").json()
    assert body["iterations"][0]["iteration"] == 0
    assert body["iterations"][0]["best"] == [2.0]
    assert body["proposal_distances"] == []
