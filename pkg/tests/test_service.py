import pytest
from fastapi.testclient import TestClient

from nidss.dbn import EvidenceTimeline, filter_day, save_spec
from nidss.inference import posterior
from nidss.service import create_app


@pytest.fixture(scope="module")
def model_path(tmp_path_factory, ground_truth):
    path = tmp_path_factory.mktemp("svc") / "model.json"
    save_spec(ground_truth, path)
    return path


@pytest.fixture()
def client(model_path, tmp_path):
    app = create_app(model_path, threshold=0.5, db_path=tmp_path / "sessions.db")
    with TestClient(app) as c:
        yield c


ADMISSION = {"sex": "male", "age1": "41-65", "knaus": "C", "priseAnti": "yes"}
DAY_OBS = {"act_1": "yes", "act_2": "yes", "examinf_3": "yes", "sens": "resistant"}


def admit(client, obs=None):
    response = client.post("/patients", json={"observations": obs if obs is not None else ADMISSION})
    assert response.status_code == 201
    return response.json()


def test_healthz(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_model_summary_excludes_outcomes(client):
    body = client.get("/model").json()
    names = [v["name"] for v in body["admission_variables"]]
    assert "result" not in names and "cissue" not in names and "dsj" not in names
    daily = [v["name"] for v in body["daily_variables"]]
    assert "result_t" not in daily
    assert "act_1" in daily
    assert body["threshold"] == 0.5
    assert body["structure"]["temporal_variables"] == 42


def test_admission_returns_baseline(client, ground_truth):
    created = admit(client)
    assert 0.0 <= created["probability"] <= 1.0
    assert created["day"] == 0
    expected = posterior(ground_truth.static_slice, "result", ADMISSION).prob("yes")
    assert created["probability"] == pytest.approx(expected, abs=1e-12)


def test_empty_admission_equals_static_prior(client, ground_truth):
    created = admit(client, obs={})
    prior = posterior(ground_truth.static_slice, "result", {}).prob("yes")
    assert created["probability"] == pytest.approx(prior, abs=1e-12)


def test_unknown_state_rejected_with_field(client):
    response = client.post("/patients", json={"observations": {"sex": "robot"}})
    assert response.status_code == 422
    body = response.json()
    assert body["code"] == "unknown-state"
    assert body["field"] == "sex"


def test_outcome_field_rejected_at_admission(client):
    response = client.post("/patients", json={"observations": {"result": "yes"}})
    assert response.status_code == 422
    assert response.json()["code"] == "unknown-variable"


def test_day_flow_and_trajectory(client, ground_truth):
    pid = admit(client)["patient_id"]
    r1 = client.post(f"/patients/{pid}/days", json={"observations": DAY_OBS})
    assert r1.status_code == 200
    assert r1.json()["day"] == 1
    r2 = client.post(f"/patients/{pid}/days", json={"day": 2, "observations": {}})
    assert r2.json()["day"] == 2
    trajectory = client.get(f"/patients/{pid}/trajectory").json()["trajectory"]
    assert [e["day"] for e in trajectory] == [0, 1, 2]
    # the service must return exactly the engine's filter output
    timeline = EvidenceTimeline(dict(ADMISSION), [dict(DAY_OBS), {}])
    expected = filter_day(ground_truth, timeline, 1).prob("yes")
    assert r1.json()["probability"] == pytest.approx(expected, abs=1e-12)


def test_out_of_order_day_conflicts(client):
    pid = admit(client)["patient_id"]
    ok = client.post(f"/patients/{pid}/days", json={"day": 1, "observations": {}})
    assert ok.status_code == 200
    skip = client.post(f"/patients/{pid}/days", json={"day": 3, "observations": {}})
    assert skip.status_code == 409
    resend = client.post(f"/patients/{pid}/days", json={"day": 1, "observations": {}})
    assert resend.status_code == 409
    trajectory = client.get(f"/patients/{pid}/trajectory").json()["trajectory"]
    assert [e["day"] for e in trajectory] == [0, 1]


def test_unknown_patient_404(client):
    assert client.get("/patients/nobody/trajectory").status_code == 404
    assert client.post("/patients/nobody/days", json={"observations": {}}).status_code == 404
    assert client.post("/patients/nobody/what-if", json={"observations": {}}).status_code == 404


def test_what_if_is_pure_and_consistent(client):
    pid = admit(client)["patient_id"]
    client.post(f"/patients/{pid}/days", json={"observations": {"act_1": "yes"}})
    before = client.get(f"/patients/{pid}/trajectory").json()
    hypo1 = client.post(f"/patients/{pid}/what-if", json={"observations": DAY_OBS}).json()
    hypo2 = client.post(f"/patients/{pid}/what-if", json={"observations": {}}).json()
    assert client.get(f"/patients/{pid}/trajectory").json() == before
    assert hypo1["day"] == 2 and hypo2["day"] == 2
    committed = client.post(f"/patients/{pid}/days", json={"observations": DAY_OBS}).json()
    assert committed["probability"] == hypo1["probability"]


def test_interleaved_what_ifs_never_change_the_outcome(client):
    plain = admit(client)["patient_id"]
    probed = admit(client)["patient_id"]
    submissions = [DAY_OBS, {}, {"act_3": "no", "sens": "sensitive"}]
    for day_obs in submissions:
        client.post(f"/patients/{plain}/days", json={"observations": day_obs})
    for day_obs in submissions:
        client.post(f"/patients/{probed}/what-if", json={"observations": {"act_7": "yes"}})
        client.post(f"/patients/{probed}/days", json={"observations": day_obs})
        client.post(f"/patients/{probed}/what-if", json={"observations": {}})
    t_plain = client.get(f"/patients/{plain}/trajectory").json()["trajectory"]
    t_probed = client.get(f"/patients/{probed}/trajectory").json()["trajectory"]
    assert t_plain == t_probed


def test_sessions_survive_restart(model_path, tmp_path):
    db = tmp_path / "sessions.db"
    app1 = create_app(model_path, threshold=0.5, db_path=db)
    with TestClient(app1) as c1:
        pid = admit(c1)["patient_id"]
        c1.post(f"/patients/{pid}/days", json={"observations": DAY_OBS})
        before = c1.get(f"/patients/{pid}/trajectory").json()
    app2 = create_app(model_path, threshold=0.5, db_path=db)
    with TestClient(app2) as c2:
        after = c2.get(f"/patients/{pid}/trajectory").json()
        assert after == before
        # and the session continues where it stopped
        r = c2.post(f"/patients/{pid}/days", json={"observations": {}})
        assert r.json()["day"] == 2
