import json

import pytest
from fastapi.testclient import TestClient

from stagecraft.deconfab import deconfabulate, report_to_dict
from stagecraft.evidence import FixtureProvider
from stagecraft.gateway import script_mock
from stagecraft.memory import MemoryStore, new_record
from stagecraft.physics import SlitConfig, evaluate_grid, matrix_text
from stagecraft.scenario import export_transcript, nudge, continue_session, start_session
from stagecraft.service import create_app
from tests.conftest import (
    VITAL_RESPONSE,
    timeslit_mock_entries,
    timeslit_spec,
    vital_corpus_records,
    vital_mock_entries,
)


def _mask(payload):
    if isinstance(payload, dict):
        return {
            key: "<masked>" if key in ("retrieved_at", "created_at") else _mask(value)
            for key, value in payload.items()
        }
    if isinstance(payload, list):
        return [_mask(item) for item in payload]
    return payload


def _spec_payload():
    spec = timeslit_spec()
    return {
        "title": spec.title,
        "setting": spec.setting,
        "topical_brief": spec.topical_brief,
        "props": spec.props,
        "personae": [
            {"name": p.name, "epithet": p.epithet, "speaking_label": p.speaking_label}
            for p in spec.personae
        ],
        "opening_direction": spec.opening_direction,
        "formatting_directives": spec.formatting_directives,
    }


@pytest.fixture()
def memory_store(tmp_path):
    store = MemoryStore(tmp_path / "memory.jsonl")
    store.put(new_record("The VITAL ventilator was designed at JPL.", ["https://nasa.gov/vital"]))
    store.put(new_record("Water boils at lower temperatures at altitude.", []))
    return store


@pytest.fixture()
def client(memory_store):
    app = create_app(
        backend=script_mock(vital_mock_entries() + timeslit_mock_entries()),
        provider=FixtureProvider(vital_corpus_records()),
        memory=memory_store,
    )
    return TestClient(app)


class TestDeconfabulateEndpoint:
    def test_matches_in_process_result(self, memory_store):
        app = create_app(
            backend=script_mock(vital_mock_entries()),
            provider=FixtureProvider(vital_corpus_records()),
            memory=memory_store,
        )
        with TestClient(app) as client:
            http_result = client.post(
                "/deconfabulate", json={"response_text": VITAL_RESPONSE}
            )
        assert http_result.status_code == 200
        in_process = report_to_dict(
            deconfabulate(
                VITAL_RESPONSE,
                script_mock(vital_mock_entries()),
                FixtureProvider(vital_corpus_records()),
            )
        )
        assert _mask(http_result.json()) == _mask(in_process)

    def test_empty_body_400(self, client):
        assert client.post("/deconfabulate", json={"response_text": ""}).status_code == 400
        assert client.post("/deconfabulate", json={}).status_code == 400
        assert (
            client.post(
                "/deconfabulate", content=b"not json", headers={"Content-Type": "application/json"}
            ).status_code
            == 400
        )

    def test_backend_failure_502_with_partial_report(self, memory_store):
        app = create_app(
            backend=script_mock([]),  # exhausted immediately
            provider=FixtureProvider(vital_corpus_records()),
            memory=memory_store,
        )
        with TestClient(app) as client:
            result = client.post("/deconfabulate", json={"response_text": VITAL_RESPONSE})
        assert result.status_code == 502
        body = result.json()
        assert "partial_report" in body
        assert body["partial_report"]["original"] == VITAL_RESPONSE


class TestSessionEndpoints:
    def test_create_nudge_continue_stop_transcript(self, client):
        created = client.post("/sessions", json={"scenario_spec": _spec_payload()})
        assert created.status_code == 201
        session_id = created.json()["session_id"]

        nudged = client.post(
            f"/sessions/{session_id}/nudge",
            json={"text": "NOETHER: Number your equations next time."},
        )
        assert nudged.status_code == 200
        assert nudged.json()["origin"] == "model"
        assert nudged.json()["index"] == 3

        continued = client.post(f"/sessions/{session_id}/continue")
        assert continued.status_code == 200
        assert continued.json()["index"] == 5

        stopped = client.post(f"/sessions/{session_id}/stop")
        assert stopped.json() == {"status": "stopped"}

        plain = client.get(f"/sessions/{session_id}/transcript", params={"format": "plain"})
        assert plain.status_code == 200
        assert plain.text.count("PROMPT:") == 3

        structured = client.get(
            f"/sessions/{session_id}/transcript", params={"format": "structured"}
        )
        assert structured.status_code == 200
        assert len(structured.json()["turns"]) == 6

    def test_transcript_matches_in_process_engine(self, client):
        created = client.post("/sessions", json={"scenario_spec": _spec_payload()})
        session_id = created.json()["session_id"]
        client.post(f"/sessions/{session_id}/nudge", json={"text": "NOETHER: Go on."})
        client.post(f"/sessions/{session_id}/continue")
        via_http = client.get(
            f"/sessions/{session_id}/transcript", params={"format": "plain"}
        ).text

        mock = script_mock(timeslit_mock_entries())
        session = start_session(timeslit_spec(), mock)
        nudge(session, "NOETHER: Go on.", mock)
        continue_session(session, mock)
        assert via_http == export_transcript(session, "plain")

    def test_unknown_session_404(self, client):
        assert client.post("/sessions/nope/nudge", json={"text": "x"}).status_code == 404
        assert client.post("/sessions/nope/continue").status_code == 404
        assert client.post("/sessions/nope/stop").status_code == 404
        assert client.get("/sessions/nope/transcript").status_code == 404

    def test_nudge_stopped_session_409(self, client):
        session_id = client.post(
            "/sessions", json={"scenario_spec": _spec_payload()}
        ).json()["session_id"]
        client.post(f"/sessions/{session_id}/stop")
        refused = client.post(f"/sessions/{session_id}/nudge", json={"text": "x"})
        assert refused.status_code == 409

    def test_invalid_spec_400(self, client):
        assert client.post("/sessions", json={}).status_code == 400
        bad = _spec_payload()
        bad["personae"] = []
        assert client.post("/sessions", json={"scenario_spec": bad}).status_code == 400

    def test_gateway_failure_on_create_502(self, memory_store):
        app = create_app(
            backend=script_mock([]),
            provider=FixtureProvider([]),
            memory=memory_store,
        )
        with TestClient(app) as client:
            assert (
                client.post("/sessions", json={"scenario_spec": _spec_payload()}).status_code
                == 502
            )

    def test_session_isolation(self, memory_store):
        app = create_app(
            backend=script_mock(timeslit_mock_entries() + timeslit_mock_entries()),
            provider=FixtureProvider([]),
            memory=memory_store,
        )
        with TestClient(app) as client:
            first = client.post("/sessions", json={"scenario_spec": _spec_payload()}).json()
            second = client.post("/sessions", json={"scenario_spec": _spec_payload()}).json()
            client.post(f"/sessions/{first['session_id']}/nudge", json={"text": "NOETHER: Only here."})
            turns_second = client.get(
                f"/sessions/{second['session_id']}/transcript", params={"format": "structured"}
            ).json()["turns"]
        assert len(turns_second) == 2
        assert all("Only here" not in t["text"] for t in turns_second)


class TestMemoryEndpoint:
    def test_search_matches_in_process(self, client, memory_store):
        via_http = client.get("/memory/search", params={"q": "JPL ventilator", "k": 2}).json()
        in_process = [
            {
                "record": {
                    "id": r.id,
                    "claim_text": r.claim_text,
                    "verdict_label": r.verdict_label,
                    "source_urls": list(r.source_urls),
                    "created_at": r.created_at,
                },
                "score": score,
            }
            for r, score in memory_store.search("JPL ventilator", 2)
        ]
        assert via_http == in_process
        assert via_http[0]["record"]["claim_text"].startswith("The VITAL")

    def test_k_zero_400(self, client):
        assert client.get("/memory/search", params={"q": "x", "k": 0}).status_code == 400

    def test_missing_q_400(self, client):
        assert client.get("/memory/search", params={"k": 2}).status_code == 400

    def test_empty_store_empty_list(self, tmp_path):
        app = create_app(backend=None, provider=None, memory=MemoryStore(tmp_path / "m.jsonl"))
        with TestClient(app) as client:
            result = client.get("/memory/search", params={"q": "anything", "k": 3})
        assert result.status_code == 200
        assert result.json() == []


class TestPhysicsEndpoint:
    def test_matches_in_process_matrix(self, client):
        params = {
            "A1": "1.5", "A2": "0.5", "T1": "0.7", "T2": "1.3",
            "k": "1.0", "x": "0.25",
            "delay_range": "-2:2:5", "freq_range": "-3:3:7",
        }
        via_http = client.get("/physics/grid", params=params)
        assert via_http.status_code == 200
        grid = evaluate_grid(
            SlitConfig(A1=1.5, A2=0.5, T1=0.7, T2=1.3, k=1.0, x=0.25),
            -2, 2, -3, 3, 5, 7,
        )
        assert via_http.text == matrix_text(grid)

    def test_default_payload_is_full_size(self, client):
        result = client.get("/physics/grid")
        assert result.status_code == 200
        lines = result.text.splitlines()
        assert len(lines) == 502  # 2 axis headers + 500 rows
        assert len(lines[0].split(",")) == 500
        assert len(lines[1].split(",")) == 500

    def test_bad_params_400(self, client):
        assert client.get("/physics/grid", params={"delay_range": "oops"}).status_code == 400
        assert client.get("/physics/grid", params={"delay_range": "1:2:1"}).status_code == 400
        assert client.get("/physics/grid", params={"A1": "abc"}).status_code == 400


class TestAuthToken:
    def test_token_enforced(self, memory_store):
        app = create_app(backend=None, provider=None, memory=memory_store, token="sesame")
        with TestClient(app) as client:
            assert client.get("/memory/search", params={"q": "x"}).status_code == 401
            ok = client.get(
                "/memory/search",
                params={"q": "x"},
                headers={"Authorization": "Bearer sesame"},
            )
            assert ok.status_code == 200
