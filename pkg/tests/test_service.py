import json

import pytest
from fastapi.testclient import TestClient

from paw.service import create_app
from paw.sim import SimSession

from conftest import read_corpus


@pytest.fixture(scope="module")
def client(arch_fs):
    app = create_app(lambda: SimSession(arch_fs))
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def unbound_client():
    with TestClient(create_app(None)) as c:
        yield c


def test_levels_endpoint(client):
    assert client.get("/api/levels").json() == {"levels": ["arch", "toolbus"]}


def test_check_endpoint(client):
    r = client.post("/api/check", json={"source": read_corpus("architecture.psf")})
    body = r.json()
    assert r.status_code == 200
    assert body["ok"] is True
    assert body["entry"] == "Application"
    assert body["modules"] == ["Data", "ApplicationSystem", "Application"]


def test_check_rejects_bad_source(client):
    r = client.post("/api/check", json={"source": "process module M begin"})
    assert r.status_code == 422
    assert "detail" in r.json()


def test_lts_endpoint_deterministic(client):
    payload = {"source": read_corpus("architecture.psf")}
    a = client.post("/api/lts", json=payload).json()
    b = client.post("/api/lts", json=payload).json()
    assert a == b
    assert a["states"] == 12


def test_refine_endpoint(client):
    src = "\n\n".join([read_corpus("architecture.psf"), read_corpus("tbdata.psf")])
    r = client.post(
        "/api/refine",
        json={"source": src, "mapping": read_corpus("example.map")},
    )
    assert r.status_code == 200
    assert "PT1 = tb-rec-event(T1, tbterm(message))" in r.json()["source"]


def test_vertical_endpoint(client):
    src = "\n\n".join([read_corpus("architecture.psf"), read_corpus("tbdata.psf")])
    refined = client.post(
        "/api/refine", json={"source": src, "mapping": read_corpus("example.map")}
    ).json()["source"]
    r = client.post(
        "/api/verify/vertical",
        json={
            "abstractSource": read_corpus("architecture.psf"),
            "concreteSource": refined,
            "mapping": read_corpus("example.map"),
            "abstractRoot": "ApplicationSystem",
        },
    )
    body = r.json()
    assert body["related"] is True
    assert body["details"]["sPrimeTau"] == 3
    assert body["details"]["iPrimeTau"] == 4


def test_equiv_endpoint(client):
    lts = client.post(
        "/api/lts", json={"source": read_corpus("architecture.psf")}
    ).json()["lts"]
    r = client.post(
        "/api/equiv", json={"lts1": lts, "lts2": lts, "relation": "strong"}
    )
    assert r.json()["related"] is True


def test_websocket_session(client):
    with client.websocket_connect("/ws") as ws:
        model = json.loads(ws.receive_text())
        state = json.loads(ws.receive_text())
        assert model["type"] == "model"
        assert len(model["boxes"]) == 2
        assert len(model["nodes"]) == 4
        assert state["type"] == "state"
        ws.send_text(json.dumps({"type": "step", "idx": 0}))
        event = json.loads(ws.receive_text())
        state2 = json.loads(ws.receive_text())
        assert event["type"] == "event"
        assert state2["stepNo"] == 1
        ws.send_text(json.dumps({"type": "step", "idx": 99}))
        err = json.loads(ws.receive_text())
        assert err["type"] == "error"
        ws.send_text(json.dumps({"type": "reset"}))
        reset_state = json.loads(ws.receive_text())
        assert reset_state["stepNo"] == 0


def test_unbound_websocket_requires_load(unbound_client):
    with unbound_client.websocket_connect("/ws") as ws:
        ws.send_text(
            json.dumps(
                {
                    "type": "load",
                    "source": read_corpus("architecture.psf"),
                }
            )
        )
        model = json.loads(ws.receive_text())
        assert model["type"] == "model"


def test_index_serves_page(client):
    r = client.get("/")
    assert r.status_code == 200
    assert "paw" in r.text.lower() or "<html" in r.text.lower()
