import pytest

try:
    from fastapi.testclient import TestClient
except ImportError:  # pragma: no cover
    TestClient = None

from fitch_mi.server import app

pytestmark = pytest.mark.skipif(TestClient is None, reason="httpx not installed")


@pytest.fixture()
def client():
    return TestClient(app)


def test_module_upload(client, peano_text):
    resp = client.post("/modules", json={"text": peano_text})
    assert resp.status_code == 200
    assert resp.json()["id"]


def start(ws, module: str, theorem: str = "sum-total-comm"):
    ws.send_json({"type": "start", "module": module, "theorem": theorem})
    return ws.receive_json()


def test_start_with_uploaded_module(client, peano_text):
    module_id = client.post("/modules", json={"text": peano_text}).json()["id"]
    with client.websocket_connect("/session") as ws:
        msg = start(ws, module_id)
        assert msg["type"] == "prompt"
        assert msg["session"]
        assert msg["theorem"] == "sum-total-comm"


def test_start_with_inline_module(client, peano_text):
    with client.websocket_connect("/session") as ws:
        msg = start(ws, peano_text, theorem="sum-zero-rhs")
        assert msg["type"] == "done"
        assert msg["gaps"] is False


def test_full_exchange(client, peano_text, fragment_text):
    with client.websocket_connect("/session") as ws:
        msg = start(ws, peano_text)
        assert msg["type"] == "prompt"
        ws.send_json({"type": "command", "name": "trace"})
        again = ws.receive_json()
        assert again["type"] == "prompt"
        assert again["trace_text"] == msg["trace_text"]
        ws.send_json({"type": "fragment", "text": "gibberish"})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert err["where"] == "fragment"
        ws.send_json({"type": "fragment", "text": fragment_text})
        done = ws.receive_json()
        assert done["type"] == "done"
        assert "elaborated_gapped" in done and "elaborated_full" in done


def test_protocol_errors_keep_connection_open(client, peano_text):
    with client.websocket_connect("/session") as ws:
        ws.send_text("this is not json")
        assert ws.receive_json()["type"] == "error"
        ws.send_json({"type": "frobnicate"})
        assert ws.receive_json()["type"] == "error"
        ws.send_json({"type": "fragment", "text": "x"})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert "no session" in err["message"]
        msg = start(ws, peano_text, theorem="sum-zero-rhs")
        assert msg["type"] == "done"


def test_bad_module_reported(client):
    with client.websocket_connect("/session") as ws:
        ws.send_json({"type": "start", "module": "data data", "theorem": "x"})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert err["where"] == "module"


def test_unknown_theorem_reported(client, peano_text):
    with client.websocket_connect("/session") as ws:
        ws.send_json({"type": "start", "module": peano_text, "theorem": "zzz"})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert err["where"] == "start"


def test_submit_in_terminal_phase_rejected(client, peano_text):
    with client.websocket_connect("/session") as ws:
        msg = start(ws, peano_text, theorem="sum-zero-rhs")
        assert msg["type"] == "done"
        ws.send_json({"type": "fragment", "text": "x"})
        err = ws.receive_json()
        assert err["type"] == "error"
        assert "done" in err["message"]
