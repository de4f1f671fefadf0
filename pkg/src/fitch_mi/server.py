"""Session server: the wire protocol over WebSocket plus module upload.

Endpoints:

- ``POST /modules`` with ``{"text": "..."}`` stores a module and returns
  ``{"id": "..."}``; a client may pass that id as the ``module`` field of a
  ``start`` message instead of inline module text.
- ``GET /session`` upgraded to a WebSocket speaking JSON messages:
  client sends ``start`` / ``fragment`` / ``command``, server answers with
  ``prompt`` / ``done`` / ``failed`` / ``error``.

If a built web UI exists under ``frontend/dist`` it is served at ``/``.
"""

from __future__ import annotations

import logging
import uuid
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .parser import ParseError, parse_module
from .session import AWAITING_USER, Session, SessionError

log = logging.getLogger("fitch_mi.server")

app = FastAPI(title="fitch-mi session server")

_modules: dict[str, str] = {}


@app.post("/modules")
async def upload_module(payload: dict) -> dict:
    text = payload.get("text", "")
    module_id = uuid.uuid4().hex
    _modules[module_id] = text
    log.info("module %s uploaded (%d bytes)", module_id, len(text))
    return {"id": module_id}


def _protocol_error(message: str, where: str = "protocol") -> dict:
    return {"type": "error", "where": where, "message": message}


def _start_session(msg: dict) -> tuple[Session, str] | dict:
    source = msg.get("module", "")
    text = _modules.get(source, source)
    theorem = msg.get("theorem", "")
    max_depth = int(msg.get("max_depth", 32))
    try:
        module = parse_module(text)
    except ParseError as e:
        return _protocol_error(str(e), where="module")
    try:
        session = Session(module, theorem, max_depth)
    except SessionError as e:
        return _protocol_error(str(e), where="start")
    return session, uuid.uuid4().hex


@app.websocket("/session")
async def session_socket(ws: WebSocket) -> None:
    await ws.accept()
    session: Session | None = None
    session_id = ""
    try:
        while True:
            try:
                msg = await ws.receive_json()
            except WebSocketDisconnect:
                raise
            except Exception:
                await ws.send_json(_protocol_error("message is not a JSON object"))
                continue
            kind = msg.get("type")
            if kind == "start":
                started = _start_session(msg)
                if isinstance(started, dict):
                    await ws.send_json(started)
                    continue
                session, session_id = started
                log.info("session %s: start %s", session_id, msg.get("theorem"))
                await ws.send_json(_state_message(session, session_id))
            elif kind in ("fragment", "command"):
                if session is None:
                    await ws.send_json(_protocol_error("no session started"))
                    continue
                if session.phase != AWAITING_USER:
                    await ws.send_json(
                        _protocol_error(f"session is {session.phase}")
                    )
                    continue
                try:
                    if kind == "fragment":
                        result = session.submit_fragment(msg.get("text", ""))
                    else:
                        result = session.submit_command(msg.get("name", ""))
                except SessionError as e:
                    await ws.send_json(_protocol_error(str(e)))
                    continue
                log.info("session %s: %s -> %s", session_id, kind, result["type"])
                if result["type"] == "prompt":
                    result["session"] = session_id
                await ws.send_json(result)
            else:
                await ws.send_json(_protocol_error(f"unknown message type {kind!r}"))
    except WebSocketDisconnect:
        log.info("session %s: disconnected", session_id or "(none)")


def _state_message(session: Session, session_id: str) -> dict:
    if session.phase == AWAITING_USER:
        return {"type": "prompt", "session": session_id, **session.prompt_json()}
    return session.outcome_json()


_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
if _dist.is_dir():
    app.mount("/", StaticFiles(directory=str(_dist), html=True), name="ui")
