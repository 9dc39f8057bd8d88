"""HTTP+JSON session service for human-in-the-loop preference tuning.

Endpoints:
    POST   /sessions               create a session
    GET    /sessions/{id}          session descriptor
    GET    /sessions/{id}/query    next (or outstanding) query payload
    POST   /sessions/{id}/response submit {query_id, choice}
    GET    /sessions/{id}/estimate current estimate summary
    DELETE /sessions/{id}          drop the session

Errors are {code, message, field?}.  Sessions snapshot to JSON files under the
data directory (PREFSYNTH_DATA_DIR) after every mutation so a restarted server
can resume them by replaying the recorded choices.
"""

import json
import os
import secrets
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from prefsynth.errors import ConfigError
from prefsynth.sessions import SessionConfig, SessionEngine, StaleQueryError


class CreateSessionRequest(BaseModel):
    mode: str = "gain_tuning"
    config: dict = {}


class ResponseBody(BaseModel):
    query_id: int
    choice: str


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, fieldname: str | None = None):
        self.status = status
        self.body = {"code": code, "message": message}
        if fieldname:
            self.body["field"] = fieldname


class SessionStore:
    def __init__(self, data_dir: str | None = None):
        self.data_dir = Path(data_dir or os.environ.get("PREFSYNTH_DATA_DIR", ".prefsynth-sessions"))
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, SessionEngine] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.busy: dict[str, bool] = {}
        self._registry_lock = threading.Lock()
        self._load_snapshots()

    def _load_snapshots(self):
        for path in sorted(self.data_dir.glob("*.json")):
            try:
                snap = json.loads(path.read_text())
                self._register(path.stem, SessionEngine.restore(snap))
            except Exception:  # noqa: BLE001 - a bad snapshot should not block startup
                continue

    def _register(self, sid, engine):
        self.sessions[sid] = engine
        self.locks[sid] = threading.Lock()
        self.busy[sid] = False

    def create(self, config: SessionConfig) -> str:
        sid = secrets.token_hex(8)
        with self._registry_lock:
            self._register(sid, SessionEngine(config))
        self.persist(sid)
        return sid

    def persist(self, sid):
        snap = self.sessions[sid].snapshot()
        (self.data_dir / f"{sid}.json").write_text(json.dumps(snap))

    def drop(self, sid):
        with self._registry_lock:
            self.sessions.pop(sid, None)
            self.locks.pop(sid, None)
            self.busy.pop(sid, None)
        (self.data_dir / f"{sid}.json").unlink(missing_ok=True)

    def get(self, sid) -> SessionEngine:
        engine = self.sessions.get(sid)
        if engine is None:
            raise ServiceError(404, "not_found", f"no session {sid}")
        return engine


def _descriptor(sid, engine: SessionStore) -> dict:
    return {
        "id": sid,
        "mode": engine.config.mode,
        "status": _status(engine),
        "query_count": len(engine.history),
        "max_queries": engine.config.max_queries,
    }


def _status(engine) -> str:
    if engine.done:
        return "done"
    return "awaiting_response" if engine.current is not None else "computing"


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="prefsynth session service")
    store = SessionStore(data_dir)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    def _locked(sid):
        lock = store.locks.get(sid)
        if lock is None:
            raise ServiceError(404, "not_found", f"no session {sid}")
        if not lock.acquire(blocking=False):
            raise ServiceError(409, "computing", "session busy; retry shortly")
        return lock

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        try:
            config = SessionConfig.from_dict({"mode": body.mode, **body.config})
            sid = store.create(config)
        except ConfigError as exc:
            raise ServiceError(400, "invalid_config", str(exc)) from exc
        engine = store.get(sid)
        return {**_descriptor(sid, engine), "estimate": engine.estimate()}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return _descriptor(sid, store.get(sid))

    @app.get("/sessions/{sid}/query")
    def next_query(sid: str):
        engine = store.get(sid)
        lock = _locked(sid)
        try:
            if engine.done:
                raise ServiceError(409, "done", "session has reached max_queries")
            payload = engine.next_query()
            store.persist(sid)
            return payload
        finally:
            lock.release()

    @app.post("/sessions/{sid}/response")
    def submit_response(sid: str, body: ResponseBody):
        engine = store.get(sid)
        lock = _locked(sid)
        try:
            try:
                summary = engine.submit_response(body.query_id, body.choice)
            except StaleQueryError as exc:
                raise ServiceError(409, "stale_query", str(exc), "query_id") from exc
            except ConfigError as exc:
                raise ServiceError(400, "invalid_choice", str(exc), "choice") from exc
            store.persist(sid)
            return summary
        finally:
            lock.release()

    @app.get("/sessions/{sid}/estimate")
    def estimate(sid: str):
        return store.get(sid).estimate()

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        store.get(sid)
        store.drop(sid)

    return app


def main(port: int | None = None, data_dir: str | None = None):
    import uvicorn

    port = port or int(os.environ.get("PREFSYNTH_PORT", "8080"))
    uvicorn.run(create_app(data_dir), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
