"""HTTP service exposing labeling sessions to external annotation clients."""

from __future__ import annotations

import threading
import uuid
from typing import Any, Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.staticfiles import StaticFiles

from .dataset import Dataset
from .errors import AlforgeError, DomainError, OutOfRangeError
from .models import predict_proba
from .oracle import ExpertInput, scale_model_confidence
from .session import (
    SCHEMA_VERSION,
    STATUS_AWAITING,
    STATUS_STOPPED,
    RunConfig,
    SessionState,
    init_session,
    provide_label,
    state_to_dict,
)


class SessionStore:
    """In-memory registry of live sessions with per-session write locks."""

    def __init__(self) -> None:
        self._sessions: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def add(self, state: SessionState) -> str:
        session_id = uuid.uuid4().hex
        with self._registry_lock:
            self._sessions[session_id] = state
            self._locks[session_id] = threading.Lock()
        return session_id

    def get(self, session_id: str) -> SessionState:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session id")

    def lock(self, session_id: str) -> threading.Lock:
        try:
            return self._locks[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session id")


def _session_summary(session_id: str, state: SessionState) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": session_id,
        "status": state.status,
        "oracle_mode": state.config.oracle_mode,
        "queries_made": state.queries_made,
        "seed_count": state.seed_count,
        "seeds_remaining": len(state.seed_queue),
        "budget": state.config.policy.budget,
        "strategy": state.current_strategy.to_dict(),
        "n_instances": state.dataset.n_instances,
        "n_labeled": len(state.dataset.labels),
        "n_classes": state.dataset.n_classes,
        "class_names": list(state.dataset.class_names),
        "snapshots": len(state.metric_history),
    }


def _pending_payload(state: SessionState) -> Optional[dict[str, Any]]:
    if state.pending is None:
        return None
    instance = state.dataset.instance(state.pending)
    features = {
        name: float(value)
        for name, value in zip(state.dataset.feature_names, instance.features)
    }
    seeding = bool(state.seed_queue)
    if seeding or state.model is None:
        posterior = None
        model_score = None
    else:
        probs = predict_proba(state.model, instance.features)
        posterior = [float(p) for p in probs.probs]
        model_score = scale_model_confidence(float(max(posterior)))
    return {
        "instance_id": state.pending,
        "features": features,
        "model_posterior": posterior,
        "model_score": model_score,
        "query_index": state.queries_made + 1 if not seeding else None,
        "phase": "seed" if seeding else "query",
        "class_names": list(state.dataset.class_names),
    }


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except Exception:
        raise HTTPException(status_code=400, detail="request body must be JSON")
    if not isinstance(body, dict):
        raise HTTPException(status_code=400, detail="request body must be a JSON object")
    return body


def _require_int(body: dict[str, Any], key: str, optional: bool = False) -> Optional[int]:
    value = body.get(key)
    if value is None:
        if optional:
            return None
        raise HTTPException(status_code=400, detail=f"missing required field '{key}'")
    if isinstance(value, bool) or not isinstance(value, int):
        raise HTTPException(status_code=400, detail=f"field '{key}' must be an integer")
    return value


def create_app(
    store: Optional[SessionStore] = None,
    dataset: Optional[Dataset] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    """Build the API application.

    ``dataset`` optionally injects an in-memory dataset used by every created
    session (handy for tests and demos without CSV files on disk).
    """
    app = FastAPI(title="alforge", version="0.1.0")
    sessions = store if store is not None else SessionStore()
    app.state.store = sessions

    @app.post("/sessions")
    async def create_session(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        try:
            config = RunConfig.from_dict(body)
            state = init_session(config, dataset=dataset)
        except AlforgeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid configuration: {exc}")
        session_id = sessions.add(state)
        return _session_summary(session_id, state)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        state = sessions.get(session_id)
        with sessions.lock(session_id):
            return _session_summary(session_id, state)

    @app.get("/sessions/{session_id}/pending")
    def get_pending(session_id: str) -> dict[str, Any]:
        state = sessions.get(session_id)
        with sessions.lock(session_id):
            return {
                "schema_version": SCHEMA_VERSION,
                "status": state.status,
                "pending": _pending_payload(state),
            }

    @app.post("/sessions/{session_id}/label")
    async def post_label(session_id: str, request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        state = sessions.get(session_id)
        instance_id = _require_int(body, "instance_id")
        class_index = _require_int(body, "class_index")
        z1 = _require_int(body, "z1")
        z2 = _require_int(body, "z2", optional=True)
        if not 0 <= class_index < state.dataset.n_classes:
            raise HTTPException(status_code=400, detail="class_index out of range")
        for name, value in (("z1", z1), ("z2", z2)):
            if value is not None and not 1 <= value <= 5:
                raise HTTPException(
                    status_code=400, detail=f"field '{name}' must be between 1 and 5"
                )
        with sessions.lock(session_id):
            if state.config.oracle_mode != "interactive":
                raise HTTPException(
                    status_code=409, detail="session does not accept external labels"
                )
            if state.status != STATUS_AWAITING or state.pending is None:
                raise HTTPException(status_code=409, detail="no label is awaited")
            if instance_id != state.pending:
                raise HTTPException(
                    status_code=409,
                    detail="instance is not the one awaiting a label",
                )
            try:
                provide_label(state, ExpertInput(label=class_index, z1=z1, z2=z2))
            except (DomainError, OutOfRangeError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return {
                "schema_version": SCHEMA_VERSION,
                "accepted": True,
                "status": state.status,
                "queries_made": state.queries_made,
                "label_events": len(state.query_log),
                "pending": _pending_payload(state),
            }

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(
        session_id: str, start: int = Query(0, alias="from")
    ) -> dict[str, Any]:
        state = sessions.get(session_id)
        with sessions.lock(session_id):
            if start < 0:
                start = 0
            snaps = [s.to_dict() for s in state.metric_history[start:]]
            return {
                "schema_version": SCHEMA_VERSION,
                "from": start,
                "total": len(state.metric_history),
                "snapshots": snaps,
                "switches": list(state.stats.get("switches", [])),
            }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict[str, Any]:
        state = sessions.get(session_id)
        with sessions.lock(session_id):
            return state_to_dict(state)

    @app.post("/sessions/{session_id}/stop")
    def post_stop(session_id: str) -> dict[str, Any]:
        state = sessions.get(session_id)
        with sessions.lock(session_id):
            state.status = STATUS_STOPPED
            state.pending = None
            return _session_summary(session_id, state)

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
