"""HTTP surface over the pipeline, scenario engine, memory store, and grid oracle.

Every endpoint is a thin adapter: JSON bodies mirror the domain types
field-for-field and add no semantics of their own, so the service result
always equals the in-process call. Sessions live in memory for the service
lifetime; per-session operations are serialized.
"""

from __future__ import annotations

import math
import threading
import uuid
from datetime import datetime, timezone

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from . import scenario as sc
from .deconfab import PipelineConfig, deconfabulate, report_to_dict
from .errors import GatewayError, PipelineAborted, SessionStopped
from .memory import MemoryStore
from .physics import SlitConfig, evaluate_grid, matrix_text


def _turn_dict(turn: sc.Turn) -> dict:
    return {
        "index": turn.index,
        "origin": turn.origin,
        "text": turn.text,
        "speaker_labels": list(turn.speaker_labels),
    }


def _parse_range(raw: str) -> tuple[float, float, int]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be min:max:count, got {raw!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def create_app(
    backend=None,
    provider=None,
    pipeline_config: PipelineConfig | None = None,
    scenario_config: sc.ScenarioConfig | None = None,
    memory: MemoryStore | None = None,
    token: str | None = None,
) -> FastAPI:
    """Build the service app around concrete backend/provider/store instances."""
    app = FastAPI(title="stagecraft", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    sessions: dict[str, sc.Session] = {}
    session_locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()
    store = memory if memory is not None else MemoryStore()
    pipe_config = pipeline_config or PipelineConfig()
    scen_config = scenario_config or sc.ScenarioConfig()

    def _error(status: int, message: str, **extra) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message, **extra})

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        if token and request.headers.get("Authorization") != f"Bearer {token}":
            return JSONResponse(status_code=401, content={"error": "unauthorized"})
        return await call_next(request)

    async def _json_body(request: Request) -> dict | None:
        try:
            body = await request.json()
        except Exception:
            return None
        return body if isinstance(body, dict) else None

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/deconfabulate")
    async def post_deconfabulate(request: Request):
        body = await _json_body(request)
        if body is None:
            return _error(400, "body must be a JSON object")
        text = body.get("response_text")
        if not isinstance(text, str) or not text.strip():
            return _error(400, "response_text must be a non-empty string")
        config = pipe_config
        options = body.get("options") or {}
        if options:
            known = {k: v for k, v in options.items() if k in ("top_n_sites", "max_snippets")}
            if known:
                config = PipelineConfig(
                    **{
                        **pipe_config.__dict__,
                        **known,
                    }
                )
        try:
            report = deconfabulate(text, backend, provider, config, memory=store)
        except PipelineAborted as err:
            partial = report_to_dict(err.report) if err.report is not None else None
            return _error(502, str(err), partial_report=partial)
        return report_to_dict(report)

    @app.post("/sessions")
    async def post_sessions(request: Request):
        body = await _json_body(request)
        if body is None or not isinstance(body.get("scenario_spec"), dict):
            return _error(400, "body must contain a scenario_spec object")
        try:
            spec = sc.parse_scenario_spec(body["scenario_spec"])
            sc.validate_spec(spec)
        except (KeyError, TypeError, ValueError) as err:
            return _error(400, f"invalid scenario_spec: {err}")
        session = sc.start_session(spec, backend, scen_config)
        if session.status != sc.ACTIVE:
            return _error(502, session.note or "gateway failure")
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = session
            session_locks[session_id] = threading.Lock()
        handle = {
            "session_id": session_id,
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        return JSONResponse(status_code=201, content=handle)

    def _get_session(session_id: str) -> tuple[sc.Session, threading.Lock] | None:
        with registry_lock:
            session = sessions.get(session_id)
            lock = session_locks.get(session_id)
        if session is None or lock is None:
            return None
        return session, lock

    @app.post("/sessions/{session_id}/nudge")
    async def post_nudge(session_id: str, request: Request):
        found = _get_session(session_id)
        if found is None:
            return _error(404, "unknown session id")
        session, lock = found
        body = await _json_body(request)
        text = (body or {}).get("text")
        if not isinstance(text, str) or not text.strip():
            return _error(400, "text must be a non-empty string")
        with lock:
            try:
                turn = sc.nudge(session, text, backend, scen_config)
            except SessionStopped:
                return _error(409, "session is stopped")
            except GatewayError as err:
                return _error(502, str(err))
        return _turn_dict(turn)

    @app.post("/sessions/{session_id}/continue")
    async def post_continue(session_id: str):
        found = _get_session(session_id)
        if found is None:
            return _error(404, "unknown session id")
        session, lock = found
        with lock:
            try:
                turn = sc.continue_session(session, backend, scen_config)
            except SessionStopped:
                return _error(409, "session is stopped")
            except GatewayError as err:
                return _error(502, str(err))
        return _turn_dict(turn)

    @app.post("/sessions/{session_id}/stop")
    async def post_stop(session_id: str):
        found = _get_session(session_id)
        if found is None:
            return _error(404, "unknown session id")
        session, lock = found
        with lock:
            sc.stop_session(session)
        return {"status": session.status}

    @app.get("/sessions/{session_id}/transcript")
    async def get_transcript(session_id: str, format: str = "plain"):
        found = _get_session(session_id)
        if found is None:
            return _error(404, "unknown session id")
        session, _ = found
        if format not in ("plain", "structured"):
            return _error(400, "format must be plain or structured")
        text = sc.export_transcript(session, format)
        media = "text/plain" if format == "plain" else "application/json"
        return Response(content=text, media_type=media)

    @app.get("/memory/search")
    async def get_memory_search(request: Request):
        params = request.query_params
        q = params.get("q")
        if q is None:
            return _error(400, "q is required")
        try:
            k = int(params.get("k", "5"))
        except ValueError:
            return _error(400, "k must be an integer")
        if k < 1:
            return _error(400, "k must be positive")
        results = store.search(q, k)
        return [
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
            for r, score in results
        ]

    @app.get("/physics/grid")
    async def get_physics_grid(request: Request):
        params = request.query_params
        try:
            cfg = SlitConfig(
                A1=float(params.get("A1", "1")),
                A2=float(params.get("A2", "1")),
                T1=float(params.get("T1", "1")),
                T2=float(params.get("T2", "1")),
                k=float(params.get("k", str(2 * math.pi))),
                x=float(params.get("x", "0")),
            )
            delay_min, delay_max, n_delay = _parse_range(params.get("delay_range", "-10:10:500"))
            freq_min, freq_max, n_freq = _parse_range(params.get("freq_range", "-10:10:500"))
        except ValueError as err:
            return _error(400, f"bad parameter: {err}")
        try:
            grid = evaluate_grid(cfg, delay_min, delay_max, freq_min, freq_max, n_delay, n_freq)
        except Exception as err:  # InvalidRange and friends map to bad params
            return _error(400, str(err))
        return PlainTextResponse(matrix_text(grid))

    return app
