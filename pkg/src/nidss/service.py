"""HTTP decision-support service: per-patient sessions with daily updates.

One immutable model per service instance. Sessions are persisted to an
embedded sqlite store on every write and reloaded on restart, so a service
restart mid-stay loses nothing. Mutating requests serialise per patient;
reads and what-if queries are side-effect free.

Endpoints (JSON bodies, probabilities as decimal numbers):
    POST /patients                 admit a patient, returns day-0 baseline
    POST /patients/{id}/days       append one day of observations
    GET  /patients/{id}/trajectory full per-day probability trace
    POST /patients/{id}/what-if    hypothetical next day, state untouched
    GET  /model                    structure summary, form schema, version
    GET  /healthz                  liveness probe
Errors are ``{code, message, field?}`` with 404/409/422 status codes.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .clinical import ClinicalSchema, default_schema, load_schema
from .dbn import (
    DbnSpec,
    EvidenceTimeline,
    admission_baseline,
    filter_day,
    load_spec,
    restrict_timeline,
)
from .errors import ImpossibleEvidenceError


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.field = field
        super().__init__(message)

    def body(self) -> dict:
        out = {"code": self.code, "message": self.message}
        if self.field is not None:
            out["field"] = self.field
        return out


class SessionStore:
    """Tiny key-value store: one JSON blob per patient, snapshot on write."""

    def __init__(self, path):
        self.path = str(path)
        # reentrant: mutating endpoints hold the lock across a read-check-
        # write sequence that itself calls put()
        self._lock = threading.RLock()
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS sessions (patient_id TEXT PRIMARY KEY, body TEXT NOT NULL)"
            )

    def _connect(self):
        return sqlite3.connect(self.path)

    def get(self, patient_id: str) -> dict | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT body FROM sessions WHERE patient_id = ?", (patient_id,)
            ).fetchone()
        return json.loads(row[0]) if row else None

    def put(self, patient_id: str, session: dict) -> None:
        with self._lock, self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO sessions (patient_id, body) VALUES (?, ?)",
                (patient_id, json.dumps(session)),
            )

    def lock(self) -> threading.RLock:
        return self._lock


class CreatePatientBody(BaseModel):
    observations: dict[str, str] = Field(default_factory=dict)


class DayBody(BaseModel):
    day: int | None = None
    observations: dict[str, str] = Field(default_factory=dict)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def create_app(model_path, schema_path=None, threshold: float = 0.5,
               db_path=None, ui_dir=None) -> FastAPI:
    spec: DbnSpec = load_spec(model_path)
    schema: ClinicalSchema = load_schema(schema_path) if schema_path else default_schema()
    if db_path is None:
        db_path = str(Path(model_path).with_name("sessions.db"))
    store = SessionStore(db_path)

    static_names = set(spec.static_slice.names)
    template_names = set(spec.slice_template.names)
    admission_vars = [v for v in schema.admission_variables() if v.name in static_names]
    daily_vars = [v for v in schema.entry_variables() if v.name in template_names]
    admission_names = {v.name for v in admission_vars}
    daily_names = {v.name for v in daily_vars}

    app = FastAPI(title="infection-risk service", version=__version__)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    def validate_observations(obs: dict, allowed: dict, kind: str) -> dict:
        for name, state in obs.items():
            if name not in allowed:
                raise ApiError(422, "unknown-variable",
                               f"{name!r} is not an accepted {kind} variable", field=name)
            if state not in allowed[name]:
                raise ApiError(422, "unknown-state",
                               f"{state!r} is not a state of {name!r}", field=name)
        return dict(obs)

    admission_states = {v.name: set(v.states) for v in admission_vars}
    daily_states = {v.name: set(v.states) for v in daily_vars}

    def load_session(patient_id: str) -> dict:
        session = store.get(patient_id)
        if session is None:
            raise ApiError(404, "unknown-patient", f"no session for patient {patient_id!r}")
        return session

    def timeline_of(session: dict) -> EvidenceTimeline:
        return restrict_timeline(
            EvidenceTimeline(dict(session["static_evidence"]),
                             [dict(d) for d in session["days"]]),
            spec,
        )

    def run_filter(timeline: EvidenceTimeline, day: int) -> float:
        try:
            return filter_day(spec, timeline, day).prob("yes")
        except ImpossibleEvidenceError as exc:
            raise ApiError(422, "impossible-evidence", str(exc)) from exc

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/model")
    def model_summary():
        return {
            "version": __version__,
            "threshold": threshold,
            "result_node": spec.result_node,
            "static_result_node": spec.resolve_static_result(),
            "admission_variables": [
                {"name": v.name, "states": list(v.states)} for v in admission_vars
            ],
            "daily_variables": [
                {"name": v.name, "states": list(v.states)} for v in daily_vars
            ],
            "structure": {
                "static_variables": len(spec.static_slice.variables),
                "temporal_variables": len(spec.slice_template.variables),
                "inter_slice_arcs": [list(a) for a in spec.inter_slice_arcs],
                "bridge_arcs": [list(a) for a in spec.bridge_arcs],
            },
        }

    @app.post("/patients", status_code=201)
    def create_patient(body: CreatePatientBody):
        evidence = validate_observations(body.observations, admission_states, "admission")
        try:
            baseline = admission_baseline(spec, evidence)
        except ImpossibleEvidenceError as exc:
            raise ApiError(422, "impossible-evidence", str(exc)) from exc
        patient_id = uuid.uuid4().hex[:12]
        session = {
            "patient_id": patient_id,
            "static_evidence": evidence,
            "days": [],
            "trace": [[0, baseline]],
            "created": _now(),
            "updated": _now(),
        }
        store.put(patient_id, session)
        return {"patient_id": patient_id, "day": 0, "probability": baseline}

    @app.post("/patients/{patient_id}/days")
    def submit_day(patient_id: str, body: DayBody):
        obs = validate_observations(body.observations, daily_states, "daily")
        with store.lock():
            session = load_session(patient_id)
            expected = len(session["days"]) + 1
            if body.day is not None and body.day != expected:
                raise ApiError(409, "out-of-order-day",
                               f"expected day {expected}, got {body.day}")
            session["days"].append(obs)
            timeline = timeline_of(session)
            try:
                p = run_filter(timeline, expected)
            except ApiError:
                session["days"].pop()
                raise
            session["trace"].append([expected, p])
            session["updated"] = _now()
            store.put(patient_id, session)
        return {"day": expected, "probability": p}

    @app.get("/patients/{patient_id}/trajectory")
    def trajectory(patient_id: str):
        session = load_session(patient_id)
        return {
            "patient_id": patient_id,
            "trajectory": [{"day": d, "probability": p} for d, p in session["trace"]],
        }

    @app.post("/patients/{patient_id}/what-if")
    def what_if(patient_id: str, body: DayBody):
        obs = validate_observations(body.observations, daily_states, "daily")
        session = load_session(patient_id)
        day = len(session["days"]) + 1
        hypothetical = {**session, "days": list(session["days"]) + [obs]}
        p = run_filter(timeline_of(hypothetical), day)
        return {"day": day, "probability": p, "committed": False}

    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
