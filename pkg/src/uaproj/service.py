"""HTTP service for interactive importance-weight steering.

Per-class aggregated moments are computed once per session (they do not
depend on tau); every accepted weight update recombines them, rebuilds the
projection, reprojects the mixtures, and regenerates contour sets. Responses
always reflect exactly one revision: state is swapped atomically as a single
immutable snapshot per session.
"""

from __future__ import annotations

import itertools
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .contours import DEFAULT_RHOS, contour_set, contours_to_json
from .dataio import load_csv
from .errors import NumericalError, ValidationError
from .fitting import FitConfig, fit_labeled
from .model import ImportanceWeights, MixtureModel
from .moments import AggregatedMoments, aggregate_mixture
from .projection import build_weighted_moments, project_mixture, projection_from_ua


@dataclass(frozen=True)
class Snapshot:
    """One fully consistent rendering state at a single revision."""

    revision: int
    tau: tuple[float, ...]
    projection: dict
    contours: list[dict]


@dataclass
class Session:
    session_id: str
    names: list[str]
    models: list[MixtureModel]
    moments: list[AggregatedMoments]
    counts: list[int] | None
    d: int
    rhos: tuple[float, ...]
    resolution: tuple[int, int]
    snapshot: Snapshot = None  # type: ignore[assignment]
    lock: threading.Lock = field(default_factory=threading.Lock)
    _revisions: "itertools.count" = field(default_factory=lambda: itertools.count(1))


def compute_snapshot(session: Session, tau: ImportanceWeights, revision: int) -> Snapshot:
    wms = build_weighted_moments(session.moments, tau)
    p = projection_from_ua(wms, session.d)
    contours = []
    for cid, (name, m) in enumerate(zip(session.names, session.models)):
        projected = project_mixture(m, p)
        levels = contour_set(projected, rhos=session.rhos, resolution=session.resolution)
        payload = contours_to_json(cid, levels)
        payload["name"] = name
        contours.append(payload)
    return Snapshot(
        revision=revision,
        tau=tuple(float(t) for t in tau.tau),
        projection=p.to_json(),
        contours=contours,
    )


def _session_descriptor(session: Session) -> dict:
    snap = session.snapshot
    return {
        "session_id": session.session_id,
        "classes": [
            {"class_id": i, "name": n} for i, n in enumerate(session.names)
        ],
        "d": session.d,
        "rhos": list(session.rhos),
        "resolution": list(session.resolution),
        "revision": snap.revision,
        "tau": list(snap.tau),
        "projection": snap.projection,
        "contours": snap.contours,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="uaproj weight service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, detail=f"unknown session {session_id}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        try:
            d = int(body.get("d", 2))
            rhos = tuple(float(r) for r in body.get("rhos", DEFAULT_RHOS))
            res = body.get("resolution", 512)
            resolution = (int(res), int(res)) if np.isscalar(res) else (int(res[0]), int(res[1]))

            if "classes" in body:
                names, models, counts = [], [], []
                for entry in body["classes"]:
                    names.append(str(entry["name"]))
                    models.append(MixtureModel.from_json(entry["model"]))
                    counts.append(entry.get("count"))
                counts = None if any(c is None for c in counts) else [int(c) for c in counts]
            elif "dataset" in body:
                dataset = load_csv(body["dataset"], body["label_column"])
                cfg = FitConfig.from_json(body.get("fit", {})) if body.get("fit") else FitConfig()
                try:
                    fits = fit_labeled(dataset, cfg)
                except NumericalError as exc:
                    raise HTTPException(422, detail=str(exc)) from exc
                if any(f.failed for f in fits):
                    failed = [f.name for f in fits if f.failed]
                    raise HTTPException(422, detail=f"fit failed for classes {failed}")
                names = [f.name for f in fits]
                models = [f.model for f in fits]
                counts = [f.n_samples for f in fits]
            else:
                raise HTTPException(400, detail="body needs 'classes' or 'dataset'")
        except HTTPException:
            raise
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(400, detail=str(exc)) from exc

        session = Session(
            session_id=uuid.uuid4().hex,
            names=names,
            models=models,
            moments=[aggregate_mixture(m) for m in models],
            counts=counts,
            d=d,
            rhos=rhos,
            resolution=resolution,
        )
        tau = (
            ImportanceWeights.from_counts(counts)
            if counts
            else ImportanceWeights.equal(len(models))
        )
        session.snapshot = compute_snapshot(session, tau, next(session._revisions))
        with registry_lock:
            sessions[session.session_id] = session
        return _session_descriptor(session)

    @app.put("/sessions/{session_id}/weights")
    def update_weights(session_id: str, body: dict):
        session = get_session(session_id)
        raw = body.get("tau")
        if raw is None or len(raw) != len(session.models):
            raise HTTPException(
                400, detail=f"tau must list {len(session.models)} weights"
            )
        try:
            tau = ImportanceWeights.normalized([float(v) for v in raw])
        except (ValidationError, TypeError, ValueError) as exc:
            raise HTTPException(400, detail=str(exc)) from exc

        base_revision = body.get("revision")
        with session.lock:
            if base_revision is not None and int(base_revision) < session.snapshot.revision:
                raise HTTPException(
                    409,
                    detail=f"revision {base_revision} is stale "
                    f"(current {session.snapshot.revision})",
                )
            snap = compute_snapshot(session, tau, next(session._revisions))
            session.snapshot = snap
        return {
            "revision": snap.revision,
            "tau": list(snap.tau),
            "projection": snap.projection,
            "contours": snap.contours,
        }

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str):
        return _session_descriptor(get_session(session_id))

    @app.get("/sessions/{session_id}/contours")
    def read_contours(session_id: str):
        snap = get_session(session_id).snapshot
        return {"revision": snap.revision, "contours": snap.contours}

    return app
