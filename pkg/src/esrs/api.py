"""HTTP session API consumed by the web console."""

from __future__ import annotations

from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .errors import EsrsError, NotInFringe, SessionNotFound, UnknownItem
from .service import RecommendationService, recommendation_to_dict


def create_app(service: RecommendationService) -> FastAPI:
    app = FastAPI(title="exploration-space recommender", version="0.1.0")
    app.state.service = service
    # the web console is served from a different origin (static files)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/sessions")
    def create_session(payload: dict[str, Any] = Body(default=None)) -> dict[str, Any]:
        try:
            session = service.create_session(payload)
        except EsrsError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(
        session_id: str,
        mode: str = Query(default="path"),
        k: int = Query(default=3, ge=0),
        beam: int | None = Query(default=None, ge=1),
    ) -> dict[str, Any]:
        try:
            rec = service.recommend(session_id, mode=mode, k_max=k, beam=beam)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return recommendation_to_dict(rec)

    @app.post("/sessions/{session_id}/events")
    def submit_event(session_id: str, payload: dict[str, Any] = Body(...)) -> dict[str, Any]:
        signal = payload.get("signal", {})
        kind = signal.get("kind")
        kwargs: dict[str, Any] = {}
        if kind == "dwell":
            kwargs["dwell_minutes"] = float(signal.get("value", 0.0))
        elif kind == "checkin":
            kwargs["checkin"] = True
        elif kind == "rating":
            kwargs["rating"] = float(signal.get("value", 0.0))
        else:
            raise HTTPException(status_code=400, detail=f"unknown signal kind {kind!r}")
        try:
            record = service.submit_event(
                session_id,
                payload.get("poi", ""),
                timestamp=payload.get("timestamp", ""),
                **kwargs,
            )
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (UnknownItem, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return record

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str) -> dict[str, Any]:
        try:
            return service.state_view(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/dataset/hasse")
    def hasse() -> dict[str, Any]:
        return service.hasse_view()

    @app.get("/sessions/{session_id}/explanations/{poi}")
    def explanation(session_id: str, poi: str) -> dict[str, Any]:
        try:
            return service.explanation_view(session_id, poi)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except NotInFringe as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except UnknownItem as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app
