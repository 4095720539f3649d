"""HTTP review service for the analyst vetting loop.

Endpoints:

    GET  /health
    GET  /candidates?status=UNREVIEWED&entity=...&page=1&page_size=50
    POST /judgments                 {pair_id, judgment, annotator}
    POST /models/retrain
    GET  /registers/{entity_id}?view=qualitative|quantitative
    GET  /registers/{entity_id}/plan
    GET  /portfolio/{portfolio_id}/overlap

Judgment posts are idempotent per (pair_id, annotator) with last-write-wins;
retraining with nothing new returns 409. If the auth token environment
variable (default RISKMINE_TOKEN) is set, every endpoint except /health
requires `Authorization: Bearer <token>`.
"""

from __future__ import annotations

import os

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..register import qualitative_view, register_to_dict
from ..relation import JUDGMENT_CORRECT, JUDGMENT_INCORRECT, RiskMention
from ..tagger import span_to_dict
from .store import NothingToRetrainError, Store, UnknownPairError


class JudgmentBody(BaseModel):
    pair_id: str = Field(min_length=1)
    judgment: str = Field(pattern=f"^({JUDGMENT_CORRECT}|{JUDGMENT_INCORRECT})$")
    annotator: str = Field(min_length=1)


def _candidate_payload(store: Store, mention: RiskMention) -> dict:
    pair = mention.pair
    return {
        "pair_id": pair.pair_id,
        "entity_id": pair.entity_id,
        "entity_name": store.entity_name(pair.entity_id),
        "risk_type_id": pair.risk_type_id,
        "doc_id": pair.doc_id,
        "sent_index": pair.sent_index,
        "snippet": pair.snippet,
        "company_span": span_to_dict(pair.company),
        "risk_span": span_to_dict(pair.risk),
        "score": mention.score,
        "verdict": mention.verdict,
        "judgment": mention.judgment,
        "published_at": pair.published_at.isoformat() if pair.published_at else None,
        "ambiguous": pair.ambiguous,
    }


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="riskmine review service")

    async def check_token(request: Request) -> None:
        token = os.environ.get(store.config.auth_token_env, "")
        if not token:
            return
        supplied = request.headers.get("authorization", "")
        if supplied != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    @app.exception_handler(RequestValidationError)
    async def validation_as_400(_request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in e["loc"] if p != "body"),
                   "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.get("/health")
    async def health() -> dict:
        return {
            "status": "ok",
            "model_version": store.model_version,
            "mentions": len(store.mentions),
            "judgments": len(store.judgments),
        }

    @app.get("/candidates")
    async def candidates(status: str | None = Query(default=None),
                         entity: str | None = Query(default=None),
                         page: int = Query(default=1, ge=1),
                         page_size: int | None = Query(default=None, ge=1, le=500),
                         _auth: None = Depends(check_token)) -> dict:
        size = page_size or store.config.page_size
        mentions = store.list_candidates(status=status, entity=entity)
        start = (page - 1) * size
        items = [_candidate_payload(store, m) for m in mentions[start:start + size]]
        return {"items": items, "total": len(mentions), "page": page, "page_size": size}

    @app.post("/judgments")
    async def post_judgment(body: JudgmentBody,
                            _auth: None = Depends(check_token)) -> dict:
        try:
            record = store.record_judgment(body.pair_id, body.judgment, body.annotator)
        except UnknownPairError:
            raise HTTPException(status_code=404, detail=f"unknown pair_id {body.pair_id!r}")
        return record.to_dict()

    @app.post("/models/retrain")
    async def retrain(_auth: None = Depends(check_token)) -> dict:
        try:
            model = store.retrain()
        except NothingToRetrainError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"model_version": model.model_version}

    @app.get("/registers/{entity_id}")
    async def get_register(entity_id: str,
                           view: str = Query(default="quantitative"),
                           _auth: None = Depends(check_token)) -> dict:
        if view not in ("qualitative", "quantitative"):
            raise HTTPException(status_code=400,
                                detail="view must be qualitative or quantitative")
        register = store.build_register(entity_id)
        if view == "qualitative":
            return {
                "entity_id": entity_id,
                "entity_name": store.entity_name(entity_id),
                "form": "QUALITATIVE",
                "risk_types": sorted(qualitative_view(register)),
                "model_version": store.model_version,
            }
        payload = register_to_dict(register)
        payload["entity_name"] = store.entity_name(entity_id)
        payload["model_version"] = store.model_version
        return payload

    @app.get("/registers/{entity_id}/plan")
    async def get_plan(entity_id: str, _auth: None = Depends(check_token)) -> dict:
        plan = store.build_plan(entity_id)
        return {
            "entity_id": entity_id,
            "actions": [
                {"risk_type": risk_type, "action": action, "note": note}
                for risk_type, (action, note) in sorted(plan.actions.items())
            ],
            "model_version": store.model_version,
        }

    @app.get("/portfolio/{portfolio_id}/overlap")
    async def get_overlap(portfolio_id: str, _auth: None = Depends(check_token)) -> dict:
        try:
            result = store.build_overlap(portfolio_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown portfolio {portfolio_id!r}")
        return {
            "portfolio_id": portfolio_id,
            "holdings": list(result.holdings),
            "holding_names": [store.entity_name(h) for h in result.holdings],
            "risk_types": list(result.risk_types),
            "matrix": [list(row) for row in result.matrix],
            "jaccard": [
                {"a": a, "b": b, "value": value}
                for (a, b), value in sorted(result.jaccard.items())
            ],
            "diversity": result.diversity,
        }

    return app


def serve(store: Store, host: str = "127.0.0.1", port: int = 8400) -> None:
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="info")
