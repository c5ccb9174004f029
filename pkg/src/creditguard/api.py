"""HTTP facade over the scoring pipeline.

JSON in, JSON out; errors are problem documents with a machine-readable
`code`. A static bearer token can be required for everything except the
health probe.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import config_to_obj
from .errors import ConfigError, FlagStateError, ParseError, UnknownAccountError
from .ingest import parse_transaction_line
from .scoring import assessment_to_obj
from .service import Pipeline


def _problem(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(pipeline: Pipeline, bearer_token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="creditguard", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if bearer_token and request.url.path != "/v1/health" and request.method != "OPTIONS":
            header = request.headers.get("authorization", "")
            if header != f"Bearer {bearer_token}":
                return _problem(401, "unauthorized", "missing or invalid bearer token")
        return await call_next(request)

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.get("/v1/config")
    def get_config():
        return config_to_obj(pipeline.config)

    @app.post("/v1/transactions")
    async def post_transaction(request: Request):
        body = await request.body()
        try:
            txn = parse_transaction_line(body.decode("utf-8"))
        except ParseError as exc:
            return _problem(400, "malformed_transaction", str(exc))
        try:
            assessment = pipeline.score_transaction(txn)
        except UnknownAccountError as exc:
            return _problem(404, "unknown_account", str(exc))
        except ValueError as exc:
            return _problem(400, "invalid_transaction", str(exc))
        return assessment_to_obj(assessment)

    @app.get("/v1/accounts/{account_id}")
    def get_account(account_id: str):
        try:
            return pipeline.get_account(account_id)
        except UnknownAccountError as exc:
            return _problem(404, "unknown_account", str(exc))

    @app.get("/v1/flags")
    def list_flags(status: Optional[str] = None):
        if status is not None and status not in ("pending", "confirmed_bad", "confirmed_good"):
            return _problem(400, "invalid_status", f"unknown flag status {status!r}")
        return {"flags": pipeline.list_flags(status)}

    @app.post("/v1/flags/{flag_id}/resolution")
    async def resolve_flag(flag_id: str, request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _problem(400, "malformed_body", str(exc))
        verdict = body.get("verdict")
        if verdict not in ("confirmed_bad", "confirmed_good"):
            return _problem(400, "invalid_verdict",
                            "verdict must be confirmed_bad or confirmed_good")
        try:
            return pipeline.resolve_flag(flag_id, verdict, note=body.get("note", ""))
        except FlagStateError as exc:
            message = str(exc)
            if message.startswith("unknown flag"):
                return _problem(404, "unknown_flag", message)
            return _problem(409, "flag_already_resolved", message)
        except ConfigError as exc:
            return _problem(400, "config_error", str(exc))

    return app
