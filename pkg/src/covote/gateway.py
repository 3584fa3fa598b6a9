"""Untrusted proxy gateway: an HTTP face for the bulletin ledger.

The gateway adds no authorization of its own; every write is validated
by the ledger exactly as a direct submission would be, so the gateway
can censor but never forge.  Accepted writes are durably appended to
the event log before the response is sent, and every response carries
the current chain head so clients can audit inclusion.
"""

from __future__ import annotations

import threading
import time
from typing import Any

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    AlreadyRegistered,
    AlreadyReleased,
    ConfigError,
    CovoteError,
    DuplicateKey,
    MalformedBallot,
    NotEligible,
    NotFound,
    PhaseError,
    SessionAborted,
    TamperDetected,
    ThresholdNotMet,
)
from .group import GroupElement, scalar_from_bytes
from .ledger import Ledger
from .tally import tally_ledger

HTTP_STATUS = {
    ConfigError.code: 400,
    MalformedBallot.code: 400,
    NotEligible.code: 403,
    NotFound.code: 404,
    PhaseError.code: 409,
    AlreadyRegistered.code: 409,
    DuplicateKey.code: 409,
    AlreadyReleased.code: 409,
    ThresholdNotMet.code: 409,
    SessionAborted.code: 409,
    TamperDetected.code: 500,
}


class LogicalClock:
    """Manually advanced logical time; the deterministic test clock."""

    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def advance_to(self, tick: int) -> None:
        if tick < self._now:
            raise ValueError("clock cannot go backwards")
        self._now = tick


class WallClock:
    """Maps real time onto logical ticks: tick = (unix - epoch) / seconds."""

    def __init__(self, epoch_unix: float, seconds_per_tick: float = 1.0):
        if seconds_per_tick <= 0:
            raise ConfigError("seconds_per_tick must be positive")
        self.epoch_unix = epoch_unix
        self.seconds_per_tick = seconds_per_tick

    def now(self) -> int:
        return max(0, int((time.time() - self.epoch_unix) / self.seconds_per_tick))


class FileClock:
    """Reads the current tick from a file the host controls; lets scripted
    deployments (and integration tests) drive phases deterministically."""

    def __init__(self, path):
        self.path = path

    def now(self) -> int:
        try:
            with open(self.path) as fh:
                return int(fh.read().strip() or 0)
        except FileNotFoundError:
            return 0


class RegisterRequest(BaseModel):
    once_digest: str = Field(pattern=r"^[0-9a-f]{64}$")
    pk: str = Field(pattern=r"^[0-9a-f]{66}$")


class BallotRequest(BaseModel):
    ephemeral: str = Field(pattern=r"^[0-9a-f]{66}$")
    alphas: list[str]
    nonce: str = Field(pattern=r"^[0-9a-f]{32}$")
    ciphertext: str = Field(pattern=r"^[0-9a-f]+$")


class ReleaseRequest(BaseModel):
    holder_index: int
    sk: str = Field(pattern=r"^[0-9a-f]{64}$")


Clock = LogicalClock | WallClock | FileClock


def create_app(ledger: Ledger, clock: Clock) -> FastAPI:
    app = FastAPI(title="covote gateway", version="1")
    app.state.ledger = ledger
    app.state.clock = clock
    app.state.write_lock = threading.Lock()
    app.state.result_cache = None

    def head_hex() -> str:
        return ledger.head.hex()

    @app.exception_handler(CovoteError)
    async def covote_error_handler(_request: Request, exc: CovoteError):
        return JSONResponse(
            status_code=HTTP_STATUS.get(exc.code, 400),
            content={
                "error": {"code": exc.code, "message": str(exc)},
                "chain_head": head_hex(),
            },
        )

    @app.get("/v1/session")
    def get_session() -> dict[str, Any]:
        state = ledger.state
        n_t = state.frozen
        releases = len(state.valid_releases())
        tallyable = n_t is not None and releases >= n_t[1]
        return {
            "session_id": state.config.session_id,
            "phase": state.phase_at(max(state.clock, app.state.clock.now())),
            "config": state.config.to_json(),
            "frozen": None if n_t is None else {"n": n_t[0], "t": n_t[1]},
            "holder_pks": [pk.hex() for pk in state.holder_pks()],
            "counts": {
                "holders": len(state.holders),
                "ballots": len(state.ballots),
                "valid_releases": releases,
            },
            "result": "/v1/result" if tallyable else None,
            "chain_head": head_hex(),
        }

    @app.get("/v1/holders")
    def get_holders() -> dict[str, Any]:
        return {
            "holders": [
                {
                    "index": h.index,
                    "once_digest": h.once_digest.hex(),
                    "pk": h.pk.hex(),
                    "registered_at": h.registered_at,
                    "released": h.release is not None,
                    "released_at": None if h.release is None else h.release.released_at,
                    "invalid_attempts": len(h.invalid_attempts),
                }
                for h in ledger.state.holders
            ],
            "chain_head": head_hex(),
        }

    @app.post("/v1/register")
    def post_register(body: RegisterRequest) -> dict[str, Any]:
        try:
            pk = GroupElement.from_hex(body.pk)
        except ValueError as exc:
            raise MalformedBallot(f"invalid public key: {exc}") from exc
        with app.state.write_lock:
            index = ledger.register_holder(
                bytes.fromhex(body.once_digest), pk, app.state.clock.now()
            )
        return {"holder_index": index, "chain_head": head_hex()}

    @app.post("/v1/ballot")
    def post_ballot(body: BallotRequest) -> dict[str, Any]:
        with app.state.write_lock:
            seq = ledger.submit_ballot_wire(
                body.ephemeral,
                list(body.alphas),
                body.nonce,
                body.ciphertext,
                app.state.clock.now(),
            )
        return {"seq": seq, "chain_head": head_hex()}

    @app.post("/v1/release")
    def post_release(body: ReleaseRequest) -> dict[str, Any]:
        try:
            sk = scalar_from_bytes(bytes.fromhex(body.sk))
        except ValueError as exc:
            raise MalformedBallot(f"invalid secret key encoding: {exc}") from exc
        with app.state.write_lock:
            release = ledger.release_key(body.holder_index, sk, app.state.clock.now())
        return {"valid": release.valid, "chain_head": head_hex()}

    @app.get("/v1/result")
    def get_result() -> dict[str, Any]:
        cached = app.state.result_cache
        if cached is not None and cached[0] == ledger.head:
            return cached[1]
        transcript = tally_ledger(ledger)
        response = {"transcript": transcript, "chain_head": head_hex()}
        app.state.result_cache = (ledger.head, response)
        return response

    @app.get("/v1/log")
    def get_log(
        offset: int = Query(default=0, ge=0),
        limit: int = Query(default=100, ge=1, le=1000),
    ) -> dict[str, Any]:
        records = ledger.log.records
        page = records[offset : offset + limit]
        return {
            "total": len(records),
            "offset": offset,
            "events": [
                {
                    "seq": offset + i + 1,
                    "type": rec.type,
                    "payload": rec.event(),
                    "chain": rec.chain.hex(),
                }
                for i, rec in enumerate(page)
            ],
            "chain_head": head_hex(),
        }

    return app


def create_app_from_path(log_path, clock: Clock | None = None) -> FastAPI:
    ledger = Ledger.open(log_path)
    return create_app(ledger, clock or WallClock(epoch_unix=time.time()))
