"""Deterministic public-bulletin-board state machine.

The session state is a pure fold over the hash-chained event log:
configuration, eligibility set, holder registry, ballot log with
overwrite-by-append, key releases, and deposit/reward settlement, all
under an injected logical clock.  Replaying a log byte-for-byte
reproduces the serialized state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .ballots import BallotFormat, max_payload_bytes
from .encoding import canonical_json
from .errors import (
    AlreadyRegistered,
    AlreadyReleased,
    ConfigError,
    DuplicateKey,
    MalformedBallot,
    NotEligible,
    NotFound,
    PhaseError,
    SessionAborted,
    TamperDetected,
)
from .eventlog import EventLog, EventRecord, read_log_file, verify_chain
from .group import GroupElement, Scalar, scalar_from_bytes, scalar_to_bytes, verify_key_release
from .hashing import HashSuite
from .identifiers import IDENTIFIER_BYTES
from .timed_release import BALLOT_NONCE_BYTES, EncryptedBallot, PublicParams

AEAD_OVERHEAD = 16  # GCM tag
CIPHERTEXT_SLACK = 64  # headroom over the canonical payload bound


@dataclass(frozen=True)
class ThresholdPolicy:
    """Either a fixed threshold or a fraction of the realized holder count."""

    fixed: int | None = None
    fraction: float | None = None

    def __post_init__(self):
        if (self.fixed is None) == (self.fraction is None):
            raise ConfigError("threshold policy needs exactly one of fixed/fraction")
        if self.fixed is not None and self.fixed < 1:
            raise ConfigError("fixed threshold must be at least 1")
        if self.fraction is not None and not 0 < self.fraction <= 1:
            raise ConfigError("threshold fraction must be in (0, 1]")

    def resolve(self, n: int) -> int:
        if self.fixed is not None:
            return self.fixed
        # Fraction(str(...)) keeps decimal fractions exact under ceil
        return math.ceil(Fraction(str(self.fraction)) * n)

    def to_json(self) -> dict:
        if self.fixed is not None:
            return {"fixed": self.fixed}
        return {"fraction": self.fraction}

    @classmethod
    def from_json(cls, data: dict) -> "ThresholdPolicy":
        return cls(fixed=data.get("fixed"), fraction=data.get("fraction"))


@dataclass(frozen=True)
class SessionConfig:
    session_id: str
    registration_window: tuple[int, int]  # [open, close)
    voting_window: tuple[int, int]  # [open, close)
    release_deadline: int
    threshold_policy: ThresholdPolicy
    ballot_format: BallotFormat
    deposit: int = 0
    reward: int = 0
    hash_algorithm: str = "sha-256"
    aead_scheme: str = "aes-256-gcm"

    def __post_init__(self):
        t_open, t_close = self.registration_window
        v_open, v_close = self.voting_window
        if not t_open <= t_close:
            raise ConfigError("registration window is inverted")
        if not (t_close <= v_open < v_close <= self.release_deadline):
            raise ConfigError(
                "windows must satisfy t_close <= v_open < v_close <= release_deadline"
            )
        if self.deposit < 0 or self.reward < 0:
            raise ConfigError("deposit and reward must be non-negative")
        if not self.session_id:
            raise ConfigError("session_id must be non-empty")
        HashSuite(self.hash_algorithm, self.aead_scheme)  # reject unknown algorithms

    @property
    def suite(self) -> HashSuite:
        return HashSuite(self.hash_algorithm, self.aead_scheme)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "registration_window": list(self.registration_window),
            "voting_window": list(self.voting_window),
            "release_deadline": self.release_deadline,
            "threshold_policy": self.threshold_policy.to_json(),
            "ballot_format": self.ballot_format.to_json(),
            "deposit": self.deposit,
            "reward": self.reward,
            "hash_algorithm": self.hash_algorithm,
            "aead_scheme": self.aead_scheme,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SessionConfig":
        return cls(
            session_id=data["session_id"],
            registration_window=tuple(data["registration_window"]),
            voting_window=tuple(data["voting_window"]),
            release_deadline=data["release_deadline"],
            threshold_policy=ThresholdPolicy.from_json(data["threshold_policy"]),
            ballot_format=BallotFormat.from_json(data["ballot_format"]),
            deposit=data.get("deposit", 0),
            reward=data.get("reward", 0),
            hash_algorithm=data.get("hash_algorithm", "sha-256"),
            aead_scheme=data.get("aead_scheme", "aes-256-gcm"),
        )


@dataclass(frozen=True)
class KeyRelease:
    holder_index: int
    sk: Scalar
    released_at: int
    valid: bool


@dataclass
class HolderRecord:
    index: int  # 1-based registration order
    once_digest: bytes  # h(I)
    pk: GroupElement
    registered_at: int
    deposit_held: int
    release: KeyRelease | None = None
    invalid_attempts: list[int] = field(default_factory=list)


@dataclass
class BallotEntry:
    seq: int
    ballot: EncryptedBallot
    received_at: int


@dataclass
class Settlement:
    payouts: dict[int, int]
    forfeits: dict[int, int]
    deposits_total: int
    rewards_total: int
    aborted_refund: bool


PHASES = (
    "pre_registration",
    "registration",
    "registration_closed",
    "pre_voting",
    "voting",
    "release",
    "closed",
    "settled",
    "aborted",
)


class SessionState:
    """Mutable fold target; mutated only by apply_event."""

    def __init__(self, config: SessionConfig, eligibility: frozenset[bytes]):
        if not eligibility:
            raise ConfigError("eligibility set must be non-empty")
        self.config = config
        self.eligibility = eligibility
        self.holders: list[HolderRecord] = []
        self.ballots: list[BallotEntry] = []
        self.clock = 0
        self.frozen: tuple[int, int] | None = None  # (n, t)
        self.aborted = False
        self.abort_reason: str | None = None
        self.settlement: Settlement | None = None

    @property
    def suite(self) -> HashSuite:
        return self.config.suite

    @property
    def phase(self) -> str:
        return self.phase_at(self.clock)

    def phase_at(self, now: int) -> str:
        """Phase as seen at logical time ``now`` (>= the event clock)."""
        if self.aborted:
            return "aborted"
        if self.settlement is not None:
            return "settled"
        t_open, t_close = self.config.registration_window
        v_open, v_close = self.config.voting_window
        if self.frozen is None:
            if now < t_open:
                return "pre_registration"
            if now < t_close:
                return "registration"
            return "registration_closed"
        if now < v_open:
            return "pre_voting"
        if now < v_close:
            return "voting"
        if now <= self.config.release_deadline:
            return "release"
        return "closed"

    def holder_pks(self) -> list[GroupElement]:
        return [h.pk for h in self.holders]

    def valid_releases(self) -> list[tuple[int, Scalar]]:
        return [
            (h.index, h.release.sk)
            for h in self.holders
            if h.release is not None and h.release.valid
        ]

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "eligibility": sorted(d.hex() for d in self.eligibility),
            "holders": [
                {
                    "index": h.index,
                    "once_digest": h.once_digest.hex(),
                    "pk": h.pk.hex(),
                    "registered_at": h.registered_at,
                    "deposit_held": h.deposit_held,
                    "release": None
                    if h.release is None
                    else {
                        "sk": scalar_to_bytes(h.release.sk).hex(),
                        "released_at": h.release.released_at,
                        "valid": h.release.valid,
                    },
                    "invalid_attempts": list(h.invalid_attempts),
                }
                for h in self.holders
            ],
            "ballots": [
                {
                    "seq": b.seq,
                    "received_at": b.received_at,
                    "ephemeral": b.ballot.params.ephemeral.hex(),
                    "alphas": [scalar_to_bytes(a).hex() for a in b.ballot.params.alphas],
                    "nonce": b.ballot.params.nonce.hex(),
                    "ciphertext": b.ballot.ciphertext.hex(),
                }
                for b in self.ballots
            ],
            "clock": self.clock,
            "phase": self.phase,
            "frozen": None if self.frozen is None else {"n": self.frozen[0], "t": self.frozen[1]},
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "settlement": None
            if self.settlement is None
            else {
                "payouts": {str(i): v for i, v in sorted(self.settlement.payouts.items())},
                "forfeits": {str(i): v for i, v in sorted(self.settlement.forfeits.items())},
                "deposits_total": self.settlement.deposits_total,
                "rewards_total": self.settlement.rewards_total,
                "aborted_refund": self.settlement.aborted_refund,
            },
        }

    def serialize(self) -> bytes:
        return canonical_json(self.to_json())


def _advance_clock(state: SessionState, now: int) -> None:
    if now < state.clock:
        raise PhaseError(f"logical clock must not go backwards ({now} < {state.clock})")
    state.clock = now


def apply_event(state: SessionState | None, event: dict[str, Any]) -> SessionState:
    """Validate and fold one event; raises before mutating on rejection."""
    event_type = event.get("type")

    if event_type == "create_session":
        if state is not None:
            raise ConfigError("session already created")
        config = SessionConfig.from_json(event["config"])
        eligibility = frozenset(bytes.fromhex(d) for d in event["eligibility"])
        if any(len(d) != 32 for d in eligibility):
            raise ConfigError("eligibility digests must be 32 bytes")
        return SessionState(config, eligibility)

    if state is None:
        raise ConfigError("first event must create the session")

    if event_type == "register_holder":
        now = event["now"]
        once = bytes.fromhex(event["once_digest"])
        pk = GroupElement.from_hex(event["pk"])
        t_open, t_close = state.config.registration_window
        if state.aborted:
            raise SessionAborted(state.abort_reason or "session aborted")
        _check_window(state, now, t_open, t_close, "registration")
        if len(once) != 32:
            raise NotEligible("once digest must be 32 bytes")
        if state.suite.digest(once) not in state.eligibility:
            raise NotEligible("h(h(I)) is not in the eligibility set")
        if any(h.once_digest == once for h in state.holders):
            raise AlreadyRegistered("identifier digest already registered")
        if any(h.pk == pk for h in state.holders):
            raise DuplicateKey("public key already registered")
        _advance_clock(state, now)
        record = HolderRecord(
            index=len(state.holders) + 1,
            once_digest=once,
            pk=pk,
            registered_at=now,
            deposit_held=state.config.deposit,
        )
        state.holders.append(record)
        return state

    if event_type == "freeze_holders":
        now = event["now"]
        _, t_close = state.config.registration_window
        if state.aborted:
            raise SessionAborted(state.abort_reason or "session aborted")
        if state.frozen is not None:
            raise PhaseError("holder set already frozen")
        if now < t_close:
            raise PhaseError("cannot freeze before registration closes")
        _advance_clock(state, now)
        n = len(state.holders)
        if n == 0:
            state.aborted = True
            state.abort_reason = "no secret holders registered"
            return state
        t = state.config.threshold_policy.resolve(n)
        if not 1 <= t <= n:
            state.aborted = True
            state.abort_reason = f"resolved threshold {t} infeasible for {n} holders"
            return state
        state.frozen = (n, t)
        return state

    if event_type == "submit_ballot":
        now = event["now"]
        if state.aborted:
            raise SessionAborted(state.abort_reason or "session aborted")
        if state.frozen is None:
            raise PhaseError("holder set is not frozen yet")
        v_open, v_close = state.config.voting_window
        _check_window(state, now, v_open, v_close, "voting")
        ballot = _ballot_from_wire(state, event)
        _advance_clock(state, now)
        entry = BallotEntry(seq=len(state.ballots) + 1, ballot=ballot, received_at=now)
        state.ballots.append(entry)
        return state

    if event_type == "release_key":
        now = event["now"]
        index = event["holder_index"]
        sk = scalar_from_bytes(bytes.fromhex(event["sk"]))
        if state.aborted:
            raise SessionAborted(state.abort_reason or "session aborted")
        _, v_close = state.config.voting_window
        if not v_close <= now <= state.config.release_deadline:
            raise PhaseError(
                f"release window is [{v_close}, {state.config.release_deadline}], got {now}"
            )
        if not isinstance(index, int) or not 1 <= index <= len(state.holders):
            raise NotFound(f"no holder with index {index}")
        holder = state.holders[index - 1]
        if holder.release is not None:
            raise AlreadyReleased(f"holder {index} already released a valid key")
        _advance_clock(state, now)
        valid = verify_key_release(holder.pk, sk)
        if valid:
            holder.release = KeyRelease(holder_index=index, sk=sk, released_at=now, valid=True)
        else:
            holder.invalid_attempts.append(now)
        return state

    if event_type == "settle":
        now = event["now"]
        if now <= state.config.release_deadline:
            raise PhaseError("cannot settle before the release deadline passes")
        if state.settlement is not None:
            raise PhaseError("incentives already settled")
        _advance_clock(state, now)
        payouts: dict[int, int] = {}
        forfeits: dict[int, int] = {}
        deposit, reward = state.config.deposit, state.config.reward
        rewards_total = 0
        if state.aborted:
            # the session never reached release; deposits go back untouched
            for h in state.holders:
                payouts[h.index] = h.deposit_held
        else:
            for h in state.holders:
                if h.release is not None and h.release.valid:
                    payouts[h.index] = h.deposit_held + reward
                    rewards_total += reward
                else:
                    payouts[h.index] = 0
                    forfeits[h.index] = h.deposit_held
        state.settlement = Settlement(
            payouts=payouts,
            forfeits=forfeits,
            deposits_total=sum(h.deposit_held for h in state.holders),
            rewards_total=rewards_total,
            aborted_refund=state.aborted,
        )
        return state

    raise ConfigError(f"unknown event type {event_type!r}")


def _check_window(state: SessionState, now: int, start: int, end: int, name: str) -> None:
    if not isinstance(now, int):
        raise PhaseError("logical time must be an integer")
    if not start <= now < end:
        raise PhaseError(f"{name} window is [{start}, {end}), got {now}")


def _ballot_from_wire(state: SessionState, event: dict) -> EncryptedBallot:
    n, t = state.frozen
    try:
        ephemeral = GroupElement.from_hex(event["ephemeral"])
        alphas = tuple(scalar_from_bytes(bytes.fromhex(a)) for a in event["alphas"])
        nonce = bytes.fromhex(event["nonce"])
        ciphertext = bytes.fromhex(event["ciphertext"])
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedBallot(f"undecodable ballot field: {exc}") from exc
    if len(alphas) != n - t + 1:
        raise MalformedBallot(f"expected {n - t + 1} alphas for {t}-of-{n}, got {len(alphas)}")
    if len(nonce) != BALLOT_NONCE_BYTES:
        raise MalformedBallot("ballot nonce must be 16 bytes")
    limit = max_payload_bytes(state.config.ballot_format) + IDENTIFIER_BYTES + AEAD_OVERHEAD + CIPHERTEXT_SLACK
    if not IDENTIFIER_BYTES + AEAD_OVERHEAD <= len(ciphertext) <= limit:
        raise MalformedBallot("ciphertext size outside format limits")
    params = PublicParams(
        ephemeral=ephemeral, alphas=alphas, n=n, t=t, ctx=state.config.session_id, nonce=nonce
    )
    return EncryptedBallot(params=params, ciphertext=ciphertext)


class Ledger:
    """Single-writer facade: validates, folds, then durably appends."""

    def __init__(self, log: EventLog, state: SessionState):
        self.log = log
        self.state = state

    # -- construction ----------------------------------------------------

    @classmethod
    def create(
        cls,
        config: SessionConfig,
        eligibility: frozenset[bytes] | set[bytes],
        path: Path | str | None = None,
    ) -> "Ledger":
        if path is not None and Path(path).exists():
            raise ConfigError(f"log file {path} already exists")
        event = {
            "type": "create_session",
            "config": config.to_json(),
            "eligibility": sorted(d.hex() for d in eligibility),
        }
        state = apply_event(None, event)
        log = EventLog(config.suite, path)
        log.append(event)
        return cls(log, state)

    @classmethod
    def from_records(cls, records: list[EventRecord], path: Path | str | None = None) -> "Ledger":
        """Replay: verify the chain, then fold every event."""
        if not records:
            raise TamperDetected("empty log has no session")
        try:
            genesis = records[0].event()
            config = SessionConfig.from_json(genesis["config"])
            suite = config.suite
        except TamperDetected:
            raise
        except Exception as exc:
            raise TamperDetected("undecodable genesis event") from exc
        verify_chain(records, suite)
        state: SessionState | None = None
        for i, record in enumerate(records):
            try:
                state = apply_event(state, record.event())
            except TamperDetected:
                raise
            except Exception as exc:
                raise TamperDetected(f"invalid event {i + 1} during replay: {exc}") from exc
        log = EventLog(suite, path)
        log.records = list(records)
        log.head = records[-1].chain
        return cls(log, state)

    @classmethod
    def open(cls, path: Path | str) -> "Ledger":
        return cls.from_records(read_log_file(path), path=path)

    # -- operations ------------------------------------------------------

    def _commit(self, event: dict) -> None:
        apply_event(self.state, event)
        self.log.append(event)

    def register_holder(self, once_digest: bytes, pk: GroupElement, now: int) -> int:
        self._commit(
            {
                "type": "register_holder",
                "once_digest": once_digest.hex(),
                "pk": pk.hex(),
                "now": now,
            }
        )
        return len(self.state.holders)

    def freeze_holder_set(self, now: int) -> tuple[int, int]:
        self._commit({"type": "freeze_holders", "now": now})
        if self.state.aborted:
            raise SessionAborted(self.state.abort_reason or "session aborted")
        return self.state.frozen

    def submit_ballot_wire(
        self, ephemeral: str, alphas: list[str], nonce: str, ciphertext: str, now: int
    ) -> int:
        """Submit exactly the hex fields a client put on the wire; the
        fold validates them the same way replay will."""
        self._commit(
            {
                "type": "submit_ballot",
                "ephemeral": ephemeral,
                "alphas": list(alphas),
                "nonce": nonce,
                "ciphertext": ciphertext,
                "now": now,
            }
        )
        return len(self.state.ballots)

    def submit_ballot(self, ballot: EncryptedBallot, now: int) -> int:
        if self.state.frozen is not None:
            n, t = self.state.frozen
            p = ballot.params
            if (p.n, p.t) != (n, t):
                raise MalformedBallot(f"ballot built for {p.t}-of-{p.n}, session is {t}-of-{n}")
            if p.ctx != self.state.config.session_id:
                raise MalformedBallot("ballot context does not match this session")
        self._commit(
            {
                "type": "submit_ballot",
                "ephemeral": ballot.params.ephemeral.hex(),
                "alphas": [scalar_to_bytes(a).hex() for a in ballot.params.alphas],
                "nonce": ballot.params.nonce.hex(),
                "ciphertext": ballot.ciphertext.hex(),
                "now": now,
            }
        )
        return len(self.state.ballots)

    def release_key(self, holder_index: int, sk: Scalar, now: int) -> KeyRelease:
        self._commit(
            {
                "type": "release_key",
                "holder_index": holder_index,
                "sk": scalar_to_bytes(sk).hex(),
                "now": now,
            }
        )
        holder = self.state.holders[holder_index - 1]
        if holder.release is not None:
            # a pre-existing release would have raised AlreadyReleased,
            # so this one was accepted just now
            return holder.release
        return KeyRelease(holder_index=holder_index, sk=sk, released_at=now, valid=False)

    def settle_incentives(self, now: int) -> dict[int, int]:
        self._commit({"type": "settle", "now": now})
        return dict(self.state.settlement.payouts)

    # -- views -----------------------------------------------------------

    @property
    def head(self) -> bytes:
        return self.log.head

    def serialize_state(self) -> bytes:
        doc = self.state.to_json()
        doc["chain_head"] = self.log.head.hex()
        return canonical_json(doc)


def replay(records_or_path: list[EventRecord] | Path | str) -> Ledger | None:
    """Rebuild a ledger from a log; TamperDetected on any inconsistency.

    The empty log folds to the fresh pre-session state, represented as
    None (no session exists yet).
    """
    if isinstance(records_or_path, (str, Path)):
        records = read_log_file(records_or_path)
        if not records:
            return None
        return Ledger.from_records(records, path=records_or_path)
    if not records_or_path:
        return None
    return Ledger.from_records(records_or_path)
