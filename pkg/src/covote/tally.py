"""Reconstruction, decryption, validation, dedup, and rule application.

Nothing here decrypts anything until the valid releases reach the
threshold; below it, tally() raises and no plaintext byte is exposed.
The emitted transcript is self-contained: any third party can re-derive
every field from the public event log plus the released keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .ballots import BallotFormat, parse_payload
from .encoding import canonical_json
from .errors import (
    BallotFormatError,
    InconsistentShares,
    InvalidCiphertext,
    PhaseError,
    RuleError,
    ThresholdNotMet,
)
from .group import Scalar, scalar_to_bytes
from .ledger import Ledger, SessionState, replay
from .timed_release import decrypt_ballot, reconstruct_secret

VALID = "valid"
BAD_FORMAT = "bad_format"
NOT_ELIGIBLE = "not_eligible"
AUTH_FAILURE = "auth_failure"
SUPERSEDED = "superseded"
VALIDITY_CLASSES = (VALID, BAD_FORMAT, NOT_ELIGIBLE, AUTH_FAILURE, SUPERSEDED)

DEFAULT_RULES = {
    "single_choice": "plurality",
    "approval": "approval",
    "ranked": "borda",
    "numeric": "numeric_mean",
}

RULE_FORMATS = {
    "plurality": "single_choice",
    "approval": "approval",
    "borda": "ranked",
    "numeric_mean": "numeric",
    "numeric_sum": "numeric",
}


@dataclass
class DecryptedBallot:
    seq: int
    received_at: int
    validity: str
    choice: Any = None
    identifier: bytes | None = None
    k_commitment: bytes | None = None
    shares_used: tuple[int, ...] | None = None
    superseded_by: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class RuleResult:
    rule: str
    aggregates: dict
    winners: tuple[str, ...]
    validity_counts: dict[str, int]

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "aggregates": self.aggregates,
            "winners": list(self.winners),
            "validity_counts": dict(self.validity_counts),
        }


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    diffs: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def _render_mean(total: int, count: int) -> str:
    """Exact rational mean rendered to 2 decimals, half away from zero."""
    scaled = Fraction(total * 100, count)
    num, den = abs(scaled.numerator), scaled.denominator
    cents = (2 * num + den) // (2 * den)
    sign = "-" if scaled < 0 else ""
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def apply_rule(
    rule: str,
    ballots: list[DecryptedBallot],
    fmt: BallotFormat,
    validity_counts: dict[str, int] | None = None,
) -> RuleResult:
    """Deterministic aggregation over Valid ballots; ties are reported
    as a winner set, never broken silently."""
    if rule not in RULE_FORMATS:
        raise RuleError(f"unknown rule {rule!r}")
    if RULE_FORMATS[rule] != fmt.kind:
        raise RuleError(f"rule {rule!r} does not apply to {fmt.kind!r} ballots")
    if any(b.validity != VALID for b in ballots):
        raise RuleError("apply_rule only accepts Valid ballots")
    counts = validity_counts if validity_counts is not None else {VALID: len(ballots)}

    if rule in ("numeric_mean", "numeric_sum"):
        values = [b.choice for b in ballots]
        total = sum(values)
        aggregates: dict[str, Any] = {"count": len(values), "sum": total}
        if rule == "numeric_mean":
            aggregates["mean"] = _render_mean(total, len(values)) if values else None
        return RuleResult(rule=rule, aggregates=aggregates, winners=(), validity_counts=counts)

    scores = {option: 0 for option in fmt.options}
    if rule == "plurality":
        for b in ballots:
            scores[b.choice] += 1
    elif rule == "approval":
        for b in ballots:
            for option in b.choice:
                scores[option] += 1
    else:  # borda
        top = len(fmt.options) - 1
        for b in ballots:
            for position, option in enumerate(b.choice):
                scores[option] += top - position
    winners: tuple[str, ...] = ()
    if ballots:
        best = max(scores.values())
        winners = tuple(sorted(o for o, s in scores.items() if s == best))
    return RuleResult(
        rule=rule,
        aggregates={"scores": scores},
        winners=winners,
        validity_counts=counts,
    )


def decrypt_ballots(state: SessionState) -> list[DecryptedBallot]:
    """Reconstruct and classify every logged ballot.

    Raises ThresholdNotMet before touching any ciphertext if the valid
    releases are below the threshold.
    """
    if state.frozen is None:
        raise PhaseError("cannot tally before the holder set is frozen")
    n, t = state.frozen
    releases = state.valid_releases()
    if len(releases) < t:
        raise ThresholdNotMet(f"{len(releases)} valid releases, threshold is {t}")

    suite = state.suite
    holder_pks = state.holder_pks()
    v_open, v_close = state.config.voting_window
    fmt = state.config.ballot_format
    results: list[DecryptedBallot] = []
    for entry in state.ballots:
        record = DecryptedBallot(
            seq=entry.seq, received_at=entry.received_at, validity=AUTH_FAILURE
        )
        results.append(record)
        try:
            k = reconstruct_secret(entry.ballot.params, releases, holder_pks, suite)
            payload, identifier = decrypt_ballot(entry.ballot, k, suite)
        except (InvalidCiphertext, InconsistentShares) as exc:
            record.error = exc.code
            continue
        record.k_commitment = suite.digest(scalar_to_bytes(k))
        record.shares_used = tuple(sorted(i for i, _ in releases)[:t])
        record.identifier = identifier
        try:
            record.choice = parse_payload(fmt, payload)
        except BallotFormatError as exc:
            record.validity = BAD_FORMAT
            record.error = str(exc)
            continue
        digest_twice = suite.digest(suite.digest(identifier))
        if digest_twice not in state.eligibility:
            record.validity = NOT_ELIGIBLE
            continue
        if not v_open <= entry.received_at < v_close:
            record.validity = BAD_FORMAT
            record.error = "received outside the voting window"
            continue
        record.validity = VALID

    # overwrite-by-append: keep only the latest otherwise-valid ballot per I
    latest: dict[bytes, DecryptedBallot] = {}
    for record in results:
        if record.validity != VALID:
            continue
        previous = latest.get(record.identifier)
        if previous is not None:
            previous.validity = SUPERSEDED
            previous.superseded_by = record.seq
        latest[record.identifier] = record
    return results


def tally(state: SessionState, rule: str | None = None, chain_head: bytes | None = None) -> dict:
    """Full pipeline; returns the transcript as a canonical-JSON-ready dict."""
    fmt = state.config.ballot_format
    rule = rule or DEFAULT_RULES[fmt.kind]
    records = decrypt_ballots(state)

    validity_counts = {cls: 0 for cls in VALIDITY_CLASSES}
    for record in records:
        validity_counts[record.validity] += 1
    valid_ballots = [r for r in records if r.validity == VALID]
    result = apply_rule(rule, valid_ballots, fmt, validity_counts)

    n, t = state.frozen
    transcript = {
        "session_id": state.config.session_id,
        "n": n,
        "t": t,
        "releases_used": [
            {"holder_index": i, "sk": scalar_to_bytes(sk).hex()}
            for i, sk in state.valid_releases()
        ],
        "ballots": [
            {
                "seq": r.seq,
                "received_at": r.received_at,
                "validity": r.validity,
                "choice": r.choice,
                "identifier": r.identifier.hex() if r.identifier is not None else None,
                "k_commitment": r.k_commitment.hex() if r.k_commitment is not None else None,
                "shares_used": list(r.shares_used) if r.shares_used is not None else None,
                "superseded_by": r.superseded_by,
                "error": r.error,
            }
            for r in records
        ],
        "turnout": {
            "distinct_valid": len({r.identifier for r in valid_ballots}),
            "eligible": len(state.eligibility),
        },
        "rule": rule,
        "result": result.to_json(),
    }
    if chain_head is not None:
        transcript["chain_head"] = chain_head.hex()
    return transcript


def tally_ledger(ledger: Ledger, rule: str | None = None) -> dict:
    return tally(ledger.state, rule=rule, chain_head=ledger.head)


def _diff(prefix: str, expected: Any, actual: Any, out: list[str]) -> None:
    if isinstance(expected, dict) and isinstance(actual, dict):
        for key in sorted(set(expected) | set(actual)):
            if key not in expected:
                out.append(f"{prefix}.{key}: unexpected field")
            elif key not in actual:
                out.append(f"{prefix}.{key}: missing field")
            else:
                _diff(f"{prefix}.{key}", expected[key], actual[key], out)
    elif isinstance(expected, list) and isinstance(actual, list):
        if len(expected) != len(actual):
            out.append(f"{prefix}: length {len(actual)} != {len(expected)}")
            return
        for i, (e, a) in enumerate(zip(expected, actual)):
            _diff(f"{prefix}[{i}]", e, a, out)
    elif expected != actual:
        out.append(f"{prefix}: {actual!r} != {expected!r}")


def verify_transcript(transcript: dict, records_or_path) -> VerificationResult:
    """Independently replay the log, re-run the tally, compare every field."""
    try:
        ledger = replay(records_or_path)
        rule = transcript.get("rule")
        expected = tally_ledger(ledger, rule=rule if rule in RULE_FORMATS else None)
    except Exception as exc:
        return VerificationResult(ok=False, diffs=(f"re-derivation failed: {exc}",))
    if "chain_head" not in transcript:
        expected.pop("chain_head", None)
    diffs: list[str] = []
    _diff("transcript", expected, transcript, diffs)
    if canonical_json(transcript) != canonical_json(expected) and not diffs:
        diffs.append("transcript: canonical encoding differs")
    return VerificationResult(ok=not diffs, diffs=tuple(diffs))
