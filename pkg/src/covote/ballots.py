"""Ballot formats and plaintext payload encoding.

A ballot plaintext is the canonical JSON of the voter's choice; the
format declares which choices are admissible.  Numeric ballots carry
integers so tallying stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .encoding import canonical_json, load_json
from .errors import BallotFormatError, ConfigError

KINDS = ("single_choice", "approval", "ranked", "numeric")


@dataclass(frozen=True)
class BallotFormat:
    kind: str
    options: tuple[str, ...] = field(default=())
    numeric_range: tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown ballot kind {self.kind!r}")
        if self.kind == "numeric":
            if self.numeric_range is None:
                raise ConfigError("numeric ballots need a numeric_range")
            lo, hi = self.numeric_range
            if lo > hi:
                raise ConfigError("numeric_range must be well-ordered")
        else:
            if not self.options:
                raise ConfigError("option ballots need a non-empty option list")
            if len(set(self.options)) != len(self.options):
                raise ConfigError("options must be distinct")

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "numeric":
            out["numeric_range"] = list(self.numeric_range)
        else:
            out["options"] = list(self.options)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "BallotFormat":
        rng = data.get("numeric_range")
        return cls(
            kind=data["kind"],
            options=tuple(data.get("options", ())),
            numeric_range=tuple(rng) if rng is not None else None,
        )


def encode_choice(fmt: BallotFormat, choice: Any) -> bytes:
    """Canonical plaintext bytes for a choice; validates it first."""
    validate_choice(fmt, choice)
    if fmt.kind == "single_choice":
        return canonical_json({"choice": choice})
    if fmt.kind == "approval":
        return canonical_json({"approved": sorted(choice)})
    if fmt.kind == "ranked":
        return canonical_json({"ranking": list(choice)})
    return canonical_json({"value": choice})


def validate_choice(fmt: BallotFormat, choice: Any) -> None:
    if fmt.kind == "single_choice":
        if not isinstance(choice, str) or choice not in fmt.options:
            raise BallotFormatError(f"choice must be one of {list(fmt.options)}")
    elif fmt.kind == "approval":
        if not isinstance(choice, (list, tuple)) or not all(
            isinstance(c, str) for c in choice
        ):
            raise BallotFormatError("approval choice must be a list of option labels")
        if len(set(choice)) != len(choice) or not set(choice) <= set(fmt.options):
            raise BallotFormatError("approvals must be distinct known options")
    elif fmt.kind == "ranked":
        if not isinstance(choice, (list, tuple)) or sorted(choice) != sorted(fmt.options):
            raise BallotFormatError("ranking must order every option exactly once")
    else:  # numeric
        lo, hi = fmt.numeric_range
        if not isinstance(choice, int) or isinstance(choice, bool) or not lo <= choice <= hi:
            raise BallotFormatError(f"value must be an integer in [{lo}, {hi}]")


def parse_payload(fmt: BallotFormat, payload: bytes) -> Any:
    """Inverse of encode_choice; raises BallotFormatError on anything
    that is not a canonical, admissible choice."""
    try:
        data = load_json(payload)
    except Exception as exc:
        raise BallotFormatError("payload is not valid JSON") from exc
    if not isinstance(data, dict):
        raise BallotFormatError("payload must be a JSON object")

    key = {
        "single_choice": "choice",
        "approval": "approved",
        "ranked": "ranking",
        "numeric": "value",
    }[fmt.kind]
    if set(data.keys()) != {key}:
        raise BallotFormatError(f"payload must contain exactly the {key!r} field")
    choice = data[key]
    validate_choice(fmt, choice)
    if fmt.kind == "approval" and list(choice) != sorted(choice):
        raise BallotFormatError("approvals must be listed in sorted order")
    if canonical_json(data) != payload:
        raise BallotFormatError("payload is not in canonical form")
    return choice


def max_payload_bytes(fmt: BallotFormat) -> int:
    """Upper bound on a canonical plaintext for this format, used by the
    ledger's structural ciphertext size check."""
    if fmt.kind == "numeric":
        lo, hi = fmt.numeric_range
        widest = max(len(str(lo)), len(str(hi)))
        return len(b'{"value":}') + widest
    label_budget = sum(len(canonical_json(o)) + 1 for o in fmt.options)
    return len(b'{"approved":[]}') + 8 + label_budget
