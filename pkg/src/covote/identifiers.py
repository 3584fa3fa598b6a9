"""Secret identifiers and the double-hash eligibility scheme.

Each eligible voter holds a random 32-byte identifier I.  Only h(h(I))
is published (the eligibility set S); registering as a secret holder
reveals h(I); I itself travels only inside an encrypted ballot.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .hashing import HashSuite
from .group import RandomnessSource

IDENTIFIER_BYTES = 32


@dataclass(frozen=True)
class EligibilityDigest:
    once: bytes  # h(I), revealed at holder registration
    twice: bytes  # h(h(I)), published in S


def new_identifier(rng: RandomnessSource) -> bytes:
    return rng.token_bytes(IDENTIFIER_BYTES)


def eligibility_digests(identifier: bytes, suite: HashSuite) -> EligibilityDigest:
    if len(identifier) != IDENTIFIER_BYTES:
        raise ValueError("identifier must be exactly 32 bytes")
    once = suite.digest(identifier)
    return EligibilityDigest(once=once, twice=suite.digest(once))


@dataclass(frozen=True)
class IdentifierBatch:
    """Host-issued identifiers (private) plus the public set S."""

    identifiers: tuple[bytes, ...]
    eligibility: frozenset[bytes]


def issue_identifiers(count: int, rng: RandomnessSource, suite: HashSuite) -> IdentifierBatch:
    if count < 1:
        raise ConfigError("identifier count must be at least 1")
    identifiers: list[bytes] = []
    digests: set[bytes] = set()
    seen: set[bytes] = set()
    while len(identifiers) < count:
        candidate = new_identifier(rng)
        if candidate in seen:
            continue
        twice = eligibility_digests(candidate, suite).twice
        if twice in digests:
            continue
        identifiers.append(candidate)
        seen.add(candidate)
        digests.add(twice)
    return IdentifierBatch(identifiers=tuple(identifiers), eligibility=frozenset(digests))
