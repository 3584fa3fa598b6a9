"""Tamper-evident append-only event log.

Wire format, per record:

    tag(1 byte) || payload_len(4 bytes BE) || payload || chain(32 bytes)

where payload is the canonical JSON of the event (which repeats the
event type, so the tag byte is covered by a consistency check) and
chain = h(previous_chain || payload), seeded from 32 zero bytes.  A
single flipped bit anywhere breaks framing, the tag/type agreement, or
a chain link, and replay raises TamperDetected.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .encoding import canonical_json, load_json
from .errors import TamperDetected
from .hashing import HashSuite

GENESIS_HEAD = bytes(32)

EVENT_TAGS = {
    "create_session": 1,
    "register_holder": 2,
    "freeze_holders": 3,
    "submit_ballot": 4,
    "release_key": 5,
    "settle": 6,
}
TAG_EVENTS = {tag: name for name, tag in EVENT_TAGS.items()}


@dataclass(frozen=True)
class EventRecord:
    tag: int
    payload: bytes  # canonical JSON including the "type" field
    chain: bytes  # h(prev_chain || payload)

    @property
    def type(self) -> str:
        return TAG_EVENTS[self.tag]

    def event(self) -> dict:
        return load_json(self.payload)

    def encode(self) -> bytes:
        return (
            self.tag.to_bytes(1, "big")
            + len(self.payload).to_bytes(4, "big")
            + self.payload
            + self.chain
        )


class EventLog:
    """In-memory chained record list, optionally mirrored to a file.

    Appends are durable before they return: the record is flushed and
    fsynced to ``path`` when one is configured.
    """

    def __init__(self, suite: HashSuite, path: Path | None = None):
        self.suite = suite
        self.path = Path(path) if path is not None else None
        self.records: list[EventRecord] = []
        self.head = GENESIS_HEAD

    def append(self, event: dict[str, Any]) -> EventRecord:
        event_type = event.get("type")
        if event_type not in EVENT_TAGS:
            raise ValueError(f"unknown event type {event_type!r}")
        payload = canonical_json(event)
        chain = self.suite.digest(self.head + payload)
        record = EventRecord(tag=EVENT_TAGS[event_type], payload=payload, chain=chain)
        if self.path is not None:
            with open(self.path, "ab") as fh:
                fh.write(record.encode())
                fh.flush()
                os.fsync(fh.fileno())
        self.records.append(record)
        self.head = chain
        return record

    def to_json(self) -> dict:
        """Human-readable export with lowercase-hex chain hashes."""
        return {
            "events": [
                {"seq": i + 1, "type": rec.type, "payload": rec.event(), "chain": rec.chain.hex()}
                for i, rec in enumerate(self.records)
            ],
            "head": self.head.hex(),
        }


def decode_records(data: bytes) -> list[EventRecord]:
    """Parse framed records; framing damage raises TamperDetected."""
    records: list[EventRecord] = []
    offset = 0
    total = len(data)
    while offset < total:
        if total - offset < 5:
            raise TamperDetected("truncated record header")
        tag = data[offset]
        length = int.from_bytes(data[offset + 1 : offset + 5], "big")
        offset += 5
        if tag not in TAG_EVENTS:
            raise TamperDetected(f"unknown event tag {tag}")
        if total - offset < length + 32:
            raise TamperDetected("truncated record body")
        payload = data[offset : offset + length]
        chain = data[offset + length : offset + length + 32]
        offset += length + 32
        records.append(EventRecord(tag=tag, payload=payload, chain=chain))
    return records


def verify_chain(records: Iterable[EventRecord], suite: HashSuite) -> bytes:
    """Recompute the chain; returns the head or raises TamperDetected."""
    head = GENESIS_HEAD
    for i, rec in enumerate(records):
        expected = suite.digest(head + rec.payload)
        if rec.chain != expected:
            raise TamperDetected(f"chain hash mismatch at event {i + 1}")
        try:
            event = rec.event()
        except Exception as exc:
            raise TamperDetected(f"unparseable payload at event {i + 1}") from exc
        if not isinstance(event, dict) or event.get("type") != rec.type:
            raise TamperDetected(f"tag/type mismatch at event {i + 1}")
        if canonical_json(event) != rec.payload:
            raise TamperDetected(f"non-canonical payload at event {i + 1}")
        head = rec.chain
    return head


def read_log_file(path: Path | str) -> list[EventRecord]:
    with open(path, "rb") as fh:
        return decode_records(fh.read())
