"""Canonical JSON: sorted keys, compact separators, UTF-8, lowercase hex.

Every hash preimage and every serialized state in the system goes
through this single encoder so byte-for-byte reproducibility holds
across processes and languages.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_json(obj: Any) -> bytes:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def load_json(data: bytes | str) -> Any:
    return json.loads(data)
