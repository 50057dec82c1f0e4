"""Canonical JSON helpers.

All persisted artifacts (scene files, checkpoints, explanation bundles,
API payloads) are serialized with sorted keys and compact separators so
identical content yields identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(canonical_dumps(obj) + "\n", encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
