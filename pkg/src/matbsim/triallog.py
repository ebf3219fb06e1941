"""Append-only trial log: one canonical-JSON event per line.

The byte stream is the determinism contract: identical (config, seed, mode,
input trace) must serialize to identical bytes, and a replay must regenerate
every event exactly. Canonical serialization sorts keys and uses repr-exact
floats, so decode -> encode round-trips byte-identically.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

LOG_VERSION = 1


def _canonical_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def canonical_json(data: dict) -> str:
    return json.dumps(
        data, sort_keys=True, separators=(",", ":"), default=_canonical_default
    )


@dataclass
class TrialLog:
    header: dict
    events: list[dict] = field(default_factory=list)

    def log(self, t: float, kind: str, payload: dict) -> None:
        self.events.append({"t": t, "kind": kind, "payload": payload})

    def of_kind(self, kind: str) -> Iterator[dict]:
        return (e for e in self.events if e["kind"] == kind)

    def to_jsonl(self) -> bytes:
        lines = [canonical_json({"kind": "header", **self.header})]
        lines.extend(canonical_json(e) for e in self.events)
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def from_jsonl(cls, data: bytes) -> "TrialLog":
        lines = data.decode("utf-8").splitlines()
        if not lines:
            raise ValueError("empty trial log")
        header = json.loads(lines[0])
        if header.pop("kind", None) != "header":
            raise ValueError("trial log must start with a header line")
        events = [json.loads(line) for line in lines[1:] if line.strip()]
        return cls(header=header, events=events)

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_jsonl())

    @classmethod
    def read(cls, path: str | Path) -> "TrialLog":
        return cls.from_jsonl(Path(path).read_bytes())
