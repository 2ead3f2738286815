"""Append-only JSONL event log and its in-memory reader."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument, TraceWriteError

STEP = "Step"
EPISODE_END = "EpisodeEnd"
BATCH = "Batch"
EXPLAIN = "Explain"
EVENT_KINDS = (STEP, EPISODE_END, BATCH, EXPLAIN)

_REQUIRED = {
    STEP: ("episode", "step", "global_step", "action", "reward", "ratio"),
    EPISODE_END: ("episode", "cumulative_reward", "steps", "final_ratio"),
    BATCH: ("episode", "batch"),
    EXPLAIN: ("signal",),
}

SIG_DIGITS = 12


def canonical(value):
    """Turn numpy values into plain JSON types; floats keep 12 significant digits."""
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    if isinstance(value, np.ndarray):
        return [canonical(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if not np.isfinite(f):
            raise InvalidArgument(f"non-finite value {f!r} in event")
        f = float(f"{f:.{SIG_DIGITS}g}")
        return 0.0 if f == 0 else f
    if value is None or isinstance(value, str):
        return value
    raise InvalidArgument(f"unsupported value of type {type(value).__name__} in event")


def validate_event(event):
    kind = event.get("kind")
    if kind not in EVENT_KINDS:
        raise InvalidArgument(f"unknown event kind {kind!r}")
    missing = [k for k in _REQUIRED[kind] if k not in event]
    if missing:
        raise InvalidArgument(f"{kind} event missing fields {missing}")


def encode_event(event):
    return json.dumps(event, sort_keys=True, separators=(",", ":"), allow_nan=False)


class TraceWriter:
    """One writer per run. Lines are buffered and flushed at each episode end."""

    def __init__(self, path, run_id="run"):
        self.path = str(path)
        self.run_id = run_id
        self.seq = 0
        self.events = []
        try:
            self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise TraceWriteError(run_id, exc) from exc

    def append(self, kind, **payload):
        event = canonical(dict(payload, kind=kind))
        validate_event(event)
        event["seq"] = self.seq
        line = encode_event(event)
        try:
            self._fh.write(line + "\n")
            if kind == EPISODE_END:
                self._fh.flush()
        except (OSError, ValueError) as exc:
            raise TraceWriteError(self.run_id, exc) from exc
        self.seq += 1
        self.events.append(event)
        return event

    def close(self):
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunTrace:
    """Events of one run, in sequence order."""

    events: list

    @classmethod
    def from_events(cls, events):
        return cls([dict(e) for e in events])

    def of_kind(self, kind, signal=None):
        out = [e for e in self.events if e["kind"] == kind]
        if signal is not None:
            out = [e for e in out if e.get("signal") == signal]
        return out

    @property
    def steps(self):
        return self.of_kind(STEP)

    @property
    def episodes(self):
        return self.of_kind(EPISODE_END)

    @property
    def batches(self):
        return self.of_kind(BATCH)

    def explain(self, signal):
        return self.of_kind(EXPLAIN, signal)


def read_events(path):
    events = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh):
            if not line.strip():
                continue
            event = json.loads(line)
            validate_event(event)
            if event.get("seq") != n:
                raise InvalidArgument(f"sequence gap at line {n + 1} of {path}")
            events.append(event)
    return events


def load_trace(path):
    if os.path.isdir(path):
        path = os.path.join(path, "events.log")
    return RunTrace(read_events(path))
