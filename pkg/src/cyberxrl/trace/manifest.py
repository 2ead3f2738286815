"""Run manifests: everything needed to rerun a run, plus the event-log digest."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

from ..errors import IntegrityError, InvalidArgument
from .events import file_sha256

MANIFEST_FILE = "manifest.json"
EVENTS_FILE = "events.log"
TOPOLOGY_FILE = "topology.json"
PARAMS_FILE = "params.npz"


@dataclass
class RunManifest:
    run_id: str
    environment: dict
    agent: dict
    schedule: dict | None
    episodes: int
    iterations: int
    seed: int
    tool_version: str
    events_sha256: str = ""
    explain: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, run_dir):
        path = os.path.join(run_dir, MANIFEST_FILE)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())
        return path

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def load_manifest(run_dir):
    path = os.path.join(run_dir, MANIFEST_FILE)
    if not os.path.exists(path):
        raise InvalidArgument(f"no manifest in {run_dir}")
    with open(path, encoding="utf-8") as fh:
        return RunManifest.from_dict(json.load(fh))


def verify_events(run_dir, manifest=None):
    """Raise :class:`IntegrityError` if events.log no longer matches its recorded digest."""
    manifest = manifest or load_manifest(run_dir)
    actual = file_sha256(os.path.join(run_dir, EVENTS_FILE))
    if actual != manifest.events_sha256:
        raise IntegrityError(f"events.log digest mismatch in {run_dir}: {actual} != {manifest.events_sha256}")
    return actual
