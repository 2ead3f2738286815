"""Persistence and reporting: event logs, manifests, CSV signals, plots, state tables, reports."""

from importlib import import_module

from .events import (
    BATCH, EPISODE_END, EXPLAIN, STEP, RunTrace, TraceWriter, file_sha256, load_trace, read_events,
)
from .manifest import RunManifest, load_manifest, verify_events
from .tables import render_state_table

# These depend on the explain package, which itself imports .events; load on first use.
_LAZY = {
    "SCHEMAS": "export", "export_csv": "export", "read_csv": "export", "signal_rows": "export",
    "render_plot": "plots", "build_report": "report",
}


def __getattr__(name):
    if name in _LAZY:
        return getattr(import_module(f".{_LAZY[name]}", __name__), name)
    raise AttributeError(name)
