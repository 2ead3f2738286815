"""CSV export of explain signals, one fixed schema per signal."""

from __future__ import annotations

import csv
import io
import json

from ..errors import InvalidArgument
from ..explain import signals as sig
from ..explain.instrument import ExplainConfig, compute_alerts

INT, REAL, TEXT = int, float, str

SCHEMAS = {
    "reward_curve": (("episode", INT), ("cumulative_reward", REAL)),
    "epsilon_trace": (("global_step", INT), ("epsilon", REAL)),
    "discovery_curve": (("global_step", INT), ("discovered", INT)),
    "phase_rewards": (("phase", TEXT), ("phase_step", INT), ("cumulative_reward", REAL)),
    "q_snapshots": (("episode", INT), ("action", INT), ("mean_value", REAL), ("dominant", INT)),
    "priority_stats": (("batch", INT), ("episode", INT), ("mean_abs_delta", REAL), ("high_priority_count", INT)),
    "confidence": (("episode", INT), ("entropy", REAL), ("margin", REAL), ("dominant", INT)),
    "alerts": (("kind", TEXT), ("onset", INT), ("evidence", TEXT)),
}


def signal_rows(trace, name, cfg=ExplainConfig()):
    if name not in SCHEMAS:
        raise InvalidArgument(f"unknown signal {name!r}; known: {sorted(SCHEMAS)}")
    if name == "reward_curve":
        return sig.reward_curve(trace)
    if name == "epsilon_trace":
        return [(e["global_step"], e["epsilon"]) for e in trace.steps if "epsilon" in e]
    if name == "discovery_curve":
        return sig.discovery_curve(trace)
    if name == "phase_rewards":
        curves = sig.phase_reward_curves(trace, cfg.phase_threshold)
        return [(phase, i + 1, v) for phase in (sig.EARLY, sig.LATE) for i, v in enumerate(curves[phase])]
    if name == "q_snapshots":
        return [(e["episode"], a + 1, v, e["dominant"])
                for e in trace.explain("q_snapshot") for a, v in enumerate(e["means"])]
    if name == "priority_stats":
        return [(e["batch"], e["episode"], e["mean_abs_delta"], e["high_priority_count"])
                for e in trace.batches if "mean_abs_delta" in e]
    if name == "confidence":
        return [(e["episode"], e["entropy"], e["margin"], e["dominant"]) for e in trace.explain("confidence")]
    return [(a["kind"], a["onset"], json.dumps(a["evidence"], sort_keys=True)) for a in alert_dicts(trace, cfg)]


def alert_dicts(trace, cfg=ExplainConfig()):
    """Alerts under ``cfg``; traces without per-episode records fall back to the alerts they carry."""
    if trace.explain("confidence") or trace.explain("q_snapshot"):
        return [a.to_dict() for a in compute_alerts(trace, cfg)]
    return [{"kind": e["alert"], "onset": e["onset"], "evidence": e["evidence"]} for e in trace.explain("alert")]


def rows_to_csv(name, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([col for col, _ in SCHEMAS[name]])
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def export_csv(trace, name, path, cfg=ExplainConfig()):
    text = rows_to_csv(name, signal_rows(trace, name, cfg))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_csv(path, name):
    if name not in SCHEMAS:
        raise InvalidArgument(f"unknown signal {name!r}")
    schema = SCHEMAS[name]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != [c for c, _ in schema]:
            raise InvalidArgument(f"unexpected header {header} for {name}")
        return [tuple(t(v) for (_, t), v in zip(schema, row)) for row in reader]
