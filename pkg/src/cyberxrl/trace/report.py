"""Per-run signal files, plots and the markdown report."""

from __future__ import annotations

import json
import os

import numpy as np

from ..explain import signals as sig
from ..explain.instrument import ExplainConfig
from .events import load_trace
from .export import SCHEMAS, alert_dicts, export_csv, signal_rows
from .manifest import EVENTS_FILE, load_manifest
from .plots import render_plot

SIGNALS_DIR = "signals"
PLOTS_DIR = "plots"
REPORT_FILE = "report.md"


def write_signals(run_dir, trace, cfg=ExplainConfig()):
    out = os.path.join(run_dir, SIGNALS_DIR)
    os.makedirs(out, exist_ok=True)
    return {name: export_csv(trace, name, os.path.join(out, f"{name}.csv"), cfg) for name in SCHEMAS}


def render_run_plots(run_dir, trace, cfg=ExplainConfig()):
    """Render every plot the trace has data for; returns ``{name: path}``."""
    out = os.path.join(run_dir, PLOTS_DIR)
    os.makedirs(out, exist_ok=True)
    made = {}

    def plot(name, series, kind, **labels):
        made[name] = render_plot(series, kind, os.path.join(out, f"{name}.svg"), **labels)

    rewards = sig.reward_curve(trace)
    if rewards:
        plot("reward_curve", {"episode reward": rewards}, "line",
             title="Cumulative reward per episode", xlabel="episode", ylabel="reward")
    eps = signal_rows(trace, "epsilon_trace", cfg)
    if eps:
        plot("epsilon_trace", {"epsilon": eps}, "line", title="Exploration rate",
             xlabel="global step", ylabel="epsilon")
    disc = sig.discovery_curve(trace)
    if disc:
        plot("discovery_curve", {"discovered nodes": disc}, "line", title="Node discovery",
             xlabel="global step", ylabel="distinct nodes discovered")
    curves = sig.phase_reward_curves(trace, cfg.phase_threshold)
    phase_series = {p: list(enumerate(v, 1)) for p, v in curves.items() if v}
    if phase_series:
        plot("phase_rewards", phase_series, "line", title="Cumulative reward by phase",
             xlabel="phase-local step", ylabel="cumulative reward")
    snaps = trace.explain("q_snapshot")
    if snaps:
        last = snaps[-1]
        plot("q_snapshot_last", {f"episode {last['episode']}": last["means"]}, "bar",
             title=f"Mean action values, episode {last['episode']}", xlabel="action", ylabel="mean value")
    stats = signal_rows(trace, "priority_stats", cfg)
    if stats:
        plot("priority_stats", {"mean |TD error|": [(b, d) for b, _, d, _ in stats]}, "line",
             title="Mean priority per batch", xlabel="batch", ylabel="mean |TD error|")
        plot("high_priority_states", {"distinct states": [(b, c) for b, _, _, c in stats]}, "line",
             title="High-priority states per batch", xlabel="batch", ylabel="count")
    conf = trace.explain("confidence")
    if conf:
        plot("confidence", {
            "normalised entropy": [(e["episode"], e["entropy"]) for e in conf],
            "logit margin": [(e["episode"], e["margin"]) for e in conf],
        }, "line", title="Confidence and uncertainty", xlabel="episode", ylabel="value")
    return made


def _rel(path, base):
    return os.path.relpath(path, base).replace(os.sep, "/")


def _fmt(x):
    return f"{x:.4g}" if isinstance(x, float) else str(x)


def _run_section(run_dir, report_dir, cfg):
    manifest = load_manifest(run_dir)
    trace = load_trace(run_dir)
    plots = render_run_plots(run_dir, trace, cfg)
    write_signals(run_dir, trace, cfg)
    lines = [f"## Run `{manifest.run_id}`", ""]
    env = manifest.environment
    lines.append(f"Agent `{manifest.agent.get('kind')}` on `{env.get('name')}` "
                 f"(seed {manifest.seed}, {manifest.episodes} episodes x {manifest.iterations} iterations).")
    lines.append("")

    def img(name, caption):
        if name in plots:
            lines.append(f"![{caption}]({_rel(plots[name], report_dir)})")
            lines.append("")

    rewards = sig.reward_curve(trace)
    if rewards:
        vals = [r for _, r in rewards]
        lines += ["### Benchmark", "",
                  f"Final episode reward {_fmt(vals[-1])}; best {_fmt(max(vals))}; mean {_fmt(float(np.mean(vals)))}.", ""]
        img("reward_curve", "reward curve")
    if "epsilon_trace" in plots or "discovery_curve" in plots:
        disc = sig.discovery_curve(trace)
        lines += ["### Exploration", ""]
        if disc:
            lines += [f"Distinct nodes discovered by the end of the run: {disc[-1][1]}.", ""]
        img("epsilon_trace", "epsilon trace")
        img("discovery_curve", "discovery curve")
    if "phase_rewards" in plots:
        means = sig.phase_mean_rewards(trace, cfg.phase_threshold)
        counts = {p: len(v) for p, v in sig.phase_reward_curves(trace, cfg.phase_threshold).items()}
        lines += ["### Phase analysis", "",
                  f"Threshold {cfg.phase_threshold}. Early: {counts[sig.EARLY]} steps, mean reward "
                  f"{_fmt(means[sig.EARLY])}. Late: {counts[sig.LATE]} steps, mean reward {_fmt(means[sig.LATE])}.", ""]
        img("phase_rewards", "phase reward curves")
    snaps = trace.explain("q_snapshot")
    if snaps:
        doms = ", ".join(f"{e['episode']}:{e['dominant']}" for e in snaps)
        lines += ["### Action-value evolution", "", f"Dominant action per episode (episode:action): {doms}.", ""]
        img("q_snapshot_last", "final action values")
    if "priority_stats" in plots:
        stats = signal_rows(trace, "priority_stats", cfg)
        deltas = [d for _, _, d, _ in stats]
        lines += ["### Replay priority diagnostics", "",
                  f"{len(stats)} batches; mean |TD error| first {_fmt(deltas[0])}, last {_fmt(deltas[-1])}, "
                  f"peak {_fmt(max(deltas))}; reward filter {cfg.reward_filter}.", ""]
        img("priority_stats", "priority trace")
        img("high_priority_states", "high-priority states")
    conf = trace.explain("confidence")
    if conf:
        lines += ["### Confidence and collapse", "",
                  f"Entropy {_fmt(conf[0]['entropy'])} -> {_fmt(conf[-1]['entropy'])}; "
                  f"margin {_fmt(conf[0]['margin'])} -> {_fmt(conf[-1]['margin'])}.", ""]
        img("confidence", "entropy and margin")
        lines += ["### Dominant action", "",
                  "Per-episode dominant action: " + ", ".join(str(e["dominant"]) for e in conf) + ".", ""]
    alerts = alert_dicts(trace, cfg)
    lines += ["### Alerts", ""]
    if alerts:
        for a in alerts:
            lines.append(f"- {a['kind']} alert: onset episode {a['onset']} "
                         f"({json.dumps(a['evidence'], sort_keys=True)})")
    else:
        lines.append("- none")
    lines.append("")
    return lines


def build_report(run_dirs, out_path=None, cfg=ExplainConfig(), title="Run report"):
    """Write a markdown report covering ``run_dirs``; runs without a log are listed as skipped."""
    run_dirs = [str(r) for r in run_dirs]
    if out_path is None:
        out_path = os.path.join(run_dirs[0], REPORT_FILE)
    report_dir = os.path.dirname(os.path.abspath(out_path))
    lines = [f"# {title}", ""]
    skipped = []
    for run_dir in run_dirs:
        if not os.path.exists(os.path.join(run_dir, EVENTS_FILE)):
            skipped.append(run_dir)
            continue
        lines += _run_section(run_dir, report_dir, cfg)
    if skipped:
        lines += ["## Skipped", ""] + [f"- `{s}`: no {EVENTS_FILE}" for s in skipped] + [""]
    text = "\n".join(lines).rstrip() + "\n"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return out_path, skipped
