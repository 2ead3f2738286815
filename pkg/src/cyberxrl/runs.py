"""Run orchestration shared by the command line and the test-suite."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .agents import AgentConfig, make_agent, run_episode
from .agents.mlp import params_from_arrays, params_to_arrays
from .agents.schedules import schedule_to_dict
from .env import AttackEnv, build_chain, build_preset
from .env import topology as topo
from .env.sim import DEFAULT_PROBE_PENALTY, Action, reset, step
from .errors import IntegrityError, InvalidArgument
from .explain.instrument import ExplainConfig, TraceHook
from .explain.signals import discovery_curve
from .trace.events import RunTrace, TraceWriter, canonical, file_sha256, load_trace
from .trace.plots import render_plot
from .trace.manifest import (
    EVENTS_FILE, PARAMS_FILE, TOPOLOGY_FILE, RunManifest, load_manifest, verify_events,
)
from .trace.report import build_report

OUT_ENV = "CYBERXRL_RUNS"
DEFAULT_OUT = "runs"
AGENT_CHOICES = ("random", "tabular", "dql", "dql-per", "pg")


def default_out_root():
    return os.environ.get(OUT_ENV, DEFAULT_OUT)


@dataclass
class RunConfig:
    preset: str | None = "CC10"
    chain: int | None = None
    topology_path: str | None = None
    agent: str = "dql"
    episodes: int = 20
    iterations: int = 200
    seeds: tuple = (0,)
    agent_config: AgentConfig = field(default_factory=AgentConfig)
    explain: ExplainConfig = field(default_factory=ExplainConfig)
    probe_penalty: float = DEFAULT_PROBE_PENALTY
    out: str | None = None
    name: str | None = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.episodes < 1 or self.iterations < 1:
            raise InvalidArgument("episodes and iterations must be >= 1")
        if not self.seeds:
            raise InvalidArgument("at least one seed is required")
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.agent not in AGENT_CHOICES and not self.agent.startswith("exploit:"):
            raise InvalidArgument(f"unknown agent {self.agent!r}")
        if self.agent == "exploit:":
            raise InvalidArgument("exploit needs a source run: exploit:<run-dir>")
        if sum(x is not None for x in (self.chain, self.topology_path)) > 1:
            raise InvalidArgument("give at most one of --chain and --topology")

    @property
    def agent_kind(self):
        return "exploit" if self.agent.startswith("exploit:") else self.agent

    @property
    def out_root(self):
        return self.out or default_out_root()


def build_topology(cfg, seed):
    if cfg.topology_path:
        return topo.load(cfg.topology_path)
    if cfg.chain is not None:
        return build_chain(cfg.chain, seed)
    if cfg.preset is None:
        raise InvalidArgument("no environment given")
    return build_preset(cfg.preset, seed)


def run_id_for(cfg, topology, seed):
    base = cfg.name or f"{cfg.agent_kind}-{topology.name}"
    return f"{base}-s{seed}"


def _exploit_source(cfg):
    src = cfg.agent.split(":", 1)[1]
    if not os.path.isdir(src):
        candidate = os.path.join(cfg.out_root, src)
        if os.path.isdir(candidate):
            src = candidate
    path = os.path.join(src, PARAMS_FILE)
    if not os.path.exists(path):
        raise InvalidArgument(f"exploit source {src!r} has no {PARAMS_FILE}")
    with np.load(path) as data:
        params = params_from_arrays(dict(data), "q_")
    if not params:
        raise InvalidArgument(f"exploit source {src!r} holds no value-network parameters")
    return src, params


def _save_params(agent, run_dir):
    arrays = {}
    if hasattr(agent, "policy_params"):
        arrays.update(params_to_arrays(agent.policy_params, "policy_"))
        arrays.update(params_to_arrays(agent.value_params, "value_"))
    elif getattr(agent, "params", None) is not None:
        arrays.update(params_to_arrays(agent.params, "q_"))
    if arrays:
        np.savez(os.path.join(run_dir, PARAMS_FILE), **arrays)


def train_one(cfg, seed):
    """Train (or execute) one agent for one seed; returns the run directory."""
    params = None
    source = None
    if cfg.agent_kind == "exploit":
        source, params = _exploit_source(cfg)
        if cfg.topology_path or cfg.chain is not None:
            topology = build_topology(cfg, seed)
        else:
            topology = topo.load(os.path.join(source, TOPOLOGY_FILE))
    else:
        topology = build_topology(cfg, seed)
    env = AttackEnv(topology, max_steps=cfg.iterations, probe_penalty=cfg.probe_penalty)
    agent = make_agent(cfg.agent_kind, env, cfg.agent_config, seed, params=params)

    run_id = run_id_for(cfg, topology, seed)
    run_dir = os.path.join(cfg.out_root, run_id)
    os.makedirs(run_dir, exist_ok=True)
    topo.save(topology, os.path.join(run_dir, TOPOLOGY_FILE))

    summaries = []
    with TraceWriter(os.path.join(run_dir, EVENTS_FILE), run_id) as writer:
        hook = TraceHook(writer, agent, cfg.explain)
        global_step = 0
        for ep in range(1, cfg.episodes + 1):
            s = run_episode(agent, env, [hook], episode=ep, seed=seed, global_step=global_step)
            global_step += s.steps
            summaries.append(s)
        hook.finish(RunTrace(writer.events))
    _save_params(agent, run_dir)

    trace = load_trace(run_dir)
    learns = agent.learns
    manifest = RunManifest(
        run_id=run_id,
        environment={
            "name": topology.name, "family": topology.family, "preset": cfg.preset,
            "chain": cfg.chain, "topology_path": cfg.topology_path, "seed": seed,
            "size": topology.size, "max_nodes": topology.max_nodes, "digest": topology.digest(),
            "probe_penalty": cfg.probe_penalty,
        },
        agent={"kind": agent.kind, "name": cfg.agent, "source": source,
               "config": getattr(agent, "config", cfg.agent_config).to_dict() if learns else {}},
        schedule=schedule_to_dict(cfg.agent_config.schedule) if agent.kind in ("tabular", "dql", "dql-per") else None,
        episodes=cfg.episodes,
        iterations=cfg.iterations,
        seed=seed,
        tool_version=__version__,
        events_sha256=file_sha256(os.path.join(run_dir, EVENTS_FILE)),
        explain=cfg.explain.to_dict(),
        flags=canonical(cfg.flags),
        summary={
            "final_reward": summaries[-1].cumulative_reward,
            "rewards": [s.cumulative_reward for s in summaries],
            "final_discovered": trace_discovered(trace),
        },
    )
    manifest.save(run_dir)
    build_report([run_dir], cfg=cfg.explain, title=f"Run {run_id}")
    return run_dir


def trace_discovered(trace):
    curve = discovery_curve(trace)
    return curve[-1][1] if curve else 1


def train(cfg):
    return [train_one(cfg, seed) for seed in cfg.seeds]


def benchmark(cfg, agents, out_name="benchmark"):
    """Train every agent on every seed and write a comparison report."""
    if len(agents) < 2:
        raise InvalidArgument("benchmark needs at least two agents")
    results = {}
    for kind in agents:
        sub = replace(cfg, agent=kind, name=None)
        results[kind] = train(sub)
    bench_dir = os.path.join(cfg.out_root, out_name)
    os.makedirs(os.path.join(bench_dir, "plots"), exist_ok=True)
    curves = {k: [load_manifest(d).summary["rewards"] for d in dirs] for k, dirs in results.items()}
    render_plot(curves, "band", os.path.join(bench_dir, "plots", "reward_comparison.svg"),
                title="Episode reward across seeds", xlabel="episode", ylabel="cumulative reward")
    td = {}
    for k, dirs in results.items():
        per_seed = []
        for d in dirs:
            stats = [(e["batch"], e["mean_abs_delta"]) for e in load_trace(d).batches if "mean_abs_delta" in e]
            if stats:
                per_seed.append([v for _, v in stats])
        if per_seed:
            td[k] = per_seed
    if td:
        render_plot(td, "band", os.path.join(bench_dir, "plots", "td_error_comparison.svg"),
                    title="Mean |TD error| per batch", xlabel="batch", ylabel="mean |TD error|")
    rows = []
    for k, curves_k in curves.items():
        finals = np.array([c[-1] for c in curves_k], dtype=float)
        rows.append((k, float(np.median(finals)), float(finals.mean()), float(finals.std()), finals.tolist()))
    ranking = sorted(rows, key=lambda r: (-r[1], agents.index(r[0])))
    lines = ["# Benchmark", "", f"Seeds: {list(cfg.seeds)}; {cfg.episodes} episodes x {cfg.iterations} iterations.", "",
             "| agent | median final reward | mean | std | per seed |", "|---|---|---|---|---|"]
    for k, med, mean, std, finals in rows:
        lines.append(f"| {k} | {med:.4g} | {mean:.4g} | {std:.4g} | {', '.join(f'{v:g}' for v in finals)} |")
    lines += ["", "Ranking by median final reward: " + " >= ".join(r[0] for r in ranking) + ".", "",
              "![reward comparison](plots/reward_comparison.svg)", ""]
    if td:
        lines += ["![TD error comparison](plots/td_error_comparison.svg)", ""]
    lines += ["## Runs", ""] + [f"- {k}: " + ", ".join(f"`{os.path.relpath(d, bench_dir)}`" for d in dirs)
                                for k, dirs in results.items()]
    with open(os.path.join(bench_dir, "report.md"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(bench_dir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("agent,median_final_reward,mean_final_reward,std_final_reward\n")
        for k, med, mean, std, _ in rows:
            fh.write(f"{k},{med!r},{mean!r},{std!r}\n")
    return bench_dir, results, ranking


def replay_episode(run_dir, episode):
    """Re-execute one recorded episode. Yields ``(step, observation, reward)`` and checks rewards."""
    manifest = load_manifest(run_dir)
    verify_events(run_dir, manifest)
    topology = topo.load(os.path.join(run_dir, TOPOLOGY_FILE))
    steps = [e for e in load_trace(run_dir).steps if e["episode"] == episode]
    if not steps:
        raise InvalidArgument(f"episode {episode} not recorded in {run_dir}")
    penalty = manifest.environment.get("probe_penalty", DEFAULT_PROBE_PENALTY)
    state, _ = reset(topology, manifest.seed)
    total = 0.0
    for e in steps:
        action = Action.from_list(e["action"])
        state, obs, reward, done = step(state, topology, action, max_steps=manifest.iterations,
                                        probe_penalty=penalty)
        total += reward
        if canonical(float(reward)) != e["reward"] or canonical(total) != e["cumulative_reward"]:
            raise IntegrityError(
                f"reward mismatch in {run_dir} episode {episode} step {e['step']}: "
                f"recorded {e['reward']}, replayed {reward}")
        yield e["step"], obs, reward


def replay_all(run_dir):
    """Replay every recorded episode; returns ``{episode: cumulative reward}``."""
    episodes = sorted({e["episode"] for e in load_trace(run_dir).steps})
    out = {}
    for ep in episodes:
        out[ep] = sum(r for _, _, r in replay_episode(run_dir, ep))
    recorded = {e["episode"]: e["cumulative_reward"] for e in load_trace(run_dir).episodes}
    for ep, total in out.items():
        if canonical(float(total)) != recorded.get(ep):
            raise IntegrityError(f"episode {ep} total {total} != recorded {recorded.get(ep)}")
    return out


def explain_runs(run_dirs, cfg=ExplainConfig(), out_path=None):
    return build_report(run_dirs, out_path=out_path, cfg=cfg, title="Explainability report")


__all__ = [
    "RunConfig", "train", "train_one", "benchmark", "replay_episode", "replay_all", "explain_runs",
    "default_out_root", "OUT_ENV", "AGENT_CHOICES",
]
