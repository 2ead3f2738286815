"""Command-line entry point: ``cyberxrl <command> [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import __version__
from .agents import AgentConfig
from .agents.schedules import (
    AdditiveRamp, EarlyExploitPiecewise, MultiplicativeDecay, StandardPiecewise,
)
from .env import topology as topo
from .env.topology import PRESETS, build_chain, build_preset
from .errors import IntegrityError, InvalidArgument
from .explain.instrument import ExplainConfig
from .replay import PERConfig
from .runs import AGENT_CHOICES, OUT_ENV, RunConfig, benchmark, explain_runs, replay_all, replay_episode, train
from .trace.tables import render_state_table

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_INTEGRITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _seeds(text):
    try:
        if "-" in text.strip("-"):
            a, b = text.split("-", 1)
            return list(range(int(a), int(b) + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None


def _agent(text):
    if text in AGENT_CHOICES or (text.startswith("exploit:") and len(text) > len("exploit:")):
        return text
    raise argparse.ArgumentTypeError(f"agent must be one of {', '.join(AGENT_CHOICES)} or exploit:<run>")


def _env_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", help=f"environment preset ({', '.join(PRESETS)})")
    g.add_argument("--chain", type=int, metavar="N", help="chain topology with N Linux/Windows pairs")
    g.add_argument("--topology", metavar="FILE", help="topology file written by generate-env")


def _run_args(p, agent=True):
    _env_args(p)
    p.add_argument("--seed", type=int, action="append", help="seed (repeatable)")
    p.add_argument("--seeds", type=_seeds, help="comma list or range, e.g. 0,1,2 or 0-4")
    if agent:
        p.add_argument("--agent", type=_agent, default="dql")
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--iterations", type=int, default=200, help="step cap per episode")
    p.add_argument("--schedule", choices=("early", "standard", "additive", "multiplicative"))
    p.add_argument("--eps-low", type=float, default=0.1)
    p.add_argument("--eps-high", type=float, default=0.9)
    p.add_argument("--t-switch", type=int, default=0, help="T_exploit / T_explore for the piecewise schedules")
    p.add_argument("--horizon", type=int, default=5000)
    p.add_argument("--eps-start", type=float)
    p.add_argument("--increment", type=float, default=0.005)
    p.add_argument("--eps-cap", type=float, default=0.9)
    p.add_argument("--factor", type=float, default=0.95)
    p.add_argument("--eps-floor", type=float, default=0.01)
    p.add_argument("--per", action="store_true", help="use prioritised replay (dql only)")
    p.add_argument("--per-alpha", type=float, default=0.6)
    p.add_argument("--per-beta", type=float, default=0.7)
    p.add_argument("--per-eps0", type=float, default=0.01)
    p.add_argument("--phase-threshold", type=float, help="Early/Late split on the compromise ratio (default 0.5)")
    p.add_argument("--config", metavar="JSON", help="JSON file with 'agent' and/or 'explain' sections")
    p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./runs)")
    p.add_argument("--name", help="run-id prefix")


def build_parser():
    parser = argparse.ArgumentParser(prog="cyberxrl", description="Explainable RL attackers on simulated networks.")
    parser.add_argument("--version", action="version", version=f"cyberxrl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-env", help="write a topology file")
    _env_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("train", help="train one agent over one or more seeds")
    _run_args(p)

    p = sub.add_parser("benchmark", help="train several agents on shared seeds and compare")
    _run_args(p, agent=False)
    p.add_argument("--agents", default="random,tabular,dql", help="comma-separated agent list")

    p = sub.add_parser("explain", help="recompute signals, plots and a report for finished runs")
    p.add_argument("runs", nargs="+")
    p.add_argument("--phase-threshold", type=float, default=0.5)
    p.add_argument("--reward-filter", type=float, default=2.0)
    p.add_argument("--entropy-threshold", type=float, default=0.1)
    p.add_argument("--margin-threshold", type=float)
    p.add_argument("--lock-in-k", type=int, default=5)
    p.add_argument("--out", help="report path (default: <first run>/report.md)")

    p = sub.add_parser("replay", help="re-execute recorded actions and print state tables")
    p.add_argument("run")
    p.add_argument("--episode", type=int)
    p.add_argument("--steps", help="inclusive step range a-b within the episode")
    p.add_argument("--all", action="store_true", help="verify every recorded episode")
    return parser


def _schedule(args):
    if args.schedule is None:
        return None
    if args.schedule == "early":
        return EarlyExploitPiecewise(args.eps_low, args.eps_high, args.t_switch, args.horizon)
    if args.schedule == "standard":
        return StandardPiecewise(args.eps_low, args.eps_high, args.t_switch, args.horizon)
    if args.schedule == "additive":
        return AdditiveRamp(args.eps_start if args.eps_start is not None else 0.001, args.increment, args.eps_cap)
    return MultiplicativeDecay(args.eps_start if args.eps_start is not None else 0.9, args.factor, args.eps_floor)


def _flags(args):
    return {k: v for k, v in sorted(vars(args).items()) if v is not None and v is not False}


def run_config_from_args(args, agent=None):
    agent_cfg, explain_cfg = AgentConfig(), ExplainConfig()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - {"agent", "explain"}
        if unknown:
            raise InvalidArgument(f"unknown config sections {sorted(unknown)}")
        if "agent" in data:
            agent_cfg = AgentConfig.from_dict(data["agent"])
        if "explain" in data:
            explain_cfg = ExplainConfig.from_dict(data["explain"])
    schedule = _schedule(args)
    if schedule is not None:
        agent_cfg = replace(agent_cfg, schedule=schedule)
    if args.per:
        agent_cfg = replace(agent_cfg, per_enabled=True,
                            per=PERConfig(args.per_alpha, args.per_beta, args.per_eps0))
    if args.phase_threshold is not None:
        explain_cfg = replace(explain_cfg, phase_threshold=args.phase_threshold)
    seeds = list(args.seed or []) + list(args.seeds or [])
    return RunConfig(
        preset=args.preset or ("CC10" if args.chain is None and args.topology is None else None),
        chain=args.chain,
        topology_path=args.topology,
        agent=agent or args.agent,
        episodes=args.episodes,
        iterations=args.iterations,
        seeds=tuple(seeds or [0]),
        agent_config=agent_cfg,
        explain=explain_cfg,
        out=args.out,
        name=args.name,
        flags=_flags(args),
    )


def cmd_generate_env(args):
    if args.topology:
        raise UsageError("generate-env takes --preset or --chain")
    if args.chain is not None:
        if args.chain < 1:
            raise UsageError("--chain must be >= 1")
        t = build_chain(args.chain, args.seed)
    else:
        t = build_preset(args.preset or "CC10", args.seed)
    summary = f"{t.name}: size={t.size} max_nodes={t.max_nodes}"
    if args.out:
        topo.save(t, args.out)
        print(summary)
    else:
        sys.stdout.write(t.dumps())
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_train(args):
    for run_dir in train(run_config_from_args(args)):
        print(run_dir)
    return EXIT_OK


def cmd_benchmark(args):
    agents = [a.strip() for a in args.agents.split(",") if a.strip()]
    if len(agents) < 2:
        raise UsageError("benchmark needs at least two agents")
    for a in agents:
        _agent(a)
    cfg = run_config_from_args(args, agent=agents[0])
    bench_dir, _, ranking = benchmark(cfg, agents, out_name=args.name or "benchmark")
    for kind, med, mean, std, _ in ranking:
        print(f"{kind}\tmedian={med:g}\tmean={mean:g}\tstd={std:g}")
    print(os.path.join(bench_dir, "report.md"))
    return EXIT_OK


def cmd_explain(args):
    cfg = ExplainConfig(phase_threshold=args.phase_threshold, reward_filter=args.reward_filter,
                        entropy_threshold=args.entropy_threshold, margin_threshold=args.margin_threshold,
                        lock_in_k=args.lock_in_k)
    path, skipped = explain_runs(args.runs, cfg, args.out)
    for s in skipped:
        print(f"skipped {s}: no events.log", file=sys.stderr)
    print(path)
    return EXIT_OK


def _parse_range(text):
    try:
        a, b = (int(x) for x in text.split("-", 1))
    except ValueError:
        raise UsageError(f"bad step range {text!r}; expected a-b") from None
    if a < 1 or b < a:
        raise UsageError(f"bad step range {text!r}")
    return a, b


def cmd_replay(args):
    if not os.path.isdir(args.run):
        raise UsageError(f"no run directory {args.run!r}")
    if args.all or args.episode is None:
        totals = replay_all(args.run)
        for ep, total in totals.items():
            print(f"episode {ep}: reward {total:g} verified")
        if args.episode is None:
            return EXIT_OK
    lo, hi = _parse_range(args.steps) if args.steps else (1, None)
    try:
        records = list(replay_episode(args.run, args.episode))
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    last = records[-1][0]
    if hi is None:
        hi = last
    if hi > last:
        raise UsageError(f"step {hi} beyond episode {args.episode} length {last}")
    for n, obs, reward in records:
        if lo <= n <= hi:
            print(f"episode {args.episode}, step {n} (reward {reward:g})")
            print(render_state_table(obs))
    return EXIT_OK


COMMANDS = {
    "generate-env": cmd_generate_env,
    "train": cmd_train,
    "benchmark": cmd_benchmark,
    "explain": cmd_explain,
    "replay": cmd_replay,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidArgument) as exc:
        print(f"cyberxrl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrityError as exc:
        print(f"cyberxrl: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except Exception as exc:  # noqa: BLE001
        print(f"cyberxrl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
