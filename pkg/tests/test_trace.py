import os

import pytest

from cyberxrl.agents import AgentConfig, StandardPiecewise
from cyberxrl.agents.loop import make_agent, run_episode
from cyberxrl.env import AttackEnv, build_chain, build_ctf
from cyberxrl.errors import InvalidArgument, TraceWriteError
from cyberxrl.explain import TraceHook
from cyberxrl.trace import (
    SCHEMAS, RunManifest, TraceWriter, build_report, export_csv, load_trace, read_csv, render_plot,
    render_state_table, signal_rows,
)
from cyberxrl.trace.events import BATCH, EPISODE_END, EXPLAIN, STEP, RunTrace, canonical, file_sha256, read_events
from cyberxrl.trace.plots import HIGHLIGHT

from conftest import CTF_SCRIPT, play_script

SMALL = AgentConfig(batch_size=16, hidden_width=32, schedule=StandardPiecewise(0.1, 0.9, 0, 300))


def record_run(path, kind="dql-per", episodes=3, seed=0):
    env = AttackEnv(build_chain(2, seed=seed), max_steps=40)
    agent = make_agent(kind, env, SMALL, seed=seed)
    with TraceWriter(path, "t") as w:
        hook = TraceHook(w, agent)
        gs = 0
        for ep in range(1, episodes + 1):
            gs += run_episode(agent, env, [hook], episode=ep, seed=seed, global_step=gs).steps
        hook.finish(RunTrace(w.events))
    return load_trace(path)


def test_identical_runs_give_identical_bytes(tmp_path):
    record_run(tmp_path / "a.log")
    record_run(tmp_path / "b.log")
    assert (tmp_path / "a.log").read_bytes() == (tmp_path / "b.log").read_bytes()


def test_sequence_numbers_are_contiguous(tmp_path):
    trace = record_run(tmp_path / "a.log")
    assert [e["seq"] for e in trace.events] == list(range(len(trace.events)))
    kinds = {e["kind"] for e in trace.events}
    assert {STEP, EPISODE_END, BATCH, EXPLAIN} <= kinds


def test_malformed_event_rejected_before_write(tmp_path):
    path = tmp_path / "x.log"
    with TraceWriter(path) as w:
        with pytest.raises(InvalidArgument):
            w.append(STEP, episode=1)
        with pytest.raises(InvalidArgument):
            w.append("Bogus", x=1)
        with pytest.raises(InvalidArgument):
            w.append(BATCH, episode=1, batch=1, loss=float("nan"))
        w.append(BATCH, episode=1, batch=1)
    assert [e["seq"] for e in read_events(path)] == [0]


def test_write_failure_names_run(tmp_path):
    with pytest.raises(TraceWriteError) as err:
        TraceWriter(tmp_path / "missing" / "x.log", "run-7")
    assert err.value.run_id == "run-7"
    w = TraceWriter(tmp_path / "y.log", "run-8")
    w._fh.close()
    with pytest.raises(TraceWriteError):
        w.append(BATCH, episode=1, batch=1)


def test_canonical_floats():
    assert canonical(0.1 + 0.2) == 0.3
    assert canonical({"a": (1, 2.0)}) == {"a": [1, 2.0]}


def test_reading_rejects_gaps(tmp_path):
    path = tmp_path / "g.log"
    path.write_text('{"episode":1,"batch":1,"kind":"Batch","seq":1}\n')
    with pytest.raises(InvalidArgument):
        read_events(path)


def test_reward_curve_columns(tmp_path):
    trace = record_run(tmp_path / "a.log")
    out = export_csv(trace, "reward_curve", tmp_path / "r.csv")
    assert open(out).readline().strip() == "episode,cumulative_reward"


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_csv_round_trip(tmp_path, name):
    trace = record_run(tmp_path / "a.log", kind="pg" if name == "confidence" else "dql-per")
    rows = signal_rows(trace, name)
    back = read_csv(export_csv(trace, name, tmp_path / f"{name}.csv"), name)
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        for x, y, (_, typ) in zip(a, b, SCHEMAS[name]):
            if typ is float:
                assert y == pytest.approx(x, abs=1e-12)
            else:
                assert y == x


def test_empty_run_exports_header_only(tmp_path):
    for name, cols in SCHEMAS.items():
        path = export_csv(RunTrace([]), name, tmp_path / f"{name}.csv")
        assert open(path).read() == ",".join(c for c, _ in cols) + "\n"


def test_unknown_signal(tmp_path):
    with pytest.raises(InvalidArgument):
        export_csv(RunTrace([]), "nope", tmp_path / "n.csv")


def test_plot_kinds(tmp_path):
    line = render_plot({"flat": [(1, 2.0), (2, 2.0), (3, 2.0)]}, "line", tmp_path / "l.svg",
                       xlabel="episode", ylabel="reward")
    text = open(line).read()
    assert text.startswith("<?xml") and "episode" in text and "reward" in text
    band = render_plot({"dql": [[1, 2, 3], [2, 3, 4], [0, 1, 5]]}, "band", tmp_path / "b.svg")
    assert "mean of 3" in open(band).read()
    bar = open(render_plot({"q": [0.1, 0.9, 0.3]}, "bar", tmp_path / "q.svg")).read()
    assert bar.count(HIGHLIGHT) == 1


def test_plots_are_byte_stable(tmp_path):
    a = render_plot({"s": [(1, 1.0), (2, 3.0)]}, "line", tmp_path / "a.svg")
    b = render_plot({"s": [(1, 1.0), (2, 3.0)]}, "line", tmp_path / "b.svg")
    assert open(a, "rb").read() == open(b, "rb").read()


def test_plot_errors(tmp_path):
    with pytest.raises(InvalidArgument):
        render_plot({}, "line", tmp_path / "e.svg")
    with pytest.raises(InvalidArgument):
        render_plot({"x": []}, "bar", tmp_path / "e.svg")
    with pytest.raises(InvalidArgument):
        render_plot({"x": [1]}, "pie", tmp_path / "e.svg")


def test_reset_table_has_single_client_row(ctf_env):
    lines = render_state_table(ctf_env.observation).splitlines()
    assert lines[0].split() == ["id", "status", "properties", "local_attacks", "remote_attacks"]
    assert len(lines) == 3
    assert lines[2].split()[:3] == ["client", "owned", "[]"]


def test_scripted_tables_grow(ctf_env):
    results = play_script(ctf_env)
    counts = [len(render_state_table(obs).splitlines()) - 2 for obs, *_ in results[6:]]
    assert counts == [5, 6, 7, 8]


def test_owned_rows_first_then_sorted(ctf_env):
    play_script(ctf_env)
    rows = render_state_table(ctf_env.observation).splitlines()[2:]
    status = [r.split()[1] for r in rows]
    assert status == sorted(status, key=lambda s: s != "owned")
    owned = [r.split()[0] for r in rows if r.split()[1] == "owned"]
    assert owned == sorted(owned)


def collapse_run(run_dir):
    os.makedirs(run_dir, exist_ok=True)
    path = os.path.join(run_dir, "events.log")
    with TraceWriter(path, "fixture") as w:
        for ep in range(1, 31):
            late = ep >= 20
            w.append(STEP, episode=ep, step=1, global_step=ep, action=[1, "client", None], reward=float(ep),
                     cumulative_reward=float(ep), ratio=1 / 12, ratio_before=1 / 12, discovered=[])
            w.append(EXPLAIN, signal="confidence", episode=ep, entropy=0.05 if late else 0.9,
                     margin=5.0 if late else 0.0, dominant=1 + ep % 2, margin_median=0.1)
            w.append(EPISODE_END, episode=ep, cumulative_reward=float(ep), steps=1, final_ratio=1 / 12)
    RunManifest("fixture", {"name": "ctf"}, {"kind": "pg"}, None, 30, 1, 0, "test",
                file_sha256(path)).save(run_dir)


def test_report_flags_collapse_and_is_idempotent(tmp_path):
    run = tmp_path / "fixture"
    collapse_run(run)
    path, skipped = build_report([run])
    first = open(path, "rb").read()
    assert not skipped
    assert "- Collapse alert: onset episode 20" in first.decode()
    for section in ("### Benchmark", "### Confidence and collapse", "### Dominant action", "### Alerts"):
        assert section in first.decode()
    build_report([run])
    assert open(path, "rb").read() == first


def test_report_lists_missing_runs_as_skipped(tmp_path):
    run = tmp_path / "fixture"
    collapse_run(run)
    empty = tmp_path / "empty"
    empty.mkdir()
    path, skipped = build_report([run, empty], out_path=tmp_path / "all.md")
    assert skipped == [str(empty)]
    assert "## Skipped" in open(path).read()


def test_recorded_alerts_round_trip(tmp_path):
    path = tmp_path / "a.log"
    snaps = [{"kind": EXPLAIN, "signal": "q_snapshot", "episode": e, "dominant": 6} for e in range(1, 8)]
    with TraceWriter(path) as w:
        TraceHook(w, None).finish(RunTrace(snaps))
    trace = load_trace(path)
    (event,) = trace.explain("alert")
    assert (event["kind"], event["alert"], event["onset"]) == (EXPLAIN, "LockIn", 1)
    assert signal_rows(trace, "alerts") == [("LockIn", 1, '{"action": 6, "duration": 7, "k": 5}')]
