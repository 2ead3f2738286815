import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberxrl.env import (
    CHAIN_LADDER, CTF_LADDER, Action, AttackEnv, EnvState, build_chain, build_ctf, build_preset,
    compromise_ratio, encode_observation, legal_actions, legal_mask, observation_key, observe, reset, step,
)
from cyberxrl.env import topology as topo
from cyberxrl.env.topology import FLAG_VALUE, TRAP_VALUE, WORKSTATION_VALUE
from cyberxrl.errors import IllegalAction, InvalidArgument

from conftest import CTF_SCRIPT, play_script


def test_ladder_sizes_and_kinds():
    assert len(CHAIN_LADDER) == 15
    assert len(CTF_LADDER) == 18
    assert [a.index for a in CHAIN_LADDER] == list(range(1, 16))
    assert CTF_LADDER[8].name == "connect(HTTPS)"


@pytest.mark.parametrize("preset,size,max_nodes", [
    ("ctf", 9, 12), ("CC10", 10, 14), ("CC22", 12, 22), ("CC100", 70, 100), ("CC500", 350, 500)])
def test_preset_sizes(preset, size, max_nodes):
    t = build_preset(preset)
    assert (t.size, t.max_nodes) == (size, max_nodes)


@pytest.mark.parametrize("n", [1, 4, 10])
def test_chain_core_node_count(n):
    t = build_chain(n, seed=7)
    core = [x for x in t.nodes.values() if not x.is_trap]
    assert len(core) == 2 * n + 2
    assert sum(x.flag for x in t.nodes.values()) == 1


def test_chain_sized_to_max_nodes():
    t = build_chain(5, seed=1, max_nodes=22)
    assert (t.size, t.max_nodes) == (12, 22)
    assert sum(n.is_trap for n in t.nodes.values()) == 5
    infra = [n for n in t.nodes.values() if not n.exploitable]
    assert len(infra) == 5 and not any(n.id in {b for _, b in t.edges} for n in infra)
    tight = build_chain(34, max_nodes=100)
    assert sum(n.is_trap for n in tight.nodes.values()) == 30
    with pytest.raises(InvalidArgument):
        build_chain(5, max_nodes=11)


def test_chain_rejects_bad_size():
    with pytest.raises(InvalidArgument):
        build_chain(0)


def test_unknown_preset():
    with pytest.raises(InvalidArgument):
        build_preset("CC7")


def test_topology_round_trip(tmp_path):
    for t in (build_ctf(), build_chain(3, seed=5)):
        path = tmp_path / f"{t.name}.json"
        topo.save(t, path)
        again = topo.load(path)
        assert again == t
        assert again.dumps() == t.dumps()


def test_chain_generation_is_deterministic():
    assert build_chain(4, seed=7).dumps() == build_chain(4, seed=7).dumps()


def test_reset_shows_only_entry(ctf_env):
    obs = ctf_env.observation
    assert [r.id for r in obs.rows] == ["client"]
    assert obs.rows[0].status == "owned"
    assert obs.rows[0].properties == ()


def test_first_compromise_pays_value_and_repeat_pays_zero(chain1_env):
    env = chain1_env
    _, r, _, _ = env.step(Action(3, "start"))
    assert r == 0
    _, r, _, info = env.step(Action(6, "start", "linux_1"))
    assert r == WORKSTATION_VALUE and info["new_owned"] == ["linux_1"]
    _, r, _, _ = env.step(Action(6, "start", "linux_1"))
    assert r == 0


def test_failed_probe_costs_penalty(chain1_env):
    _, r, done, _ = chain1_env.step(Action(1, "start"))
    assert r == -1 and not done


def test_trap_has_negative_value_and_flag_ends_episode():
    t = build_chain(1, seed=0)
    trap = t.nodes["trap_1"]
    assert trap.value == TRAP_VALUE and trap.is_trap
    env = AttackEnv(t)
    env.reset()
    path = [
        Action(3, "start"), Action(6, "start", "linux_1"), Action(3, "linux_1"), Action(1, "linux_1"),
        Action(7, "linux_1", "windows_1"), Action(5, "windows_1"), Action(13, "windows_1"),
    ]
    for a in path:
        _, _, done, _ = env.step(a)
        assert not done
    _, r, done, _ = env.step(Action(6, "windows_1", "linux_2"))
    assert r == FLAG_VALUE and done


def test_step_cap_ends_episode():
    env = AttackEnv(build_chain(1), max_steps=3)
    env.reset()
    dones = [env.step(Action(1, "start"))[2] for _ in range(3)]
    assert dones == [False, False, True]
    with pytest.raises(IllegalAction):
        env.step(Action(1, "start"))


def test_illegal_actions_raise(chain1_env):
    with pytest.raises(IllegalAction):
        chain1_env.step(Action(3, "linux_1"))
    with pytest.raises(IllegalAction):
        chain1_env.step(Action(2, "start", "linux_1"))
    chain1_env.step(Action(3, "start"))
    with pytest.raises(IllegalAction):
        chain1_env.step(Action(12, "start", "linux_1"))


def test_legal_actions_are_all_executable(chain1_env):
    env = chain1_env
    rng = np.random.default_rng(0)
    for _ in range(40):
        acts = legal_actions(env.observation)
        assert acts
        for a in acts:
            step(env.state, env.topology, a)
        _, _, done, _ = env.step(acts[rng.integers(len(acts))])
        if done:
            break


def test_mask_matches_actions(ctf_env):
    play_script(ctf_env, CTF_SCRIPT[:4])
    acts = legal_actions(ctf_env.observation)
    mask = legal_mask(ctf_env.observation, acts)
    assert set(np.flatnonzero(mask) + 1) == {a.index for a in acts}


def test_scripted_ctf_progression(ctf_env):
    results = play_script(ctf_env)
    rows = [len(obs.rows) for obs, *_ in results[6:]]
    assert rows == [5, 6, 7, 8]
    owned = results[6][0].owned
    assert len(owned) == 5 and len(results[6][0].rows) == 5
    new = [sorted(set(b[0].visible) - set(a[0].visible)) for a, b in zip(results[6:], results[7:])]
    assert new == [["GitHubProject"], ["Website.Directory"], ["Sharepoint"]]


def test_compromise_ratio_matches_table_state(ctf_env):
    play_script(ctf_env, CTF_SCRIPT[:7])
    assert compromise_ratio(ctf_env.state, ctf_env.topology) == pytest.approx(5 / 12)


def test_observation_key_matches_state_key(ctf_env):
    for triple in CTF_SCRIPT:
        ctf_env.step(Action(*triple))
        assert observation_key(ctf_env.observation) == ctf_env.state.key()


def _state_strategy(t):
    ids = sorted(t.nodes)
    creds = list(t.credentials)
    return st.tuples(
        st.sets(st.sampled_from(ids), min_size=1),
        st.sets(st.sampled_from(ids)),
        st.sets(st.sampled_from(creds)) if creds else st.just(set()),
        st.integers(0, 199),
    )


CTF = build_ctf()


@settings(max_examples=60, deadline=None)
@given(_state_strategy(CTF), _state_strategy(CTF))
def test_encoder_is_injective(a, b):
    def make(s):
        owned, disc, creds, t = s
        return EnvState(frozenset(owned), frozenset(owned | disc), frozenset(creds), frozenset(), t)

    sa, sb = make(a), make(b)
    ea = encode_observation(observe(sa, CTF), CTF)
    eb = encode_observation(observe(sb, CTF), CTF)
    same_state = (sa.owned, sa.discovered, sa.credentials, sa.t) == (sb.owned, sb.discovered, sb.credentials, sb.t)
    assert np.array_equal(ea, eb) == same_state


def test_reset_is_seed_independent():
    t = build_ctf()
    assert reset(t, 1)[0] == reset(t, 2)[0]


def test_action_round_trip():
    for a in (Action(1, "x"), Action(9, "x", "y")):
        assert Action.from_list(a.to_list()) == a
