import numpy as np
import pytest

from cyberxrl.env import Action, AttackEnv, build_chain, build_ctf

# Ten actions that walk the CTF network into the state of the appendix tables.
# After action 7 five nodes are owned; actions 8-10 each reveal one new node.
CTF_SCRIPT = [
    (1, "client", None),
    (9, "client", "Website"),
    (1, "Website", None),
    (11, "Website", "Website[user=monitor]"),
    (5, "Website[user=monitor]", None),
    (9, "Website[user=monitor]", "AzureResourceManager"),
    (9, "Website[user=monitor]", "AzureStorage"),
    (7, "client", "Website"),
    (6, "client", "Website"),
    (7, "Website", "Website.Directory"),
]


@pytest.fixture
def ctf_env():
    env = AttackEnv(build_ctf())
    env.reset()
    return env


@pytest.fixture
def chain1_env():
    env = AttackEnv(build_chain(1))
    env.reset()
    return env


def play_script(env, script=CTF_SCRIPT):
    out = []
    for triple in script:
        obs, reward, done, info = env.step(Action(*triple))
        out.append((obs, reward, done, info))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
