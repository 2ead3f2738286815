"""Network-attack POMDP simulator."""

from .actions import CHAIN_LADDER, CTF_LADDER, CONNECT, LOCAL, REMOTE, ActionSpec
from .sim import (
    Action, AttackEnv, EnvState, Observation, Row, compromise_ratio, encode_observation,
    encoding_dim, legal_actions, legal_mask, observation_key, observe, reset, step,
)
from .topology import (
    PRESETS, Credential, NetworkTopology, NodeTemplate, Vulnerability, build_chain, build_ctf,
    build_preset,
)
