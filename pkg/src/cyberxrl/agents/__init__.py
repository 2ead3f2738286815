"""Learning agents: random baseline, tabular Q, deep Q (with optional PER), clipped policy gradient."""

from .base import Agent, RandomAgent
from .config import AgentConfig
from .core import masked_softmax, q_update, resolve, select_action
from .dql import DQLAgent, ExploitingAgent, dql_train_step, exploiting_policy, target_sync
from .loop import AGENT_KINDS, BatchRecord, EpisodeSummary, Hooks, StepRecord, make_agent, run_episode
from .mlp import MlpSpec, mlp_forward
from .ppo import PPOAgent, pg_update
from .schedules import (
    DEFAULT_SCHEDULE, AdditiveRamp, EarlyExploitPiecewise, MultiplicativeDecay, StandardPiecewise,
    epsilon_at,
)
from .tabular import TabularAgent, TabularQ
