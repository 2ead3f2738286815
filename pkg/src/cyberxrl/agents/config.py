"""Agent hyperparameters and their (de)serialisation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ..errors import InvalidArgument
from ..replay import PERConfig
from .schedules import DEFAULT_SCHEDULE, schedule_from_dict, schedule_to_dict


@dataclass
class AgentConfig:
    learning_rate: float = 0.005
    gamma: float = 0.95
    batch_size: int = 128
    buffer_capacity: int = 20000
    target_sync_every: int = 10
    schedule: object = DEFAULT_SCHEDULE
    per_enabled: bool = False
    per: PERConfig = field(default_factory=PERConfig)
    optimizer: str = "adam"
    loss: str = "mse"
    hidden_layers: int | None = None
    hidden_width: int = 64
    train_every: int = 1
    tabular_lr: float = 0.1
    clip: float = 0.2
    entropy_coef: float = 0.01
    entropy_decay: float = 1.0
    pg_epochs: int = 4
    pg_learning_rate: float = 0.001

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidArgument("gamma must be in [0, 1]")
        if self.batch_size < 1 or self.buffer_capacity < 1 or self.target_sync_every < 1:
            raise InvalidArgument("batch_size, buffer_capacity and target_sync_every must be >= 1")
        if self.loss not in ("mse", "huber"):
            raise InvalidArgument(f"unknown loss {self.loss!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise InvalidArgument(f"unknown optimizer {self.optimizer!r}")

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "schedule":
                value = schedule_to_dict(value)
            elif f.name == "per":
                value = asdict(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgument(f"unknown agent config keys: {sorted(unknown)}")
        if isinstance(data.get("schedule"), dict):
            data["schedule"] = schedule_from_dict(data["schedule"])
        if isinstance(data.get("per"), dict):
            data["per"] = PERConfig(**data["per"])
        return cls(**data)
