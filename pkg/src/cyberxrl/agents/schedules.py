"""Exploration-rate schedules."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import InvalidArgument


def _check_rate(**rates):
    for name, value in rates.items():
        if not 0.0 <= value <= 1.0:
            raise InvalidArgument(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class EarlyExploitPiecewise:
    """Hold ``eps_low`` until ``t_exploit``, then ramp linearly to ``eps_high`` at ``horizon``."""
    eps_low: float
    eps_high: float
    t_exploit: int
    horizon: int

    def __post_init__(self):
        _check_rate(eps_low=self.eps_low, eps_high=self.eps_high)
        if not self.t_exploit < self.horizon:
            raise InvalidArgument("t_exploit must be < horizon")


@dataclass(frozen=True)
class StandardPiecewise:
    """Hold ``eps_high`` until ``t_explore``, then decay linearly to ``eps_low`` at ``horizon``."""
    eps_low: float
    eps_high: float
    t_explore: int
    horizon: int

    def __post_init__(self):
        _check_rate(eps_low=self.eps_low, eps_high=self.eps_high)
        if not self.t_explore < self.horizon:
            raise InvalidArgument("t_explore must be < horizon")


@dataclass(frozen=True)
class AdditiveRamp:
    eps_start: float
    increment: float
    eps_cap: float

    def __post_init__(self):
        _check_rate(eps_start=self.eps_start, eps_cap=self.eps_cap)


@dataclass(frozen=True)
class MultiplicativeDecay:
    eps_start: float
    factor: float
    eps_floor: float

    def __post_init__(self):
        _check_rate(eps_start=self.eps_start, eps_floor=self.eps_floor)
        if not 0.0 < self.factor <= 1.0:
            raise InvalidArgument("factor must be in (0, 1]")


Schedule = EarlyExploitPiecewise | StandardPiecewise | AdditiveRamp | MultiplicativeDecay

_BY_NAME = {
    "early": EarlyExploitPiecewise,
    "standard": StandardPiecewise,
    "additive": AdditiveRamp,
    "multiplicative": MultiplicativeDecay,
}


def epsilon_at(schedule, t):
    if t < 0:
        raise InvalidArgument("t must be >= 0")
    if isinstance(schedule, EarlyExploitPiecewise):
        if t <= schedule.t_exploit:
            return schedule.eps_low
        frac = min(1.0, (t - schedule.t_exploit) / (schedule.horizon - schedule.t_exploit))
        return schedule.eps_low + (schedule.eps_high - schedule.eps_low) * frac
    if isinstance(schedule, StandardPiecewise):
        if t <= schedule.t_explore:
            return schedule.eps_high
        frac = min(1.0, (t - schedule.t_explore) / (schedule.horizon - schedule.t_explore))
        return schedule.eps_high - (schedule.eps_high - schedule.eps_low) * frac
    if isinstance(schedule, AdditiveRamp):
        return min(schedule.eps_start + schedule.increment * t, schedule.eps_cap)
    if isinstance(schedule, MultiplicativeDecay):
        return max(schedule.eps_start * schedule.factor ** t, schedule.eps_floor)
    raise InvalidArgument(f"unknown schedule {schedule!r}")


def schedule_name(schedule):
    for name, cls in _BY_NAME.items():
        if isinstance(schedule, cls):
            return name
    raise InvalidArgument(f"unknown schedule {schedule!r}")


def schedule_to_dict(schedule):
    return {"variant": schedule_name(schedule), **asdict(schedule)}


def schedule_from_dict(data):
    data = dict(data)
    variant = data.pop("variant")
    try:
        cls = _BY_NAME[variant]
    except KeyError:
        raise InvalidArgument(f"unknown schedule variant {variant!r}") from None
    return cls(**data)


# Training default: linear decay 0.90 -> 0.10 over 5000 steps.
DEFAULT_SCHEDULE = StandardPiecewise(eps_low=0.1, eps_high=0.9, t_explore=0, horizon=5000)
