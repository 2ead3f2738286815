"""Explainable reinforcement-learning attackers on simulated enterprise networks."""

__version__ = "0.1.0"
