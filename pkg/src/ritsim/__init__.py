"""Simulation of a vehicle defending a circular perimeter against inbound targets."""

from .engine import Estimate, RunMetrics, Simulation, estimate, run_many, run_simulation
from .model import ArrivalStream, SimConfig, generate_arrivals
from .policies import POLICIES, make_policy

__all__ = [
    "ArrivalStream", "Estimate", "POLICIES", "RunMetrics", "SimConfig", "Simulation",
    "estimate", "generate_arrivals", "make_policy", "run_many", "run_simulation",
]
