"""Decentralized multi-agent best-first width search with message filtering."""

from .engine import Outcome, RunResult, SolverConfig, solve
from .filtering import FilterPolicy, NumWaiting, NumWithheld, WhoSend
from .model import Problem, build_problem, validate_plan

__all__ = [
    "FilterPolicy",
    "NumWaiting",
    "NumWithheld",
    "Outcome",
    "Problem",
    "RunResult",
    "SolverConfig",
    "WhoSend",
    "build_problem",
    "solve",
    "validate_plan",
]
