from .agent import Agent, Ingest, Outcome, SearchNode
from .runner import SIM, THREADS, RunResult, SolverConfig, run_sim, run_threads, solve
from .termination import TerminationDetector, Verdict, detect_global_termination

__all__ = [
    "Agent",
    "Ingest",
    "Outcome",
    "RunResult",
    "SIM",
    "SearchNode",
    "SolverConfig",
    "THREADS",
    "TerminationDetector",
    "Verdict",
    "detect_global_termination",
    "run_sim",
    "run_threads",
    "solve",
]
