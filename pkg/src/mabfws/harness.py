"""Batch experiments: repeated runs per problem, medians, and IPC-style scores."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .engine import RunResult, SolverConfig, solve
from .filtering import FilterPolicy
from .io import TaskFormatError, load_task, write_report
from .net.delay import DelayModel


@dataclass(frozen=True)
class RunConfig:
    tasks: tuple[str, ...]
    policy: FilterPolicy = field(default_factory=FilterPolicy)
    mode: str = "sim"
    delay_mean_ms: float = 0.0
    delay_stdev_ratio: float = 0.10
    time_limit_s: float = 300.0
    runs: int = 5
    seed: int = 0
    output: str | None = None
    max_expansions: int = 200_000

    def __post_init__(self) -> None:
        if self.runs < 1 or self.runs % 2 == 0:
            raise ValueError("runs per problem must be a positive odd number")

    def solver_config(self, run: int) -> SolverConfig:
        return SolverConfig(
            policy=self.policy,
            mode=self.mode,
            delay=DelayModel(self.delay_mean_ms * 1000.0, self.delay_stdev_ratio, run_seed(self.seed, run)),
            time_limit_s=self.time_limit_s,
            max_expansions=self.max_expansions,
        )

    def to_dict(self) -> dict[str, Any]:
        d = self.policy.to_dict()
        d.update(
            mode=self.mode,
            delay_mean_ms=self.delay_mean_ms,
            delay_stdev_ratio=self.delay_stdev_ratio,
            time_limit_s=self.time_limit_s,
            runs=self.runs,
            seed=self.seed,
        )
        return d


def run_seed(seed: int, run: int) -> int:
    return seed * 1009 + run


@dataclass
class ProblemSummary:
    problem: str
    solved: bool
    runs: int
    failures: int
    time_ms: float | None = None
    cost: float | None = None
    sent_messages: float = 0.0
    expanded: float = 0.0
    withheld_peak: int = 0
    plan: list | None = None
    error: str | None = None

    def record(self, config: Mapping[str, Any]) -> dict[str, Any]:
        return {
            "problem": self.problem,
            "solved": self.solved,
            "plan": self.plan,
            "cost": self.cost,
            "wall_ms": self.time_ms,
            "expanded": self.expanded,
            "sent_messages": self.sent_messages,
            "withheld_peak": self.withheld_peak,
            "config": dict(config),
            "runs": self.runs,
            "failures": self.failures,
            "error": self.error,
        }


def majority_solved(failures: int, runs: int) -> bool:
    """A problem counts as solved when strictly more than half the runs finish."""
    return failures <= (runs - 1) // 2


def summarize_runs(problem: str, results: Sequence[RunResult]) -> ProblemSummary:
    """Median-of-N aggregation; medians are taken over finishing runs only."""
    finished = [r for r in results if r.solved]
    failures = len(results) - len(finished)
    solved = majority_solved(failures, len(results))
    pool = finished if solved else list(results)
    summary = ProblemSummary(
        problem,
        solved,
        len(results),
        failures,
        sent_messages=statistics.median(r.sent_messages for r in pool) if pool else 0.0,
        expanded=statistics.median(r.expanded for r in pool) if pool else 0.0,
        withheld_peak=max((r.withheld_peak for r in results), default=0),
    )
    if solved:
        summary.time_ms = statistics.median(r.time_ms for r in finished)
        summary.cost = statistics.median(r.cost for r in finished)
        best = min(finished, key=lambda r: (abs(r.time_ms - summary.time_ms), r.time_ms))
        summary.plan = [list(step) for step in best.plan]
    else:
        errors = [r.error for r in results if r.error]
        summary.error = errors[0] if errors else None
    return summary


@dataclass
class ScoreBoard:
    config: dict[str, Any]
    problems: list[ProblemSummary]

    @property
    def solved(self) -> list[ProblemSummary]:
        return [p for p in self.problems if p.solved]

    def aggregate(self, restrict: Iterable[str] | None = None) -> dict[str, Any]:
        """Coverage plus averages and stdevs over solved problems (optionally a subset)."""
        keep = set(restrict) if restrict is not None else None
        pool = [p for p in self.solved if keep is None or p.problem in keep]

        def avg(xs: list[float]) -> float | None:
            return statistics.fmean(xs) if xs else None

        def sd(xs: list[float]) -> float | None:
            return statistics.pstdev(xs) if xs else None

        times = [p.time_ms / 1000.0 for p in pool]
        costs = [p.cost for p in pool]
        return {
            "coverage": len(self.solved),
            "avg_time_s": avg(times),
            "stdev_time_s": sd(times),
            "avg_cost": avg(costs),
            "stdev_cost": sd(costs),
            "k_messages": avg([p.sent_messages / 1000.0 for p in pool]),
            "k_states": avg([p.expanded / 1000.0 for p in pool]),
        }

    def report(self) -> bytes:
        return write_report([p.record(self.config) for p in self.problems], self.config)


def run_batch(config: RunConfig, solver: Callable = solve) -> ScoreBoard:
    summaries = []
    for path in config.tasks:
        name = Path(path).stem
        try:
            problem = load_task(path)
        except (OSError, TaskFormatError, KeyError, ValueError) as exc:
            summaries.append(
                ProblemSummary(name, False, 0, config.runs, error=f"invalid task: {exc}")
            )
            continue
        results = [solver(problem, config.solver_config(k)) for k in range(config.runs)]
        summaries.append(summarize_runs(problem.name, results))
    board = ScoreBoard(config.to_dict(), summaries)
    if config.output:
        Path(config.output).write_bytes(board.report())
    return board


# ---------------------------------------------------------------- scoring


def quality_score(cost: float | None, best: float | None) -> float:
    if cost is None or best is None:
        return 0.0
    if cost == 0:
        return 1.0
    return best / cost


def time_score(t: float | None, best: float | None, floor: float = 1.0) -> float:
    """Time score in seconds: full marks up to ``max(best, floor)``, log decay after."""
    if t is None or best is None:
        return 0.0
    if t <= max(best, floor):
        return 1.0
    return 1.0 / (1.0 + math.log10(t / best))


@dataclass(frozen=True)
class ScoredResult:
    """Minimal per-problem result used for scoring: ``time`` in seconds."""

    solved: bool
    cost: float | None = None
    time: float | None = None


def _as_outcome(x: Any) -> ScoredResult:
    if isinstance(x, ScoredResult):
        return x
    if isinstance(x, ProblemSummary):
        return ScoredResult(x.solved, x.cost, None if x.time_ms is None else x.time_ms / 1000.0)
    if isinstance(x, Mapping):
        t = x.get("time")
        if t is None and x.get("wall_ms") is not None:
            t = x["wall_ms"] / 1000.0
        return ScoredResult(bool(x.get("solved")), x.get("cost"), t)
    raise TypeError(f"cannot score {type(x).__name__}")


def ipc_scores(results: Mapping[str, Mapping[str, Any]]) -> dict[str, dict[str, Any]]:
    """Per-config quality and time scores over a shared problem set.

    ``results`` maps config name to ``{problem: outcome}``; outcomes may be
    :class:`ProblemSummary` objects, report rows, or ``ScoredResult``. Problems a
    config did not attempt count as unsolved for it.
    """
    if len(results) < 2:
        raise ValueError("scoring needs at least two configurations")
    sets = [set(r) for r in results.values()]
    if not set.intersection(*sets):
        raise ValueError("configurations share no problems")
    problems = sorted(set.union(*sets))
    table = {
        c: {p: _as_outcome(r[p]) if p in r else ScoredResult(False) for p in problems}
        for c, r in results.items()
    }
    out: dict[str, dict[str, Any]] = {
        c: {"quality": 0.0, "time": 0.0, "coverage": 0, "per_problem": {}} for c in table
    }
    for p in problems:
        solved = [table[c][p] for c in table if table[c][p].solved]
        best_cost = min((o.cost for o in solved), default=None)
        best_time = min((o.time for o in solved), default=None)
        for c in table:
            o = table[c][p]
            q = quality_score(o.cost, best_cost) if o.solved else 0.0
            t = time_score(o.time, best_time) if o.solved else 0.0
            out[c]["per_problem"][p] = {"quality": q, "time": t}
            out[c]["quality"] += q
            out[c]["time"] += t
            out[c]["coverage"] += int(o.solved)
    return out


def common_solved(boards: Mapping[str, ScoreBoard]) -> list[str]:
    names = [set(p.problem for p in b.solved) for b in boards.values()]
    return sorted(set.intersection(*names)) if names else []


def compare(boards: Mapping[str, ScoreBoard]) -> dict[str, dict[str, Any]]:
    """Scores plus averages restricted to problems every config solved."""
    scores = ipc_scores({c: {p.problem: p for p in b.problems} for c, b in boards.items()})
    shared = common_solved(boards)
    for c, b in boards.items():
        scores[c]["averages"] = b.aggregate(shared)
        scores[c]["common_problems"] = len(shared)
    return scores

