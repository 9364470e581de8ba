"""Drive a team of agents to an outcome, in virtual time or on threads."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any

from ..filtering import FilterPolicy
from ..model import Problem, validate_plan
from ..net.crypto import derive_key
from ..net.delay import DelayModel
from ..net.sockets import SocketNetwork
from ..net.transport import Network, SimNetwork, TransportClosed
from .agent import F6, PUBLIC_ORDER, Agent, Outcome
from .termination import Verdict

SIM = "sim"
THREADS = "threads"

# virtual cost of one search step
EXPANSION_US = 100
MESSAGE_US = 5


@dataclass(frozen=True)
class SolverConfig:
    policy: FilterPolicy = field(default_factory=FilterPolicy)
    mode: str = SIM
    delay: DelayModel = field(default_factory=DelayModel)
    time_limit_s: float = 300.0
    max_expansions: int = 200_000
    search: str | None = None  # None picks the public order for strong privacy

    def __post_init__(self) -> None:
        if self.mode not in (SIM, THREADS):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.time_limit_s <= 0:
            raise ValueError("time limit must be positive")

    @property
    def search_mode(self) -> str:
        if self.search is not None:
            return self.search
        return PUBLIC_ORDER if self.policy.is_strong_privacy else F6

    @property
    def seed(self) -> int:
        return self.delay.seed

    def to_dict(self) -> dict[str, Any]:
        d = {"mode": self.mode, "time_limit_s": self.time_limit_s, "search": self.search_mode}
        d.update(self.policy.to_dict())
        d.update(self.delay.to_config())
        return d


@dataclass
class RunResult:
    outcome: Outcome
    plan: list[tuple[str, str]] | None = None
    cost: float | None = None
    time_ms: float = 0.0
    expanded: int = 0
    sent_messages: int = 0
    messages_total: int = 0
    withheld_peak: int = 0
    sent_log: list[list[list[str]]] = field(default_factory=list)
    agent_stats: list[dict[str, int]] = field(default_factory=list)
    error: str | None = None
    valid: bool = False

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED and self.valid

    def record(self, problem: str, config: dict[str, Any] | None = None) -> dict[str, Any]:
        """Report row with the fields of :data:`mabfws.io.report.REPORT_FIELDS`."""
        return {
            "problem": problem,
            "solved": self.solved,
            "outcome": self.outcome.value,
            "plan": [list(step) for step in self.plan] if self.plan is not None else None,
            "cost": self.cost,
            "wall_ms": round(self.time_ms, 3),
            "expanded": self.expanded,
            "sent_messages": self.sent_messages,
            "withheld_peak": self.withheld_peak,
            "config": config or {},
        }


def build_agents(problem: Problem, config: SolverConfig, network: Network) -> list[Agent]:
    agents = [
        Agent(
            problem,
            i,
            config.policy,
            network.endpoint(i),
            derive_key(config.seed, i),
            config.search_mode,
        )
        for i in range(problem.n_agents)
    ]
    # the initial state is common knowledge; its private parts start out encrypted
    announced = [a.initial_announcement() for a in agents]
    tokens = [t for t, _ in announced]
    flags = [f for _, f in announced]
    for a in agents:
        a.start(tokens, flags)
    return agents


def assemble_plan(problem: Problem, agents: list[Agent], labels: list[tuple[int, str]]) -> list[tuple[str, str]]:
    return [(problem.agents[a], agents[a].resolve_label(label)) for a, label in labels]


def _finish(
    problem: Problem,
    agents: list[Agent],
    network: Network,
    outcome: Outcome,
    time_ms: float,
    error: str | None = None,
) -> RunResult:
    result = RunResult(outcome, time_ms=time_ms, error=error)
    result.expanded = sum(a.stats["expanded"] for a in agents)
    result.sent_messages = network.sent_by_kind["state"]
    result.messages_total = network.sent
    result.withheld_peak = max((a.filter.withheld.peak for a in agents), default=0)
    result.sent_log = [[problem.fact_names(p) for p in a.filter.sent_log] for a in agents]
    result.agent_stats = [dict(sorted(a.stats.items())) for a in agents]
    if outcome is Outcome.SOLVED:
        solver = next(a for a in agents if a.outcome is Outcome.SOLVED and a.plan_labels is not None)
        try:
            result.plan = assemble_plan(problem, agents, solver.plan_labels)
        except KeyError as exc:
            result.outcome = Outcome.ERROR
            result.error = f"unresolvable plan step {exc}"
            return result
        check = validate_plan(problem, result.plan)
        result.valid = check.valid
        result.cost = check.cost if check.valid else None
        if not check.valid:
            result.outcome = Outcome.ERROR
            result.error = f"invalid plan: {check.reason}"
    return result


def _decided(agents: list[Agent]) -> tuple[Outcome, str | None] | None:
    for a in agents:
        if a.outcome in (Outcome.SOLVED, Outcome.ERROR):
            return a.outcome, a.error
    if agents[0].outcome is Outcome.EXHAUSTED:
        return Outcome.EXHAUSTED, None
    return None


def run_sim(problem: Problem, config: SolverConfig) -> RunResult:
    """Deterministic run: one scheduler interleaves agents on a virtual clock.

    Each agent owns a clock advanced by the cost of its steps. The scheduler
    always runs the earliest event; a delivery due at the same instant as an
    agent step goes first. Reports ``time_ms`` in virtual milliseconds.
    """
    network = SimNetwork(problem.n_agents, config.delay)
    agents = build_agents(problem, config, network)
    n = len(agents)
    clock = [0] * n
    limit_us = int(config.time_limit_s * 1e6)
    idle_rounds = 0
    last_marker: tuple | None = None

    def has_work(i: int) -> bool:
        return network.pending_for(i) > 0 or agents[i].runnable()

    while True:
        decided = _decided(agents)
        if decided is not None:
            return _finish(problem, agents, network, decided[0], max(clock) / 1000, decided[1])
        expanded = sum(a.stats["expanded"] for a in agents)
        if max(clock) > limit_us or expanded >= config.max_expansions:
            return _finish(problem, agents, network, Outcome.TIMEOUT, max(clock) / 1000)

        busy = [(clock[i], i) for i in range(n) if has_work(i)]
        due = network.next_delivery()
        if due is not None and (not busy or due <= min(busy)[0]):
            network.now = due
            env = network.deliver_next()
            clock[env.dest] = max(clock[env.dest], due)
            continue

        if busy:
            _, i = min(busy)
            network.now = clock[i]
            before = agents[i].stats["expanded"]
            messages = network.take(i)
            try:
                agents[i].step(messages)
            except TransportClosed as exc:
                return _finish(problem, agents, network, Outcome.ERROR, max(clock) / 1000, str(exc))
            cost = EXPANSION_US * (agents[i].stats["expanded"] - before) + MESSAGE_US * len(messages)
            clock[i] += max(cost, 1)
            continue

        # quiescent: nothing scheduled and nobody has work
        network.now = max(clock)
        sent_before = network.sent
        verdict = agents[0].coordinate(network.in_flight(), network.sent)
        if verdict is Verdict.FAIL_EXHAUSTED:
            continue
        marker = (network.sent, expanded, tuple(a.status for a in agents))
        if network.sent == sent_before and marker == last_marker:
            idle_rounds += 1
            if idle_rounds >= 3:
                return _finish(problem, agents, network, Outcome.ERROR, max(clock) / 1000, "stalled")
        else:
            idle_rounds = 0
        last_marker = marker


def run_agent(agent: Agent, network: Network, stop: threading.Event, done: threading.Event) -> Outcome | None:
    """Worker loop of one agent in threaded mode."""
    endpoint = agent.endpoint
    try:
        while not stop.is_set():
            worked = agent.step()
            if agent.outcome in (Outcome.SOLVED, Outcome.ERROR):
                done.set()
            if agent.id == 0 and not worked:
                if agent.coordinate(network.in_flight(), network.sent) is Verdict.FAIL_EXHAUSTED:
                    done.set()
            if not worked:
                endpoint.wait(0.002)  # type: ignore[attr-defined]
    except TransportClosed:
        if not stop.is_set():
            agent.outcome = agent.outcome or Outcome.ERROR
            agent.error = agent.error or "transport closed"
            done.set()
    return agent.outcome


def run_threads(problem: Problem, config: SolverConfig) -> RunResult:
    """Concurrent run over loopback sockets; limits are wall-clock."""
    network = SocketNetwork(problem.n_agents, config.delay)
    stop, done = threading.Event(), threading.Event()
    t0 = time.monotonic()
    try:
        agents = build_agents(problem, config, network)
        workers = [
            threading.Thread(target=run_agent, args=(a, network, stop, done), daemon=True)
            for a in agents
        ]
        for w in workers:
            w.start()
        done.wait(config.time_limit_s)
        stop.set()
        for w in workers:
            w.join(timeout=5.0)
    finally:
        network.close()
    elapsed = (time.monotonic() - t0) * 1000
    decided = _decided(agents)
    if decided is None:
        return _finish(problem, agents, network, Outcome.TIMEOUT, elapsed)
    if network.errors and decided[0] is not Outcome.SOLVED:
        return _finish(problem, agents, network, Outcome.ERROR, elapsed, "transport failure")
    return _finish(problem, agents, network, decided[0], elapsed, decided[1])


def solve(problem: Problem, config: SolverConfig | None = None) -> RunResult:
    config = config or SolverConfig()
    if config.mode == SIM:
        return run_sim(problem, config)
    return run_threads(problem, config)
