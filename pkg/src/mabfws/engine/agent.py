"""One agent's share of the distributed best-first width search.

Each agent keeps its own open and closed lists, expands nodes with its own
actions only, offers states produced by public actions to its message filter,
and inserts states received from other agents as new roots. The agent is
transport-agnostic: it talks to an :class:`~mabfws.net.Endpoint` and is driven
one :meth:`Agent.step` at a time, either by the virtual-time scheduler or by a
worker thread.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..filtering import Decision, FilterPolicy, MessageFilter, Outgoing, OutgoingH, Status, on_status_change
from ..heuristics import (
    PathCounters,
    full_goal_view,
    goal_count,
    public_goal_count,
    public_goal_view,
    extract_relaxed_plan,
    received_counters,
    root_counters,
    update_counters,
)
from ..model import Action, Problem, State, apply, is_global_goal
from ..net.crypto import encrypt_private_part
from ..net.envelope import Envelope, Kind
from ..net.transport import Endpoint
from ..novelty import NoveltyTable
from .termination import TerminationDetector, Verdict

log = logging.getLogger(__name__)

F6 = "f6"
PUBLIC_ORDER = "public"
SEARCH_MODES = (F6, PUBLIC_ORDER)


class Outcome(str, Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted"
    TIMEOUT = "timeout"
    ERROR = "error"


class Ingest(str, Enum):
    INSERTED = "inserted"
    DUPLICATE = "duplicate"
    REOPENED = "reopened"


class MalformedMessage(ValueError):
    pass


class ProtocolError(RuntimeError):
    pass


@dataclass
class SearchNode:
    state: State
    counters: PathCounters
    g: float
    parent: int | None = None
    remote: tuple[int, int] | None = None  # (sender, sender-side ref) of a received state
    action: int | None = None
    novelty: int = 0


class _SearchAtoms:
    """Universe of search-novelty atoms: known fact ids and foreign tokens."""

    def __init__(self, known: frozenset[int]):
        self.known = known

    def __contains__(self, atom: Any) -> bool:
        if isinstance(atom, tuple):
            return len(atom) == 2 and isinstance(atom[1], str)
        return atom in self.known


class Agent:
    def __init__(
        self,
        problem: Problem,
        agent: int,
        policy: FilterPolicy,
        endpoint: Endpoint,
        key: bytes,
        search: str = F6,
    ):
        if search not in SEARCH_MODES:
            raise ValueError(f"unknown search mode {search!r}")
        self.problem = problem
        self.id = agent
        self.n = problem.n_agents
        self.policy = policy
        self.endpoint = endpoint
        self.search = search
        self._key = key

        self.actions: tuple[Action, ...] = problem.agent_actions[agent]
        self.relaxed = extract_relaxed_plan(problem, agent)
        self.full_view = full_goal_view(problem, agent)
        self.public_view = public_goal_view(problem, agent)
        self.private = problem.private_facts[agent]
        self.public = problem.public_set

        if search == F6:
            self.table = NoveltyTable(2, _SearchAtoms(problem.known_facts[agent]))
        else:
            self.table = NoveltyTable(2, self.public)
        self.filter = MessageFilter(policy, problem.public_facts)

        self.nodes: list[SearchNode] = []
        self.open: list[tuple[tuple, int, int]] = []
        self.best: dict[State, int] = {}
        # states already offered to the filter or known to every peer
        self.shared: set[State] = set()
        self.closed: set[int] = set()
        self._push_count = 0

        self.tokens: dict[str, frozenset[int]] = {}
        self.refs: dict[int, int] = {}
        self.labels: dict[str, str] = {}

        self.status = Status.ACTIVE
        self.statuses = [Status.ACTIVE] * self.n
        self.detector = TerminationDetector() if agent == 0 else None
        self.rounds = 0

        self.terminated = False
        self.outcome: Outcome | None = None
        self.error: str | None = None
        self.goal_node: int | None = None
        self.trace_segments: list[tuple[int, list[str]]] | None = None
        self.trace_pending = False
        self.plan_labels: list[tuple[int, str]] | None = None
        self.stats: Counter = Counter()
        self.ingest_log: list[Ingest] = []

    # ------------------------------------------------------------------ setup

    def _encrypt(self, private: frozenset[int]) -> str:
        token = encrypt_private_part(self.problem.fact_names(private), self._key)
        self.tokens[token] = private
        return token

    def initial_announcement(self) -> tuple[str, bool]:
        """Token and private-goal flag for this agent's part of the initial state."""
        own = self.problem.init & self.private
        return self._encrypt(own), self.problem.private_goals[self.id] <= own

    def start(self, tokens: list[str], flags: list[bool]) -> None:
        local = self.problem.init & self.problem.known_facts[self.id]
        foreign = tuple(None if j == self.id else tokens[j] for j in range(self.n))
        state = State(self.id, local, foreign, tuple(flags))
        self._add_node(SearchNode(state, root_counters(state, self.relaxed), 0.0))

    # ------------------------------------------------------------ open list

    def _evaluate(self, node: SearchNode) -> tuple:
        state = node.state
        if self.search == F6:
            gc = goal_count(state, self.full_view)
            r = node.counters.r
            atoms = list(state.local)
            atoms.extend((j, t) for j, t in enumerate(state.foreign) if t is not None)
            node.novelty = self.table.evaluate_and_insert(atoms, (gc, r))
            return (node.novelty, gc, -r)
        gc = goal_count(state, self.public_view)
        node.novelty = self.table.evaluate_and_insert(state.local & self.public, (gc,))
        return (node.novelty, node.counters.public_depth)

    def _add_node(self, node: SearchNode) -> int:
        nid = len(self.nodes)
        self.nodes.append(node)
        self.best[node.state] = nid
        key = self._evaluate(node)
        self._push_count += 1
        heapq.heappush(self.open, (key, self._push_count, nid))
        self.stats["generated"] += 1
        return nid

    def _stale(self, nid: int) -> bool:
        return nid in self.closed or self.best.get(self.nodes[nid].state) != nid

    def _prune_open(self) -> None:
        while self.open and self._stale(self.open[0][2]):
            heapq.heappop(self.open)

    def has_open(self) -> bool:
        self._prune_open()
        return bool(self.open)

    # ------------------------------------------------------------ main step

    def runnable(self) -> bool:
        return not self.terminated and self.has_open()

    def step(self, messages: list[Envelope] | None = None) -> bool:
        """Process inbound messages, expand one node, refresh status.

        Returns whether any work was done. Messages are acknowledged to the
        transport only after everything they caused has been sent.
        """
        if messages is None:
            messages = self.endpoint.receive()
        for env in messages:
            self.handle(env)
        worked = bool(messages)
        if self.runnable():
            self.expand_one()
            worked = True
        self.update_status()
        self.endpoint.ack(len(messages))
        return worked

    def expand_one(self) -> None:
        self._prune_open()
        if not self.open:
            return
        _, _, nid = heapq.heappop(self.open)
        self.closed.add(nid)
        node = self.nodes[nid]
        self.stats["expanded"] += 1
        if is_global_goal(self.problem, node.state):
            self.on_goal(nid)
            return
        for action in self.actions:
            if action.pre <= node.state.local:
                self._generate(nid, action)

    def _generate(self, parent_id: int, action: Action) -> None:
        parent = self.nodes[parent_id]
        child = apply(self.problem, action, parent.state)
        g = parent.g + action.cost
        existing = self.best.get(child)
        if existing is None or g < self.nodes[existing].g:
            counters = update_counters(parent.counters, child, self.relaxed, action.public)
            nid = self._add_node(SearchNode(child, counters, g, parent=parent_id, action=action.id))
            if existing is not None:
                self.stats["reopened"] += 1
        else:
            nid = existing
        # a state first reached privately still goes out once a public action reaches it
        if action.public and child not in self.shared:
            self.shared.add(child)
            self._offer(nid)

    # ------------------------------------------------------------ sending

    def _outgoing_h(self, projection: frozenset[int]) -> tuple:
        if self.policy.outgoing_h is OutgoingH.NONE:
            return ()
        return (
            public_goal_count(self.problem, projection),
            len(self.relaxed.facts & projection),
        )

    def _withheld_key(self, node: SearchNode) -> tuple:
        if self.search == F6:
            return (goal_count(node.state, self.full_view), -node.counters.r)
        return (goal_count(node.state, self.public_view), node.counters.public_depth)

    def _offer(self, nid: int) -> Decision:
        node = self.nodes[nid]
        projection = node.state.local & self.public
        item = Outgoing(projection, self._outgoing_h(projection), self._withheld_key(node), nid)
        decision = self.filter.on_public_child(item)
        self.stats[f"offer_{decision.value}"] += 1
        if decision is Decision.SENT:
            self._send_state(item)
        return decision

    def state_payload(self, nid: int, ref: int) -> dict[str, Any]:
        node = self.nodes[nid]
        state = node.state
        own = self._encrypt(state.local & self.private)
        return {
            "public": sorted(state.local & self.public),
            "tokens": [own if j == self.id else state.foreign[j] for j in range(self.n)],
            "flags": list(state.goal_flags),
            "g": node.g,
            "depth": node.counters.depth,
            "public_depth": node.counters.public_depth,
            "ref": ref,
        }

    def _send_state(self, item: Outgoing) -> None:
        ref = len(self.refs) + 1
        self.refs[ref] = item.node
        envs = self.endpoint.broadcast(Kind.STATE, self.state_payload(item.node, ref))
        self.stats["sent_states"] += len(envs)

    def release(self) -> int:
        items = self.filter.release()
        for item in items:
            self._send_state(item)
        self.stats["released"] += len(items)
        return len(items)

    # ------------------------------------------------------------ status

    def current_status(self) -> Status:
        if self.has_open():
            return Status.ACTIVE
        if len(self.filter.withheld):
            return Status.PARTIALLY_EMPTY
        return Status.EMPTY

    def update_status(self) -> None:
        if self.terminated:
            return
        for _ in range(len(self.filter.withheld) + 2):
            new = self.current_status()
            if new is self.status:
                return
            self.status = new
            self.statuses[self.id] = new
            self.endpoint.broadcast(Kind.STATUS, {"status": new.value})
            self.stats["status_changes"] += 1
            self._check_release()

    def _check_release(self) -> None:
        # level-triggered: every status broadcast re-evaluates while the condition holds
        if self.id in on_status_change(self.statuses, self.policy):
            self.release()

    # ------------------------------------------------------------ receiving

    def handle(self, env: Envelope) -> None:
        try:
            if env.kind is Kind.STATE:
                if not self.terminated:
                    self.ingest_log.append(self.ingest_state_message(env))
            elif env.kind is Kind.STATUS:
                self._on_status(env)
            elif env.kind is Kind.TERMINATE:
                self._on_terminate(env)
            elif env.kind is Kind.TRACE_REQ:
                self._on_trace_request(env)
            elif env.kind is Kind.TRACE_REP:
                self._on_trace_reply(env)
        except (MalformedMessage, KeyError, TypeError, ValueError, IndexError) as exc:
            log.debug("agent %d dropped malformed %s: %s", self.id, env.kind, exc)
            self.stats["malformed"] += 1

    def ingest_state_message(self, env: Envelope) -> Ingest:
        p = env.payload
        public = frozenset(int(x) for x in p["public"])
        if not public <= self.public:
            raise MalformedMessage("non-public fact in projection")
        tokens = p["tokens"]
        if len(tokens) != self.n or len(p["flags"]) != self.n:
            raise MalformedMessage("wrong number of agents")
        own = self.tokens.get(tokens[self.id])
        if own is None:
            raise MalformedMessage("unknown token for own private part")
        local = public | own
        flags = [bool(x) for x in p["flags"]]
        flags[self.id] = self.problem.private_goals[self.id] <= own
        state = State(
            self.id,
            local,
            tuple(None if j == self.id else str(tokens[j]) for j in range(self.n)),
            tuple(flags),
        )
        g = float(p["g"])
        existing = self.best.get(state)
        if existing is not None and self.nodes[existing].g <= g:
            self.stats["duplicates"] += 1
            return Ingest.DUPLICATE
        self.shared.add(state)
        counters = received_counters(state, self.relaxed, int(p["depth"]), int(p["public_depth"]))
        self._add_node(SearchNode(state, counters, g, remote=(env.sender, int(p["ref"]))))
        self.stats["received_states"] += 1
        if existing is not None:
            self.stats["reopened"] += 1
            return Ingest.REOPENED
        return Ingest.INSERTED

    def _on_status(self, env: Envelope) -> None:
        p = env.payload
        if "statuses" in p:
            view = [Status(s) for s in p["statuses"]]
            if len(view) != self.n:
                raise MalformedMessage("status vector of wrong size")
            view[self.id] = self.status
            self.statuses = view
        else:
            self.statuses[env.sender] = Status(p["status"])
        if not self.terminated:
            self._check_release()

    def _on_terminate(self, env: Envelope) -> None:
        self.terminated = True
        if env.payload.get("reason") == "exhausted" and self.outcome is None:
            self.outcome = Outcome.EXHAUSTED

    # ------------------------------------------------------------ coordinator

    def coordinate(self, in_flight: int, sent_total: int) -> Verdict | None:
        """Coordinator duty, called when the system looks idle.

        Returns FAIL_EXHAUSTED once confirmed; otherwise kicks a release round
        when every agent waits and some still hold withheld states.
        """
        if self.detector is None or self.terminated:
            return None
        statuses = list(self.statuses)
        verdict = self.detector.observe(statuses, in_flight, sent_total)
        if verdict is Verdict.FAIL_EXHAUSTED:
            self.terminated = True
            self.outcome = Outcome.EXHAUSTED
            self.endpoint.broadcast(Kind.TERMINATE, {"reason": "exhausted"})
            return verdict
        if (
            in_flight == 0
            and all(s.waiting for s in statuses)
            and any(s is Status.PARTIALLY_EMPTY for s in statuses)
        ):
            self.rounds += 1
            self.endpoint.broadcast(
                Kind.STATUS, {"round": self.rounds, "statuses": [s.value for s in statuses]}
            )
            self._check_release()
            self.update_status()
        return verdict

    # ------------------------------------------------------------ plans

    def _label(self, action: Action) -> str:
        if action.public:
            return action.name
        label = f"~{self.id}:{len(self.labels) + 1}"
        self.labels[label] = action.name
        return label

    def resolve_label(self, label: str) -> str:
        if label.startswith("~"):
            return self.labels[label]
        return label

    def local_segment(self, nid: int) -> tuple[list[str], tuple[int, int] | None]:
        """Own actions leading to node ``nid`` and the remote link behind them."""
        labels: list[str] = []
        node = self.nodes[nid]
        while True:
            if node.action is not None:
                labels.append(self._label(self.problem.actions[node.action]))
            if node.parent is None:
                break
            node = self.nodes[node.parent]
        labels.reverse()
        return labels, node.remote

    def on_goal(self, nid: int) -> None:
        self.goal_node = nid
        self.terminated = True
        self.endpoint.broadcast(Kind.TERMINATE, {"reason": "solved"})
        segment, remote = self.local_segment(nid)
        self.trace_segments = [(self.id, segment)]
        self._follow(remote)

    def _follow(self, remote: tuple[int, int] | None) -> None:
        # the chain can pass back through this agent; resolve those links locally
        while remote is not None and remote[0] == self.id:
            nid = self.refs.get(remote[1])
            if nid is None:
                self.trace_pending = False
                self.outcome = Outcome.ERROR
                self.error = f"trace failed at agent {self.id}: unknown ref"
                return
            segment, remote = self.local_segment(nid)
            self.trace_segments.insert(0, (self.id, segment))
        if remote is None:
            self.trace_pending = False
            self.plan_labels = [(a, lab) for a, seg in self.trace_segments for lab in seg]
            self.outcome = Outcome.SOLVED
            return
        self.trace_pending = True
        sender, ref = remote
        self.endpoint.send(Kind.TRACE_REQ, {"ref": ref}, sender)

    def _on_trace_request(self, env: Envelope) -> None:
        ref = int(env.payload["ref"])
        nid = self.refs.get(ref)
        if nid is None:
            self.endpoint.send(Kind.TRACE_REP, {"ref": ref, "error": "unknown ref"}, env.sender)
            return
        segment, remote = self.local_segment(nid)
        self.endpoint.send(
            Kind.TRACE_REP,
            {"ref": ref, "segment": segment, "next": list(remote) if remote else None},
            env.sender,
        )

    def _on_trace_reply(self, env: Envelope) -> None:
        if not self.trace_pending:
            return
        p = env.payload
        if "error" in p:
            self.trace_pending = False
            self.outcome = Outcome.ERROR
            self.error = f"trace failed at agent {env.sender}: {p['error']}"
            return
        self.trace_segments.insert(0, (env.sender, [str(x) for x in p["segment"]]))
        nxt = p["next"]
        self._follow((int(nxt[0]), int(nxt[1])) if nxt else None)

    @property
    def done(self) -> bool:
        return self.outcome is not None
