"""Grounded MA-STRIPS tasks, privacy classification and STRIPS semantics.

Facts are interned as dense integer ids. A fact is owned by a single agent
(private) when no other agent's action mentions it; everything else is public.
States are always seen from one agent's point of view: the owning agent holds
its own private facts in plain form, while each other agent's private part is
an opaque token.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

PUBLIC = None


class ContractViolation(RuntimeError):
    """A caller broke the precondition of an operation."""


class UnusedFactWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Fact:
    id: int
    name: str
    owner: int | None = PUBLIC  # None means public

    @property
    def is_public(self) -> bool:
        return self.owner is None


@dataclass(frozen=True)
class Action:
    id: int
    name: str
    agent: int
    pre: frozenset[int]
    add: frozenset[int]
    delete: frozenset[int]
    cost: float = 1.0
    public: bool = True

    @property
    def facts(self) -> frozenset[int]:
        return self.pre | self.add | self.delete


@dataclass(frozen=True)
class State:
    """One agent's view of a world state.

    ``foreign[j]`` is the token standing for agent ``j``'s private part and is
    ``None`` at the owner's own slot. ``goal_flags[j]`` tells whether all private
    goals of agent ``j`` hold.
    """

    agent: int
    local: frozenset[int]
    foreign: tuple[str | None, ...]
    goal_flags: tuple[bool, ...]


@dataclass(frozen=True)
class PublicProjection:
    facts: frozenset[int]

    def encode(self) -> bytes:
        return ",".join(str(f) for f in sorted(self.facts)).encode("ascii")


@dataclass(frozen=True)
class PlanCheck:
    valid: bool
    cost: float
    failed_at: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class Problem:
    name: str
    agents: tuple[str, ...]
    facts: tuple[Fact, ...]
    actions: tuple[Action, ...]
    init: frozenset[int]
    goals: frozenset[int]
    declared_public: frozenset[int] = field(default_factory=frozenset)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @cached_property
    def public_facts(self) -> tuple[int, ...]:
        return tuple(f.id for f in self.facts if f.owner is None)

    @cached_property
    def public_set(self) -> frozenset[int]:
        return frozenset(self.public_facts)

    @cached_property
    def private_facts(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in self.agents]
        for f in self.facts:
            if f.owner is not None:
                out[f.owner].add(f.id)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def known_facts(self) -> tuple[frozenset[int], ...]:
        return tuple(self.public_set | priv for priv in self.private_facts)

    @cached_property
    def agent_actions(self) -> tuple[tuple[Action, ...], ...]:
        out: list[list[Action]] = [[] for _ in self.agents]
        for a in self.actions:
            out[a.agent].append(a)
        return tuple(tuple(acts) for acts in out)

    @cached_property
    def public_goals(self) -> frozenset[int]:
        return self.goals & self.public_set

    @cached_property
    def private_goals(self) -> tuple[frozenset[int], ...]:
        return tuple(self.goals & priv for priv in self.private_facts)

    @cached_property
    def fact_index(self) -> dict[str, int]:
        return {f.name: f.id for f in self.facts}

    @cached_property
    def action_index(self) -> dict[tuple[str, str], Action]:
        return {(self.agents[a.agent], a.name): a for a in self.actions}

    def fact_names(self, ids: Iterable[int]) -> list[str]:
        return sorted(self.facts[i].name for i in ids)


def _fact_users(n_facts: int, actions: Iterable[Action]) -> list[set[int]]:
    users: list[set[int]] = [set() for _ in range(n_facts)]
    for a in actions:
        for f in a.facts:
            users[f].add(a.agent)
    return users


def classify_facts(problem: Problem) -> Problem:
    """Recompute fact owners and action visibility from action usage.

    A fact becomes private to agent ``i`` when every action mentioning it
    belongs to ``i`` and it was not declared public. Facts no action mentions
    stay public.
    """
    users = _fact_users(len(problem.facts), problem.actions)
    referenced = set(problem.init) | set(problem.goals)
    facts = []
    for f in problem.facts:
        agents_using = users[f.id]
        if not agents_using:
            if f.id not in referenced:
                warnings.warn(
                    f"fact {f.name!r} is not used by any action, init or goal",
                    UnusedFactWarning,
                    stacklevel=2,
                )
            owner = None
        elif len(agents_using) == 1 and f.id not in problem.declared_public:
            owner = next(iter(agents_using))
        else:
            owner = None
        facts.append(Fact(f.id, f.name, owner))

    actions = []
    for a in problem.actions:
        private = all(facts[x].owner == a.agent for x in a.facts)
        actions.append(
            Action(a.id, a.name, a.agent, a.pre, a.add, a.delete, a.cost, not private)
        )
    return Problem(
        problem.name,
        problem.agents,
        tuple(facts),
        tuple(actions),
        problem.init,
        problem.goals,
        problem.declared_public,
    )


def build_problem(
    name: str,
    agents: Sequence[str],
    facts: Iterable[str],
    actions: Iterable[tuple[str, str, Iterable[str], Iterable[str], Iterable[str], float]],
    init: Iterable[str],
    goals: Iterable[str],
    declared_public: Iterable[str] = (),
) -> Problem:
    """Intern names and return a classified :class:`Problem`.

    ``actions`` holds ``(agent, name, pre, add, del, cost)`` tuples. Fact ids
    follow lexicographic order of the names; actions keep the given order.
    """
    names = sorted(set(facts))
    fid = {n: i for i, n in enumerate(names)}
    aid = {a: i for i, a in enumerate(agents)}
    if len(aid) != len(agents):
        raise ValueError("duplicate agent names")

    def ids(xs: Iterable[str]) -> frozenset[int]:
        out = set()
        for x in xs:
            if x not in fid:
                raise KeyError(f"undeclared fact {x!r}")
            out.add(fid[x])
        return frozenset(out)

    built = []
    for k, (agent, aname, pre, add, dele, cost) in enumerate(actions):
        if agent not in aid:
            raise KeyError(f"undeclared agent {agent!r}")
        if cost < 0:
            raise ValueError(f"negative cost for action {aname!r}")
        add_ids = ids(add)
        built.append(
            Action(k, aname, aid[agent], ids(pre), add_ids, ids(dele) - add_ids, float(cost))
        )
    raw = Problem(
        name,
        tuple(agents),
        tuple(Fact(i, n) for i, n in enumerate(names)),
        tuple(built),
        ids(init),
        ids(goals),
        ids(declared_public),
    )
    return classify_facts(raw)


def _check_owner(action: Action, state: State) -> None:
    if action.agent != state.agent:
        raise ContractViolation(
            f"action {action.name!r} of agent {action.agent} used on a state of agent {state.agent}"
        )


def applicable(action: Action, state: State) -> bool:
    _check_owner(action, state)
    return action.pre <= state.local


def apply(problem: Problem, action: Action, state: State) -> State:
    if not applicable(action, state):
        raise ContractViolation(f"action {action.name!r} is not applicable")
    local = (state.local - action.delete) | action.add
    flags = list(state.goal_flags)
    flags[state.agent] = problem.private_goals[state.agent] <= local
    return State(state.agent, local, state.foreign, tuple(flags))


def public_projection(problem: Problem, state: State) -> PublicProjection:
    return PublicProjection(state.local & problem.public_set)


def own_private_part(problem: Problem, state: State) -> frozenset[int]:
    return state.local & problem.private_facts[state.agent]


def private_goal_flag(problem: Problem, agent: int, private_part: Iterable[int]) -> bool:
    return problem.private_goals[agent] <= frozenset(private_part)


def is_global_goal(problem: Problem, state: State) -> bool:
    if not problem.public_goals <= state.local:
        return False
    if not problem.private_goals[state.agent] <= state.local:
        return False
    return all(flag for j, flag in enumerate(state.goal_flags) if j != state.agent)


def global_successor(action: Action, facts: frozenset[int]) -> frozenset[int]:
    return (facts - action.delete) | action.add


def validate_plan(problem: Problem, plan: Sequence[tuple[str, str]]) -> PlanCheck:
    """Simulate a joint plan of ``(agent, action)`` pairs on the global state."""
    state = problem.init
    cost = 0.0
    for i, (agent, name) in enumerate(plan):
        action = problem.action_index.get((agent, name))
        if action is None:
            return PlanCheck(False, cost, i, f"unknown action {name!r} for agent {agent!r}")
        if not action.pre <= state:
            return PlanCheck(False, cost, i, f"action {name!r} is not applicable")
        state = global_successor(action, state)
        cost += action.cost
    if not problem.goals <= state:
        return PlanCheck(False, cost, len(plan), "goals not reached")
    return PlanCheck(True, cost)
