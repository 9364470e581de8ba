"""Goal counting, the relaxed-plan fact counter and path depth."""

from __future__ import annotations

from dataclasses import dataclass

from .model import Problem, State


@dataclass(frozen=True)
class GoalView:
    """Which goals an agent counts.

    The full view counts public goals, the agent's own private goals, and one
    unachieved goal per foreign agent whose private-goal flag is false. The
    public view counts public goals only.
    """

    agent: int
    public: frozenset[int]
    own_private: frozenset[int] = frozenset()
    foreign_flags: bool = False
    n_agents: int = 1

    @property
    def size(self) -> int:
        extra = self.n_agents - 1 if self.foreign_flags else 0
        return len(self.public) + len(self.own_private) + extra


def full_goal_view(problem: Problem, agent: int) -> GoalView:
    return GoalView(agent, problem.public_goals, problem.private_goals[agent], True, problem.n_agents)


def public_goal_view(problem: Problem, agent: int) -> GoalView:
    return GoalView(agent, problem.public_goals, n_agents=problem.n_agents)


def goal_count(state: State, view: GoalView) -> int:
    n = len(view.public - state.local) + len(view.own_private - state.local)
    if view.foreign_flags:
        n += sum(1 for j, ok in enumerate(state.goal_flags) if j != view.agent and not ok)
    return n


def public_goal_count(problem: Problem, projection: frozenset[int]) -> int:
    return len(problem.public_goals - projection)


@dataclass(frozen=True)
class RelaxedPlanSet:
    facts: frozenset[int]
    actions: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.facts)


def extract_relaxed_plan(problem: Problem, agent: int) -> RelaxedPlanSet:
    """FF-style relaxed plan from the initial state over ``agent``'s own actions.

    Facts get their first relaxed layer and an additive cost estimate; goals the
    relaxation reaches are supported backwards, picking for each subgoal the
    cheapest achiever from the previous layer (lowest action index on ties).
    Returns the union of the chosen actions' add effects.
    """
    known = problem.known_facts[agent]
    actions = problem.agent_actions[agent]
    init = problem.init & known
    goals = problem.goals & known

    layer = {f: 0 for f in init}
    hadd = {f: 0.0 for f in init}
    act_layer: dict[int, int] = {}
    act_cost: dict[int, float] = {}
    level = 0
    while True:
        new_facts: dict[int, float] = {}
        for a in actions:
            if a.id in act_layer or not a.pre <= layer.keys():
                continue
            act_layer[a.id] = level
            act_cost[a.id] = a.cost + sum(hadd[p] for p in a.pre)
            for f in a.add:
                if f not in layer and (f not in new_facts or act_cost[a.id] < new_facts[f]):
                    new_facts[f] = act_cost[a.id]
        if not new_facts:
            break
        level += 1
        for f, c in new_facts.items():
            layer[f] = level
            hadd[f] = c

    # refine additive costs to a fixpoint; layers stay as first reached
    changed = True
    while changed:
        changed = False
        for a in actions:
            if a.id not in act_layer:
                continue
            c = a.cost + sum(hadd[p] for p in a.pre)
            act_cost[a.id] = c
            for f in a.add:
                if c < hadd[f] and layer[f] > 0:
                    hadd[f] = c
                    changed = True

    targets = [g for g in goals if g in layer and layer[g] > 0]
    if not targets:
        return RelaxedPlanSet(frozenset())

    by_id = {a.id: a for a in actions}
    chosen: list[int] = []
    achieved: set[int] = set(init)
    agenda = sorted(targets, key=lambda f: (-layer[f], f))
    pending = set(agenda)
    while agenda:
        f = agenda.pop(0)
        if f in achieved:
            continue
        lvl = layer[f]
        candidates = [
            a for a in actions if f in a.add and a.id in act_layer and act_layer[a.id] < lvl
        ]
        best = min(candidates, key=lambda a: (act_cost[a.id], a.id))
        chosen.append(best.id)
        achieved.update(best.add)
        for p in best.pre:
            if p not in achieved and p not in pending:
                pending.add(p)
                agenda.append(p)
        agenda.sort(key=lambda x: (-layer[x], x))

    facts: set[int] = set()
    for aid in chosen:
        facts |= by_id[aid].add
    return RelaxedPlanSet(frozenset(facts), tuple(sorted(chosen)))


@dataclass(frozen=True)
class PathCounters:
    """Per-node counters: relaxed-plan facts reached so far and depths.

    ``public_depth`` counts only public actions on the path; it is the depth used
    by the public-only search order.
    """

    achieved: frozenset[int] = frozenset()
    depth: int = 0
    public_depth: int = 0

    @property
    def r(self) -> int:
        return len(self.achieved)


def root_counters(state: State, relaxed: RelaxedPlanSet) -> PathCounters:
    return PathCounters(relaxed.facts & state.local, 0, 0)


def update_counters(
    parent: PathCounters, child: State, relaxed: RelaxedPlanSet, public_action: bool = True
) -> PathCounters:
    return PathCounters(
        parent.achieved | (relaxed.facts & child.local),
        parent.depth + 1,
        parent.public_depth + (1 if public_action else 0),
    )


def received_counters(
    state: State, relaxed: RelaxedPlanSet, depth: int, public_depth: int
) -> PathCounters:
    # the path behind a received state is not visible; restart from its facts
    return PathCounters(relaxed.facts & state.local, depth, public_depth)
