"""Independent reference implementations used to check the planner.

These work on raw task documents and plain Python sets; they deliberately
share no code with the package.
"""

from __future__ import annotations

import json
from collections import deque
from itertools import combinations
from pathlib import Path


def load_doc(path) -> dict:
    return json.loads(Path(path).read_text())


def classify(doc: dict) -> dict[str, str]:
    """Map each fact to ``"public"`` or its owning agent name."""
    users: dict[str, set[str]] = {f: set() for f in doc["facts"]}
    for a in doc["actions"]:
        for key in ("pre", "add", "del"):
            for f in a.get(key, []):
                users[f].add(a["agent"])
    declared = set(doc.get("public", []))
    out = {}
    for f, who in users.items():
        out[f] = next(iter(who)) if len(who) == 1 and f not in declared else "public"
    return out


def _ground(doc: dict):
    return [
        (a["agent"], a["name"], frozenset(a.get("pre", [])), frozenset(a.get("add", [])),
         frozenset(a.get("del", [])), a.get("cost", 1))
        for a in doc["actions"]
    ]


def _succ(state: frozenset, act) -> frozenset:
    _, _, _, add, dele, _ = act
    return (state - dele) | add


def bfs_plan(doc: dict, limit: int = 200_000):
    """Shortest plan (fewest steps) over the global state space, or None."""
    actions = _ground(doc)
    init = frozenset(doc["init"])
    goal = frozenset(doc["goal"])
    parent = {init: None}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        if goal <= s:
            plan = []
            while parent[s] is not None:
                s, step = parent[s]
                plan.append(step)
            return plan[::-1]
        for act in actions:
            if act[2] <= s:
                t = _succ(s, act)
                if t not in parent:
                    parent[t] = (s, (act[0], act[1]))
                    queue.append(t)
                    if len(parent) > limit:
                        raise RuntimeError("state space too large for the oracle")
    return None


def reachable_states(doc: dict) -> set[frozenset]:
    actions = _ground(doc)
    init = frozenset(doc["init"])
    seen = {init}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        for act in actions:
            if act[2] <= s:
                t = _succ(s, act)
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return seen


def reachable_public_projections(doc: dict) -> set[frozenset]:
    classes = classify(doc)
    public = {f for f, c in classes.items() if c == "public"}
    return {s & public for s in reachable_states(doc)}


def simulate(doc: dict, plan) -> tuple[bool, float]:
    """Replay ``plan`` (agent, action-name pairs); return (valid, cost)."""
    index = {(a[0], a[1]): a for a in _ground(doc)}
    s = frozenset(doc["init"])
    cost = 0.0
    for step in plan:
        act = index.get(tuple(step))
        if act is None or not act[2] <= s:
            return False, cost
        s = _succ(s, act)
        cost += act[5]
    return frozenset(doc["goal"]) <= s, cost


def hadd_relaxed_reachable(doc: dict, agent: str) -> set[str]:
    """Facts reachable from init under delete relaxation with one agent's actions."""
    reach = set(doc["init"])
    acts = [a for a in _ground(doc) if a[0] == agent]
    changed = True
    while changed:
        changed = False
        for a in acts:
            if a[2] <= reach and not a[3] <= reach:
                reach |= a[3]
                changed = True
    return reach


# ---------------------------------------------------------------- novelty


def tuple_novelty(projection: frozenset, committed: list[frozenset], cap: int, n_public: int) -> int:
    """Brute-force outgoing novelty against the projections sent so far.

    A size-k tuple is new when no earlier sent projection contains it. The
    value is the smallest k <= cap with a new tuple; a projection that is empty
    or contained in one earlier projection has no new tuple of any size and
    scores ``n_public + 1``; anything else scores ``cap + 1``.
    """
    for k in range(1, cap + 1):
        for tup in combinations(sorted(projection), k):
            if not any(set(tup) <= c for c in committed):
                return k
    if not projection or any(projection <= c for c in committed):
        return n_public + 1
    return cap + 1


def replay_filter(stream, cap: int, n_public: int, threshold: int):
    """Decisions of a send-if-novel filter over ``(projection, h)`` items.

    Sent items are committed to their partition; others are dropped.
    """
    committed: dict[tuple, list[frozenset]] = {}
    out = []
    for projection, h in stream:
        part = committed.setdefault(h, [])
        w = tuple_novelty(projection, part, cap, n_public)
        sent = w <= threshold
        if sent:
            part.append(projection)
        out.append((w, sent))
    return out
