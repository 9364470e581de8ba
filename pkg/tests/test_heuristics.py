import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SUITE, suite_path
from mabfws.heuristics import (
    GoalView,
    extract_relaxed_plan,
    full_goal_view,
    goal_count,
    public_goal_count,
    public_goal_view,
    root_counters,
    update_counters,
)
from mabfws.io import load_task
from mabfws.model import State, apply, applicable, build_problem, public_projection
from oracles import hadd_relaxed_reachable, load_doc


def state(problem, agent, names, flags=None):
    n = problem.n_agents
    ids = frozenset(problem.fact_index[x] for x in names)
    return State(agent, ids, tuple(None if j == agent else "t" for j in range(n)), tuple(flags or [True] * n))


# ---------------------------------------------------------------- goal count


def test_goal_count_all_true():
    view = GoalView(0, frozenset({1, 2}))
    assert goal_count(State(0, frozenset({1, 2, 3}), (None,), (True,)), view) == 0


def test_goal_count_three_goals_one_true():
    view = GoalView(0, frozenset({1, 2, 3}))
    assert goal_count(State(0, frozenset({2}), (None,), (True,)), view) == 2


@pytest.mark.parametrize(
    "names, flags, agent, expected",
    [
        # goals: ra-lamp-on (private to ra), rb-safe-open and job-done (private to rb)
        ([], [False, False], 0, 2),
        (["ra-lamp-on"], [True, False], 0, 1),
        (["ra-lamp-on"], [True, True], 0, 0),
        ([], [False, False], 1, 3),
        (["job-done"], [False, True], 1, 2),
        (["job-done", "rb-safe-open"], [False, True], 1, 1),
    ],
)
def test_goal_count_truth_table(names, flags, agent, expected):
    p = load_task(suite_path("mbs_private"))
    assert goal_count(state(p, agent, names, flags), full_goal_view(p, agent)) == expected


def test_public_view_ignores_private_goals():
    p = load_task(suite_path("mbs_private"))
    assert goal_count(state(p, 0, [], [False, False]), public_goal_view(p, 0)) == 0
    # "g" is public (made by a, used by b); "h" is private to b
    q = build_problem(
        "pub", ["a", "b"], ["s", "g", "h"],
        [("a", "make", ["s"], ["g"], [], 1), ("b", "use", ["g"], ["h"], [], 1)],
        ["s"], ["g", "h"],
    )
    s = state(q, 1, [], [False, False])
    assert goal_count(s, public_goal_view(q, 1)) == 1
    assert goal_count(s, full_goal_view(q, 1)) == 3
    assert public_goal_count(q, public_projection(q, s).facts) == 1


# ---------------------------------------------------------------- relaxed plan


def test_goal_true_in_init_gives_empty_set():
    p = load_task(suite_path("trivial"))
    assert extract_relaxed_plan(p, 0).facts == frozenset()


def test_single_action_goal():
    p = build_problem("one", ["a"], ["s", "g"], [("a", "reach", ["s"], ["g"], [], 1)], ["s"], ["g"])
    assert p.fact_names(extract_relaxed_plan(p, 0).facts) == ["g"]


def test_chain3_is_union_of_adds():
    p = load_task(suite_path("chain3"))
    assert p.fact_names(extract_relaxed_plan(p, 0).facts) == ["u", "v", "w"]


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_relaxed_set_within_own_reach(path):
    p, doc = load_task(path), load_doc(path)
    for i, name in enumerate(p.agents):
        r = extract_relaxed_plan(p, i)
        assert r.facts <= p.known_facts[i]
        assert set(p.fact_names(r.facts)) <= hadd_relaxed_reachable(doc, name)


# ---------------------------------------------------------------- counters


def test_empty_relaxed_set_keeps_counter_zero():
    p = load_task(suite_path("trivial"))
    relaxed = extract_relaxed_plan(p, 0)
    c = root_counters(state(p, 0, list(doc_init(p))), relaxed)
    for _ in range(3):
        c = update_counters(c, state(p, 0, list(doc_init(p))), relaxed)
    assert c.r == 0 and c.depth == 3


def doc_init(problem):
    return problem.fact_names(problem.init)


def test_one_new_relaxed_fact_increments():
    p = load_task(suite_path("chain3"))
    relaxed = extract_relaxed_plan(p, 0)
    c0 = root_counters(state(p, 0, ["s"]), relaxed)
    c1 = update_counters(c0, state(p, 0, ["s", "u"]), relaxed)
    assert (c0.r, c1.r) == (0, 1)


def test_chain4_counter_trace():
    p = load_task(suite_path("chain4"))
    relaxed = extract_relaxed_plan(p, 0)
    s = state(p, 0, ["p0"])
    c = root_counters(s, relaxed)
    trace = [c.r]
    for k in range(4):
        s = apply(p, p.action_index[("solo", f"step{k}")], s)
        c = update_counters(c, s, relaxed)
        trace.append(c.r)
    assert trace == [0, 1, 2, 3, 4]
    assert c.depth == 4


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=10))
def test_counter_monotone_along_paths(picks):
    p = load_task(suite_path("mbs_private"))
    agent = 0
    relaxed = extract_relaxed_plan(p, agent)
    s = state(p, agent, [n for n in doc_init(p) if p.fact_index[n] in p.known_facts[agent]], [False, False])
    c = root_counters(s, relaxed)
    for k in picks:
        acts = p.agent_actions[agent]
        a = acts[k % len(acts)]
        if not applicable(a, s):
            continue
        s = apply(p, a, s)
        nxt = update_counters(c, s, relaxed, a.public)
        assert nxt.achieved >= c.achieved and nxt.depth == c.depth + 1
        assert 0 <= goal_count(s, full_goal_view(p, agent)) <= full_goal_view(p, agent).size
        c = nxt


def test_public_view_depends_on_projection_only():
    p = load_task(suite_path("mbs_private"))
    a = state(p, 1, ["key-at-door", "rb-at-1"], [False, False])
    b = state(p, 1, ["key-at-door", "rb-at-2", "rb-has-key"], [True, True])
    assert public_projection(p, a) == public_projection(p, b)
    view = public_goal_view(p, 1)
    assert goal_count(a, view) == goal_count(b, view)
