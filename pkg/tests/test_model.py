import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, SUITE, suite_path
from mabfws.io import load_task
from mabfws.model import (
    ContractViolation,
    State,
    applicable,
    apply,
    build_problem,
    is_global_goal,
    public_projection,
    validate_plan,
)
from oracles import bfs_plan, classify, load_doc, reachable_states, simulate

pytestmark = pytest.mark.filterwarnings("ignore::mabfws.model.UnusedFactWarning")


def tiny(actions, init=("p",), goals=("q",), agents=("a", "b")):
    facts = {"p", "q", "r", "g", "f", *init, *goals}
    for a in actions:
        facts.update(a[2], a[3], a[4])
    return build_problem("tiny", agents, sorted(facts), actions, init, goals)


def own_state(problem, agent, names, flags=None):
    ids = frozenset(problem.fact_index[n] for n in names)
    n = problem.n_agents
    return State(agent, ids, tuple(None if j == agent else "tok" for j in range(n)), tuple(flags or [True] * n))


# ---------------------------------------------------------------- classification


def test_fact_used_by_one_agent_is_private():
    p = tiny([("a", "use-f", ["f"], ["q"], [], 1)])
    assert p.facts[p.fact_index["f"]].owner == 0


def test_fact_shared_between_agents_is_public():
    p = tiny([("a", "make-g", ["p"], ["g"], [], 1), ("b", "use-g", ["g"], ["q"], [], 1)])
    assert p.facts[p.fact_index["g"]].is_public


def test_unused_fact_defaults_public():
    p = tiny([("a", "x", ["p"], ["q"], [], 1)])
    assert p.facts[p.fact_index["r"]].is_public


def test_toy_logistics_matches_hand_table():
    table = json.loads((FIXTURES / "logistics3_toy_classes.json").read_text())
    p = load_task(suite_path("logistics3_toy"))
    got = {f.name: "public" if f.is_public else p.agents[f.owner] for f in p.facts}
    assert got == table


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_private_facts_only_touched_by_owner(path):
    p = load_task(path)
    for a in p.actions:
        for f in a.facts:
            owner = p.facts[f].owner
            assert owner is None or owner == a.agent


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_classification_agrees_with_oracle(path):
    p = load_task(path)
    expected = classify(load_doc(path))
    got = {f.name: "public" if f.is_public else p.agents[f.owner] for f in p.facts}
    assert got == expected


def test_undeclared_fact_is_rejected():
    with pytest.raises(KeyError, match="nope"):
        build_problem("x", ["a"], ["p"], [("a", "act", ["nope"], [], [], 1)], ["p"], ["p"])


# ---------------------------------------------------------------- applicable / apply


def _single():
    return tiny([("a", "act", ["p"], ["q"], ["p"], 1), ("a", "two", ["p", "r"], ["q"], [], 1),
                 ("a", "free", [], ["r"], [], 1), ("a", "idem", [], ["p"], [], 1)], agents=("a",))


def test_applicable_examples():
    p = _single()
    act, two, free = (p.action_index[("a", n)] for n in ("act", "two", "free"))
    s = own_state(p, 0, ["p", "q"])
    assert applicable(act, s)
    assert not applicable(two, s)
    assert applicable(free, own_state(p, 0, []))


def test_apply_examples():
    p = _single()
    act, idem = p.action_index[("a", "act")], p.action_index[("a", "idem")]
    out = apply(p, act, own_state(p, 0, ["p"]))
    assert out.local == {p.fact_index["q"]}
    s = own_state(p, 0, ["p", "q"])
    assert apply(p, idem, s).local == s.local


def test_apply_inapplicable_is_contract_violation():
    p = _single()
    with pytest.raises(ContractViolation):
        apply(p, p.action_index[("a", "two")], own_state(p, 0, ["p"]))


def test_chain4_reaches_hand_computed_state():
    p = load_task(suite_path("chain4"))
    s = own_state(p, 0, ["p0"])
    for k in range(4):
        s = apply(p, p.action_index[("solo", f"step{k}")], s)
    assert p.fact_names(s.local) == ["p4"]


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_private_actions_keep_public_projection(path):
    p = load_task(path)
    doc = load_doc(path)
    for facts in list(reachable_states(doc))[:200]:
        ids = frozenset(p.fact_index[n] for n in facts)
        for a in p.actions:
            if a.public:
                continue
            known = ids & p.known_facts[a.agent]
            s = State(a.agent, known, tuple(None if j == a.agent else "t" for j in range(p.n_agents)),
                      (True,) * p.n_agents)
            if applicable(a, s):
                child = apply(p, a, s)
                assert public_projection(p, child) == public_projection(p, s)
                assert child.local <= p.known_facts[a.agent]


# ---------------------------------------------------------------- projection


def test_projection_examples():
    p = load_task(suite_path("logistics3_toy"))
    t1 = p.agents.index("t1")
    private = ["at-t1-c1a", "in-pk1-t1"]
    assert public_projection(p, own_state(p, t1, private)).facts == frozenset()
    pub = ["at-pk1-c1a", "at-pk1-c2a"]
    assert public_projection(p, own_state(p, t1, pub)).facts == {p.fact_index[n] for n in pub}
    mixed = own_state(p, t1, ["at-t1-c1b", "at-pk1-c1a", "in-pk1-t1"])
    assert p.fact_names(public_projection(p, mixed).facts) == ["at-pk1-c1a"]


# ---------------------------------------------------------------- goal test


def test_goal_without_private_goals():
    p = tiny([("a", "mk", ["p"], ["q"], [], 1), ("b", "use", ["q"], ["g"], [], 1)])
    assert is_global_goal(p, own_state(p, 0, ["q"], [True, True]))


def test_goal_blocked_by_foreign_flag():
    p = tiny([("a", "mk", ["p"], ["q"], [], 1), ("b", "use", ["q"], ["g"], [], 1)])
    assert not is_global_goal(p, own_state(p, 0, ["q"], [True, False]))


def test_mbs_goal_matches_oracle():
    path = suite_path("mbs_private")
    p, doc = load_task(path), load_doc(path)
    goal = set(doc["goal"])
    for facts in reachable_states(doc):
        ids = frozenset(p.fact_index[n] for n in facts)
        flags = tuple(p.private_goals[j] <= ids for j in range(p.n_agents))
        for i in range(p.n_agents):
            s = State(i, ids & p.known_facts[i], tuple(None if j == i else "t" for j in range(2)), flags)
            assert is_global_goal(p, s) == (goal <= facts)


# ---------------------------------------------------------------- validate_plan


def test_empty_plan_on_satisfied_goal():
    p = load_task(suite_path("trivial"))
    check = validate_plan(p, [])
    assert check.valid and check.cost == 0


def test_inapplicable_step_reported_at_index():
    p = load_task(suite_path("chain4"))
    plan = [("solo", "step0"), ("solo", "step1"), ("solo", "step3")]
    check = validate_plan(p, plan)
    assert not check.valid and check.failed_at == 2


def test_fixture_plan_cost_is_sum_of_costs():
    path = suite_path("mbs_private")
    p = load_task(path)
    plan = [("ra", "ra-move-1-3"), ("ra", "ra-take-key"), ("ra", "ra-move-3-2"), ("ra", "ra-lamp"),
            ("ra", "ra-move-2-1"), ("ra", "ra-drop-key"), ("rb", "rb-take-key"),
            ("rb", "rb-move-1-2"), ("rb", "rb-open"), ("rb", "rb-report")]
    check = validate_plan(p, plan)
    assert check.valid
    assert check.cost == 3 + 9 * 1


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_validator_agrees_with_forward_simulation(path):
    p, doc = load_task(path), load_doc(path)
    plan = bfs_plan(doc)
    if plan is None:
        assert not validate_plan(p, []).valid
        return
    for cut in range(len(plan) + 1):
        ours = validate_plan(p, plan[:cut])
        theirs = simulate(doc, plan[:cut])
        assert ours.valid == theirs[0]
        if ours.valid:
            assert ours.cost == theirs[1]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 12), max_size=8))
def test_validator_agrees_on_random_plans(picks):
    path = suite_path("mbs_private")
    p, doc = load_task(path), load_doc(path)
    plan = [(p.agents[a.agent], a.name) for a in (p.actions[k] for k in picks)]
    ours = validate_plan(p, plan)
    assert ours.valid == simulate(doc, plan)[0]
