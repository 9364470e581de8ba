import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PDDL, SUITE, suite_path
from mabfws.io import (
    PddlError,
    TaskFormatError,
    import_pddl,
    load_task,
    parse_task,
    read_report,
    serialize_task,
    task_document,
    write_report,
)
from mabfws.io.report import REPORT_FIELDS
from mabfws.model import build_problem


def minimal_doc(**over):
    doc = {
        "name": "m",
        "agents": ["a"],
        "facts": ["p", "q"],
        "init": ["p"],
        "goal": ["q"],
        "actions": [{"agent": "a", "name": "go", "pre": ["p"], "add": ["q"], "del": ["p"]}],
    }
    doc.update(over)
    return doc


# ---------------------------------------------------------------- task documents


def test_minimal_document():
    p = parse_task(json.dumps(minimal_doc()))
    assert len(p.facts) == 2
    assert p.actions[0].cost == 1.0


def test_goal_fact_not_declared_is_named():
    with pytest.raises(TaskFormatError, match="'zz'") as info:
        parse_task(json.dumps(minimal_doc(goal=["zz"])))
    assert info.value.path == "$.goal[0]"


def test_schema_error_carries_json_path():
    doc = minimal_doc()
    doc["actions"][0]["cost"] = -1
    with pytest.raises(TaskFormatError) as info:
        parse_task(json.dumps(doc))
    assert info.value.path == "$.actions[0].cost"


def test_undeclared_agent_is_named():
    doc = minimal_doc()
    doc["actions"][0]["agent"] = "ghost"
    with pytest.raises(TaskFormatError, match="ghost"):
        parse_task(json.dumps(doc))


def test_invalid_json():
    with pytest.raises(TaskFormatError):
        parse_task(b"{not json")


def test_logistics2_action_counts():
    path = suite_path("logistics2")
    doc = json.loads(path.read_text())
    p = load_task(path)
    assert p.n_agents == 2
    for i, name in enumerate(p.agents):
        assert len(p.agent_actions[i]) == sum(1 for a in doc["actions"] if a["agent"] == name)


@pytest.mark.parametrize("path", SUITE, ids=lambda p: p.stem)
def test_round_trip(path):
    p = load_task(path)
    again = parse_task(serialize_task(p))
    assert again == p
    assert serialize_task(again) == serialize_task(p)


_names = st.sampled_from(["f0", "f1", "f2", "f3", "f4", "f5"])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["x", "y"]),
            st.frozensets(_names, max_size=3),
            st.frozensets(_names, max_size=3),
            st.frozensets(_names, max_size=3),
            st.integers(0, 3),
        ),
        min_size=1,
        max_size=6,
    ),
    st.frozensets(_names, max_size=4),
)
def test_round_trip_random(actions, init):
    import warnings

    acts = [(ag, f"act{k}", sorted(pre), sorted(add), sorted(dele), c) for k, (ag, pre, add, dele, c) in enumerate(actions)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = build_problem("r", ["x", "y"], [f"f{i}" for i in range(6)], acts, sorted(init), ["f0"])
        assert parse_task(serialize_task(p)) == p
        assert task_document(parse_task(serialize_task(p))) == task_document(p)


# ---------------------------------------------------------------- PDDL import


def _pddl_pair():
    return (PDDL / "blocks2-domain.pddl").read_text(), (PDDL / "blocks2-problem.pddl").read_text()


def test_blocks_matches_golden():
    domain, problem = _pddl_pair()
    doc = import_pddl(domain, problem, "arm")
    golden = json.loads((PDDL / "blocks2.golden.json").read_text())
    assert doc == golden


def test_import_is_deterministic_and_reparses():
    domain, problem = _pddl_pair()
    a = import_pddl(domain, problem, "arm")
    b = import_pddl(domain.encode(), problem.encode(), "arm")
    assert a == b
    parse_task(json.dumps(a))


def test_disjunctive_requirement_rejected():
    domain = """(define (domain d) (:requirements :strips :disjunctive-preconditions)
      (:predicates (p)) (:action a :parameters () :precondition (p) :effect (p)))"""
    problem = "(define (problem q) (:domain d) (:init (p)) (:goal (p)))"
    with pytest.raises(PddlError, match="disjunctive"):
        import_pddl(domain, problem, "agent")


def test_negative_precondition_rejected_with_line():
    domain = """(define (domain d) (:requirements :strips :typing)
      (:types agent)
      (:predicates (p ?a - agent))
      (:action a :parameters (?a - agent)
        :precondition (not (p ?a))
        :effect (p ?a)))"""
    problem = "(define (problem q) (:domain d) (:objects r - agent) (:init) (:goal (p r)))"
    with pytest.raises(PddlError) as info:
        import_pddl(domain, problem, "agent")
    assert info.value.line == 5


def test_grounding_count_is_product_of_type_sizes():
    domain = """(define (domain d) (:requirements :strips :typing)
      (:types agent loc)
      (:predicates (at ?a - agent ?l - loc) (seen ?a - agent ?b - agent ?l - loc))
      (:action look :parameters (?a - agent ?b - agent ?l - loc)
        :precondition (at ?a ?l)
        :effect (seen ?a ?b ?l)))"""
    problem = """(define (problem q) (:domain d)
      (:objects r1 r2 - agent l1 l2 l3 - loc)
      (:init (at r1 l1)) (:goal (at r1 l1)))"""
    doc = import_pddl(domain, problem, "agent")
    assert len(doc["actions"]) == 2 * 2 * 3
    assert doc["agents"] == ["r1", "r2"]


def test_unknown_predicate_in_problem():
    domain, _ = _pddl_pair()
    problem = "(define (problem q) (:domain blocks2) (:init (flying)) (:goal (flying)))"
    with pytest.raises(PddlError, match="flying"):
        import_pddl(domain, problem, "arm")


def test_unbalanced_parentheses():
    domain, problem = _pddl_pair()
    with pytest.raises(PddlError):
        import_pddl(domain[:-3], problem, "arm")


# ---------------------------------------------------------------- reports


def _row(name, solved=True, expanded=10, sent=3):
    return {
        "problem": name,
        "solved": solved,
        "plan": [["a", "go"]] if solved else None,
        "cost": 1.0 if solved else None,
        "wall_ms": 2.5,
        "expanded": expanded,
        "sent_messages": sent,
        "withheld_peak": 1,
        "config": {},
    }


def test_empty_report():
    doc = read_report(write_report([]))
    assert doc["problems"] == []
    assert doc["aggregate"]["problems"] == 0


def test_single_problem_report_has_fields():
    doc = read_report(write_report([_row("p1")]))
    row = doc["problems"][0]
    for key in ("plan", "cost", "sent_messages", "expanded"):
        assert row[key] is not None
    assert set(REPORT_FIELDS) <= set(row)


def test_aggregate_is_additive():
    rows = [_row("a", expanded=5, sent=1), _row("b", False, 7, 2), _row("c", expanded=11, sent=4)]
    agg = read_report(write_report(rows))["aggregate"]
    assert agg["expanded"] == 23
    assert agg["sent_messages"] == 7
    assert agg["solved"] == 2


def test_report_missing_field():
    row = _row("a")
    del row["wall_ms"]
    with pytest.raises(KeyError, match="wall_ms"):
        write_report([row])


def test_report_is_canonical_bytes():
    rows = [_row("a"), _row("b")]
    assert write_report(rows, {"z": 1, "a": 2}) == write_report(rows, {"a": 2, "z": 1})
