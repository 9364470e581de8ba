"""Canonical JSON task documents."""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from ..model import Problem, build_problem


class TaskFormatError(ValueError):
    """Raised for documents that violate the task schema."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


_names = {"type": "array", "items": {"type": "string"}}

TASK_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["name", "agents", "facts", "init", "goal", "actions"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "agents": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "facts": _names,
        "init": _names,
        "goal": _names,
        "public": _names,
        "actions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["agent", "name"],
                "additionalProperties": False,
                "properties": {
                    "agent": {"type": "string"},
                    "name": {"type": "string"},
                    "pre": _names,
                    "add": _names,
                    "del": _names,
                    "cost": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}

_validator = jsonschema.Draft7Validator(TASK_SCHEMA)


def check_document(doc: Any) -> None:
    """Validate structure and cross-references; raise :class:`TaskFormatError`."""
    err = jsonschema.exceptions.best_match(_validator.iter_errors(doc))
    if err is not None:
        raise TaskFormatError(err.message, err.json_path)
    facts = set(doc["facts"])
    agents = set(doc["agents"])
    if len(agents) != len(doc["agents"]):
        raise TaskFormatError("duplicate agent name", "$.agents")
    for key in ("init", "goal", "public"):
        for i, f in enumerate(doc.get(key, [])):
            if f not in facts:
                raise TaskFormatError(f"undeclared fact {f!r}", f"$.{key}[{i}]")
    for k, act in enumerate(doc["actions"]):
        if act["agent"] not in agents:
            raise TaskFormatError(f"undeclared agent {act['agent']!r}", f"$.actions[{k}].agent")
        for key in ("pre", "add", "del"):
            for i, f in enumerate(act.get(key, [])):
                if f not in facts:
                    raise TaskFormatError(f"undeclared fact {f!r}", f"$.actions[{k}].{key}[{i}]")


def problem_from_document(doc: dict[str, Any]) -> Problem:
    check_document(doc)
    return build_problem(
        doc["name"],
        doc["agents"],
        doc["facts"],
        [
            (a["agent"], a["name"], a.get("pre", []), a.get("add", []), a.get("del", []), a.get("cost", 1))
            for a in doc["actions"]
        ],
        doc["init"],
        doc["goal"],
        doc.get("public", []),
    )


def parse_task(data: bytes | str) -> Problem:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TaskFormatError(f"invalid JSON: {exc}") from exc
    return problem_from_document(doc)


def load_task(path) -> Problem:
    with open(path, "rb") as fh:
        return parse_task(fh.read())


def task_document(problem: Problem) -> dict[str, Any]:
    names = problem.fact_names
    doc: dict[str, Any] = {
        "name": problem.name,
        "agents": list(problem.agents),
        "facts": [f.name for f in problem.facts],
        "init": names(problem.init),
        "goal": names(problem.goals),
        "actions": [
            {
                "agent": problem.agents[a.agent],
                "name": a.name,
                "pre": names(a.pre),
                "add": names(a.add),
                "del": names(a.delete),
                "cost": a.cost,
            }
            for a in problem.actions
        ],
    }
    if problem.declared_public:
        doc["public"] = names(problem.declared_public)
    return doc


def dump_document(doc: dict[str, Any]) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def serialize_task(problem: Problem) -> bytes:
    return dump_document(task_document(problem))
