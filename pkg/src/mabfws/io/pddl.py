"""Importer for a small STRIPS subset of PDDL with agent factorization.

Supported: ``:strips`` and ``:typing`` requirements, typed objects and
constants, conjunctive positive preconditions and conjunctive literal effects.
Everything else is rejected with the offending construct and its line.

Each ground action belongs to the object bound to its first parameter whose
type is (a subtype of) the agent type.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Union

SUPPORTED_REQUIREMENTS = {":strips", ":typing"}


class PddlError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line


@dataclass(frozen=True)
class Tok:
    text: str
    line: int


@dataclass
class SExpr:
    items: list["Node"]
    line: int


Node = Union[Tok, SExpr]


def tokenize(text: str) -> list[Tok]:
    out: list[Tok] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        for piece in line.replace("(", " ( ").replace(")", " ) ").split():
            out.append(Tok(piece.lower(), lineno))
    return out


def parse_sexpr(text: str) -> SExpr:
    toks = tokenize(text)
    stack: list[SExpr] = []
    root: SExpr | None = None
    for t in toks:
        if t.text == "(":
            stack.append(SExpr([], t.line))
        elif t.text == ")":
            if not stack:
                raise PddlError("unbalanced ')'", t.line)
            done = stack.pop()
            if stack:
                stack[-1].items.append(done)
            elif root is None:
                root = done
            else:
                raise PddlError("trailing content after definition", t.line)
        else:
            if not stack:
                raise PddlError(f"unexpected token {t.text!r}", t.line)
            stack[-1].items.append(t)
    if stack:
        raise PddlError("unbalanced '('", stack[-1].line)
    if root is None:
        raise PddlError("empty input")
    return root


def _text(node: Node, what: str) -> str:
    if not isinstance(node, Tok):
        raise PddlError(f"expected {what}", node.line)
    return node.text


def _line(node: Node) -> int:
    return node.line


def _typed_list(items: list[Node]) -> list[tuple[str, str, int]]:
    """Parse ``a b - t c`` into ``[(a, t), (b, t), (c, object)]``."""
    out: list[tuple[str, str, int]] = []
    pending: list[Tok] = []
    i = 0
    while i < len(items):
        node = items[i]
        name = _text(node, "name")
        if name == "-":
            if i + 1 >= len(items):
                raise PddlError("missing type after '-'", _line(node))
            tnode = items[i + 1]
            if isinstance(tnode, SExpr):
                raise PddlError("unsupported construct 'either' type", tnode.line)
            out.extend((p.text, tnode.text, p.line) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(node)  # type: ignore[arg-type]
        i += 1
    out.extend((p.text, "object", p.line) for p in pending)
    return out


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...]

    def ground(self, binding: dict[str, str]) -> str:
        args = [binding.get(a, a) for a in self.args]
        return "(" + " ".join([self.predicate, *args]) + ")"


@dataclass
class Schema:
    name: str
    params: list[tuple[str, str]]
    pre: list[Atom]
    add: list[Atom]
    delete: list[Atom]
    line: int


@dataclass
class PddlSubsetAst:
    name: str = ""
    requirements: list[str] = field(default_factory=list)
    parents: dict[str, str] = field(default_factory=dict)
    constants: list[tuple[str, str]] = field(default_factory=list)
    predicates: dict[str, int] = field(default_factory=dict)
    schemas: list[Schema] = field(default_factory=list)


@dataclass
class ProblemAst:
    name: str = ""
    domain: str = ""
    objects: list[tuple[str, str]] = field(default_factory=list)
    init: list[Atom] = field(default_factory=list)
    goal: list[Atom] = field(default_factory=list)


_REJECTED = {"or", "not", "imply", "exists", "forall", "when", "=", "increase", "decrease"}


def _atom(node: Node, predicates: dict[str, int] | None) -> Atom:
    if not isinstance(node, SExpr) or not node.items:
        raise PddlError("expected an atom", _line(node))
    head = _text(node.items[0], "predicate name")
    if head in _REJECTED:
        raise PddlError(f"unsupported construct '{head}'", node.line)
    args = tuple(_text(x, "argument") for x in node.items[1:])
    if predicates is not None:
        if head not in predicates:
            raise PddlError(f"unknown predicate {head!r}", node.line)
        if predicates[head] != len(args):
            raise PddlError(f"wrong arity for {head!r}", node.line)
    return Atom(head, args)


def _conjunction(node: Node, predicates: dict[str, int] | None) -> list[Atom]:
    if not isinstance(node, SExpr):
        raise PddlError("expected a formula", _line(node))
    if not node.items:
        return []
    head = _text(node.items[0], "formula") if isinstance(node.items[0], Tok) else None
    if head == "and":
        out: list[Atom] = []
        for sub in node.items[1:]:
            out.extend(_conjunction(sub, predicates))
        return out
    return [_atom(node, predicates)]


def _effects(node: Node, predicates: dict[str, int]) -> tuple[list[Atom], list[Atom]]:
    if not isinstance(node, SExpr):
        raise PddlError("expected an effect", _line(node))
    if not node.items:
        return [], []
    head = _text(node.items[0], "effect") if isinstance(node.items[0], Tok) else None
    if head == "and":
        add: list[Atom] = []
        dele: list[Atom] = []
        for sub in node.items[1:]:
            a, d = _effects(sub, predicates)
            add.extend(a)
            dele.extend(d)
        return add, dele
    if head == "not":
        if len(node.items) != 2:
            raise PddlError("malformed negative effect", node.line)
        return [], [_atom(node.items[1], predicates)]
    return [_atom(node, predicates)], []


def _section(node: Node) -> tuple[str, SExpr]:
    if not isinstance(node, SExpr) or not node.items:
        raise PddlError("expected a section", _line(node))
    return _text(node.items[0], "section keyword"), node


def parse_domain(text: str) -> PddlSubsetAst:
    root = parse_sexpr(text)
    if not root.items or _text(root.items[0], "define") != "define":
        raise PddlError("expected (define ...)", root.line)
    ast = PddlSubsetAst()
    for node in root.items[1:]:
        key, sec = _section(node)
        body = sec.items[1:]
        if key == "domain":
            ast.name = _text(body[0], "domain name")
        elif key == ":requirements":
            for r in body:
                req = _text(r, "requirement")
                if req not in SUPPORTED_REQUIREMENTS:
                    raise PddlError(f"unsupported construct requirement '{req}'", _line(r))
                ast.requirements.append(req)
        elif key == ":types":
            for name, parent, _ in _typed_list(body):
                ast.parents[name] = parent
        elif key == ":constants":
            ast.constants.extend((n, t) for n, t, _ in _typed_list(body))
        elif key == ":predicates":
            for p in body:
                if not isinstance(p, SExpr) or not p.items:
                    raise PddlError("malformed predicate", _line(p))
                ast.predicates[_text(p.items[0], "predicate")] = len(_typed_list(p.items[1:]))
        elif key == ":action":
            ast.schemas.append(_schema(sec, ast.predicates))
        else:
            raise PddlError(f"unsupported construct '{key}'", sec.line)
    return ast


def _schema(sec: SExpr, predicates: dict[str, int]) -> Schema:
    name = _text(sec.items[1], "action name")
    fields: dict[str, Node] = {}
    items = sec.items[2:]
    for i in range(0, len(items), 2):
        key = _text(items[i], "action field")
        if i + 1 >= len(items):
            raise PddlError(f"missing value for {key}", _line(items[i]))
        fields[key] = items[i + 1]
    for key in fields:
        if key not in (":parameters", ":precondition", ":effect"):
            raise PddlError(f"unsupported construct '{key}'", sec.line)
    params_node = fields.get(":parameters", SExpr([], sec.line))
    if not isinstance(params_node, SExpr):
        raise PddlError("malformed parameters", _line(params_node))
    params = [(n, t) for n, t, _ in _typed_list(params_node.items)]
    pre = _conjunction(fields.get(":precondition", SExpr([], sec.line)), predicates)
    add, dele = _effects(fields.get(":effect", SExpr([], sec.line)), predicates)
    return Schema(name, params, pre, add, dele, sec.line)


def parse_problem(text: str) -> ProblemAst:
    root = parse_sexpr(text)
    if not root.items or _text(root.items[0], "define") != "define":
        raise PddlError("expected (define ...)", root.line)
    ast = ProblemAst()
    for node in root.items[1:]:
        key, sec = _section(node)
        body = sec.items[1:]
        if key == "problem":
            ast.name = _text(body[0], "problem name")
        elif key == ":domain":
            ast.domain = _text(body[0], "domain name")
        elif key == ":requirements":
            for r in body:
                req = _text(r, "requirement")
                if req not in SUPPORTED_REQUIREMENTS:
                    raise PddlError(f"unsupported construct requirement '{req}'", _line(r))
        elif key == ":objects":
            ast.objects.extend((n, t) for n, t, _ in _typed_list(body))
        elif key == ":init":
            ast.init.extend(_atom(x, None) for x in body)
        elif key == ":goal":
            if len(body) != 1:
                raise PddlError("malformed goal", sec.line)
            ast.goal.extend(_conjunction(body[0], None))
        else:
            raise PddlError(f"unsupported construct '{key}'", sec.line)
    return ast


def _is_subtype(t: str, ancestor: str, parents: dict[str, str]) -> bool:
    seen = set()
    while t not in seen:
        if t == ancestor:
            return True
        seen.add(t)
        if t not in parents:
            return ancestor == "object"
        t = parents[t]
    return False


def import_pddl(
    domain: bytes | str,
    problem: bytes | str,
    agent_type: str,
    prune_static: bool = False,
) -> dict[str, Any]:
    """Ground a PDDL domain/problem pair into a task document."""
    if isinstance(domain, bytes):
        domain = domain.decode("utf-8")
    if isinstance(problem, bytes):
        problem = problem.decode("utf-8")
    dom = parse_domain(domain)
    prob = parse_problem(problem)
    for atom in prob.init + prob.goal:
        if atom.predicate not in dom.predicates:
            raise PddlError(f"unknown predicate {atom.predicate!r}")
    agent_type = agent_type.lower()
    objects = sorted(set(dom.constants) | set(prob.objects))
    obj_type = {}
    for name, t in objects:
        if name in obj_type and obj_type[name] != t:
            raise PddlError(f"object {name!r} declared with two types")
        obj_type[name] = t

    def of_type(t: str) -> list[str]:
        return sorted(n for n, ot in obj_type.items() if _is_subtype(ot, t, dom.parents))

    agents = of_type(agent_type)
    if not agents:
        raise PddlError(f"no objects of agent type {agent_type!r}")

    static_preds = set(dom.predicates)
    for s in dom.schemas:
        for atom in s.add + s.delete:
            static_preds.discard(atom.predicate)
    init = {a.ground({}) for a in prob.init}

    actions = []
    for s in dom.schemas:
        agent_pos = next(
            (i for i, (_, t) in enumerate(s.params) if _is_subtype(t, agent_type, dom.parents)),
            None,
        )
        if agent_pos is None:
            raise PddlError(f"action {s.name!r} has no parameter of agent type {agent_type!r}", s.line)
        domains = [of_type(t) for _, t in s.params]
        for values in itertools.product(*domains):
            binding = {p: v for (p, _), v in zip(s.params, values)}
            pre = sorted({a.ground(binding) for a in s.pre})
            if prune_static and any(
                a.predicate in static_preds and a.ground(binding) not in init for a in s.pre
            ):
                continue
            add = sorted({a.ground(binding) for a in s.add})
            dele = sorted({a.ground(binding) for a in s.delete} - set(add))
            actions.append(
                {
                    "agent": values[agent_pos],
                    "name": "(" + " ".join([s.name, *values]) + ")",
                    "pre": pre,
                    "add": add,
                    "del": dele,
                    "cost": 1,
                }
            )

    goal = sorted({a.ground({}) for a in prob.goal})
    facts = set(init) | set(goal)
    for act in actions:
        facts.update(act["pre"], act["add"], act["del"])
    return {
        "name": prob.name,
        "agents": agents,
        "facts": sorted(facts),
        "init": sorted(init),
        "goal": goal,
        "actions": actions,
    }
