"""Deterministic JSON reports for solver and batch runs."""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping

REPORT_FIELDS = (
    "problem",
    "solved",
    "plan",
    "cost",
    "wall_ms",
    "expanded",
    "sent_messages",
    "withheld_peak",
    "config",
)
_SUMMED = ("expanded", "sent_messages")


def aggregate(problems: list[Mapping[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {
        "problems": len(problems),
        "solved": sum(1 for p in problems if p.get("solved")),
    }
    for key in _SUMMED:
        out[key] = sum(p.get(key) or 0 for p in problems)
    out["withheld_peak"] = max((p.get("withheld_peak") or 0 for p in problems), default=0)
    return out


def write_report(results: Iterable[Mapping[str, Any]], config: Mapping[str, Any] | None = None) -> bytes:
    problems = []
    for r in results:
        missing = [k for k in REPORT_FIELDS if k not in r]
        if missing:
            raise KeyError(f"result record lacks {missing}")
        problems.append(dict(r))
    doc = {
        "config": dict(config) if config is not None else {},
        "problems": problems,
        "aggregate": aggregate(problems),
    }
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def read_report(data: bytes | str) -> dict[str, Any]:
    doc = json.loads(data)
    if not isinstance(doc, dict) or "problems" not in doc:
        raise ValueError("not a report document")
    return doc
