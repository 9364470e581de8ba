from .pddl import PddlError, PddlSubsetAst, import_pddl
from .report import read_report, write_report
from .task import (
    TaskFormatError,
    load_task,
    parse_task,
    problem_from_document,
    serialize_task,
    task_document,
)

__all__ = [
    "PddlError",
    "PddlSubsetAst",
    "TaskFormatError",
    "import_pddl",
    "load_task",
    "parse_task",
    "problem_from_document",
    "read_report",
    "serialize_task",
    "task_document",
    "write_report",
]
