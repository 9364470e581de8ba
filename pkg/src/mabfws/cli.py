"""Command-line entry point: ``mabfws solve|bench|import-pddl|score``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .engine import SolverConfig, solve
from .filtering import FilterPolicy, NumWaiting, NumWithheld, WhoSend
from .harness import RunConfig, ipc_scores, run_batch
from .io import PddlError, TaskFormatError, import_pddl, load_task, read_report
from .io.task import dump_document
from .net.delay import DelayModel

DEFAULTS = {"w_out": "1", "num_waiting": "half", "who_send": "all", "num_withheld": "group"}


def _policy_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("message filter")
    g.add_argument("--w-out", choices=["off", "1", "2"], default=None)
    g.add_argument("--num-waiting", choices=[m.value for m in NumWaiting], default=None)
    g.add_argument("--who-send", choices=[m.value for m in WhoSend], default=None)
    g.add_argument("--num-withheld", choices=[m.value for m in NumWithheld], default=None)
    g.add_argument("--secure", action="store_true", help="never resend a public projection")
    g.add_argument("--strong-privacy", action="store_true", help="public-only heuristics, no withholding")
    r = p.add_argument_group("run")
    r.add_argument("--mode", choices=["sim", "threads"], default="sim")
    r.add_argument("--delay-mean-ms", type=float, default=0.0)
    r.add_argument("--delay-stdev-ratio", type=float, default=0.10)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--time-limit-s", type=float, default=300.0)


def policy_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> FilterPolicy:
    if args.strong_privacy:
        if args.num_withheld not in (None, NumWithheld.NONE.value):
            parser.error("--strong-privacy withholds nothing; drop --num-withheld")
        if args.w_out == "off":
            parser.error("--strong-privacy needs --w-out 1 or 2")
        for flag in ("num_waiting", "who_send"):
            if getattr(args, flag) is not None:
                parser.error(f"--{flag.replace('_', '-')} has no effect under --strong-privacy")
        return FilterPolicy.strong_privacy(int(args.w_out or 1), args.secure)
    vals = {k: getattr(args, k) or v for k, v in DEFAULTS.items()}
    return FilterPolicy(
        w_out=None if vals["w_out"] == "off" else int(vals["w_out"]),
        num_waiting=NumWaiting(vals["num_waiting"]),
        who_send=WhoSend(vals["who_send"]),
        num_withheld=NumWithheld(vals["num_withheld"]),
        secure_check=args.secure,
    )


def _check_run_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if args.time_limit_s <= 0:
        parser.error("--time-limit-s must be positive")
    if args.delay_mean_ms < 0 or args.delay_stdev_ratio <= 0:
        parser.error("delay mean must be >= 0 and stdev ratio > 0")
    if getattr(args, "runs", 1) < 1 or getattr(args, "runs", 1) % 2 == 0:
        parser.error("--runs must be a positive odd number")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mabfws", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one task and print the plan")
    s.add_argument("task")
    _policy_args(s)
    s.add_argument("--json", action="store_true", help="print the report row as JSON")

    b = sub.add_parser("bench", help="run a batch and write a report")
    b.add_argument("tasks", nargs="+")
    _policy_args(b)
    b.add_argument("--runs", type=int, default=5)
    b.add_argument("--output", "-o", default=None)

    i = sub.add_parser("import-pddl", help="convert a PDDL domain/problem pair to a task file")
    i.add_argument("domain")
    i.add_argument("problem")
    i.add_argument("--agent-type", required=True)
    i.add_argument("--prune-static", action="store_true")
    i.add_argument("--output", "-o", default=None)

    c = sub.add_parser("score", help="compare reports with IPC quality and time scores")
    c.add_argument("reports", nargs="+")
    return parser


def _cmd_solve(args, parser) -> int:
    policy = policy_from_args(args, parser)
    try:
        problem = load_task(args.task)
    except (OSError, TaskFormatError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = SolverConfig(
        policy=policy,
        mode=args.mode,
        delay=DelayModel(args.delay_mean_ms * 1000.0, args.delay_stdev_ratio, args.seed),
        time_limit_s=args.time_limit_s,
    )
    result = solve(problem, config)
    if args.json:
        print(json.dumps(result.record(problem.name, config.to_dict()), sort_keys=True))
    else:
        print(f"outcome: {result.outcome.value}")
        for agent, action in result.plan or ():
            print(f"  {agent}: {action}")
        if result.solved:
            print(f"cost: {result.cost:g}")
        if result.error:
            print(f"error: {result.error}")
        print(
            f"time_ms: {result.time_ms:.3f} expanded: {result.expanded} "
            f"sent_messages: {result.sent_messages} withheld_peak: {result.withheld_peak}"
        )
    return 0 if result.solved else 1


def _cmd_bench(args, parser) -> int:
    config = RunConfig(
        tasks=tuple(args.tasks),
        policy=policy_from_args(args, parser),
        mode=args.mode,
        delay_mean_ms=args.delay_mean_ms,
        delay_stdev_ratio=args.delay_stdev_ratio,
        time_limit_s=args.time_limit_s,
        runs=args.runs,
        seed=args.seed,
        output=args.output,
    )
    board = run_batch(config)
    if not args.output:
        sys.stdout.buffer.write(board.report() + b"\n")
    print(json.dumps(board.aggregate(), sort_keys=True), file=sys.stderr)
    return 0


def _cmd_import(args, parser) -> int:
    try:
        doc = import_pddl(
            Path(args.domain).read_text(),
            Path(args.problem).read_text(),
            args.agent_type,
            prune_static=args.prune_static,
        )
    except (OSError, PddlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    data = dump_document(doc)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def _cmd_score(args, parser) -> int:
    if len(args.reports) < 2:
        parser.error("score needs at least two reports")
    results = {}
    for path in args.reports:
        doc = read_report(Path(path).read_bytes())
        key = Path(path).stem
        if key in results:
            key = path
        results[key] = {row["problem"]: row for row in doc["problems"]}
    try:
        scores = ipc_scores(results)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(scores, indent=2, sort_keys=True))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("solve", "bench"):
        _check_run_args(args, parser)
    handler = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "import-pddl": _cmd_import,
        "score": _cmd_score,
    }[args.command]
    return handler(args, parser)


if __name__ == "__main__":
    sys.exit(main())
