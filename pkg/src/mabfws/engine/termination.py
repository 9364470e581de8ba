"""Coordinator-side detection of global search exhaustion."""

from __future__ import annotations

from enum import Enum
from typing import Sequence

from ..filtering import Status


class Verdict(str, Enum):
    CONTINUE = "continue"
    FAIL_EXHAUSTED = "fail_exhausted"


def quiescent(statuses: Sequence[Status], in_flight: int) -> bool:
    return in_flight == 0 and all(Status(s) is Status.EMPTY for s in statuses)


class TerminationDetector:
    """Two-phase exhaustion check.

    The first quiet observation (every agent EMPTY, nothing in flight) only
    records a snapshot; exhaustion is declared when the next observation is
    quiet too and neither the status vector nor the transport's send counter
    moved in between.
    """

    def __init__(self) -> None:
        self._candidate: tuple | None = None

    def observe(self, statuses: Sequence[Status], in_flight: int, sent_total: int) -> Verdict:
        if not quiescent(statuses, in_flight):
            self._candidate = None
            return Verdict.CONTINUE
        snapshot = (tuple(Status(s) for s in statuses), sent_total)
        if self._candidate == snapshot:
            return Verdict.FAIL_EXHAUSTED
        self._candidate = snapshot
        return Verdict.CONTINUE


def detect_global_termination(
    statuses: Sequence[Status],
    in_flight: int,
    confirm_statuses: Sequence[Status] | None = None,
    confirm_in_flight: int | None = None,
) -> Verdict:
    """Stateless form: a first observation plus its confirmation round."""
    detector = TerminationDetector()
    detector.observe(statuses, in_flight, 0)
    if confirm_statuses is None:
        confirm_statuses = statuses
    if confirm_in_flight is None:
        confirm_in_flight = in_flight
    return detector.observe(confirm_statuses, confirm_in_flight, 0)
