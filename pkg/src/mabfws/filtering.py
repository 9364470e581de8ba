"""Outgoing-novelty message filtering with withheld-state release policies."""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any, Iterable, Sequence

from .novelty import OutgoingNoveltyTable


class NumWaiting(str, Enum):
    ONE = "1"
    HALF = "half"
    ALL = "all"


class WhoSend(str, Enum):
    WAITING = "waiting"
    NOT_WAITING = "notwaiting"
    ALL = "all"


class NumWithheld(str, Enum):
    NONE = "none"
    ONE = "1"
    GROUP = "group"
    ALL = "all"


class OutgoingH(str, Enum):
    NONE = "none"
    GOALS_RELAXED = "gr"  # unachieved public goals, relaxed-plan facts in the projection


class Status(str, Enum):
    ACTIVE = "active"
    PARTIALLY_EMPTY = "partially_empty"
    EMPTY = "empty"

    @property
    def waiting(self) -> bool:
        return self is not Status.ACTIVE


class Decision(str, Enum):
    SENT = "sent"
    WITHHELD = "withheld"
    SUPPRESSED = "suppressed"


@dataclass(frozen=True)
class FilterPolicy:
    """Message filter configuration. ``w_out=None`` disables novelty filtering.

    The defaults are the configuration used for most experiments: threshold 1,
    release when at least half the agents wait, everybody releases, and the
    lowest-key group of withheld states is sent at a time.
    """

    w_out: int | None = 1
    num_waiting: NumWaiting = NumWaiting.HALF
    who_send: WhoSend = WhoSend.ALL
    num_withheld: NumWithheld = NumWithheld.GROUP
    secure_check: bool = False
    outgoing_h: OutgoingH = OutgoingH.GOALS_RELAXED

    def __post_init__(self) -> None:
        if self.w_out not in (None, 1, 2):
            raise ValueError("w_out must be None (off), 1 or 2")
        object.__setattr__(self, "num_waiting", NumWaiting(self.num_waiting))
        object.__setattr__(self, "who_send", WhoSend(self.who_send))
        object.__setattr__(self, "num_withheld", NumWithheld(self.num_withheld))
        object.__setattr__(self, "outgoing_h", OutgoingH(self.outgoing_h))

    @classmethod
    def strong_privacy(cls, w_out: int = 1, secure_check: bool = False) -> "FilterPolicy":
        return cls(
            w_out=w_out,
            num_withheld=NumWithheld.NONE,
            secure_check=secure_check,
            outgoing_h=OutgoingH.NONE,
        )

    @property
    def is_strong_privacy(self) -> bool:
        return (
            self.w_out in (1, 2)
            and self.num_withheld is NumWithheld.NONE
            and self.outgoing_h is OutgoingH.NONE
        )

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Enum):
                d[k] = v.value
        d["w_out"] = "off" if self.w_out is None else self.w_out
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FilterPolicy":
        d = dict(d)
        if d.get("w_out") == "off":
            d["w_out"] = None
        return cls(**d)

    def with_(self, **changes: Any) -> "FilterPolicy":
        return replace(self, **changes)


def release_threshold(n_agents: int, num_waiting: NumWaiting) -> int:
    if num_waiting is NumWaiting.ONE:
        return 1
    if num_waiting is NumWaiting.HALF:
        return math.ceil(n_agents / 2)
    return n_agents


def on_status_change(statuses: Sequence[Status], policy: FilterPolicy) -> frozenset[int]:
    """Agents that should release withheld states given the status vector.

    Empty when fewer agents than the threshold are waiting. When ``who_send``
    selects the non-waiting agents but every agent waits, the waiting agents
    release instead, otherwise withheld states could never leave.
    """
    if policy.num_withheld is NumWithheld.NONE:
        return frozenset()
    n = len(statuses)
    waiting = frozenset(i for i, s in enumerate(statuses) if Status(s).waiting)
    if len(waiting) < release_threshold(n, policy.num_waiting):
        return frozenset()
    if policy.who_send is WhoSend.WAITING:
        chosen = waiting
    elif policy.who_send is WhoSend.NOT_WAITING:
        chosen = frozenset(range(n)) - waiting
    else:
        chosen = frozenset(range(n))
    return chosen or waiting


@dataclass
class Outgoing:
    """A generated public state offered for transmission."""

    projection: frozenset[int]
    h: tuple = ()
    key: tuple = ()  # withheld ordering: (unachieved goals, -relaxed facts)
    node: int = -1
    novelty: int | None = None


class WithheldList:
    def __init__(self) -> None:
        self._heap: list[tuple[tuple, int, Outgoing]] = []
        self._count = 0
        self.peak = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, item: Outgoing) -> None:
        heapq.heappush(self._heap, (item.key, self._count, item))
        self._count += 1
        self.peak = max(self.peak, len(self._heap))

    def min_key(self) -> tuple | None:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Outgoing:
        return heapq.heappop(self._heap)[2]

    def items(self) -> list[Outgoing]:
        return [entry[2] for entry in sorted(self._heap)]


def select_release(withheld: WithheldList, mode: NumWithheld) -> list[Outgoing]:
    """Remove and return the entries to transmit under ``mode``."""
    if mode is NumWithheld.NONE or not len(withheld):
        return []
    if mode is NumWithheld.ONE:
        return [withheld.pop()]
    if mode is NumWithheld.GROUP:
        key = withheld.min_key()
        out = []
        while len(withheld) and withheld.min_key() == key:
            out.append(withheld.pop())
        return out
    out = []
    while len(withheld):
        out.append(withheld.pop())
    return out


class MessageFilter:
    """Per-agent send/withhold/suppress decisions."""

    def __init__(self, policy: FilterPolicy, public_facts: Iterable[int]):
        self.policy = policy
        public = frozenset(public_facts)
        self.table = (
            OutgoingNoveltyTable(policy.w_out, public) if policy.w_out is not None else None
        )
        self.withheld = WithheldList()
        self.sent_projections: set[frozenset[int]] = set()
        self.sent_log: list[frozenset[int]] = []
        self.decisions = {d: 0 for d in Decision}

    def _record(self, item: Outgoing, decision: Decision) -> Decision:
        self.decisions[decision] += 1
        return decision

    def _mark_sent(self, item: Outgoing) -> None:
        if self.table is not None:
            self.table.commit(item.projection, item.h)
        self.sent_projections.add(item.projection)
        self.sent_log.append(item.projection)

    def on_public_child(self, item: Outgoing) -> Decision:
        if self.policy.secure_check and item.projection in self.sent_projections:
            return self._record(item, Decision.SUPPRESSED)
        if self.table is None:
            self._mark_sent(item)
            return self._record(item, Decision.SENT)
        item.novelty = self.table.probe(item.projection, item.h)
        if item.novelty <= self.policy.w_out:
            self._mark_sent(item)
            return self._record(item, Decision.SENT)
        if self.policy.num_withheld is NumWithheld.NONE:
            self.table.discard(item.projection, item.h)
            return self._record(item, Decision.SUPPRESSED)
        self.withheld.push(item)
        return self._record(item, Decision.WITHHELD)

    def release(self) -> list[Outgoing]:
        """Pop withheld states per policy; return those that pass secure dedup."""
        out = []
        for item in select_release(self.withheld, self.policy.num_withheld):
            if self.policy.secure_check and item.projection in self.sent_projections:
                if self.table is not None:
                    self.table.discard(item.projection, item.h)
                self.decisions[Decision.SUPPRESSED] += 1
                continue
            self._mark_sent(item)
            self.decisions[Decision.SENT] += 1
            out.append(item)
        return out
