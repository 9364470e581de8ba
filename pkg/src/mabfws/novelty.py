"""Novelty tables for search guidance and for outgoing message filtering.

Novelty is computed up to a cap of 1 or 2: a state scores 1 if it makes some
atom true for the first time within its heuristic partition, 2 if it makes
some pair of atoms true together for the first time, and ``cap + 1`` otherwise.
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations
from typing import Collection, Hashable, Iterable

from .model import ContractViolation

HTuple = tuple


class _Partition:
    __slots__ = ("atoms", "pairs")

    def __init__(self) -> None:
        self.atoms: set[int] = set()
        self.pairs: set[tuple[int, int]] = set()


class NoveltyTable:
    """Seen-tuple record keyed by heuristic values.

    ``universe`` (anything supporting ``in``) restricts which atoms may be
    passed; ``None`` accepts any hashable atom.
    """

    def __init__(self, max_level: int = 2, universe: Collection | None = None):
        if max_level not in (1, 2):
            raise ValueError("max_level must be 1 or 2")
        self.max_level = max_level
        self.universe = universe
        self.beyond = max_level + 1
        self.partitions: dict[HTuple, _Partition] = {}
        self._intern: dict[Hashable, int] = {}

    def _ids(self, atoms: Iterable[Hashable]) -> list[int]:
        out = []
        for a in atoms:
            if self.universe is not None and a not in self.universe:
                raise ContractViolation(f"atom {a!r} is outside the table universe")
            i = self._intern.get(a)
            if i is None:
                i = self._intern[a] = len(self._intern)
            out.append(i)
        out.sort()
        return out

    def _novelty(self, ids: list[int], part: _Partition | None) -> int:
        if part is None:
            return 1 if ids else self.beyond
        if any(i not in part.atoms for i in ids):
            return 1
        if self.max_level == 2 and any(p not in part.pairs for p in combinations(ids, 2)):
            return 2
        return self.beyond

    def _mark(self, ids: list[int], h: HTuple) -> None:
        part = self.partitions.get(h)
        if part is None:
            part = self.partitions[h] = _Partition()
        part.atoms.update(ids)
        if self.max_level == 2:
            part.pairs.update(combinations(ids, 2))

    def novelty(self, atoms: Iterable[Hashable], h: HTuple = ()) -> int:
        ids = self._ids(atoms)
        return self._novelty(ids, self.partitions.get(h))

    def evaluate_and_insert(self, atoms: Iterable[Hashable], h: HTuple = ()) -> int:
        ids = self._ids(atoms)
        value = self._novelty(ids, self.partitions.get(h))
        self._mark(ids, h)
        return value


class OutgoingNoveltyTable:
    """Novelty over the public part of previously transmitted states.

    Probing does not change the table; only :meth:`commit` (called when the
    state is actually sent) does. A probe whose projection is covered by a
    single earlier sent projection has no new tuple of any size and scores
    ``n_public + 1``.
    """

    def __init__(self, max_level: int, public_facts: Collection[int]):
        self.table = NoveltyTable(max_level, frozenset(public_facts))
        self.sentinel = len(public_facts) + 1
        self._sent: dict[HTuple, list[frozenset[int]]] = {}
        self._pending: Counter = Counter()

    @property
    def max_level(self) -> int:
        return self.table.max_level

    def _covered(self, projection: frozenset[int], h: HTuple) -> bool:
        return any(projection <= s for s in self._sent.get(h, ()))

    def probe(self, projection: frozenset[int], h: HTuple = ()) -> int:
        projection = frozenset(projection)
        value = self.table.novelty(projection, h)
        if value > self.max_level and (not projection or self._covered(projection, h)):
            value = self.sentinel
        self._pending[(h, projection)] += 1
        return value

    def commit(self, projection: frozenset[int], h: HTuple = ()) -> None:
        key = (h, frozenset(projection))
        if self._pending[key] <= 0:
            del self._pending[key]
            raise ContractViolation("commit of a projection that was never probed")
        self._pending[key] -= 1
        if not self._pending[key]:
            del self._pending[key]
        self.table.evaluate_and_insert(key[1], h)
        self._sent.setdefault(h, []).append(key[1])

    def discard(self, projection: frozenset[int], h: HTuple = ()) -> None:
        key = (h, frozenset(projection))
        if self._pending[key] > 0:
            self._pending[key] -= 1
        if self._pending[key] <= 0:
            del self._pending[key]
