"""Transport abstraction and the deterministic virtual-time network."""

from __future__ import annotations

import heapq
import random
import threading
from collections import Counter, deque
from typing import Any

from .delay import DelayModel, sample_delay
from .envelope import Envelope, Kind


class TransportClosed(RuntimeError):
    pass


class Network:
    """Message accounting shared by all transports.

    ``in_transit`` counts envelopes sent but not yet handed to their receiver;
    ``in_flight`` counts envelopes whose receiver has not finished processing
    them (acknowledged), which is what termination detection needs.
    """

    def __init__(self, n_agents: int, delay: DelayModel | None = None):
        self.n_agents = n_agents
        self.delay = delay or DelayModel()
        self.rng = random.Random(self.delay.seed)
        self.sent = 0
        self.delivered = 0
        self.acked = 0
        self.sent_by_kind: Counter = Counter()
        self.sent_by_agent: Counter = Counter()
        self.received_by_agent: Counter = Counter()
        self.state_sent_by_agent: Counter = Counter()
        self.state_received_by_agent: Counter = Counter()
        self.errors = 0
        self.closed = False
        self._seq = [0] * n_agents
        self._last: dict[tuple[int, int], int] = {}
        self._lock = threading.Lock()

    def in_flight(self) -> int:
        with self._lock:
            return self.sent - self.acked

    def in_transit(self) -> int:
        with self._lock:
            return self.sent - self.delivered

    def _next_id(self, agent: int) -> tuple[int, int]:
        self._seq[agent] += 1
        return (agent, self._seq[agent])

    def _count_send(self, env: Envelope) -> None:
        self.sent += 1
        self.sent_by_kind[env.kind.value] += 1
        self.sent_by_agent[env.sender] += 1
        if env.kind is Kind.STATE:
            self.state_sent_by_agent[env.sender] += 1

    def _count_delivery(self, env: Envelope) -> None:
        self.delivered += 1
        self.received_by_agent[env.dest] += 1
        if env.kind is Kind.STATE:
            self.state_received_by_agent[env.dest] += 1

    def ack(self, n: int) -> None:
        with self._lock:
            self.acked += n

    def now_us(self) -> int:
        raise NotImplementedError

    def post(self, env: Envelope) -> None:
        raise NotImplementedError

    def make_envelope(self, kind: Kind, sender: int, dest: int, payload: dict[str, Any]) -> Envelope:
        with self._lock:
            if self.closed:
                raise TransportClosed("transport is closed")
            now = self.now_us()
            # a message never overtakes an earlier one on the same channel
            deliver = max(now + sample_delay(self.delay, self.rng), self._last.get((sender, dest), 0))
            self._last[(sender, dest)] = deliver
            env = Envelope(kind, sender, dest, self._next_id(sender), payload, now, deliver)
            self._count_send(env)
        return env

    def endpoint(self, agent: int) -> "Endpoint":
        return Endpoint(self, agent)

    def close(self) -> None:
        self.closed = True


class Endpoint:
    """One agent's handle on the network."""

    def __init__(self, network: Network, agent: int):
        self.network = network
        self.agent = agent

    def send(self, kind: Kind, payload: dict[str, Any], dest: int) -> Envelope:
        env = self.network.make_envelope(kind, self.agent, dest, payload)
        self.network.post(env)
        return env

    def broadcast(self, kind: Kind, payload: dict[str, Any]) -> list[Envelope]:
        return [
            self.send(kind, payload, dest)
            for dest in range(self.network.n_agents)
            if dest != self.agent
        ]

    def receive(self) -> list[Envelope]:
        return self.network.take(self.agent)  # type: ignore[attr-defined]

    def ack(self, n: int) -> None:
        if n:
            self.network.ack(n)

    def now_us(self) -> int:
        return self.network.now_us()


class SimNetwork(Network):
    """Single-threaded virtual-time network.

    Delivery follows virtual time; within a channel, send order is kept.
    """

    def __init__(self, n_agents: int, delay: DelayModel | None = None):
        super().__init__(n_agents, delay)
        self.now = 0
        self._heap: list[tuple[int, int, Envelope]] = []
        self._order = 0
        self.inboxes: list[deque[Envelope]] = [deque() for _ in range(n_agents)]
        self.schedule: list[tuple[int, int, int, int]] = []

    def now_us(self) -> int:
        return self.now

    def post(self, env: Envelope) -> None:
        self._order += 1
        heapq.heappush(self._heap, (env.deliver_us, self._order, env))
        self.schedule.append((env.deliver_us, env.sender, env.dest, env.msg_id[1]))

    def next_delivery(self) -> int | None:
        return self._heap[0][0] if self._heap else None

    def deliver_next(self) -> Envelope:
        _, _, env = heapq.heappop(self._heap)
        self.now = max(self.now, env.deliver_us)
        self._count_delivery(env)
        self.inboxes[env.dest].append(env)
        return env

    def pending_for(self, agent: int) -> int:
        return len(self.inboxes[agent])

    def take(self, agent: int) -> list[Envelope]:
        box = self.inboxes[agent]
        out = list(box)
        box.clear()
        return out
