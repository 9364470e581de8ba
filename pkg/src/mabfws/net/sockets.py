"""Loopback socket transport for threaded runs.

Every agent listens on its own loopback port and holds one outgoing
connection per peer. Frames are written by a per-agent writer thread so the
search never blocks on I/O; per-connection reader threads decode frames and
park envelopes in the receiver's inbox until their delivery time.
"""

from __future__ import annotations

import heapq
import logging
import queue
import socket
import threading
import time

from .delay import DelayModel
from .envelope import Envelope, FrameDecoder, FramingError, frame
from .transport import Endpoint, Network, TransportClosed

log = logging.getLogger(__name__)

_STOP = object()


class SocketNetwork(Network):
    def __init__(self, n_agents: int, delay: DelayModel | None = None, host: str = "127.0.0.1"):
        super().__init__(n_agents, delay)
        self._t0 = time.monotonic_ns()
        self._inbox: list[list[tuple[int, int, Envelope]]] = [[] for _ in range(n_agents)]
        self._cond = [threading.Condition() for _ in range(n_agents)]
        self._arrival = 0
        self._threads: list[threading.Thread] = []
        self._socks: list[socket.socket] = []
        self._outq: list[queue.Queue] = [queue.Queue() for _ in range(n_agents)]
        self._out: dict[tuple[int, int], socket.socket] = {}

        listeners = []
        for _ in range(n_agents):
            srv = socket.create_server((host, 0))
            listeners.append(srv)
            self._socks.append(srv)
        for j, srv in enumerate(listeners):
            self._spawn(self._accept_loop, srv, j, n_agents - 1)
        for i in range(n_agents):
            for j in range(n_agents):
                if i != j:
                    conn = socket.create_connection(listeners[j].getsockname())
                    conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                    self._out[(i, j)] = conn
                    self._socks.append(conn)
            self._spawn(self._writer_loop, i)

    def _spawn(self, target, *args) -> None:
        t = threading.Thread(target=target, args=args, daemon=True)
        t.start()
        self._threads.append(t)

    def now_us(self) -> int:
        return (time.monotonic_ns() - self._t0) // 1000

    def _accept_loop(self, srv: socket.socket, agent: int, expected: int) -> None:
        for _ in range(expected):
            try:
                conn, _ = srv.accept()
            except OSError:
                return
            self._socks.append(conn)
            self._spawn(self._reader_loop, conn, agent)

    def _reader_loop(self, conn: socket.socket, agent: int) -> None:
        decoder = FrameDecoder()
        while not self.closed:
            try:
                data = conn.recv(65536)
            except OSError:
                return
            if not data:
                return
            try:
                envs = decoder.feed(data)
            except FramingError as exc:
                log.warning("dropping connection to agent %d: %s", agent, exc)
                with self._lock:
                    self.errors += 1
                conn.close()
                return
            cond = self._cond[agent]
            with cond:
                for env in envs:
                    self._arrival += 1
                    heapq.heappush(self._inbox[agent], (env.deliver_us, self._arrival, env))
                cond.notify_all()

    def _writer_loop(self, agent: int) -> None:
        q = self._outq[agent]
        while True:
            item = q.get()
            if item is _STOP:
                return
            env, data = item
            try:
                self._out[(agent, env.dest)].sendall(data)
            except OSError:
                with self._lock:
                    self.errors += 1
                return

    def post(self, env: Envelope) -> None:
        if self.closed:
            raise TransportClosed("transport is closed")
        self._outq[env.sender].put((env, frame(env)))

    def take(self, agent: int) -> list[Envelope]:
        now = self.now_us()
        out = []
        cond = self._cond[agent]
        with cond:
            box = self._inbox[agent]
            while box and box[0][0] <= now:
                out.append(heapq.heappop(box)[2])
        with self._lock:
            for env in out:
                self._count_delivery(env)
        return out

    def wait(self, agent: int, timeout: float) -> None:
        """Block until an envelope for ``agent`` is due or ``timeout`` passes."""
        cond = self._cond[agent]
        with cond:
            box = self._inbox[agent]
            if box:
                due = (box[0][0] - self.now_us()) / 1e6
                if due <= 0:
                    return
                timeout = min(timeout, due)
            cond.wait(timeout)

    def endpoint(self, agent: int) -> "SocketEndpoint":
        return SocketEndpoint(self, agent)

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        for q in self._outq:
            q.put(_STOP)
        for s in self._socks:
            try:
                s.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            s.close()
        for t in self._threads:
            t.join(timeout=1.0)


class SocketEndpoint(Endpoint):
    network: SocketNetwork

    def wait(self, timeout: float) -> None:
        self.network.wait(self.agent, timeout)

