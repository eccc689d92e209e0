"""Deterministic discrete-event engine: integer-nanosecond clock, ordered
event queue with cancellable handles, and seeded random streams."""
import heapq
import io
import logging
import zlib
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from hmiwlan.errors import ContractViolation

logger = logging.getLogger(__name__)

US = 1000
MS = 1000 * US
SECOND = 1000 * MS


def us(value):
    return int(round(value * US))


def ms(value):
    return int(round(value * MS))


def seconds(value):
    return int(round(value * SECOND))


TraceRecord = namedtuple("TraceRecord", ["time_ns", "seq", "kind", "target"])


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    kind: str
    target: Any = None
    payload: Any = field(default=None, compare=False)


class SimClock(object):
    """Virtual clock in integer nanoseconds. Never moves backwards."""

    def __init__(self):
        self._now = 0

    @property
    def now(self):
        return self._now

    def advance(self, t):
        if t < self._now:
            raise ContractViolation("clock cannot move from {} ns back to {} ns".format(self._now, t))
        self._now = int(t)


class Handle(object):
    """Returned by Engine.schedule; cancelling is idempotent."""

    def __init__(self, engine, event):
        self._engine = engine
        self.event = event
        self._cancelled = False

    @property
    def time(self):
        return self.event.time

    @property
    def cancelled(self):
        return self._cancelled

    def cancel(self):
        if self.event.seq in self._engine._live:
            self._engine._live.discard(self.event.seq)
            self._engine._cancelled.add(self.event.seq)
            self._cancelled = True

    def __repr__(self):
        return "<Handle: {}@{}>".format(self.event.kind, self.event.time)


class Engine(object):
    """Single-threaded event loop. Events are ordered by (time, seq)."""

    def __init__(self, trace=False):
        self.clock = SimClock()
        self._queue = []
        self._seq = 0
        self._live = set()
        self._cancelled = set()
        self._handlers: Dict[str, Callable[[Event], None]] = {}
        self.trace: Optional[List[TraceRecord]] = [] if trace else None
        self.processed = 0

    @property
    def now(self):
        return self.clock.now

    @property
    def pending(self):
        return len(self._live)

    def on(self, kind):
        """Registers the decorated callable as the handler for `kind` events."""
        def _on(f):
            self._handlers[kind] = f
            return f
        return _on

    def schedule(self, time, kind, target=None, payload=None):
        time = int(time)
        if time < self.clock.now:
            raise ContractViolation(
                "cannot schedule '{}' at {} ns, clock is at {} ns".format(kind, time, self.clock.now))
        event = Event(time, self._seq, kind, target, payload)
        self._seq += 1
        heapq.heappush(self._queue, (event.time, event.seq, event))
        self._live.add(event.seq)
        return Handle(self, event)

    def schedule_in(self, delay, kind, target=None, payload=None):
        return self.schedule(self.clock.now + int(delay), kind, target, payload)

    def _pop(self, t_end=None):
        while self._queue:
            time, seq, event = self._queue[0]
            if seq in self._cancelled:
                heapq.heappop(self._queue)
                self._cancelled.discard(seq)
                continue
            if t_end is not None and time > t_end:
                return None
            heapq.heappop(self._queue)
            self._live.discard(seq)
            return event
        return None

    def _dispatch(self, event):
        self.clock.advance(event.time)
        self.processed += 1
        if self.trace is not None:
            self.trace.append(TraceRecord(event.time, event.seq, event.kind, event.target))
        handler = self._handlers.get(event.kind)
        if handler is not None:
            handler(event)

    def step(self):
        event = self._pop()
        if event is not None:
            self._dispatch(event)
        return event

    def run_until(self, t_end):
        t_end = int(t_end)
        if t_end < self.clock.now:
            raise ContractViolation("run_until({}) is before now={}".format(t_end, self.clock.now))
        count = 0
        while True:
            event = self._pop(t_end)
            if event is None:
                break
            self._dispatch(event)
            count += 1
        self.clock.advance(t_end)
        return count

    def run(self):
        count = 0
        while self.step() is not None:
            count += 1
        return count

    def dump_trace(self, target):
        """Writes `time_ns<TAB>seq<TAB>kind<TAB>target` lines to a path or stream."""
        if self.trace is None:
            raise ContractViolation("engine was created without trace=True")
        lines = "".join("{}\t{}\t{}\t{}\n".format(r.time_ns, r.seq, r.kind, "" if r.target is None else r.target)
                        for r in self.trace)
        if isinstance(target, io.IOBase) or hasattr(target, "write"):
            target.write(lines)
        else:
            with open(target, "w", newline="\n") as f:
                f.write(lines)


def _key(value):
    if isinstance(value, str):
        return zlib.crc32(value.encode("utf-8"))
    value = int(value)
    if value < 0:
        raise ContractViolation("stream keys must be non-negative, got {}".format(value))
    return value


class Rng(object):
    """Seeded random stream.

    Backed by numpy's PCG64: a 128-bit linear congruential generator
    (state * 0x2360ED051FC65DA44385DF649FCCF645 + increment mod 2**128) with
    a permuted output function. Child streams are derived through
    SeedSequence spawn keys, so a stream depends only on the master seed and
    its key path, never on the order in which streams are requested.
    """

    MULTIPLIER = 0x2360ED051FC65DA44385DF649FCCF645

    def __init__(self, seed, spawn_key=()):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise ContractViolation("seed must be a 64-bit unsigned integer, got {}".format(seed))
        self.seed = seed
        self.spawn_key = tuple(_key(k) for k in spawn_key)
        sequence = np.random.SeedSequence(entropy=seed, spawn_key=self.spawn_key)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *keys):
        return Rng(self.seed, self.spawn_key + tuple(_key(k) for k in keys))

    def __getattr__(self, name):
        # uniform, integers, normal, standard_normal, choice, ...
        return getattr(self.generator, name)

    def __repr__(self):
        return "<Rng: seed={} key={}>".format(self.seed, self.spawn_key)


def derive_seed(seed, *keys):
    """64-bit seed for an independent run (sweep point, trial batch)."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
