"""Stations, their traffic sources, and the per-class latency bookkeeping
shared by every access method."""
import logging
from collections import deque
from dataclasses import dataclass
from typing import List

import numpy as np

from hmiwlan.errors import ContractViolation
from hmiwlan.events import Engine, MS, Rng
from hmiwlan.models import ClassLatency, LatencyStats, TrafficKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Packet:
    generated: int
    size: int


class Station(object):
    """One traffic source with a FIFO transmit queue."""

    def __init__(self, station_id, traffic, cw_min=15):
        self.id = station_id
        self.traffic = traffic
        self.queue = deque()
        # DCF backoff state
        self.cw = cw_min
        self.backoff = None
        self.count_start = None
        self.retry = 0
        self.hol_since = None
        # bookkeeping
        self.generated = 0
        self.delivered = 0
        self.dropped = 0
        self.misses = 0
        self.delays: List[int] = []
        self.access_delays: List[int] = []
        self.last_delivery = None
        self.max_gap = 0

    @property
    def kind(self):
        return self.traffic.kind

    @property
    def head(self):
        return self.queue[0] if self.queue else None

    def generate(self, now):
        if not self.queue:
            self.hol_since = now
        for size in self.traffic.fragments():
            self.queue.append(Packet(now, size))
            self.generated += 1

    def burst_len(self):
        """Number of queued MSDUs that belong to the head-of-line burst."""
        if not self.queue:
            return 0
        first = self.queue[0].generated
        count = 0
        for packet in self.queue:
            if packet.generated != first:
                break
            count += 1
        return count

    def deliver(self, now, data_end=None):
        if not self.queue:
            raise ContractViolation("station {} has nothing to deliver".format(self.id))
        packet = self.queue.popleft()
        delay = now - packet.generated
        self.delays.append(delay)
        if data_end is not None:
            self.access_delays.append(data_end - self.hol_since)
        if delay > self.traffic.msi_ns:
            self.misses += 1
        if self.last_delivery is not None:
            self.max_gap = max(self.max_gap, now - self.last_delivery)
        self.last_delivery = now
        self.delivered += 1
        self.hol_since = now if self.queue else None
        return packet

    def drop(self, now):
        self.queue.popleft()
        self.dropped += 1
        self.misses += 1
        self.hol_since = now if self.queue else None

    def __repr__(self):
        return "<Station: {} {}>".format(self.id, self.kind.value)


class Medium(object):
    """Records transmissions and rejects overlaps in coordinated modes."""

    def __init__(self):
        self.busy_until = 0
        self.transmissions = 0

    def occupy(self, start, end):
        if start < self.busy_until:
            raise ContractViolation(
                "transmission at {} ns overlaps medium busy until {} ns".format(start, self.busy_until))
        self.busy_until = end
        self.transmissions += 1
        return end


class MacSimulator(object):
    """Base for the access-method simulators: stations, traffic and statistics."""

    name = "mac"

    def __init__(self, scenario, phy, trace=False):
        self.scenario = scenario
        self.phy = phy
        self.engine = Engine(trace=trace)
        self.rng = Rng(scenario.seed)
        self.stations = [Station(i, traffic, phy.cw_min) for i, traffic in enumerate(scenario.traffic())]
        self.medium = Medium()
        self.collisions = 0
        self.engine.on("arrival")(self._on_arrival)

    def start_traffic(self):
        end = self.scenario.duration_ns
        for station in self.stations:
            phase = 0
            if self.scenario.random_phases:
                phase = int(self.rng.child("phase", station.id).integers(0, station.traffic.period_ns))
            if phase < end:
                self.engine.schedule(phase, "arrival", station.id)

    def _on_arrival(self, event):
        station = self.stations[event.target]
        was_empty = not station.queue
        station.generate(event.time)
        nxt = event.time + station.traffic.period_ns
        if nxt < self.scenario.duration_ns:
            self.engine.schedule(nxt, "arrival", station.id)
        self.on_packets(station, was_empty)

    def on_packets(self, station, was_empty):
        """Hook for access methods that react to new traffic."""

    def start(self):
        raise NotImplementedError

    def run(self):
        self.start_traffic()
        self.start()
        events = self.engine.run_until(self.scenario.duration_ns)
        stats = self.collect(self.scenario.duration_ns)
        stats.events = events
        logger.info("%s run: n_safety=%d n_ar=%d events=%d collisions=%d",
                    self.name, self.scenario.n_safety, self.scenario.n_ar, events, stats.collisions)
        return stats

    def collect(self, end):
        return collect_stats(self.stations, end, self.collisions)


def collect_stats(stations, end, collisions=0):
    """Aggregates per-class latency. Packets still queued at `end` contribute
    their age so far to the maximum, a lower bound on their final delay."""
    stats = LatencyStats(collisions=collisions)
    for kind in TrafficKind:
        members = [s for s in stations if s.kind == kind]
        if not members:
            continue
        entry = ClassLatency()
        delays = [d for s in members for d in s.delays]
        access = [d for s in members for d in s.access_delays]
        ages = [end - p.generated for s in members for p in s.queue]
        entry.generated = sum(s.generated for s in members)
        entry.delivered = sum(s.delivered for s in members)
        entry.dropped = sum(s.dropped for s in members)
        entry.queued = sum(len(s.queue) for s in members)
        entry.samples = len(delays)
        entry.deadline_miss_count = sum(s.misses for s in members) + sum(
            1 for s in members for p in s.queue if end - p.generated > s.traffic.msi_ns)
        if delays:
            entry.mean_delay_ms = float(np.mean(delays)) / MS
        worst = max(delays + ages) if delays or ages else 0
        entry.max_delay_ms = worst / MS
        if access:
            entry.mean_access_delay_ms = float(np.mean(access)) / MS
        entry.max_service_gap_ms = max(s.max_gap for s in members) / MS
        stats.per_class[kind] = entry
    return stats
