"""Distributed coordination function: CSMA/CA with binary exponential backoff."""
import logging

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation
from hmiwlan.mac.stations import MacSimulator
from hmiwlan.models import AccessMethod

logger = logging.getLogger(__name__)


class DcfSimulator(MacSimulator):
    """Every station contends for the medium on its own.

    A station with a head-of-line packet waits for DIFS of idle medium, then
    counts down a backoff drawn uniformly from [0, CW] slots. The countdown
    freezes while another station transmits. Stations whose counters expire
    in the same slot collide.
    """

    name = "dcf"

    def __init__(self, scenario, phy, trace=False):
        super().__init__(scenario, phy, trace)
        self.busy = False
        self.idle_since = 0
        self.pending = None
        self._streams = {}
        self.engine.on("tx_start")(self._on_tx_start)
        self.engine.on("tx_end")(self._on_tx_end)

    def start(self):
        pass

    def backoff_rng(self, station):
        if station.id not in self._streams:
            self._streams[station.id] = self.rng.child("backoff", station.id)
        return self._streams[station.id]

    def on_packets(self, station, was_empty):
        if was_empty:
            station.backoff = None
            if not self.busy:
                self.contend()

    def contend(self):
        """Schedules the next transmission start among contending stations."""
        if self.pending is not None:
            self.pending.cancel()
            self.pending = None
        best, who = None, []
        for station in self.stations:
            if not station.queue:
                continue
            if station.backoff is None:
                station.backoff = int(self.backoff_rng(station).integers(0, station.cw + 1))
                station.count_start = max(self.idle_since, station.hol_since) + self.phy.difs_ns
            t = station.count_start + station.backoff * self.phy.slot_ns
            if best is None or t < best:
                best, who = t, [station.id]
            elif t == best:
                who.append(station.id)
        if best is not None:
            self.pending = self.engine.schedule(best, "tx_start", payload=tuple(who))

    def _on_tx_start(self, event):
        self.pending = None
        now = event.time
        who = event.payload
        slot = self.phy.slot_ns
        for station in self.stations:
            if station.id in who or station.backoff is None or not station.queue:
                continue
            if now > station.count_start:
                station.backoff -= (now - station.count_start) // slot
                if station.backoff < 0:
                    raise ContractViolation("station {} missed its backoff slot".format(station.id))
        air = max(self.phy.tx_time(self.stations[i].head.size) for i in who)
        end = now + air + self.phy.sifs_ns + self.phy.ack_ns
        self.busy = True
        if len(who) > 1:
            self.collisions += 1
        self.engine.schedule(end, "tx_end", payload=(who, now + air))

    def _on_tx_end(self, event):
        now = event.time
        who, data_end = event.payload
        self.busy = False
        self.idle_since = now
        if len(who) == 1:
            station = self.stations[who[0]]
            station.deliver(now, data_end)
            station.cw = self.phy.cw_min
            station.retry = 0
            station.backoff = None
        else:
            for i in who:
                station = self.stations[i]
                station.retry += 1
                if station.retry > self.phy.retry_limit:
                    station.drop(now)
                    station.retry = 0
                    station.cw = self.phy.cw_min
                else:
                    station.cw = min(2 * (station.cw + 1) - 1, self.phy.cw_max)
                station.backoff = None
        for station in self.stations:
            if station.queue and station.backoff is not None:
                station.count_start = now + self.phy.difs_ns
        self.contend()


@timed("dcf")
def run_dcf(scenario, phy, trace=False):
    if scenario.access != AccessMethod.DCF:
        raise ContractViolation("run_dcf needs a DCF scenario, got {}".format(scenario.access.value))
    return DcfSimulator(scenario, phy, trace).run()
