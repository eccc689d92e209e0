"""Point coordination function: beacon-led contention-free polling."""
import logging
from itertools import islice

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation
from hmiwlan.mac.stations import MacSimulator
from hmiwlan.models import AccessMethod

logger = logging.getLogger(__name__)


class PcfSimulator(MacSimulator):
    """The AP opens a contention-free period after every beacon and polls the
    stations round-robin, blind to their traffic class. A polled station sends
    its head-of-line burst or a null frame. The poll cursor survives from one
    CFP to the next. Once a full round finishes inside a CFP, stations that
    still hold data are polled again in id order until the CFP ends.
    """

    name = "pcf"

    def __init__(self, scenario, phy, trace=False):
        super().__init__(scenario, phy, trace)
        msis = [s.traffic.msi_ns for s in self.stations]
        self.superframe = min(msis) if msis else phy.beacon_interval_ns
        self.cursor = 0
        self.repoll_at = 0
        self.repolling = False
        self.cfp_id = 0
        self.cfp_end = 0
        self.engine.on("tbtt")(self._on_tbtt)
        self.engine.on("poll")(self._on_poll)
        self.engine.on("deliver")(self._on_deliver)

    def start(self):
        self.engine.schedule(0, "tbtt")

    def _on_tbtt(self, event):
        now = event.time
        nxt = now + self.superframe
        if nxt < self.scenario.duration_ns:
            self.engine.schedule(nxt, "tbtt")
        self.cfp_id += 1
        self.cfp_end = now + int(self.phy.cfp_max_fraction * self.superframe)
        self.repolling = False
        start = max(now, self.medium.busy_until)
        end = self.medium.occupy(start, start + self.phy.beacon_cost)
        if self.stations:
            self.engine.schedule(end, "poll", payload=self.cfp_id)

    def next_station(self):
        n = len(self.stations)
        if not self.repolling:
            station = self.stations[self.cursor]
            self.cursor = (self.cursor + 1) % n
            if self.cursor == 0:
                self.repolling = True
                self.repoll_at = 0
            return station
        for offset in range(n):
            station = self.stations[(self.repoll_at + offset) % n]
            if station.queue:
                self.repoll_at = (station.id + 1) % n
                return station
        return None

    def _on_poll(self, event):
        if event.payload != self.cfp_id or event.time >= self.cfp_end:
            return
        station = self.next_station()
        if station is None:
            return
        t = event.time + self.phy.poll_time
        burst = station.burst_len()
        if burst == 0:
            t += self.phy.null_time
        for packet in islice(station.queue, burst):
            data_end = t + self.phy.tx_time(packet.size)
            self.engine.schedule(data_end + self.phy.sifs_ns + self.phy.ack_ns, "deliver", station.id, data_end)
            t += self.phy.exchange_time(packet.size)
        self.medium.occupy(event.time, t)
        self.engine.schedule(t, "poll", payload=self.cfp_id)

    def _on_deliver(self, event):
        self.stations[event.target].deliver(event.time, event.payload)


@timed("pcf")
def run_pcf(scenario, phy, trace=False):
    if scenario.access != AccessMethod.PCF:
        raise ContractViolation("run_pcf needs a PCF scenario, got {}".format(scenario.access.value))
    return PcfSimulator(scenario, phy, trace).run()
