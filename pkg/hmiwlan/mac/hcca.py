"""HCF controlled channel access with a pluggable scheduler."""
import logging

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation
from hmiwlan.mac.schedulers import FlowSpec, PendingPoll, edf_admission, edf_scheduler, reference_scheduler
from hmiwlan.mac.stations import MacSimulator
from hmiwlan.models import AccessMethod, SchedulerKind

logger = logging.getLogger(__name__)


class HccaSimulator(MacSimulator):
    """Stations transmit only inside TXOPs the hybrid coordinator grants."""

    name = "hcca"

    def __init__(self, scenario, phy, scheduler=SchedulerKind.REFERENCE, strict=False, trace=False):
        super().__init__(scenario, phy, trace)
        self.scheduler = scheduler
        self.flows = [FlowSpec.from_station(s) for s in self.stations]
        self.strict = strict
        self.rejected = []
        self.engine.on("deliver")(self._on_deliver)

    def start(self):
        raise NotImplementedError

    def _on_deliver(self, event):
        self.stations[event.target].deliver(event.time, event.payload)

    def send_msdus(self, station, t, budget=None, limit=None):
        """Schedules MSDU exchanges from `t`; returns (end time, MSDUs sent)."""
        sent = 0
        for packet in list(station.queue):
            if limit is not None and sent >= limit:
                break
            cost = self.phy.exchange_time(packet.size)
            if budget is not None and cost > budget:
                break
            data_end = t + self.phy.tx_time(packet.size)
            self.engine.schedule(data_end + self.phy.sifs_ns + self.phy.ack_ns, "deliver", station.id, data_end)
            t += cost
            sent += 1
            if budget is not None:
                budget -= cost
        return t, sent

    def collect(self, end):
        stats = super().collect(end)
        stats.rejected = list(self.rejected)
        stats.admission_failed = bool(self.rejected)
        return stats


class ReferenceHcca(HccaSimulator):
    """Polls the admitted stations round-robin once per service interval,
    each for the TXOP in the static table."""

    name = "hcca-ref"

    def __init__(self, scenario, phy, strict=False, trace=False):
        super().__init__(scenario, phy, SchedulerKind.REFERENCE, strict, trace)
        self.table = reference_scheduler(self.flows, phy, strict=strict)
        self.rejected = list(self.table.rejected)
        self.engine.on("si")(self._on_si)
        self.engine.on("hcca_poll")(self._on_poll)

    def start(self):
        self.engine.schedule(0, "si", payload=0)

    def _on_si(self, event):
        index = event.payload
        nxt = self.table.si_start(index + 1)
        if nxt < self.scenario.duration_ns:
            self.engine.schedule(nxt, "si", payload=index + 1)
        start = max(event.time, self.medium.busy_until)
        t = start + self.phy.pifs_ns
        if self.table.beacon_due(index):
            t += self.phy.tx_time(self.phy.beacon_bytes) + self.phy.sifs_ns
        self.medium.occupy(start, t)
        if self.table.entries:
            self.engine.schedule(t, "hcca_poll", payload=0)

    def _on_poll(self, event):
        position = event.payload
        entry = self.table.entries[position]
        station = self.stations[entry.station_id]
        t = event.time + self.phy.poll_time
        t, sent = self.send_msdus(station, t, budget=entry.txop_ns)
        if not sent:
            t += self.phy.null_time
        self.medium.occupy(event.time, t)
        if position + 1 < len(self.table.entries):
            self.engine.schedule(t, "hcca_poll", payload=position + 1)


class EdfHcca(HccaSimulator):
    """Work-conserving: the coordinator grants the pending flow with the
    earliest deadline whenever the medium is free. A grant is a poll plus up
    to the flow's per-MSI quota of MSDUs. A due beacon goes first."""

    name = "hcca-edf"

    def __init__(self, scenario, phy, strict=False, trace=False):
        super().__init__(scenario, phy, SchedulerKind.EDF, strict, trace)
        admitted, rejected, quota, utilization = edf_admission(self.flows, phy, strict=strict)
        self.admitted = set(admitted)
        self.rejected = rejected
        self.quota = quota
        self.utilization = utilization
        self.last_service = {s.id: 0 for s in self.stations}
        self.beacon_pending = False
        self.active = False
        self.engine.on("tbtt")(self._on_tbtt)
        self.engine.on("edf_step")(self._on_step)

    def start(self):
        self.engine.schedule(0, "tbtt")

    def wake(self):
        if not self.active:
            self.active = True
            self.engine.schedule(self.engine.now, "edf_step", payload=True)

    def on_packets(self, station, was_empty):
        if station.id in self.admitted:
            self.wake()

    def _on_tbtt(self, event):
        nxt = event.time + self.phy.beacon_interval_ns
        if nxt < self.scenario.duration_ns:
            self.engine.schedule(nxt, "tbtt")
        self.beacon_pending = True
        self.wake()

    def pending(self):
        return [PendingPoll(s.id, self.last_service[s.id] + s.traffic.msi_ns)
                for s in self.stations if s.id in self.admitted and s.queue]

    def _on_step(self, event):
        after_idle = event.payload
        now = event.time
        if self.beacon_pending:
            self.beacon_pending = False
            end = self.medium.occupy(now, now + self.phy.beacon_cost)
            self.engine.schedule(end, "edf_step", payload=False)
            return
        grant = edf_scheduler(self.pending(), now)
        if grant is None:
            self.active = False
            return
        start = now + self.phy.pifs_ns if after_idle else now
        station = self.stations[grant.station_id]
        self.last_service[station.id] = start
        t, _ = self.send_msdus(station, start + self.phy.poll_time, limit=self.quota[station.id])
        self.medium.occupy(now, t)
        self.engine.schedule(t, "edf_step", payload=False)


def hcca_simulator(scenario, phy, scheduler=None, strict=False, trace=False):
    scheduler = scheduler or scenario.scheduler
    if scheduler == SchedulerKind.EDF:
        return EdfHcca(scenario, phy, strict, trace)
    return ReferenceHcca(scenario, phy, strict, trace)


@timed("hcca")
def run_hcca(scenario, phy, scheduler=None, strict=False, trace=False):
    if scenario.access != AccessMethod.HCCA:
        raise ContractViolation("run_hcca needs an HCCA scenario, got {}".format(scenario.access.value))
    return hcca_simulator(scenario, phy, scheduler, strict, trace).run()
