"""HCCA schedulers.

The reference scheduler builds a static table once the flows are known: one
service interval (SI) and a TXOP per admitted flow, polled round-robin every
SI. The EDF scheduler is dynamic: whenever the medium is free it grants the
pending flow whose deadline (last service + MSI) comes first.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from hmiwlan.errors import AdmissionFailure
from hmiwlan.models import ceil_div

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowSpec:
    """Traffic specification a station declares when it registers."""
    station_id: int
    msi_ns: int
    payload_bytes: int
    period_ns: int
    msdu_bytes: int
    max_msdu_bytes: int

    @staticmethod
    def from_station(station):
        traffic = station.traffic
        return FlowSpec(station.id, traffic.msi_ns, traffic.payload_bytes, traffic.period_ns,
                        traffic.msdu_bytes, traffic.max_msdu_bytes)

    def msdus_per(self, interval_ns):
        """MSDUs of nominal size needed to carry the mean rate over `interval_ns`."""
        nominal = min(self.msdu_bytes, self.payload_bytes)
        return max(1, ceil_div(interval_ns * self.payload_bytes, self.period_ns * nominal))


@dataclass(frozen=True)
class TableEntry:
    station_id: int
    txop_ns: int


@dataclass
class ScheduleTable:
    beacon_interval_ns: int
    divisions: int
    entries: List[TableEntry] = field(default_factory=list)
    rejected: List[int] = field(default_factory=list)
    load_ns: int = 0

    @property
    def service_interval_ns(self):
        return self.beacon_interval_ns // self.divisions

    @property
    def admission_failed(self):
        return bool(self.rejected)

    def si_start(self, index):
        """Start of service interval `index`; SIs tile each beacon interval."""
        return (index * self.beacon_interval_ns) // self.divisions

    def beacon_due(self, index):
        return index % self.divisions == 0


def reference_scheduler(flows: Sequence[FlowSpec], phy, beacon_interval_ns=None, strict=False):
    """Builds the static TXOP table.

    SI is the largest submultiple of the beacon interval not above the
    smallest MSI. Flows are admitted in registration order while the polls,
    their TXOPs and the beacon allowance fit into one SI.
    """
    bi = beacon_interval_ns or phy.beacon_interval_ns
    min_msi = min((f.msi_ns for f in flows), default=bi)
    divisions = max(1, ceil_div(bi, min_msi))
    table = ScheduleTable(bi, divisions)
    si = table.service_interval_ns
    load = phy.beacon_cost
    for flow in flows:
        nominal = min(flow.msdu_bytes, flow.payload_bytes)
        txop = max(flow.msdus_per(si) * phy.exchange_time(nominal), phy.exchange_time(flow.max_msdu_bytes))
        cost = phy.poll_time + txop
        if load + cost <= si:
            load += cost
            table.entries.append(TableEntry(flow.station_id, txop))
        else:
            table.rejected.append(flow.station_id)
    table.load_ns = load
    if table.rejected:
        logger.debug("reference scheduler rejected stations %s (SI %d ns)", table.rejected, si)
        if strict:
            raise AdmissionFailure(
                "{} flow(s) do not fit into the {} ns service interval".format(len(table.rejected), si),
                table.rejected)
    return table


@dataclass(frozen=True)
class PendingPoll:
    station_id: int
    deadline: int


@dataclass(frozen=True)
class Grant:
    station_id: int
    start: int
    deadline: int


def edf_scheduler(pending: Sequence[PendingPoll], now) -> Optional[Grant]:
    """Grants the pending flow with the earliest deadline, lower id on ties."""
    if not pending:
        return None
    best = min(pending, key=lambda p: (p.deadline, p.station_id))
    return Grant(best.station_id, now, best.deadline)


def edf_admission(flows: Sequence[FlowSpec], phy, strict=False):
    """Admits flows in registration order while the utilization stays <= 1.

    Each flow costs one poll plus its per-MSI TXOP every MSI; the beacon
    costs its air time every beacon interval.
    """
    utilization = phy.beacon_cost / phy.beacon_interval_ns
    admitted, rejected, quota = [], [], {}
    for flow in flows:
        nominal = min(flow.msdu_bytes, flow.payload_bytes)
        msdus = flow.msdus_per(flow.msi_ns)
        share = (phy.poll_time + msdus * phy.exchange_time(nominal)) / flow.msi_ns
        if utilization + share <= 1.0:
            utilization += share
            admitted.append(flow.station_id)
            quota[flow.station_id] = msdus
        else:
            rejected.append(flow.station_id)
    if rejected and strict:
        raise AdmissionFailure("EDF utilization would exceed 1", rejected)
    return admitted, rejected, quota, utilization
