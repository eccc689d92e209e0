"""Sweeps the number of AR stations and tabulates per-class latency."""
import dataclasses
import logging

import pandas as pd
from joblib import Parallel, delayed

from hmiwlan.events import derive_seed
from hmiwlan.mac.dcf import run_dcf
from hmiwlan.mac.hcca import run_hcca
from hmiwlan.mac.pcf import run_pcf
from hmiwlan.models import AccessMethod, TrafficKind

logger = logging.getLogger(__name__)

COLUMNS = ["n_ar", "class", "mean_ms", "max_ms", "miss_rate", "samples"]


def run(scenario, phy, trace=False):
    """Runs one scenario with the access method it names."""
    if scenario.access == AccessMethod.DCF:
        return run_dcf(scenario, phy, trace=trace)
    if scenario.access == AccessMethod.PCF:
        return run_pcf(scenario, phy, trace=trace)
    return run_hcca(scenario, phy, scenario.scheduler, trace=trace)


def point(scenario, n_ar):
    """The scenario for one sweep point; its seed depends only on the master seed and n_ar."""
    return dataclasses.replace(scenario, n_ar=n_ar, seed=derive_seed(scenario.seed, "sweep", n_ar))


def rows(n_ar, stats):
    out = []
    for kind in (TrafficKind.SAFETY, TrafficKind.AR):
        if kind not in stats.per_class:
            continue
        entry = stats.per_class[kind]
        out.append({
            "n_ar": n_ar,
            "class": kind.value,
            "mean_ms": entry.mean_delay_ms,
            "max_ms": entry.max_delay_ms,
            "miss_rate": entry.miss_rate,
            "samples": entry.samples,
        })
    return out


def sweep_stats(scenario, n_values, phy, threads=1):
    """(n_ar, LatencyStats) pairs in parameter order."""
    points = [point(scenario, n) for n in n_values]
    results = Parallel(n_jobs=threads, backend="threading")(delayed(run)(s, phy) for s in points)
    return list(zip(n_values, results))


def sweep(scenario, n_values, phy, threads=1):
    """One row per (n_ar, class) with columns n_ar,class,mean_ms,max_ms,miss_rate,samples."""
    table = []
    for n_ar, stats in sweep_stats(scenario, n_values, phy, threads):
        table.extend(rows(n_ar, stats))
        logger.debug("%s n_ar=%d done", scenario.access.value, n_ar)
    return pd.DataFrame(table, columns=COLUMNS)


def first_failure(results, kind, msi_ms):
    """Smallest n_ar whose max delay for `kind` exceeds `msi_ms`, or None."""
    for n_ar, stats in results:
        entry = stats.per_class.get(kind)
        if entry is not None and entry.max_delay_ms > msi_ms:
            return n_ar
    return None


def last_suitable(results, kind, msi_ms):
    """Largest n_ar before the first point whose mean delay for `kind` reaches `msi_ms`.

    Points after that crossing are not considered, even if their mean dips
    back below the MSI. Returns None when the first point already fails.
    """
    suitable = None
    for n_ar, stats in results:
        entry = stats.per_class.get(kind)
        if entry is not None and entry.mean_delay_ms >= msi_ms:
            return suitable
        suitable = n_ar
    return suitable
