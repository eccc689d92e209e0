"""Schmidl-Cox frame timing and carrier frequency offset estimation."""
import logging
from dataclasses import dataclass

import numpy as np

from hmiwlan.errors import NoFrameDetected
from hmiwlan.phy.channel import rotate
from hmiwlan.phy.framing import make_preamble

logger = logging.getLogger(__name__)

DETECTION_THRESHOLD = 0.5
PLATEAU_FRACTION = 0.9


@dataclass(frozen=True)
class SyncResult:
    frame_start: int
    cfo_hat: float
    peak: float


def _window_sum(values, length):
    c = np.concatenate([[0], np.cumsum(values)])
    return c[length:] - c[:-length]


def timing_metric(rx, half):
    """P(d), R(d) and M(d) = |P|^2 / R^2 for every d with a full window."""
    rx = np.asarray(rx, dtype=complex)
    corr = np.conj(rx[:-half]) * rx[half:]
    p = _window_sum(corr, half)
    r = _window_sum(np.abs(rx[half:]) ** 2, half)
    p, r = p[:r.size], r[:p.size]
    metric = np.zeros(p.size)
    valid = r > 0
    metric[valid] = np.abs(p[valid]) ** 2 / r[valid] ** 2
    return p, r, metric


def cfo_from_correlation(p, config):
    """angle(P) spans pi*M per subcarrier spacing over a half-preamble lag."""
    return float(np.angle(p) / (np.pi * config.m))


def _first_plateau(metric, last, span):
    """Index range of the first plateau above the detection threshold at or before `last`."""
    above = np.flatnonzero(metric[:last + 1] >= DETECTION_THRESHOLD)
    if above.size == 0:
        return None
    edge = int(above[0])
    window = metric[edge:min(edge + span, last) + 1]
    peak_at = edge + int(np.argmax(window))
    level = PLATEAU_FRACTION * metric[peak_at]
    lo = peak_at
    while lo > 0 and metric[lo - 1] >= level:
        lo -= 1
    hi = peak_at
    while hi + 1 < metric.size and metric[hi + 1] >= level:
        hi += 1
    return lo, hi, peak_at


def schmidl_cox_sync(rx_samples, config):
    """Returns the first frame sample (start of the preamble CP) and the CFO."""
    rx = np.asarray(rx_samples, dtype=complex)
    half = config.n // 2
    guards = config.cp_len + config.cs_len
    if rx.size < config.frame_len:
        raise NoFrameDetected("received {} samples, a frame needs {}".format(rx.size, config.frame_len))
    p, _, metric = timing_metric(rx, half)
    # a whole frame must still fit after the plateau
    last = min(metric.size - 1, rx.size - config.frame_len + guards)
    plateau = _first_plateau(metric, last, half + guards)
    if plateau is None:
        peak = float(np.max(metric[:last + 1]))
        raise NoFrameDetected("timing metric peak {:.3f} below {}".format(peak, DETECTION_THRESHOLD))
    lo, hi, peak_at = plateau
    peak = float(metric[peak_at])
    coarse = int(round((lo + hi) / 2.0 - guards / 2.0)) + config.cp_len
    cfo = cfo_from_correlation(p[min(max((lo + hi) // 2, 0), p.size - 1)], config)

    # fine timing against the known preamble on the derotated signal
    preamble = make_preamble(config)
    corrected = rotate(rx, -cfo, config.k)
    first = max(0, coarse - half)
    last = min(rx.size - preamble.size, coarse + half)
    if last < first:
        raise NoFrameDetected("preamble candidate at {} runs past the received samples".format(coarse))
    scores = np.abs(np.correlate(corrected[first:last + preamble.size], preamble, mode="valid"))
    best = first + int(np.argmax(scores))
    if best < p.size:
        cfo = cfo_from_correlation(p[best], config)
    start = best - config.cp_len
    logger.debug("frame at %d (coarse %d), cfo %.6f, peak %.3f", start, coarse - config.cp_len, cfo, peak)
    return SyncResult(start, cfo, peak)
