"""Server-orchestrated localization rounds on the shared medium."""
import logging
import math
from collections import deque, namedtuple

import numpy as np
import pandas as pd

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation, InsufficientRanging, InvalidExchange, ToolkitError
from hmiwlan.events import SECOND, Engine, Rng
from hmiwlan.localization import MIN_ANCHORS, simulate_exchange, tof_from_twr, trilaterate
from hmiwlan.models import Anchor, RangingNoise

logger = logging.getLogger(__name__)

ROOM = (10.0, 10.0, 3.0)
DEFAULT_ANCHORS = (
    Anchor(0, (2.0, 2.0, 0.0)),
    Anchor(1, (8.0, 8.0, 0.0)),
    Anchor(2, (8.0, 2.0, 3.0)),
    Anchor(3, (2.0, 8.0, 3.0)),
)
FIX_COLUMNS = ["trial", "true_x", "true_y", "true_z", "est_x", "est_y", "est_z",
               "err_m", "residual_rms", "iterations"]

ExchangeRecord = namedtuple("ExchangeRecord", ["round", "ms_id", "anchor_id", "start_ns", "end_ns", "distance"])
RoundRecord = namedtuple("RoundRecord", ["round", "ms_id", "start_ns", "end_ns"])


class _Round(object):

    def __init__(self, index, ms_id, position, steps):
        self.index = index
        self.ms_id = ms_id
        self.position = np.asarray(position, dtype=float)
        self.steps = steps
        self.start = None
        self.distances = {}

    def __repr__(self):
        return "<Round: {} ms={}>".format(self.index, self.ms_id)


class LocalizationServer(object):
    """Commands TWR exchanges with every registered anchor, one exchange at a
    time, and trilaterates the averaged distances.

    Requests made while a round is running wait for it to finish.
    """

    def __init__(self, engine=None, seed=1):
        self.engine = engine or Engine()
        self.rng = Rng(seed)
        self.anchors = {}
        self.fixes = {}
        self.exchange_log = []
        self.rounds = []
        self.results = {}
        self._queue = deque()
        self._busy = False
        self._next_round = 0
        self.setup()
        self.engine.on("twr")(self._on_exchange)
        self.engine.on("fix")(self._on_fix)

    def register_anchor(self, anchor):
        if anchor.id in self.anchors:
            raise ContractViolation("anchor id {} registered twice".format(anchor.id))
        self.anchors[anchor.id] = anchor
        return anchor

    def setup(self, exchanges_per_anchor=1, processing_delay=100e-6, timeout=1e-3,
              noise=RangingNoise(), lost_anchors=(), loss_probability=0.0):
        if exchanges_per_anchor < 1:
            raise ContractViolation("exchanges_per_anchor must be at least 1")
        if processing_delay < 0 or timeout <= 0:
            raise ContractViolation("processing delay must be >= 0 and timeout > 0")
        if not 0.0 <= loss_probability <= 1.0:
            raise ContractViolation("loss probability must lie in [0, 1]")
        self.exchanges_per_anchor = int(exchanges_per_anchor)
        self.processing_delay = float(processing_delay)
        self.timeout_ns = int(math.ceil(timeout * SECOND))
        self.noise = noise
        self.lost_anchors = set(lost_anchors)
        self.loss_probability = float(loss_probability)
        return self

    def request(self, ms_id, position):
        """Queues a localization round; returns its index."""
        if len(self.anchors) < MIN_ANCHORS:
            raise InsufficientRanging("{} anchors registered, need {}".format(len(self.anchors), MIN_ANCHORS))
        steps = [(anchor_id, j) for anchor_id in self.anchors for j in range(self.exchanges_per_anchor)]
        entry = _Round(self._next_round, ms_id, position, steps)
        self._next_round += 1
        self._queue.append(entry)
        if not self._busy:
            self._start_next()
        return entry.index

    def locate(self, ms_id, position):
        index = self.request(ms_id, position)
        self.engine.run()
        outcome = self.results.pop(index)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome

    def _start_next(self):
        if not self._queue:
            self._busy = False
            return
        self._busy = True
        entry = self._queue.popleft()
        entry.start = self.engine.now
        self.engine.schedule(self.engine.now, "twr", payload=(entry, 0))

    def _lost(self, entry, anchor_id, j):
        if anchor_id in self.lost_anchors:
            return True
        if self.loss_probability > 0:
            return self.rng.child("loss", entry.index, anchor_id, j).random() < self.loss_probability
        return False

    def _on_exchange(self, event):
        entry, position = event.payload
        anchor_id, j = entry.steps[position]
        now = event.time
        distance = None
        if self._lost(entry, anchor_id, j):
            end = now + self.timeout_ns
        else:
            exchange = simulate_exchange(entry.position, self.anchors[anchor_id], self.noise,
                                         self.processing_delay, self.rng.child("twr", entry.index, anchor_id, j))
            end = now + max(0, int(math.ceil(exchange.t_round * SECOND)))
            try:
                distance = tof_from_twr(exchange)
            except InvalidExchange as e:
                logger.debug("round %d: %s", entry.index, e)
        if distance is not None:
            entry.distances.setdefault(anchor_id, []).append(distance)
        self.exchange_log.append(ExchangeRecord(entry.index, entry.ms_id, anchor_id, now, end, distance))
        if position + 1 < len(entry.steps):
            self.engine.schedule(end, "twr", payload=(entry, position + 1))
        else:
            self.engine.schedule(end, "fix", payload=entry)

    def _on_fix(self, event):
        entry = event.payload
        self.rounds.append(RoundRecord(entry.index, entry.ms_id, entry.start, event.time))
        measurements = [(self.anchors[a], float(np.mean(d))) for a, d in entry.distances.items()]
        try:
            if len(measurements) < MIN_ANCHORS:
                raise InsufficientRanging("ms {}: {} of {} anchors answered".format(
                    entry.ms_id, len(measurements), len(self.anchors)))
            estimate = trilaterate(measurements)
            self.fixes[(entry.ms_id, event.time)] = estimate
            self.results[entry.index] = estimate
        except ToolkitError as e:
            logger.debug("round %d failed: %s", entry.index, e)
            self.results[entry.index] = e
        self._start_next()


@timed("localization")
def accuracy_study(anchors=DEFAULT_ANCHORS, noise=RangingNoise(sigma_d=1.0), trials=1000, seed=1,
                   exchanges_per_anchor=1, processing_delay=100e-6, path=None, room=ROOM):
    """Monte-Carlo fixes for MS positions drawn uniformly in the room, or
    taken in turn from `path`. Returns (fixes frame, 3-D RMSE in meters).

    Trials without a fix keep their row with NaN estimates and are left out
    of the RMSE.
    """
    server = LocalizationServer(seed=seed)
    for anchor in anchors:
        server.register_anchor(anchor)
    server.setup(exchanges_per_anchor=exchanges_per_anchor, processing_delay=processing_delay, noise=noise)
    positions = server.rng.child("positions")
    truths = []
    for trial in range(trials):
        if path:
            truth = np.asarray(path[trial % len(path)], dtype=float)
        else:
            truth = positions.uniform(0.0, 1.0, size=3) * np.asarray(room, dtype=float)
        truths.append(truth)
        server.request(trial, truth)
    server.engine.run()

    rows = []
    for trial, truth in enumerate(truths):
        outcome = server.results[trial]
        if isinstance(outcome, Exception):
            rows.append([trial, truth[0], truth[1], truth[2]] + [np.nan] * 5 + [0])
            continue
        est = outcome.position
        rows.append([trial, truth[0], truth[1], truth[2], est[0], est[1], est[2],
                     float(np.linalg.norm(est - truth)), outcome.residual_rms, outcome.iterations])
    frame = pd.DataFrame(rows, columns=FIX_COLUMNS)
    fixed = int(frame["err_m"].notna().sum())
    if fixed < trials:
        logger.warning("%d of %d trials produced no fix", trials - fixed, trials)
    rmse = float(np.sqrt(np.mean(frame["err_m"].dropna() ** 2))) if fixed else float("nan")
    logger.info("localization: %d fixes, rmse %.3f m (sigma_d %.2f m)", fixed, rmse, noise.sigma_d)
    return frame, rmse
