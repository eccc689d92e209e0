"""Two-way ranging and trilateration."""
import logging

import numpy as np
from scipy import linalg

from hmiwlan.errors import DegenerateGeometry, InsufficientRanging, InvalidExchange
from hmiwlan.events import Rng
from hmiwlan.models import Anchor, PositionEstimate, RangingExchange, RangingNoise

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299792458.0
MIN_ANCHORS = 4
MAX_ITERATIONS = 100
STEP_TOLERANCE = 1e-9
RESIDUAL_TOLERANCE = 1e-6
CONDITION_LIMIT = 1e8


def tof_from_twr(exchange: RangingExchange):
    """Distance in meters: c * (t_round - t_reply) / 2."""
    if exchange.t_round < exchange.t_reply:
        raise InvalidExchange("anchor {}: t_round {:.3e} s < t_reply {:.3e} s".format(
            exchange.anchor_id, exchange.t_round, exchange.t_reply))
    return SPEED_OF_LIGHT * (exchange.t_round - exchange.t_reply) / 2.0


def simulate_exchange(true_ms_pos, anchor, noise=RangingNoise(), processing_delay=0.0, seed=0):
    """One TWR exchange; `seed` is an int or an Rng stream to draw the range noise from."""
    if processing_delay < 0:
        raise InvalidExchange("processing delay must be non-negative")
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    distance = float(np.linalg.norm(np.asarray(true_ms_pos, dtype=float) - anchor.xyz))
    error = float(rng.normal(0.0, noise.sigma_d)) if noise.sigma_d > 0 else 0.0
    # a measured range is never negative
    measured = max(0.0, distance + error + noise.bias)
    t_round = 2.0 * measured / SPEED_OF_LIGHT + processing_delay
    return RangingExchange(t_round=t_round, t_reply=processing_delay, anchor_id=anchor.id)


def _positions(measurements):
    points, distances = [], []
    for where, distance in measurements:
        points.append(where.xyz if isinstance(where, Anchor) else np.asarray(where, dtype=float))
        distances.append(float(distance))
    return np.array(points, dtype=float).reshape(-1, 3), np.array(distances)


def geometry_condition(anchors):
    """Ratio of largest to smallest singular value of the centred anchor cloud."""
    centred = anchors - anchors.mean(axis=0)
    s = np.linalg.svd(centred, compute_uv=False)
    if s[0] == 0:
        return np.inf
    return np.inf if s[-1] <= s[0] * 1e-15 else s[0] / s[-1]


def position_dilution(anchors, point):
    """PDOP at `point`: sqrt(trace((J^T J)^-1)) over the unit vectors to the anchors.

    The 3-D error of a least-squares fix from ranges with standard deviation
    sigma_d is about sigma_d * PDOP. Four anchors cannot do better than 1.5.
    """
    anchors, _ = _positions([(a, 0.0) for a in anchors])
    v = np.asarray(point, dtype=float) - anchors
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0):
        v, norms = v[norms > 0], norms[norms > 0]
    jac = v / norms[:, None]
    gram = jac.T @ jac
    if np.linalg.matrix_rank(gram) < 3:
        return np.inf
    return float(np.sqrt(np.trace(linalg.inv(gram))))


def linearized_seed(anchors, distances):
    """Closed-form estimate from subtracting the first sphere equation from the rest."""
    a0 = anchors[0]
    rows = 2.0 * (anchors[1:] - a0)
    rhs = distances[0] ** 2 - distances[1:] ** 2 + np.sum(anchors[1:] ** 2, axis=1) - np.sum(a0 ** 2)
    solution, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    return solution


def _cost(p, anchors, distances):
    return float(np.sum((np.linalg.norm(p - anchors, axis=1) - distances) ** 2))


def levenberg_marquardt(anchors, distances, start):
    """Damped Gauss-Newton on sum (|p - a_i| - d_i)^2. Returns (p, cost, iterations, converged)."""
    p = np.asarray(start, dtype=float).copy()
    lam = 1e-3
    cost = _cost(p, anchors, distances)
    converged = False
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        v = p - anchors
        norms = np.linalg.norm(v, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        jac = np.where(norms[:, None] > 0, v / safe[:, None], 0.0)
        residual = norms - distances
        step = linalg.solve(jac.T @ jac + lam * np.eye(3), -(jac.T @ residual), assume_a="sym")
        candidate = p + step
        candidate_cost = _cost(candidate, anchors, distances)
        if candidate_cost <= cost:
            p, cost = candidate, candidate_cost
            lam = max(lam / 10.0, 1e-12)
        else:
            lam *= 10.0
        if np.linalg.norm(step) < STEP_TOLERANCE:
            converged = True
            break
    return p, cost, iterations, converged


def trilaterate(measurements, initial_guess=None):
    """Least-squares 3-D fix from at least four (anchor, distance) pairs.

    Starts at the anchor centroid unless a guess is given. If that leaves a
    residual, the linearized closed-form seed is tried as well and the
    lower-cost fix wins.
    """
    anchors, distances = _positions(measurements)
    if len(distances) < MIN_ANCHORS:
        raise InsufficientRanging("trilateration needs {} ranges, got {}".format(MIN_ANCHORS, len(distances)))
    condition = geometry_condition(anchors)
    if condition > CONDITION_LIMIT:
        raise DegenerateGeometry("anchors are coplanar or duplicated", condition)
    start = anchors.mean(axis=0) if initial_guess is None else np.asarray(initial_guess, dtype=float)
    best = levenberg_marquardt(anchors, distances, start)
    if initial_guess is None and np.sqrt(best[1] / len(distances)) > RESIDUAL_TOLERANCE:
        second = levenberg_marquardt(anchors, distances, linearized_seed(anchors, distances))
        if second[1] < best[1]:
            best = second
    p, cost, iterations, converged = best
    return PositionEstimate(position=p, residual_rms=float(np.sqrt(cost / len(distances))),
                            iterations=iterations, converged=converged)
