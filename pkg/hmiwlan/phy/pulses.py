"""Prototype filters for the GFDM modulator, N = K * M samples, unit energy."""
from functools import lru_cache

import numpy as np

from hmiwlan.models import PulseKind


def _circular_time(n, k):
    """Sample times in symbol periods, centred on sample 0 and wrapped."""
    idx = np.arange(n)
    return ((idx + n // 2) % n - n // 2) / k


def raised_cosine(t, rolloff):
    t = np.asarray(t, dtype=float)
    if rolloff == 0:
        return np.sinc(t)
    out = np.sinc(t) * np.cos(np.pi * rolloff * t)
    denom = 1.0 - (2.0 * rolloff * t) ** 2
    singular = np.isclose(denom, 0.0)
    out = np.where(singular, np.pi / 4 * np.sinc(1.0 / (2.0 * rolloff)), out / np.where(singular, 1.0, denom))
    return out


def root_raised_cosine(t, rolloff):
    t = np.asarray(t, dtype=float)
    if rolloff == 0:
        return np.sinc(t)
    a = rolloff
    out = np.empty_like(t)
    zero = np.isclose(t, 0.0)
    edge = np.isclose(np.abs(t), 1.0 / (4.0 * a))
    rest = ~(zero | edge)
    tr = t[rest]
    out[rest] = (np.sin(np.pi * tr * (1 - a)) + 4 * a * tr * np.cos(np.pi * tr * (1 + a))) / (
        np.pi * tr * (1 - (4 * a * tr) ** 2))
    out[zero] = 1 - a + 4 * a / np.pi
    out[edge] = a / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * a)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * a)))
    return out


@lru_cache(maxsize=64)
def _pulse(kind, rolloff, k, m):
    n = k * m
    if kind == PulseKind.RECT:
        g = np.zeros(n)
        g[:k] = 1.0
    else:
        t = _circular_time(n, k)
        g = raised_cosine(t, rolloff) if kind == PulseKind.RC else root_raised_cosine(t, rolloff)
    g = g / np.sqrt(np.sum(np.abs(g) ** 2))
    g.setflags(write=False)
    return g


def prototype_pulse(config):
    return _pulse(config.pulse, config.rolloff, config.k, config.m)
