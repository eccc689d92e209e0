"""Frame assembly: [CP | preamble | CS] followed by [CP | payload | CS]."""
from functools import lru_cache

import numpy as np

from hmiwlan.errors import ContractViolation
from hmiwlan.events import Rng
from hmiwlan.models import Frame

PREAMBLE_SEED = 0x5C0A


@lru_cache(maxsize=32)
def _preamble(n):
    rng = Rng(PREAMBLE_SEED, ("preamble", n))
    half = n // 2
    bits = rng.integers(0, 2, size=(half, 2))
    symbols = ((1.0 - 2.0 * bits[:, 0]) + 1j * (1.0 - 2.0 * bits[:, 1])) / np.sqrt(2.0)
    preamble = np.concatenate([symbols, symbols])
    preamble.setflags(write=False)
    return preamble


def make_preamble(config):
    """Pseudo-random QPSK half repeated twice; length N, unit sample power."""
    return _preamble(config.n)


def edge_window(length):
    """Raised-cosine ramp rising over `length` samples."""
    if length <= 0:
        return np.ones(0)
    return 0.5 * (1.0 - np.cos(np.pi * (np.arange(length) + 0.5) / length))


def add_guards(block, config):
    block = np.asarray(block, dtype=complex)
    cp, cs = config.cp_len, config.cs_len
    if cp > block.size or cs > block.size:
        raise ContractViolation("guard longer than the block it protects")
    guarded = np.concatenate([block[block.size - cp:], block, block[:cs]])
    w = config.window_len
    if w:
        guarded[:w] = guarded[:w] * edge_window(w)
        if cs >= w:
            guarded[guarded.size - w:] = guarded[guarded.size - w:] * edge_window(w)[::-1]
    return guarded


def build_frame(payload_samples, config):
    payload = np.asarray(payload_samples, dtype=complex)
    if payload.size != config.n:
        raise ContractViolation("payload must be one block of N = {} samples".format(config.n))
    preamble = make_preamble(config)
    samples = np.concatenate([add_guards(preamble, config), add_guards(payload, config)])
    return Frame(preamble=np.array(preamble), payload=payload, samples=samples)


def preamble_offset(config):
    return config.cp_len


def payload_offset(config):
    return 2 * config.cp_len + config.cs_len + config.n
