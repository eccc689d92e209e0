"""GFDM resource mapping, modulation and demodulation.

A block carries K subcarriers by M subsymbols. With the symbol vector
indexed as m * K + k, the N x N modulation matrix is

    A[n, m*K + k] = g[(n - m*K) mod N] * exp(j*2*pi*k*n/K)

so one block is x = A @ vec(d). M = 1 with a rectangular pulse gives the
unitary inverse DFT (OFDM), K = 1 a single-carrier block.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from hmiwlan.errors import ContractViolation, NonInvertibleConfiguration, SymbolCountMismatch
from hmiwlan.models import Constellation, GfdmConfig, PulseKind, Receiver, ResourceGrid
from hmiwlan.phy.constellation import bits_to_symbols, symbols_to_bits
from hmiwlan.phy.pulses import prototype_pulse

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e10
H_FLOOR = 1e-12

SHIPPED_CONFIGS = {
    "ofdm": GfdmConfig(k=64, m=1, pulse=PulseKind.RECT, rolloff=0.0, cp_len=16, cs_len=0,
                       constellation=Constellation.QPSK, receiver=Receiver.MF),
    "gfdm": GfdmConfig(k=16, m=5, pulse=PulseKind.RC, rolloff=0.5, cp_len=16, cs_len=8,
                       constellation=Constellation.QPSK, receiver=Receiver.ZF),
    "gfdm_rrc": GfdmConfig(k=16, m=5, pulse=PulseKind.RRC, rolloff=0.5, cp_len=16, cs_len=0,
                           constellation=Constellation.QPSK, receiver=Receiver.ZF),
    "gfdm_16qam": GfdmConfig(k=32, m=7, pulse=PulseKind.RC, rolloff=0.1, cp_len=16, cs_len=0,
                             constellation=Constellation.QAM16, receiver=Receiver.ZF),
    "single_carrier": GfdmConfig(k=1, m=64, pulse=PulseKind.RC, rolloff=0.5, cp_len=8, cs_len=0,
                                 constellation=Constellation.QPSK, receiver=Receiver.ZF),
}


def map_resources(symbols, config):
    """Fills the K x M grid column by column over the active subcarriers."""
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    active = list(config.active)
    if symbols.size != len(active) * config.m:
        raise SymbolCountMismatch("expected {} symbols, got {}".format(len(active) * config.m, symbols.size))
    d = np.zeros((config.k, config.m), dtype=complex)
    d[active, :] = symbols.reshape(config.m, len(active)).T
    return ResourceGrid(d)


def demap_resources(grid, config):
    d = grid.d if isinstance(grid, ResourceGrid) else np.asarray(grid)
    return d[list(config.active), :].T.reshape(-1)


@lru_cache(maxsize=32)
def modulation_matrix(config):
    n, k = config.n, config.k
    g = prototype_pulse(config)
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    m_idx, k_idx = cols // k, cols % k
    a = g[(rows - m_idx * k) % n] * np.exp(2j * np.pi * k_idx * rows / k)
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def receiver_matrix(config):
    a = modulation_matrix(config)
    if config.receiver == Receiver.MF:
        b = a.conj().T
    else:
        condition = np.linalg.cond(a)
        if not np.isfinite(condition) or condition > CONDITION_LIMIT:
            raise NonInvertibleConfiguration(
                "zero-forcing needs an invertible modulation matrix; K={} M={} {} has condition {:.3e}".format(
                    config.k, config.m, config.pulse.value, condition))
        b = linalg.inv(a)
    b.setflags(write=False)
    return b


def _grid_vector(grid, config):
    d = grid.d if isinstance(grid, ResourceGrid) else np.asarray(grid)
    if d.shape != (config.k, config.m):
        raise ContractViolation("grid shape {} does not match K x M = {}".format(d.shape, (config.k, config.m)))
    return d.T.reshape(-1)


def gfdm_modulate(grid, config):
    return modulation_matrix(config) @ _grid_vector(grid, config)


def equalize(samples, h):
    """Divides each frequency bin by the channel gain; bins with |H| near 0 are zeroed."""
    spectrum = np.fft.fft(samples, axis=-1)
    h = np.asarray(h, dtype=complex)
    safe = np.abs(h) > H_FLOOR
    spectrum = np.where(safe, spectrum / np.where(safe, h, 1.0), 0.0)
    return np.fft.ifft(spectrum, axis=-1)


def gfdm_demodulate(samples, config, h=None):
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[-1] != config.n:
        raise ContractViolation("expected {} samples, got {}".format(config.n, samples.shape[-1]))
    if h is not None:
        samples = equalize(samples, h)
    vec = receiver_matrix(config) @ samples
    return ResourceGrid(vec.reshape(config.m, config.k).T)


@dataclass(frozen=True)
class LatencyReport:
    block_samples: int
    frame_samples: int
    block_latency_us: float
    frame_latency_us: float


def latency_report(config, sample_rate_hz):
    """Algorithmic latency: a receiver must buffer a whole guarded block."""
    block = config.cp_len + config.n + config.cs_len
    return LatencyReport(block, config.frame_len, block / sample_rate_hz * 1e6,
                         config.frame_len / sample_rate_hz * 1e6)


class GfdmModem(object):
    """Bit-level modem for one waveform configuration.

    `reconfigure` swaps the waveform between frames; matrices for configurations
    already seen come from the cache.
    """

    def __init__(self, config):
        self.config = None
        self.reconfigure(config)

    def reconfigure(self, config):
        if isinstance(config, str):
            config = SHIPPED_CONFIGS[config]
        self.config = config
        modulation_matrix(config)
        receiver_matrix(config)
        logger.debug("modem configured for K=%d M=%d %s", config.k, config.m, config.pulse.value)
        return self

    def modulate_bits(self, bits):
        """Bits for one or more whole blocks -> samples, one row per block."""
        config = self.config
        bits = np.asarray(bits, dtype=np.int8).reshape(-1, config.bits_per_block)
        symbols = bits_to_symbols(bits.reshape(-1), config.constellation).reshape(bits.shape[0], -1)
        vectors = np.zeros((bits.shape[0], config.n), dtype=complex)
        for row, block in enumerate(symbols):
            vectors[row] = _grid_vector(map_resources(block, config), config)
        return vectors @ modulation_matrix(config).T

    def demodulate_bits(self, samples, h=None):
        config = self.config
        samples = np.atleast_2d(np.asarray(samples, dtype=complex))
        if h is not None:
            samples = equalize(samples, h)
        vectors = samples @ receiver_matrix(config).T
        bits = []
        for vec in vectors:
            grid = ResourceGrid(vec.reshape(config.m, config.k).T)
            bits.append(symbols_to_bits(demap_resources(grid, config), config.constellation))
        return np.concatenate(bits)
