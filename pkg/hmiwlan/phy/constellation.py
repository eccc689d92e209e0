"""Gray-mapped unit-power constellations and hard decisions."""
import numpy as np

from hmiwlan.errors import SymbolCountMismatch
from hmiwlan.models import Constellation

_QAM16_SCALE = np.sqrt(10.0)


def bits_to_symbols(bits, constellation):
    bits = np.asarray(bits, dtype=np.int8)
    bps = constellation.bits_per_symbol
    if bits.size % bps:
        raise SymbolCountMismatch("{} bits do not fill {} symbols".format(bits.size, constellation.value))
    b = bits.reshape(-1, bps)
    if constellation == Constellation.BPSK:
        return (1.0 - 2.0 * b[:, 0]).astype(complex)
    if constellation == Constellation.QPSK:
        return ((1.0 - 2.0 * b[:, 0]) + 1j * (1.0 - 2.0 * b[:, 1])) / np.sqrt(2.0)
    # Gray axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    levels = np.array([[-3.0, -1.0], [3.0, 1.0]])
    re = levels[b[:, 0], b[:, 1]]
    im = levels[b[:, 2], b[:, 3]]
    return (re + 1j * im) / _QAM16_SCALE


def _qam16_axis(values):
    """Inverse of the Gray axis mapping: level -> (first bit, second bit)."""
    first = (values > 0).astype(np.int8)
    second = (np.abs(values) < 2.0).astype(np.int8)
    return first, second


def symbols_to_bits(symbols, constellation):
    symbols = np.asarray(symbols, dtype=complex)
    if constellation == Constellation.BPSK:
        return (symbols.real < 0).astype(np.int8)
    if constellation == Constellation.QPSK:
        out = np.empty((symbols.size, 2), dtype=np.int8)
        out[:, 0] = symbols.real < 0
        out[:, 1] = symbols.imag < 0
        return out.reshape(-1)
    scaled = symbols * _QAM16_SCALE
    b0, b1 = _qam16_axis(scaled.real)
    b2, b3 = _qam16_axis(scaled.imag)
    return np.stack([b0, b1, b2, b3], axis=1).reshape(-1)
