"""Frequency-domain least-squares channel estimation from the preamble."""
import numpy as np

from hmiwlan.errors import ContractViolation

PILOT_FLOOR = 1e-12


def ls_channel_estimate(rx_preamble, tx_preamble, pilots=None):
    """H on every DFT bin of the preamble.

    Pilot bins get RX/TX. Bins that are not pilots, or whose transmitted
    energy is below the floor, are linearly interpolated on the real and
    imaginary parts; bins beyond the outermost pilots take the nearest
    pilot value.
    """
    rx = np.fft.fft(np.asarray(rx_preamble, dtype=complex))
    tx = np.fft.fft(np.asarray(tx_preamble, dtype=complex))
    if rx.size != tx.size:
        raise ContractViolation("received and transmitted preambles differ in length")
    bins = np.arange(tx.size)
    usable = np.abs(tx) >= PILOT_FLOOR
    if pilots is not None:
        mask = np.zeros(tx.size, dtype=bool)
        mask[np.asarray(pilots, dtype=int)] = True
        usable &= mask
    if not usable.any():
        raise ContractViolation("no usable pilot bins in the preamble")
    h = np.empty(tx.size, dtype=complex)
    h[usable] = rx[usable] / tx[usable]
    missing = ~usable
    if missing.any():
        known = bins[usable]
        h[missing] = (np.interp(bins[missing], known, h[usable].real)
                      + 1j * np.interp(bins[missing], known, h[usable].imag))
    return h
