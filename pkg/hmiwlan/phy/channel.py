"""Channel models: delay, multipath FIR, carrier frequency offset, AWGN.

SNR is defined against unit average sample power. CFO is in GFDM subcarrier
spacings, i.e. a rotation of exp(j*2*pi*cfo*n/K) on sample n.
"""
import numpy as np

from hmiwlan.models import ChannelKind, ChannelModel


def ebn0_to_snr_db(ebn0_db, bits_per_symbol):
    return ebn0_db + 10.0 * np.log10(bits_per_symbol)


def noise_sigma(snr_db):
    if not np.isfinite(snr_db):
        return 0.0
    return float(np.sqrt(10.0 ** (-snr_db / 10.0)))


def awgn(shape, sigma, rng):
    if sigma == 0:
        return np.zeros(shape, dtype=complex)
    return sigma / np.sqrt(2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def rotate(samples, cfo, k, start=0):
    n = np.arange(start, start + samples.shape[-1])
    return samples * np.exp(2j * np.pi * cfo * n / k)


def frequency_response(channel, n):
    return np.fft.fft(channel.tap_vector(), n)


def apply_channel(samples, channel: ChannelModel, rng, k, tail=0):
    """Passes `samples` through the channel; `tail` extra noise-only samples follow."""
    x = np.asarray(samples, dtype=complex)
    if channel.kind == ChannelKind.IDEAL:
        y = np.concatenate([np.zeros(channel.delay, dtype=complex), x, np.zeros(tail, dtype=complex)])
        return rotate(y, channel.cfo, k)
    taps = channel.tap_vector()
    y = np.convolve(x, taps)
    y = np.concatenate([np.zeros(channel.delay, dtype=complex), y, np.zeros(tail, dtype=complex)])
    y = rotate(y, channel.cfo, k)
    return y + awgn(y.shape, noise_sigma(channel.snr_db), rng)
