"""Monte-Carlo bit error ratio through the full GFDM chain."""
import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import erfc

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation, NoFrameDetected
from hmiwlan.events import Rng, derive_seed
from hmiwlan.models import ChannelKind, Constellation, ceil_div
from hmiwlan.phy.channel import apply_channel, awgn, frequency_response, noise_sigma, rotate
from hmiwlan.phy.estimation import ls_channel_estimate
from hmiwlan.phy.framing import build_frame, payload_offset, preamble_offset
from hmiwlan.phy.modem import GfdmModem
from hmiwlan.phy.sync import schmidl_cox_sync

logger = logging.getLogger(__name__)

MIN_BITS = 10 ** 4
BATCH_BLOCKS = 512


@dataclass(frozen=True)
class BerResult:
    ber: float
    bits: int
    errors: int
    frames: int
    missed_frames: int = 0


def theoretical_ber(constellation, ebn0_db):
    """Uncoded AWGN bit error ratio with Gray mapping."""
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    if constellation in (Constellation.BPSK, Constellation.QPSK):
        return 0.5 * erfc(np.sqrt(ebn0))
    return 3.0 / 8.0 * erfc(np.sqrt(0.4 * ebn0))


def binomial_interval(p, n, sigmas=3.0):
    half = sigmas * np.sqrt(p * (1.0 - p) / n)
    return max(0.0, p - half), p + half


def _sigma(channel):
    return 0.0 if channel.kind == ChannelKind.IDEAL else noise_sigma(channel.snr_db)


def _genie_blocks(modem, channel, n_blocks, bits_rng, noise_rng):
    """Known timing, CFO and channel: blocks pass in batches."""
    config = modem.config
    h = frequency_response(channel, config.n)
    sigma = _sigma(channel)
    errors = frames = 0
    remaining = n_blocks
    while remaining:
        count = min(BATCH_BLOCKS, remaining)
        bits = bits_rng.integers(0, 2, size=(count, config.bits_per_block), dtype=np.int8)
        x = modem.modulate_bits(bits)
        y = np.fft.ifft(np.fft.fft(x, axis=1) * h, axis=1) + awgn(x.shape, sigma, noise_rng)
        decided = modem.demodulate_bits(y, h)
        errors += int(np.count_nonzero(decided != bits.reshape(-1)))
        frames += count
        remaining -= count
    return errors, frames, 0


def _framed_blocks(modem, channel, n_blocks, bits_rng, noise_rng, ideal_sync, ideal_csi):
    """One frame per block: preamble, sync, estimation, demodulation."""
    config = modem.config
    h_true = frequency_response(channel, config.n)
    errors = missed = 0
    for _ in range(n_blocks):
        bits = bits_rng.integers(0, 2, size=config.bits_per_block, dtype=np.int8)
        frame = build_frame(modem.modulate_bits(bits)[0], config)
        rx = apply_channel(frame.samples, channel, noise_rng, config.k, tail=config.n)
        if ideal_sync:
            start, cfo = channel.delay, channel.cfo
        else:
            try:
                found = schmidl_cox_sync(rx, config)
            except NoFrameDetected:
                missed += 1
                errors += bits.size
                continue
            start, cfo = found.frame_start, found.cfo_hat
        pre_at = start + preamble_offset(config)
        pay_at = start + payload_offset(config)
        if pre_at < 0 or pay_at + config.n > rx.size:
            missed += 1
            errors += bits.size
            continue
        rx = rotate(rx, -cfo, config.k)
        h = h_true if ideal_csi else ls_channel_estimate(rx[pre_at:pre_at + config.n], frame.preamble)
        decided = modem.demodulate_bits(rx[pay_at:pay_at + config.n], h)
        errors += int(np.count_nonzero(decided != bits))
    return errors, n_blocks, missed


@timed("ber")
def ber_run(config, channel, n_bits, seed, ideal_sync=False, ideal_csi=False):
    if n_bits < MIN_BITS:
        raise ContractViolation("ber_run needs at least {} bits, got {}".format(MIN_BITS, n_bits))
    modem = GfdmModem(config)
    rng = Rng(seed)
    bits_rng, noise_rng = rng.child("bits"), rng.child("noise")
    n_blocks = ceil_div(int(n_bits), config.bits_per_block)
    if ideal_sync and ideal_csi:
        errors, frames, missed = _genie_blocks(modem, channel, n_blocks, bits_rng, noise_rng)
    else:
        errors, frames, missed = _framed_blocks(modem, channel, n_blocks, bits_rng, noise_rng,
                                                ideal_sync, ideal_csi)
    bits = n_blocks * config.bits_per_block
    if missed:
        logger.warning("%d of %d frames not detected at snr %.1f dB", missed, frames, channel.snr_db)
    return BerResult(errors / bits, bits, errors, frames, missed)


def ber_sweep(config, channel, snr_values, n_bits, seed, threads=1, ideal_sync=False, ideal_csi=False):
    """Rows `snr_db,ber,bits` in the order of `snr_values`."""
    if channel.kind == ChannelKind.IDEAL:
        channel = dataclasses.replace(channel, kind=ChannelKind.AWGN)
    points = [(dataclasses.replace(channel, snr_db=float(snr)), derive_seed(seed, "ber", i))
              for i, snr in enumerate(snr_values)]

    def one(item):
        ch, point_seed = item
        return ber_run(config, ch, n_bits, point_seed, ideal_sync, ideal_csi)

    results = Parallel(n_jobs=threads, backend="threading")(delayed(one)(item) for item in points)
    return pd.DataFrame({
        "snr_db": [float(s) for s in snr_values],
        "ber": [r.ber for r in results],
        "bits": [r.bits for r in results],
    }, columns=["snr_db", "ber", "bits"])
