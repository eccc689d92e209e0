"""Sample dumps: interleaved little-endian float64 I/Q, `.iq` extension."""
import logging

import numpy as np

from hmiwlan.errors import ConfigError

logger = logging.getLogger(__name__)

IQ_DTYPE = np.dtype("<f8")


def write_iq(path, samples):
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    interleaved = np.empty(2 * samples.size, dtype=IQ_DTYPE)
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    interleaved.tofile(str(path))
    logger.debug("wrote %d samples to %s", samples.size, path)
    return str(path)


def read_iq(path):
    raw = np.fromfile(str(path), dtype=IQ_DTYPE)
    if raw.size % 2:
        raise ConfigError("{} holds an odd number of float64 values".format(path))
    return raw[0::2] + 1j * raw[1::2]
