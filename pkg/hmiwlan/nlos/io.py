"""Binary CIR files.

Header: record count and tap count as little-endian u32. Each record holds
the taps as interleaved float64 I/Q followed by a u8 label.
"""
import os

import numpy as np

from hmiwlan.errors import ConfigError
from hmiwlan.models import CirDataset, Label

HEADER = np.dtype([("count", "<u4"), ("tap_count", "<u4")])


def record_dtype(tap_count):
    return np.dtype([("iq", "<f8", (2 * tap_count,)), ("label", "u1")])


def write_cirs(path, dataset):
    directory = os.path.dirname(str(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    header = np.array([(len(dataset), dataset.tap_count)], dtype=HEADER)
    records = np.empty(len(dataset), dtype=record_dtype(dataset.tap_count))
    iq = np.empty((len(dataset), 2 * dataset.tap_count))
    iq[:, 0::2] = dataset.taps.real
    iq[:, 1::2] = dataset.taps.imag
    records["iq"] = iq
    records["label"] = dataset.labels
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(records.tobytes())


def read_cirs(path):
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise ConfigError("cannot read CIR file {}: {}".format(path, e.strerror))
    if len(raw) < HEADER.itemsize:
        raise ConfigError("CIR file {} is shorter than its header".format(path))
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    count, tap_count = int(header["count"]), int(header["tap_count"])
    dtype = record_dtype(tap_count)
    expected = HEADER.itemsize + count * dtype.itemsize
    if len(raw) != expected:
        raise ConfigError("CIR file {} holds {} bytes, header announces {}".format(path, len(raw), expected))
    records = np.frombuffer(raw, dtype=dtype, offset=HEADER.itemsize, count=count)
    labels = records["label"]
    if np.any(labels > Label.UNKNOWN):
        raise ConfigError("CIR file {} has labels outside 0..2".format(path))
    iq = records["iq"]
    return CirDataset(iq[:, 0::2] + 1j * iq[:, 1::2], labels.copy())
