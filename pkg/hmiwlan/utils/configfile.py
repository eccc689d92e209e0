"""Run configuration files (TOML or JSON, chosen by extension).

The schema is flat: every CLI flag has a key of the same name with dashes
replaced by underscores.
"""
import difflib
import json
import logging
import os

import toml

from hmiwlan.errors import ConfigError, UnknownKeyError

logger = logging.getLogger(__name__)

# key: (type, default)
SCHEMA = {
    # global
    "seed": (int, 1),
    "out_dir": (str, "out"),
    "threads": (int, 1),
    "log_level": (str, "INFO"),
    "out": (str, ""),
    "data": (str, ""),
    # mac-sim
    "access": (str, "hcca"),
    "scheduler": (str, "ref"),
    "n_ar": (str, "5..50:5"),
    "n_safety": (int, 2),
    "duration": (float, 30.0),
    "random_phases": (bool, False),
    "safety_msi_ms": (float, 8.0),
    "safety_period_ms": (float, 8.0),
    "safety_payload_bytes": (int, 64),
    "ar_msi_ms": (float, 50.0),
    "ar_period_ms": (float, 50.0),
    "ar_payload_bytes": (int, 64000),
    "ar_msdu_bytes": (int, 1100),
    "slot_us": (float, 9.0),
    "sifs_us": (float, 16.0),
    "difs_us": (float, 34.0),
    "pifs_us": (float, 25.0),
    "cw_min": (int, 15),
    "cw_max": (int, 1023),
    "data_rate_mbps": (float, 65.0),
    "ack_us": (float, 44.0),
    "overhead_us": (float, 40.0),
    "beacon_interval_ms": (float, 48.0),
    "beacon_bytes": (int, 100),
    "retry_limit": (int, 7),
    "cfp_max_fraction": (float, 0.4),
    # gfdm-phy
    "preset": (str, "gfdm"),
    "k": (int, 16),
    "m": (int, 5),
    "active_subcarriers": (list, []),
    "pulse": (str, "rc"),
    "rolloff": (float, 0.5),
    "cp_len": (int, 16),
    "cs_len": (int, 8),
    "constellation": (str, "qpsk"),
    "receiver": (str, "zf"),
    "window_len": (int, 0),
    "channel": (str, "awgn"),
    "taps": (list, []),
    "cfo": (float, 0.0),
    "delay": (int, 0),
    "snr_db": (str, "0..10:2"),
    "ebn0": (bool, False),
    "bits": (int, 1000000),
    "ideal_sync": (bool, False),
    "ideal_csi": (bool, False),
    "iq_out": (str, ""),
    # localization
    "anchors": (str, ""),
    "path": (str, ""),
    "sigma_d": (float, 1.0),
    "bias": (float, 0.0),
    "trials": (int, 1000),
    "exchanges_per_anchor": (int, 1),
    "processing_delay_us": (float, 100.0),
    # nlos-id
    "n_per_class": (int, 1000),
    "tap_count": (int, 16),
    "los_k_db": (float, 6.0),
    "los_decay_taps": (float, 3.0),
    "nlos_decay_taps": (float, 9.0),
    "shadowing_db": (float, 0.0),
    "subsets": (str, "s1,s2,s3,s4"),
    "n_trees": (int, 100),
    "max_depth": (int, 8),
    "min_leaf": (int, 2),
    "split_ratio": (float, 0.7),
}

DEFAULTS = {key: default for key, (_, default) in SCHEMA.items()}


def _check_type(key, value):
    expected = SCHEMA[key][0]
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is int and isinstance(value, bool):
        raise ConfigError("key '{}' expects int, got bool".format(key))
    if not isinstance(value, expected):
        raise ConfigError("key '{}' expects {}, got {}".format(key, expected.__name__, type(value).__name__))
    return value


def resolve(overrides):
    """Applies `overrides` on top of the documented defaults."""
    resolved = dict(DEFAULTS)
    for key, value in overrides.items():
        if key not in SCHEMA:
            close = difflib.get_close_matches(key, SCHEMA.keys(), n=1)
            raise UnknownKeyError(key, close[0] if close else None)
        resolved[key] = _check_type(key, value)
    return resolved


def parse_config(text, fmt):
    if not text.strip():
        return {}
    if fmt == "toml":
        try:
            return toml.loads(text)
        except toml.TomlDecodeError as e:
            raise ConfigError("invalid TOML: {}".format(e.msg), e.lineno, e.colno)
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("invalid JSON: {}".format(e.msg), e.lineno, e.colno)
        if not isinstance(data, dict):
            raise ConfigError("JSON configuration must be an object")
        return data
    raise ConfigError("unsupported configuration format '{}'".format(fmt))


def read_overrides(path):
    """The validated keys a configuration file sets, without defaults."""
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext not in ("toml", "json"):
        raise ConfigError("configuration file must end in .toml or .json: {}".format(path))
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("cannot read configuration {}: {}".format(path, e.strerror))
    overrides = parse_config(text, ext)
    resolve(overrides)
    logger.debug("loaded %d keys from %s", len(overrides), path)
    return overrides


def load_config(path):
    return resolve(read_overrides(path))


def parse_range(text, cast=int):
    """Parses `A..B[:step]` (inclusive) or a single value into a list."""
    text = str(text).strip()
    try:
        if ".." not in text:
            return [cast(text)]
        bounds, _, step = text.partition(":")
        lo, hi = bounds.split("..")
        lo, hi = cast(lo), cast(hi)
        step = cast(step) if step else cast(1)
    except ValueError:
        raise ConfigError("cannot parse range '{}'".format(text))
    if step <= 0 or hi < lo:
        raise ConfigError("empty range '{}'".format(text))
    values = []
    count = int(round((hi - lo) / step))
    for i in range(count + 1):
        value = lo + i * step
        if value > hi + 1e-9:
            break
        values.append(cast(value) if cast is int else round(value, 9))
    return values
