"""Subcommand bodies. Each takes the resolved settings and returns the paths
it wrote; the same functions serve fresh runs and manifest re-runs."""
import logging
import os

import numpy as np

from hmiwlan.errors import ConfigError
from hmiwlan.events import Rng
from hmiwlan.localization.io import load_anchors, load_path
from hmiwlan.localization.server import DEFAULT_ANCHORS, accuracy_study
from hmiwlan.mac.sweep import sweep
from hmiwlan.models import (CALIBRATED_AR_BURST_BYTES, AccessMethod, ChannelKind, ChannelModel, Constellation,
                            FeatureSubset, GfdmConfig, PhyParams, PulseKind, RangingNoise, Receiver, Scenario,
                            SchedulerKind, ar_class, safety_class)
from hmiwlan.nlos import (ForestParams, SyntheticCirParams, evaluate_subsets, feature_summary, feature_table,
                          generate_dataset, read_cirs, write_cirs)
from hmiwlan.phy import SHIPPED_CONFIGS, GfdmModem, ber_sweep, build_frame
from hmiwlan.phy.channel import apply_channel, ebn0_to_snr_db
from hmiwlan.phy.iq import write_iq
from hmiwlan.utils.configfile import parse_range
from hmiwlan.utils.output import write_csv

logger = logging.getLogger(__name__)

RUNNERS = {}

# settings a subcommand starts from before config files and flags apply
COMMAND_DEFAULTS = {
    "repro fig-delay": {"ar_payload_bytes": CALIBRATED_AR_BURST_BYTES, "n_ar": "5..50:5"},
    "repro fig-scheduler": {"ar_payload_bytes": CALIBRATED_AR_BURST_BYTES, "n_ar": "5..50:5",
                            "safety_msi_ms": 24.0},
}


def runner(name):
    def _runner(f):
        RUNNERS[name] = f
        return f
    return _runner


def _enum(cls, value, key):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(str(member.value) for member in cls)
        raise ConfigError("'{}' is not a valid {} (choose from {})".format(value, key, choices))


def _output(settings, default_name):
    return settings["out"] or os.path.join(settings["out_dir"], default_name)


# mac-sim

def phy_params(settings):
    return PhyParams(slot_time=settings["slot_us"], sifs=settings["sifs_us"], difs=settings["difs_us"],
                     pifs=settings["pifs_us"], data_rate=settings["data_rate_mbps"],
                     ack_duration=settings["ack_us"], beacon_interval_ms=settings["beacon_interval_ms"],
                     per_frame_overhead=settings["overhead_us"], cw_min=settings["cw_min"],
                     cw_max=settings["cw_max"], retry_limit=settings["retry_limit"],
                     beacon_bytes=settings["beacon_bytes"], cfp_max_fraction=settings["cfp_max_fraction"])


def scenario(settings, access=None, scheduler=None):
    safety = safety_class(settings["safety_msi_ms"], settings["safety_period_ms"], settings["safety_payload_bytes"])
    ar = ar_class(settings["ar_payload_bytes"], settings["ar_msi_ms"], settings["ar_period_ms"],
                  settings["ar_msdu_bytes"])
    return Scenario(n_safety=settings["n_safety"],
                    access=_enum(AccessMethod, access or settings["access"], "access"),
                    scheduler=_enum(SchedulerKind, scheduler or settings["scheduler"], "scheduler"),
                    duration=settings["duration"], seed=settings["seed"], safety=safety, ar=ar,
                    random_phases=settings["random_phases"])


def _mac_sweep(settings, access=None, scheduler=None):
    return sweep(scenario(settings, access, scheduler), parse_range(settings["n_ar"]), phy_params(settings),
                 settings["threads"])


@runner("mac-sim")
def run_mac_sim(settings):
    name = "mac-{}.csv".format(settings["access"])
    return [write_csv(_mac_sweep(settings), _output(settings, name))]


@runner("repro fig-delay")
def run_fig_delay(settings):
    return [write_csv(_mac_sweep(settings, access=access.value),
                      os.path.join(settings["out_dir"], "fig-delay-{}.csv".format(access.value)))
            for access in (AccessMethod.DCF, AccessMethod.PCF, AccessMethod.HCCA)]


@runner("repro fig-scheduler")
def run_fig_scheduler(settings):
    return [write_csv(_mac_sweep(settings, access=AccessMethod.HCCA.value, scheduler=kind.value),
                      os.path.join(settings["out_dir"], "fig-scheduler-{}.csv".format(kind.value)))
            for kind in (SchedulerKind.REFERENCE, SchedulerKind.EDF)]


# gfdm-phy

def preset_settings(preset):
    """The GfdmConfig fields of a shipped configuration as settings values."""
    if preset not in SHIPPED_CONFIGS:
        raise ConfigError("unknown preset '{}' (choose from {})".format(preset, ", ".join(sorted(SHIPPED_CONFIGS))))
    config = SHIPPED_CONFIGS[preset]
    return {
        "k": config.k, "m": config.m, "pulse": config.pulse.value, "rolloff": config.rolloff,
        "cp_len": config.cp_len, "cs_len": config.cs_len, "constellation": config.constellation.value,
        "receiver": config.receiver.value, "active_subcarriers": list(config.active_subcarriers or []),
        "window_len": config.window_len,
    }


def materialize_gfdm(settings, explicit):
    """Fills the waveform fields from the preset unless they were set explicitly."""
    if settings["preset"] == "custom":
        return settings
    resolved = dict(settings)
    for key, value in preset_settings(settings["preset"]).items():
        if key not in explicit:
            resolved[key] = value
    return resolved


def gfdm_config(settings):
    return GfdmConfig(k=settings["k"], m=settings["m"], pulse=_enum(PulseKind, settings["pulse"], "pulse"),
                      rolloff=settings["rolloff"], cp_len=settings["cp_len"], cs_len=settings["cs_len"],
                      constellation=_enum(Constellation, settings["constellation"], "constellation"),
                      receiver=_enum(Receiver, settings["receiver"], "receiver"),
                      active_subcarriers=tuple(settings["active_subcarriers"]) or None,
                      window_len=settings["window_len"])


def channel_model(settings):
    return ChannelModel(kind=_enum(ChannelKind, settings["channel"], "channel"),
                        taps=tuple(settings["taps"]) or (1.0,), cfo=settings["cfo"], delay=settings["delay"])


def snr_points(settings, config):
    values = parse_range(settings["snr_db"], float)
    if settings["ebn0"]:
        return [float(ebn0_to_snr_db(v, config.constellation.bits_per_symbol)) for v in values]
    return values


def dump_frame(path, config, channel, seed):
    """Writes one received frame at the channel's SNR as an IQ file."""
    rng = Rng(seed).child("iq")
    bits = rng.child("bits").integers(0, 2, size=config.bits_per_block, dtype=np.int8)
    frame = build_frame(GfdmModem(config).modulate_bits(bits)[0], config)
    write_iq(path, apply_channel(frame.samples, channel, rng.child("noise"), config.k, tail=config.n))
    return str(path)


@runner("phy ber")
def run_phy_ber(settings):
    config = gfdm_config(settings)
    channel = channel_model(settings)
    snr = snr_points(settings, config)
    frame = ber_sweep(config, channel, snr, settings["bits"], settings["seed"], settings["threads"],
                      settings["ideal_sync"], settings["ideal_csi"])
    outputs = [write_csv(frame, _output(settings, "ber.csv"))]
    if settings["iq_out"]:
        at = channel if channel.kind == ChannelKind.IDEAL else ChannelModel(
            channel.kind, snr[0], channel.taps, channel.cfo, channel.delay)
        outputs.append(dump_frame(settings["iq_out"], config, at, settings["seed"]))
    return outputs


# localization

def _study(settings, name):
    anchors = load_anchors(settings["anchors"]) if settings["anchors"] else list(DEFAULT_ANCHORS)
    path = load_path(settings["path"]) if settings["path"] else None
    fixes, rmse = accuracy_study(anchors, RangingNoise(settings["sigma_d"], settings["bias"]), settings["trials"],
                                 settings["seed"], settings["exchanges_per_anchor"],
                                 settings["processing_delay_us"] * 1e-6, path)
    logger.info("rmse %.3f m over %d fixes", rmse, int(fixes["err_m"].notna().sum()))
    return [write_csv(fixes, _output(settings, name))]


@runner("loc sim")
def run_loc_sim(settings):
    return _study(settings, "fixes.csv")


@runner("repro fig-loc")
def run_fig_loc(settings):
    return _study(dict(settings, out=""), "fig-loc.csv")


# nlos-id

def cir_params(settings):
    return SyntheticCirParams(n_per_class=settings["n_per_class"], tap_count=settings["tap_count"],
                              los_k_db=settings["los_k_db"], los_decay_taps=settings["los_decay_taps"],
                              nlos_decay_taps=settings["nlos_decay_taps"], shadowing_db=settings["shadowing_db"],
                              seed=settings["seed"])


def forest_params(settings):
    return ForestParams(n_trees=settings["n_trees"], max_depth=settings["max_depth"], min_leaf=settings["min_leaf"])


def _dataset(settings):
    return read_cirs(settings["data"]) if settings["data"] else generate_dataset(cir_params(settings))


def _evaluate(settings, path):
    subsets = [FeatureSubset.parse(s) for s in settings["subsets"].split(",") if s.strip()]
    if not subsets:
        raise ConfigError("no feature subsets selected")
    frame = evaluate_subsets(_dataset(settings), settings["split_ratio"], forest_params(settings),
                             settings["seed"], subsets, settings["threads"])
    return [write_csv(frame, path)]


@runner("nlos gen")
def run_nlos_gen(settings):
    path = _output(settings, "cirs.bin")
    write_cirs(path, generate_dataset(cir_params(settings)))
    logger.info("wrote %d CIRs to %s", 2 * settings["n_per_class"], path)
    return [path]


@runner("nlos eval")
def run_nlos_eval(settings):
    return _evaluate(settings, _output(settings, "acc.csv"))


@runner("repro fig-nlos")
def run_fig_nlos(settings):
    return _evaluate(settings, os.path.join(settings["out_dir"], "fig-nlos.csv"))


@runner("nlos features")
def run_nlos_features(settings):
    table = feature_table(_dataset(settings))
    path = _output(settings, "features.csv")
    root, ext = os.path.splitext(path)
    return [write_csv(table, path), write_csv(feature_summary(table), root + "-summary" + ext)]
