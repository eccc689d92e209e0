"""Command-line front end.

Settings resolve in layers: documented defaults, the subcommand's own
defaults, the settings profile (HMIWLAN_SEED, HMIWLAN_THREADS,
HMIWLAN_OUT_DIR), `--config`, `--params`, global flags, then command flags. Every
output is accompanied by a manifest that `--from-manifest` replays.
"""
import logging

import click

from hmiwlan import __version__, create_app
from hmiwlan.cli import runners
from hmiwlan.decorators import exit_codes
from hmiwlan.errors import ConfigError, ToolkitError
from hmiwlan.utils.configfile import read_overrides, resolve
from hmiwlan.utils.output import RunManifest, write_manifest

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _number_list(cast):
    def _parse(ctx, param, value):
        if value is None:
            return None
        try:
            return [cast(item) for item in value.split(",") if item.strip()]
        except ValueError:
            raise click.BadParameter("expected a comma-separated list, got '{}'".format(value))
    return _parse


def _set_log_level(level):
    try:
        logging.getLogger("hmiwlan").setLevel(str(level).upper())
    except ValueError:
        raise ConfigError("unknown log level '{}'".format(level))


def command_settings(ctx, name, flags, params_path=None):
    """Resolves the settings for `name`."""
    obj = ctx.find_root().obj
    explicit = {}
    if obj["config_path"]:
        explicit.update(read_overrides(obj["config_path"]))
    if params_path:
        explicit.update(read_overrides(params_path))
    explicit.update(obj["overrides"])
    explicit.update({key: value for key, value in flags.items() if value is not None})
    merged = dict(runners.COMMAND_DEFAULTS.get(name, {}))
    merged.update(obj["profile"])
    merged.update(explicit)
    settings = resolve(merged)
    if name == "phy ber":
        settings = runners.materialize_gfdm(settings, explicit)
    if "log_level" in explicit:
        _set_log_level(settings["log_level"])
    return settings


def execute(name, settings):
    outputs = runners.RUNNERS[name](settings)
    manifest = RunManifest(name, settings, settings["seed"], __version__, outputs)
    for path in outputs:
        write_manifest(manifest, path)
    return outputs


@exit_codes()
def replay(path):
    manifest = RunManifest.load(path)
    if manifest.subcommand not in runners.RUNNERS:
        raise ConfigError("manifest {} names unknown subcommand '{}'".format(path, manifest.subcommand))
    if manifest.version != __version__:
        logger.warning("manifest written by version %s, running %s", manifest.version, __version__)
    execute(manifest.subcommand, resolve(manifest.config))


@click.group(invoke_without_command=True)
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Master seed.")
@click.option("--out-dir", type=click.Path(file_okay=False), help="Directory for default output paths.")
@click.option("--threads", type=click.IntRange(min=1), help="Worker threads for sweeps and forests.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="TOML or JSON run configuration.")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False))
@click.option("--from-manifest", type=click.Path(exists=True, dir_okay=False),
              help="Re-run the invocation recorded in a manifest.")
@click.version_option(__version__)
@click.pass_context
def cli(ctx, seed, out_dir, threads, config_path, log_level, from_manifest):
    """802.11 latency, GFDM, localization and NLOS studies."""
    app = create_app()
    overrides = {key: value for key, value in (("seed", seed), ("out_dir", out_dir), ("threads", threads),
                                               ("log_level", log_level)) if value is not None}
    if log_level:
        app.logger.setLevel(log_level.upper())
    profile = {"seed": app.config["SEED"], "threads": app.config["THREADS"], "out_dir": app.config["OUT_DIR"]}
    ctx.obj = {"app": app, "profile": profile, "overrides": overrides, "config_path": config_path}
    if ctx.invoked_subcommand is None:
        if from_manifest:
            return replay(from_manifest)
        click.echo(ctx.get_help(), err=True)
        ctx.exit(2)


@cli.command("mac-sim")
@click.option("--access", type=click.Choice(["dcf", "pcf", "hcca"]))
@click.option("--scheduler", type=click.Choice(["ref", "edf"]))
@click.option("--n-ar", help="AR station counts, A..B[:step] or a single value.")
@click.option("--n-safety", type=click.IntRange(min=0))
@click.option("--duration", type=float, help="Simulated seconds per point.")
@click.option("--safety-msi", "--safety-msi-ms", "safety_msi_ms", type=float, help="Safety MSI in milliseconds.")
@click.option("--ar-msi-ms", type=float)
@click.option("--ar-payload-bytes", type=click.IntRange(min=1))
@click.option("--random-phases/--no-random-phases", default=None)
@click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Master seed, as the global --seed.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def mac_sim(ctx, **flags):
    """Latency sweep over the number of AR stations."""
    execute("mac-sim", command_settings(ctx, "mac-sim", flags))


@cli.group()
def phy():
    """GFDM physical layer."""


@phy.command("ber")
@click.option("--preset", help="Shipped waveform, or 'custom' to use the individual fields.")
@click.option("--k", type=click.IntRange(min=1))
@click.option("--m", type=click.IntRange(min=1))
@click.option("--pulse", type=click.Choice(["rc", "rrc", "rect"]))
@click.option("--rolloff", type=float)
@click.option("--cp-len", type=click.IntRange(min=0))
@click.option("--cs-len", type=click.IntRange(min=0))
@click.option("--constellation", type=click.Choice(["bpsk", "qpsk", "16qam"]))
@click.option("--receiver", type=click.Choice(["mf", "zf"]))
@click.option("--active-subcarriers", callback=_number_list(int))
@click.option("--window-len", type=click.IntRange(min=0))
@click.option("--channel", type=click.Choice(["ideal", "awgn", "multipath"]))
@click.option("--taps", callback=_number_list(float), help="Real FIR taps, comma separated.")
@click.option("--cfo", type=float, help="Carrier offset in subcarrier spacings.")
@click.option("--delay", type=click.IntRange(min=0), help="Channel delay in samples.")
@click.option("--snr-db", help="SNR points, A..B[:step] or a single value.")
@click.option("--ebn0/--no-ebn0", default=None, help="Read --snr-db as Eb/N0.")
@click.option("--bits", type=float, help="Bits per SNR point (1e6 is accepted).")
@click.option("--ideal-sync/--no-ideal-sync", default=None)
@click.option("--ideal-csi/--no-ideal-csi", default=None)
@click.option("--iq-out", type=click.Path(dir_okay=False), help="Dump one received frame here.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def phy_ber(ctx, **flags):
    """Bit error ratio over a sweep of SNR points."""
    if flags["bits"] is not None:
        flags["bits"] = int(flags["bits"])
    execute("phy ber", command_settings(ctx, "phy ber", flags))


@cli.group()
def loc():
    """Two-way ranging localization."""


@loc.command("sim")
@click.option("--anchors", type=click.Path(exists=True, dir_okay=False), help="JSON [{id, x, y, z}].")
@click.option("--path", type=click.Path(exists=True, dir_okay=False), help="JSON [{x, y, z}] MS positions.")
@click.option("--sigma-d", type=click.FloatRange(min=0.0), help="Per-exchange range noise in meters.")
@click.option("--bias", type=float)
@click.option("--trials", type=click.IntRange(min=1))
@click.option("--exchanges-per-anchor", type=click.IntRange(min=1))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def loc_sim(ctx, **flags):
    """Monte-Carlo localization accuracy."""
    execute("loc sim", command_settings(ctx, "loc sim", flags))


@cli.group()
def nlos():
    """LOS/NLOS identification."""


@nlos.command("gen")
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False),
              help="TOML or JSON with the dataset parameters.")
@click.option("--n-per-class", type=click.IntRange(min=1))
@click.option("--tap-count", type=click.IntRange(min=1))
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def nlos_gen(ctx, params_path, **flags):
    """Synthetic labeled CIRs."""
    execute("nlos gen", command_settings(ctx, "nlos gen", flags, params_path))


@nlos.command("eval")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="CIR file; generated if absent.")
@click.option("--subsets", help="Comma-separated subsets, e.g. s1,s4.")
@click.option("--n-trees", type=click.IntRange(min=1))
@click.option("--max-depth", type=click.IntRange(min=0))
@click.option("--min-leaf", type=click.IntRange(min=1))
@click.option("--split-ratio", type=float)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def nlos_eval(ctx, **flags):
    """Forest accuracy per feature subset."""
    execute("nlos eval", command_settings(ctx, "nlos eval", flags))


@nlos.command("features")
@click.option("--data", type=click.Path(exists=True, dir_okay=False), help="CIR file; generated if absent.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@exit_codes()
def nlos_features(ctx, **flags):
    """Feature table and per-class feature means."""
    execute("nlos features", command_settings(ctx, "nlos features", flags))


@cli.group()
def repro():
    """Studies behind the published figures."""


@repro.command("fig-delay")
@click.option("--duration", type=float)
@click.pass_context
@exit_codes()
def fig_delay(ctx, **flags):
    """DCF, PCF and HCCA latency against the number of AR stations."""
    execute("repro fig-delay", command_settings(ctx, "repro fig-delay", flags))


@repro.command("fig-scheduler")
@click.option("--duration", type=float)
@click.pass_context
@exit_codes()
def fig_scheduler(ctx, **flags):
    """Reference against EDF scheduling with a 24 ms safety MSI."""
    execute("repro fig-scheduler", command_settings(ctx, "repro fig-scheduler", flags))


@repro.command("fig-nlos")
@click.pass_context
@exit_codes()
def fig_nlos(ctx):
    """Identification accuracy for the four feature subsets."""
    execute("repro fig-nlos", command_settings(ctx, "repro fig-nlos", {}))


@repro.command("fig-loc")
@click.pass_context
@exit_codes()
def fig_loc(ctx):
    """Localization accuracy with four anchors in a 10 x 10 x 3 m room."""
    execute("repro fig-loc", command_settings(ctx, "repro fig-loc", {}))


def dispatch(argv=None):
    """Runs the CLI and returns the exit code: 0 success, 1 domain error, 2 usage error."""
    try:
        rv = cli.main(args=argv, prog_name="hmiwlan", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return 1
    except ToolkitError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    return rv if isinstance(rv, int) else 0
