"""Run-configuration text format.

A config file is plain text, one ``key = value`` per line. ``#`` starts a
comment, blank lines are ignored. Unknown keys are rejected outright so a
typo cannot silently fall back to a default; missing keys take the
documented defaults. Lists are comma-separated.

Keys::

    channel.preset      name of a built-in preset (base for channel.* keys)
    channel.h_pre       transmit FIR taps            e.g. 1.0,0.35,0.1
    channel.a2          quadratic distortion coefficient
    channel.a3          cubic distortion coefficient
    channel.h_post      receive FIR taps
    channel.snr_db      SNR in dB ("inf" disables noise)
    channel.seed        base noise seed (experiments derive their own)
    klms.taps           KLMS input dimension
    klms.alpha          Gaussian kernel bandwidth
    klms.mu             KLMS step size
    klms.train_len      KLMS training samples
    lms.taps / lms.mu / lms.train_len
    dfe.fft / dfe.fbt / dfe.mu / dfe.train_len
    run.n_symbols       total simulated symbols
    run.master_seed     root seed for all randomness
    sweep.taps          KLMS tap counts for sweeps   e.g. 2,4,6,8,10,14
    cores.count         emulated channel instances
    cores.offsets_db    per-instance SNR offsets (one per instance)
    cores.seeds         optional per-instance seeds (defaults derive from
                        run.master_seed; instance 0 inherits it)
"""

from __future__ import annotations

from dataclasses import replace

from .channel import get_preset
from .equalizers import KlmsParams
from .experiments import CoreSettings, DfeSettings, ExperimentConfig, LmsSettings


class ConfigError(ValueError):
    """Malformed configuration text, unknown key or invalid value."""


def _parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a number, got {s!r}") from None


def _parse_int(s: str) -> int:
    try:
        return int(s, 0)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}") from None


def _parse_float_list(s: str) -> tuple[float, ...]:
    return tuple(_parse_float(p.strip()) for p in s.split(",") if p.strip())


def _parse_int_list(s: str) -> tuple[int, ...]:
    return tuple(_parse_int(p.strip()) for p in s.split(",") if p.strip())


_PARSERS = {
    "channel.preset": str,
    "channel.h_pre": _parse_float_list,
    "channel.a2": _parse_float,
    "channel.a3": _parse_float,
    "channel.h_post": _parse_float_list,
    "channel.snr_db": _parse_float,
    "channel.seed": _parse_int,
    "klms.taps": _parse_int,
    "klms.alpha": _parse_float,
    "klms.mu": _parse_float,
    "klms.train_len": _parse_int,
    "lms.taps": _parse_int,
    "lms.mu": _parse_float,
    "lms.train_len": _parse_int,
    "dfe.fft": _parse_int,
    "dfe.fbt": _parse_int,
    "dfe.mu": _parse_float,
    "dfe.train_len": _parse_int,
    "run.n_symbols": _parse_int,
    "run.master_seed": _parse_int,
    "sweep.taps": _parse_int_list,
    "cores.count": _parse_int,
    "cores.offsets_db": _parse_float_list,
    "cores.seeds": _parse_int_list,
}

DEFAULT_PRESET = "NONLINEAR_REFERENCE"


def default_config() -> ExperimentConfig:
    return ExperimentConfig(channel=get_preset(DEFAULT_PRESET), preset_name=DEFAULT_PRESET)


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse config text into an ExperimentConfig, applying defaults."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ConfigError as e:
            raise ConfigError(f"line {lineno}: {key}: {e}") from None
    return build_config(values)


def build_config(values: dict[str, object]) -> ExperimentConfig:
    """Assemble an ExperimentConfig from parsed key/value pairs."""
    unknown = set(values) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")

    chan_overrides = {}
    for key, attr in (("channel.h_pre", "h_pre"), ("channel.a2", "a2"),
                      ("channel.a3", "a3"), ("channel.h_post", "h_post"),
                      ("channel.snr_db", "snr_db"), ("channel.seed", "seed")):
        if key in values:
            chan_overrides[attr] = values[key]

    preset_name = values.get("channel.preset", None)
    if preset_name is not None:
        try:
            chan = get_preset(str(preset_name))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    else:
        # explicit channel fields with no preset: an anonymous channel based
        # on the default preset's values
        chan = get_preset(DEFAULT_PRESET)
        preset_name = None if chan_overrides else DEFAULT_PRESET
    try:
        if chan_overrides:
            chan = replace(chan, **chan_overrides)

        base = default_config()
        klms = KlmsParams(
            mu=values.get("klms.mu", base.klms.mu),
            alpha=values.get("klms.alpha", base.klms.alpha),
            n_taps=values.get("klms.taps", base.klms.n_taps),
            train_len=values.get("klms.train_len", base.klms.train_len),
        )
        lms = LmsSettings(
            taps=values.get("lms.taps", base.lms.taps),
            mu=values.get("lms.mu", base.lms.mu),
            train_len=values.get("lms.train_len", base.lms.train_len),
        )
        dfe = DfeSettings(
            fft=values.get("dfe.fft", base.dfe.fft),
            fbt=values.get("dfe.fbt", base.dfe.fbt),
            mu=values.get("dfe.mu", base.dfe.mu),
            train_len=values.get("dfe.train_len", base.dfe.train_len),
        )
        cores = CoreSettings(
            count=values.get("cores.count", base.cores.count),
            offsets_db=values.get("cores.offsets_db", base.cores.offsets_db),
            seeds=values.get("cores.seeds", base.cores.seeds),
        )
        return ExperimentConfig(
            channel=chan,
            preset_name=preset_name,
            n_symbols=values.get("run.n_symbols", base.n_symbols),
            master_seed=values.get("run.master_seed", base.master_seed),
            klms=klms,
            lms=lms,
            dfe=dfe,
            sweep_taps=values.get("sweep.taps", base.sweep_taps),
            cores=cores,
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) reproduces cfg exactly."""
    lines = []
    if cfg.preset_name is not None:
        lines.append(f"channel.preset = {cfg.preset_name}")
    c = cfg.channel
    lines += [
        f"channel.h_pre = {_fmt(c.h_pre)}",
        f"channel.a2 = {_fmt(c.a2)}",
        f"channel.a3 = {_fmt(c.a3)}",
        f"channel.h_post = {_fmt(c.h_post)}",
        f"channel.snr_db = {_fmt(c.snr_db)}",
        f"channel.seed = {c.seed}",
        f"klms.taps = {cfg.klms.n_taps}",
        f"klms.alpha = {_fmt(cfg.klms.alpha)}",
        f"klms.mu = {_fmt(cfg.klms.mu)}",
        f"klms.train_len = {cfg.klms.train_len}",
        f"lms.taps = {cfg.lms.taps}",
        f"lms.mu = {_fmt(cfg.lms.mu)}",
        f"lms.train_len = {cfg.lms.train_len}",
        f"dfe.fft = {cfg.dfe.fft}",
        f"dfe.fbt = {cfg.dfe.fbt}",
        f"dfe.mu = {_fmt(cfg.dfe.mu)}",
        f"dfe.train_len = {cfg.dfe.train_len}",
        f"run.n_symbols = {cfg.n_symbols}",
        f"run.master_seed = {cfg.master_seed}",
        f"sweep.taps = {_fmt(cfg.sweep_taps)}",
        f"cores.count = {cfg.cores.count}",
        f"cores.offsets_db = {_fmt(cfg.cores.offsets_db)}",
    ]
    if cfg.cores.seeds is not None:
        lines.append(f"cores.seeds = {_fmt(cfg.cores.seeds)}")
    return "\n".join(lines) + "\n"
