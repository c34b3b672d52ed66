"""Experiment configuration: a flat, typed, dotted-key text format.

One ``key = value`` pair per line, ``#`` comments, lists comma-separated.
Unknown keys are hard errors (nothing is silently ignored) and every value
is validated against the schema below, so a config file round-trips
losslessly through :func:`parse_config` / :func:`serialize_config`.
"""

from __future__ import annotations

from dataclasses import dataclass

EXPERIMENT_KINDS = ("ber", "papr", "af", "chanmat", "afdm-sweep", "overhead")

WAVEFORM_LABELS = (
    "scm",
    "ofdm",
    "dft-s-ofdm",
    "frft-ofdm",
    "ocdm",
    "ifdm",
    "afdm",
    "fbmc",
    "otfs",       # multicarrier delay-Doppler variant
    "zak-otfs",
    "oddm",
    "otsm",
    "ddam",       # peak-power experiments only
)


class ValidationError(ValueError):
    """A config failed schema or semantic validation."""


@dataclass(frozen=True)
class Key:
    kind: str  # int | float | str | bool | float_list | str_list
    default: object
    help: str


CONFIG_SCHEMA: dict[str, Key] = {
    "experiment": Key("str", "ber", "experiment kind: " + "|".join(EXPERIMENT_KINDS)),
    "seed": Key("int", 1, "master seed; every trial stream derives from it"),
    "trials": Key("int", 100, "Monte-Carlo realizations"),
    "workers": Key("int", 1, "parallel trial workers (results are worker-count invariant)"),
    "output_dir": Key("str", "", "output directory (default: $MCWAVE_OUTPUT_DIR or cwd)"),
    "constellation": Key("int", 4, "QAM order: 4, 16, 64 or 128"),
    "detector": Key("str", "mmse", "mmse | single-tap"),
    "snr_db": Key("float_list", [0.0, 5.0, 10.0, 15.0, 20.0], "symbol-SNR grid in dB"),
    "waveforms": Key(
        "str_list",
        ["scm", "ofdm", "ocdm", "afdm", "otfs", "otsm"],
        "scheme labels to run",
    ),
    "frame.m_1d": Key("int", 256, "subcarriers for 1D schemes"),
    "frame.delta_f_1d_hz": Key("float", 24e3, "1D subcarrier spacing"),
    "frame.prefix_1d": Key("int", -1, "1D prefix samples; -1 = channel max delay"),
    "frame.m_2d": Key("int", 16, "delay bins for 2D schemes"),
    "frame.n_2d": Key("int", 16, "Doppler bins / slots for 2D schemes"),
    "frame.delta_f_2d_hz": Key("float", 384e3, "2D subcarrier spacing"),
    "frame.prefix_2d": Key("int", -1, "2D prefix samples; -1 = channel max delay"),
    "channel.preset": Key("str", "EVA", "EPA|EVA|ETU|FIG16|PAPR5|AWGN or 'file'"),
    "channel.model": Key("str", "narrowband", "wideband|narrowband|tdc|fdc"),
    "channel.carrier_hz": Key("float", 24e9, "carrier frequency"),
    "channel.velocity_kmh": Key("float", 540.0, "max speed for the Doppler draw"),
    "channel.jakes": Key("bool", True, "redraw per-path Doppler as nu_max*cos(U[-pi,pi])"),
    "channel.random_gains": Key("bool", True, "redraw gains as profile-scaled Gaussians"),
    "channel.profile_file": Key("str", "", "path profile file when channel.preset = file"),
    "afdm.c1": Key("float", -1.0, "first chirp rate; -1 = (2 ceil(alpha_max)+1)/(2M)"),
    "afdm.c2": Key("float", 0.0, "second chirp rate"),
    "frft.p": Key("float", 0.5, "fractional transform order"),
    "ifdm.seed": Key("int", 0, "interleaver key"),
    "dfts.width": Key("int", -1, "spread width; -1 = full allocation"),
    "dfts.mapping": Key("str", "block-centered", "block-centered | dc-centered"),
    "ddam.n_tx": Key("int", 64, "transmit antennas for path precoding"),
    "ddam.beamformer": Key("str", "zf", "zf | mrt"),
    "papr.symbols": Key("int", 100, "time-domain symbols concatenated per realization"),
    "af.convention": Key("str", "aperiodic", "ambiguity evaluation: aperiodic | cyclic"),
    "af.doppler_span": Key("float", 0.9, "Doppler cut half-span in subcarrier spacings"),
    "af.doppler_points": Key("int", 721, "Doppler cut grid points"),
    "sweep.steps": Key("int", 16, "grid steps per chirp axis over [0, 1/(2M)]"),
    "chanmat.threshold": Key("float", 1e-3, "relative magnitude dump threshold"),
    "chanmat.models": Key("str_list", ["tdc", "fdc", "narrowband"], "channel kinds to dump"),
    "overhead.l_max": Key("int", 8, "max normalized delay for pilot footprints"),
    "overhead.alpha_max": Key("int", 4, "max normalized Doppler for pilot footprints"),
    "overhead.xi_nu": Key("int", 0, "fractional-Doppler guard factor"),
}

_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _parse_value(key: str, kind: str, raw: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == "bool":
            if raw.lower() not in _BOOL_WORDS:
                raise ValueError(f"not a boolean: {raw!r}")
            return _BOOL_WORDS[raw.lower()]
        if kind == "float_list":
            return [float(p) for p in raw.split(",") if p.strip() != ""]
        if kind == "str_list":
            return [p.strip() for p in raw.split(",") if p.strip() != ""]
    except ValueError as exc:
        raise ValidationError(f"bad value for {key!r}: {exc}") from exc
    raise ValidationError(f"unknown schema kind {kind!r}")  # pragma: no cover


def _format_value(kind: str, value) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return f"{float(value):.17g}"
    if kind == "float_list":
        return ",".join(f"{float(v):.17g}" for v in value)
    if kind == "str_list":
        return ",".join(value)
    return str(value)


def default_config() -> dict:
    return {k: (list(v.default) if isinstance(v.default, list) else v.default)
            for k, v in CONFIG_SCHEMA.items()}


def parse_config(text: str) -> dict:
    """Parse config text into a full (defaults-applied) validated dict."""
    cfg = default_config()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in CONFIG_SCHEMA:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _parse_value(key, CONFIG_SCHEMA[key].kind, val)
    validate_config(cfg)
    return cfg


def serialize_config(cfg: dict) -> str:
    """Render a config dict back to the text format (sorted, lossless)."""
    lines = []
    for key in sorted(cfg):
        if key not in CONFIG_SCHEMA:
            raise ValidationError(f"unknown key {key!r}")
        lines.append(f"{key} = {_format_value(CONFIG_SCHEMA[key].kind, cfg[key])}")
    return "\n".join(lines) + "\n"


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def validate_config(cfg: dict) -> None:
    """Semantic validation; raises :class:`ValidationError` naming the field."""
    unknown = set(cfg) - set(CONFIG_SCHEMA)
    if unknown:
        raise ValidationError(f"unknown keys: {sorted(unknown)}")
    missing = set(CONFIG_SCHEMA) - set(cfg)
    if missing:
        raise ValidationError(f"missing keys: {sorted(missing)}")

    exp = cfg["experiment"]
    if exp not in EXPERIMENT_KINDS:
        raise ValidationError(f"experiment must be one of {EXPERIMENT_KINDS}, got {exp!r}")
    if cfg["trials"] < 1:
        raise ValidationError("trials must be >= 1")
    if cfg["workers"] < 1:
        raise ValidationError("workers must be >= 1")
    if cfg["constellation"] not in (4, 16, 64, 128):
        raise ValidationError("constellation must be 4, 16, 64 or 128")
    if cfg["detector"] not in ("mmse", "single-tap"):
        raise ValidationError("detector must be 'mmse' or 'single-tap'")
    if not cfg["snr_db"]:
        raise ValidationError("snr_db must be nonempty")
    for w in cfg["waveforms"]:
        if w not in WAVEFORM_LABELS:
            raise ValidationError(f"waveforms: unknown label {w!r}")
    if "ddam" in cfg["waveforms"] and exp != "papr":
        raise ValidationError("waveforms: 'ddam' is only available in papr experiments")
    for key in ("frame.m_1d", "frame.m_2d", "frame.n_2d"):
        if cfg[key] < 1:
            raise ValidationError(f"{key} must be >= 1")
    for key in ("frame.delta_f_1d_hz", "frame.delta_f_2d_hz"):
        if cfg[key] <= 0:
            raise ValidationError(f"{key} must be positive")
    for key in ("frame.prefix_1d", "frame.prefix_2d"):
        if cfg[key] < -1:
            raise ValidationError(f"{key} must be >= 0, or -1 for automatic")
    if "otsm" in cfg["waveforms"] and not _is_pow2(cfg["frame.n_2d"]):
        raise ValidationError(
            f"frame.n_2d: the sequency transform needs a power of two, got {cfg['frame.n_2d']}"
        )
    if cfg["channel.model"] not in ("wideband", "narrowband", "tdc", "fdc"):
        raise ValidationError("channel.model must be wideband|narrowband|tdc|fdc")
    preset = cfg["channel.preset"].upper()
    if preset not in ("EPA", "EVA", "ETU", "FIG16", "PAPR5", "AWGN", "FILE"):
        raise ValidationError(f"channel.preset: unknown preset {cfg['channel.preset']!r}")
    if preset == "FILE" and not cfg["channel.profile_file"]:
        raise ValidationError("channel.profile_file required when channel.preset = file")
    if cfg["channel.carrier_hz"] <= 0:
        raise ValidationError("channel.carrier_hz must be positive")
    if cfg["channel.velocity_kmh"] < 0:
        raise ValidationError("channel.velocity_kmh must be >= 0")
    if cfg["dfts.mapping"] not in ("block-centered", "dc-centered"):
        raise ValidationError("dfts.mapping must be block-centered or dc-centered")
    if cfg["ddam.beamformer"] not in ("zf", "mrt"):
        raise ValidationError("ddam.beamformer must be zf or mrt")
    if cfg["ddam.n_tx"] < 1:
        raise ValidationError("ddam.n_tx must be >= 1")
    if cfg["papr.symbols"] < 1:
        raise ValidationError("papr.symbols must be >= 1")
    if cfg["af.convention"] not in ("aperiodic", "cyclic"):
        raise ValidationError("af.convention must be aperiodic or cyclic")
    if cfg["af.doppler_points"] < 3:
        raise ValidationError("af.doppler_points must be >= 3")
    if cfg["af.doppler_span"] <= 0:
        raise ValidationError("af.doppler_span must be positive")
    if cfg["sweep.steps"] < 2:
        raise ValidationError("sweep.steps must be >= 2")
    if not 0.0 < cfg["chanmat.threshold"] < 1.0:
        raise ValidationError("chanmat.threshold must lie in (0, 1)")
    for m in cfg["chanmat.models"]:
        if m not in ("wideband", "narrowband", "tdc", "fdc"):
            raise ValidationError(f"chanmat.models: unknown kind {m!r}")
    for key in ("overhead.l_max", "overhead.alpha_max", "overhead.xi_nu"):
        if cfg[key] < 0:
            raise ValidationError(f"{key} must be >= 0")
