"""Benchmark command line: run / presets / validate.

Exit codes: 0 success, 2 config validation failure, 3 runtime failure.
``run`` and ``validate`` accept either a config file path or a preset name;
``MCWAVE_OUTPUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import run_experiment
from .config import ValidationError, parse_config, serialize_config, validate_config
from .presets import preset_config, preset_description, preset_names

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _resolve_config(arg: str) -> tuple[dict, str | None]:
    """A path parses as a config file; otherwise the arg must name a preset."""
    path = Path(arg)
    if path.exists():
        cfg = parse_config(path.read_text(encoding="utf-8"))
        return cfg, None
    if arg in preset_names():
        cfg = preset_config(arg)
        validate_config(cfg)
        return cfg, arg
    raise ValidationError(f"{arg!r} is neither a config file nor a known preset")


def cmd_run(arg: str, output_dir: str | None) -> int:
    try:
        cfg, preset = _resolve_config(arg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        manifest = run_experiment(cfg, output_dir, preset_name=preset)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # surfaced with a diagnostic, nonzero exit
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for fname, digest in sorted(manifest["outputs"].items()):
        print(f"wrote {fname}  sha256={digest[:16]}…")
    print("wrote manifest.json")
    return EXIT_OK


def cmd_presets() -> int:
    for name in preset_names():
        print(f"{name}:")
        print(f"  {preset_description(name)}")
    return EXIT_OK


def cmd_validate(arg: str) -> int:
    try:
        cfg, preset = _resolve_config(arg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    label = preset or arg
    print(f"{label}: ok ({cfg['experiment']} experiment)")
    return EXIT_OK


def cmd_show(arg: str) -> int:
    """Print a preset's config in the file format (handy as a template)."""
    try:
        cfg, _ = _resolve_config(arg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(serialize_config(cfg))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcwave",
        description="Multicarrier waveform benchmark runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config file or preset")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--output-dir", default=None, help="where to write results")

    sub.add_parser("presets", help="list named presets")

    p_val = sub.add_parser("validate", help="validate a config file or preset")
    p_val.add_argument("config", help="config file path or preset name")

    p_show = sub.add_parser("show", help="print a config/preset in file format")
    p_show.add_argument("config", help="config file path or preset name")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.output_dir)
    if args.command == "presets":
        return cmd_presets()
    if args.command == "validate":
        return cmd_validate(args.config)
    if args.command == "show":
        return cmd_show(args.config)
    parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
