"""``swarmlab`` command line entry point.

Exit status: 0 on success, 2 for configuration errors, 3 when a run fails.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, load_config, parse_config, validate
from .runners import RUNNERS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("swarmlab")


def preset_names() -> list[str]:
    root = resources.files("swarmlab.cli") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_preset(name: str):
    path = resources.files("swarmlab.cli") / "presets" / f"{name}.ini"
    if not path.is_file():
        raise ConfigError(f"no config given and {name!r} is not a preset "
                          f"(presets: {', '.join(preset_names())})")
    return parse_config(path.read_text(encoding="utf-8"), f"preset:{name}")


def u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="swarmlab",
        description="Run a configured optimization experiment and write CSV and text results.")
    p.add_argument("--config", metavar="PATH",
                   help="INI experiment config, or any output file of an earlier run")
    p.add_argument("--experiment", metavar="NAME",
                   help="experiment name for output files; without --config, a preset name")
    p.add_argument("--seed", type=u64, metavar="U64", help="base seed; run i uses seed + i")
    p.add_argument("--repeats", type=positive, metavar="N", help="number of independent runs")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--jobs", type=positive, metavar="N", help="runs executed in parallel")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    p.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    return p


def resolve(args) -> "Config":  # noqa: F821
    if args.config:
        cfg = load_config(args.config)
        if args.experiment:
            cfg.set("experiment", "name", args.experiment)
    elif args.experiment:
        cfg = load_preset(args.experiment)
    else:
        raise ConfigError("give --config PATH or --experiment PRESET")
    for flag, key in (("seed", "seed"), ("repeats", "repeats"), ("out", "out"), ("jobs", "jobs")):
        v = getattr(args, flag)
        if v is not None:
            cfg.set("experiment", key, v)
    validate(cfg)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if args.list_presets:
        print("\n".join(preset_names()))
        return EXIT_OK
    try:
        cfg = resolve(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    out = Path(cfg.get("experiment", "out"))
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = RUNNERS[cfg.kind](cfg, out)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported through the exit status
        log.error("run failed: %s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    log.info("%s finished in %.1f s", cfg.name, time.perf_counter() - t0)
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
