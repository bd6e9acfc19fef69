"""Batch experiment runner.

Usage:
    collapsim --config experiment.cfg [--seed U64] [--out DIR]
              [--format csv|json] [--threads N] [--validate]

Exit codes: 0 success, 2 config error, 3 numerical-stability abort,
4 statistical precondition failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, load_config
from .errors import (
    ConfigError,
    GridLeakageError,
    StabilityError,
    StatisticalPreconditionError,
)
from .experiments import RUNNERS, TableOutput, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_STATISTICAL = 4


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _format_cell(value) -> str:
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(output: TableOutput, cfg: ExperimentConfig) -> str:
    lines = [
        f"# collapsim {__version__} config={cfg.config_hash()} seed={cfg.seed}",
        f"# timestamp: {datetime.now(timezone.utc).isoformat()}",
        ",".join(f"{name} [{unit}]" for name, unit in output.columns),
    ]
    for row in output.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_default(value):
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _render_json(output, cfg: ExperimentConfig) -> str:
    if isinstance(output, TableOutput):
        data = {
            "columns": [{"name": n, "unit": u} for n, u in output.columns],
            "rows": [list(r) for r in output.rows],
        }
    else:
        data = output.data
    doc = {
        "provenance": {
            "tool": f"collapsim {__version__}",
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        },
        "data": data,
    }
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def run(cfg: ExperimentConfig, out_dir: str | None, threads: int = 1) -> Path:
    """Execute one experiment and write its artifact file.

    Returns the output path.  Deterministic given (config, seed); the
    output begins with a provenance header and is written atomically.
    """
    runner = RUNNERS[cfg.experiment]
    if cfg.experiment == "csl-born":
        output = runner(cfg, threads)
    else:
        output = runner(cfg)
    suffix = ".csv" if (cfg.fmt == "csv" and isinstance(output, TableOutput)) else ".json"
    base = Path(out_dir) if out_dir else Path(".")
    path = base / (cfg.output + suffix)
    if isinstance(output, TableOutput) and cfg.fmt == "csv":
        text = _render_csv(output, cfg)
    else:
        text = _render_json(output, cfg)
    _atomic_write(path, text)
    return path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="collapsim", description="collapse-model experiment runner"
    )
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--validate", action="store_true", help="dry-run checks, no trajectories"
    )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.format is not None:
            cfg.fmt = args.format
        if args.validate:
            diag = validate_config(cfg)
            for message in diag.messages:
                print(message)
            if not diag.messages:
                print("ok")
            return EXIT_OK
        path = run(cfg, args.out, max(args.threads, 1))
        print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StabilityError, GridLeakageError) as exc:
        print(f"numerical-stability abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StatisticalPreconditionError as exc:
        print(f"statistical precondition failure: {exc}", file=sys.stderr)
        return EXIT_STATISTICAL


if __name__ == "__main__":
    sys.exit(main())
