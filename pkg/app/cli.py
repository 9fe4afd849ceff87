"""Command-line front end: ``python main.py {levels,lambshift,spectroscopy,validate}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Literal, Optional

import orjson
from pydantic import BaseModel, ConfigDict, Field

from app import settings
from app.errors import ConfigError, VacuumProbeError
from app.services.presets import LAMBSHIFT_OUTPUTS, SPECTROSCOPY_OUTPUTS, preset_document
from app.services.sweep import SweepResult, run_sweep
from app.services.sweep_schema import SweepSpec, validate_config
from app.services.validation import run_validation

logger = logging.getLogger(__name__)

Command = Literal["levels", "lambshift", "spectroscopy", "validate"]

LEVELS_OUTPUTS = ["energies", "weights"]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)
    command: Command
    preset: Optional[str] = None
    config_path: Optional[Path] = None
    out_dir: Path = Path(settings.OUT_DIR)
    workers: int = Field(settings.WORKERS, ge=1)
    quiet: bool = False


# ---------- CONFIG ----------
def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_document(path: Path) -> dict[str, Any]:
    try:
        doc = orjson.loads(path.read_bytes())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}", "config") from e
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}", "config") from e
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "config")
    return doc


def resolve_spec(run: RunConfig, outputs: Optional[list[str]] = None) -> SweepSpec:
    """Preset, then config file on top of it, then command outputs and worker count."""
    if run.preset is None and run.config_path is None:
        raise ConfigError("give --preset and/or --config", "config")
    doc: dict[str, Any] = preset_document(run.preset) if run.preset else {}
    if run.config_path is not None:
        doc = _merge(doc, load_document(run.config_path))
    numerics = dict(doc.get("numerics") or {})
    numerics.setdefault("n_max_start", settings.N_MAX)
    numerics.setdefault("K", settings.K)
    doc["numerics"] = numerics
    doc["workers"] = run.workers
    if outputs is not None:
        doc["outputs"] = outputs
    else:
        doc.setdefault("outputs", LAMBSHIFT_OUTPUTS)
    return validate_config(doc)


# ---------- COMMANDS ----------
def _emit(result: SweepResult, run: RunConfig, suffix: str) -> int:
    csv_path, json_path = result.write(run.out_dir, f"{result.spec.name}_{suffix}")
    logger.info("wrote %s and %s", csv_path, json_path)
    if result.failed_rows:
        logger.error("%d row(s) failed; see the error column", result.failed_rows)
        return 1
    return 0


def cmd_levels(run: RunConfig) -> int:
    spec = resolve_spec(run, LEVELS_OUTPUTS)
    return _emit(run_sweep(spec, progress=not run.quiet), run, "levels")


def cmd_lambshift(run: RunConfig) -> int:
    spec = resolve_spec(run, LAMBSHIFT_OUTPUTS)
    return _emit(run_sweep(spec, progress=not run.quiet), run, "lambshift")


def cmd_spectroscopy(run: RunConfig) -> int:
    spec = resolve_spec(run, SPECTROSCOPY_OUTPUTS)
    return _emit(run_sweep(spec, progress=not run.quiet), run, "spectroscopy")


def cmd_validate(run: RunConfig) -> int:
    spec = resolve_spec(run)
    checks = run_validation(spec)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks ok")
    return 1 if failed else 0


COMMANDS = {
    "levels": cmd_levels,
    "lambshift": cmd_lambshift,
    "spectroscopy": cmd_spectroscopy,
    "validate": cmd_validate,
}


# ---------- ENTRY ----------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vacuum-probe", description="Ancilla-qubit spectroscopy of cavity QED vacua")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--preset", help="named figure preset")
    p.add_argument("--config", type=Path, help="JSON sweep document (overrides preset fields)")
    p.add_argument("--out", type=Path, default=Path(settings.OUT_DIR), help="output directory")
    p.add_argument("--workers", type=int, default=settings.WORKERS)
    p.add_argument("--quiet", action="store_true", help="warnings only, no progress bars")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        run = RunConfig(
            command=args.command,
            preset=args.preset,
            config_path=args.config,
            out_dir=args.out,
            workers=max(1, args.workers),
            quiet=args.quiet,
        )
        return COMMANDS[run.command](run)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except VacuumProbeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
