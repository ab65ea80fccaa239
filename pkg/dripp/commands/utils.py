"""Utility functions shared by the command handlers."""
import json
import sys
from functools import wraps
from pathlib import Path
from typing import Dict, List, Sequence

from dripp.config import DrippConfig
from dripp.exceptions import ArtifactIOError, DrippError, NumericalError, ValidationError
from dripp.models.events import Driver
from dripp.models.params import ModelParams
from dripp.services.event_io import read_params

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def load_and_validate_config(config_path, cli_args=None) -> DrippConfig:
    """Load and validate configuration with optional CLI overrides."""
    if cli_args is None:
        cli_args = {}
    config = DrippConfig.from_cli_args(Path(config_path), cli_args)
    config.validate()
    return config


def load_init_params(config: DrippConfig):
    """Explicit starting parameters named by the configuration, if any."""
    if not config.em.init_params:
        return None
    return read_params(config.em.init_params)


def ensure_output_dir(path) -> Path:
    """Create the output directory, reporting an unwritable location as an I/O error."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactIOError(f"cannot create output directory {path}: {e}") from e
    return path


def check_driver_ids(params: ModelParams, drivers: Sequence[Driver]) -> None:
    """Every driver referenced by the parameters must exist in the drivers file."""
    known = {d.id for d in drivers}
    unknown = [driver_id for driver_id in params.per_driver if driver_id not in known]
    if unknown:
        raise ValidationError(f"unknown driver ids {unknown}; drivers file has {sorted(known)}")


def exit_code_for(error: Exception) -> int:
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(error, (ArtifactIOError, OSError)):
        return EXIT_IO
    if isinstance(error, ValueError):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL


def error_record(error: Exception, command: str) -> Dict:
    kind = error.kind if isinstance(error, DrippError) else type(error).__name__
    return {"error": kind, "message": str(error), "command": command}


def handle_command_errors(func):
    """Decorator to handle command errors consistently.

    Errors print one JSON record on stderr and exit with 2 (validation),
    3 (numerical or fit) or 4 (I/O).
    """
    @wraps(func)
    def wrapper(config_path, args):
        try:
            return func(config_path, args)
        except (DrippError, ValueError, OSError, ArithmeticError) as e:
            print(json.dumps(error_record(e, getattr(args, "command", func.__name__))), file=sys.stderr)
            sys.exit(exit_code_for(e))
    return wrapper


def format_seconds(value) -> str:
    return "n/a" if value is None else f"{value:.3f}s"


def print_params(params: ModelParams, indent: str = "   ") -> None:
    print(f"{indent}mu: {params.mu:.6g} events/s")
    for driver_id, p in params.per_driver.items():
        print(f"{indent}{driver_id}: alpha={p.alpha:.6g}, m={p.m:.6g}s, sigma={p.sigma:.6g}s")


def print_next_steps(steps: List[str]) -> None:
    print("\nNext steps:")
    for step in steps:
        print(f"   {step}")
