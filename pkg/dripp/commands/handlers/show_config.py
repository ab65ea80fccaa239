"""Config command handler."""
from dataclasses import asdict
from pathlib import Path

import toml

from dripp.commands.utils import handle_command_errors, load_and_validate_config


@handle_command_errors
def show_config(config_path, args):
    """Display the resolved configuration (file, environment and defaults)."""
    config_path = Path(config_path)
    print(f"Configuration file: {config_path}")
    print(f"Status: {'Found' if config_path.exists() else 'Not found (using defaults)'}")

    config = load_and_validate_config(config_path)
    print("Resolved configuration:")
    print(toml.dumps(asdict(config)).strip())
