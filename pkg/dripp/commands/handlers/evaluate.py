"""Eval command handler."""
from pathlib import Path

from dripp.commands.utils import handle_command_errors, load_and_validate_config
from dripp.services.event_io import read_params, write_table
from dripp.services.metrics import intensity_curve, linf_distance, relative_linf


@handle_command_errors
def evaluate(config_path, args):
    """Compare an estimated single-driver intensity with the true one."""
    config = load_and_validate_config(Path(config_path), {"grid_step": args.grid_step})
    grid_step = config.experiment.grid_step
    true_params = read_params(args.true)
    est_params = read_params(args.estimated)
    driver_id = args.driver_id

    print(f"linf_distance: {linf_distance(true_params, est_params, driver_id, grid_step)!r}")
    print(f"relative_linf: {relative_linf(true_params, est_params, driver_id, grid_step)!r}")

    if args.curve:
        grid, true_curve, est_curve = intensity_curve(true_params, est_params, driver_id, grid_step)
        rows = [{"t": float(t), "true": float(x), "estimated": float(y)}
                for t, x, y in zip(grid, true_curve, est_curve)]
        path = write_table(rows, ["t", "true", "estimated"], args.curve)
        print(f"Curve saved to: {path}")
