"""Sweep command handler."""
from pathlib import Path

from dripp.commands.utils import (
    check_driver_ids,
    ensure_output_dir,
    handle_command_errors,
    load_and_validate_config,
    load_init_params,
)
from dripp.exceptions import ValidationError
from dripp.services.event_io import read_activations, read_drivers, read_events, write_table
from dripp.services.sweep import SWEEP_COLUMNS, support_sweep, threshold_sweep


@handle_command_errors
def sweep(config_path, args):
    """Re-fit across kernel support ends b (with a = 0) or binarization percentiles.

    An events file sweeps b, an activations file sweeps the percentile; grids
    not given on the command line come from the [sweep] config section.
    """
    config = load_and_validate_config(Path(config_path), {
        "a": args.a,
        "b": args.b,
        "iterations": args.iterations,
        "smart_start": args.smart_start,
        "init_params": args.init_params,
        "out_dir": args.out_dir,
    })
    drivers = read_drivers(args.drivers)
    init_params = load_init_params(config)
    if init_params is not None:
        check_driver_ids(init_params, drivers)
    em_config = config.em_config(init_params)
    out_dir = ensure_output_dir(config.output_dir)

    if args.events:
        if args.percentiles is not None:
            raise ValidationError("--percentiles sweeps need an --activations file")
        b_values = args.b_values or config.sweep.b_values
        events = read_events(args.events)
        print(f"Sweeping support end b over {', '.join(f'{b:g}' for b in b_values)}s (a = 0), "
              f"init: {em_config.init.value}")
        cells = support_sweep(events, drivers, b_values, em_config)
        parameter = "b"
    else:
        if args.b_values is not None:
            raise ValidationError("--b-values sweeps need an --events file")
        percentiles = args.percentiles or config.sweep.percentiles
        stream = read_activations(args.activations)
        support = config.kernel_support()
        print(f"Sweeping binarization percentile over {', '.join(f'{q:g}' for q in percentiles)} "
              f"with support [{support.a:g}, {support.b:g}]s, init: {em_config.init.value}")
        cells = threshold_sweep(stream, drivers, percentiles, support, em_config, args.duration)
        parameter = "percentile"

    rows = [row for cell in cells for row in cell.rows()]
    path = write_table(rows, [parameter] + SWEEP_COLUMNS, out_dir / f"sweep_{parameter}.csv")

    print(f"\nSweep Summary:")
    for cell in cells:
        if cell.report is None:
            print(f"   {parameter}={cell.value:g}: failed ({cell.error})")
            continue
        alphas = ", ".join(f"{d}={p.alpha:.4g}" for d, p in cell.report.params.per_driver.items())
        print(f"   {parameter}={cell.value:g}: mu={cell.report.params.mu:.4g}, alpha: {alphas} "
              f"({cell.init} start)")
    print(f"\nTable saved to: {path}")
