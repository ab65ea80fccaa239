"""Experiment command handler."""
from pathlib import Path

from dripp.commands.utils import (
    ensure_output_dir,
    format_seconds,
    handle_command_errors,
    load_and_validate_config,
    load_init_params,
)
from dripp.services.event_io import write_table
from dripp.services.recovery import recovery_experiment
from dripp.services.recovery_store import AGGREGATE_COLUMNS, RECOVERY_COLUMNS, RUNTIME_COLUMNS, RecoveryStore


@handle_command_errors
def experiment(config_path, args):
    """Run the parameter-recovery grid and write raw, aggregate and runtime tables."""
    config = load_and_validate_config(Path(config_path), {"out_dir": args.out_dir, "jobs": args.jobs})
    grid = config.experiment
    out_dir = ensure_output_dir(config.output_dir)
    cells_dir = ensure_output_dir(config.cells_dir)
    for stale in cells_dir.glob("*.csv"):
        stale.unlink()

    n_cells = len(grid.T_values) * len(grid.keep_values) * grid.n_seeds
    print(f"Running recovery experiment: {n_cells} cells")
    print(f"   T values: {', '.join(f'{t:g}' for t in grid.T_values)}s")
    print(f"   P/S values: {', '.join(f'{k:g}' for k in grid.keep_values)}")
    print(f"   Seeds: 0..{grid.n_seeds - 1}")
    print(f"   Jobs: {config.jobs}")

    recovery_experiment(
        grid.T_values, grid.keep_values, range(grid.n_seeds),
        config.true_params(), config.isi_map(), config.em_config(load_init_params(config)),
        grid_step=grid.grid_step, jobs=config.jobs, cells_dir=cells_dir,
    )

    with RecoveryStore() as store:
        loaded = store.load_cell_files(cells_dir)
        recovery_path = write_table(store.recovery_rows(), RECOVERY_COLUMNS, out_dir / "recovery.csv")
        aggregate = store.aggregate_rows()
        aggregate_path = write_table(aggregate, AGGREGATE_COLUMNS, out_dir / "aggregate.csv")
        runtime = store.runtime_rows()
        runtime_path = write_table(runtime, RUNTIME_COLUMNS, out_dir / "runtime.csv")
        failures = store.failures()

    print(f"\nExperiment Summary:")
    print(f"   Rows: {loaded}")
    for row in aggregate:
        print(f"   T={row['T']:g} P/S={row['keep_fraction']:g} {row['driver_id']}: "
              f"rel_linf mean={row['rel_linf_mean']:.4g} (n={row['n']})")
    for row in runtime:
        ci = row["runtime_ci95"]
        print(f"   T={row['T']:g}: EM runtime {format_seconds(row['runtime_mean'])}"
              + ("" if ci != ci else f" +/- {ci:.3f}s (95% CI)"))
    if failures:
        print(f"   Failed cells: {len(failures)}")
        for row in failures:
            print(f"      T={row['T']:g} P/S={row['keep_fraction']:g} seed={row['seed']}: {row['error']}")

    print(f"\nFiles saved to: {out_dir}")
    print(f"   {recovery_path.name}, {aggregate_path.name}, {runtime_path.name}")
