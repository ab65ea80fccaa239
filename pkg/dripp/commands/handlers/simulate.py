"""Simulate command handler."""
from pathlib import Path

from dripp.commands.utils import (
    ensure_output_dir,
    handle_command_errors,
    load_and_validate_config,
    print_next_steps,
    print_params,
)
from dripp.services.event_io import write_drivers, write_events, write_json
from dripp.services.intensity import boundary_clean, intensity_integral
from dripp.services.simulator import gen_driver, thinning_simulate


@handle_command_errors
def simulate(config_path, args):
    """Generate the configured drivers and sample events from the true model."""
    config = load_and_validate_config(Path(config_path), {
        "seed": args.seed,
        "duration": args.duration,
        "out_dir": args.out_dir,
    })
    seed = config.simulation.seed
    duration = config.simulation.T
    params = config.true_params()
    out_dir = ensure_output_dir(config.output_dir)

    print(f"Simulating driven process (T={duration:g}s, seed={seed})")
    print_params(params)

    drivers = [gen_driver(spec, seed, index) for index, spec in enumerate(config.driver_specs(duration))]
    drivers = boundary_clean(drivers, duration, params.support)
    events = thinning_simulate(params, drivers, duration, seed)

    drivers_path = write_drivers(drivers, out_dir / "drivers.csv")
    events_path = write_events(events, out_dir / "events.csv")
    params_path = write_json(params.to_dict(), out_dir / "params.json")

    print(f"\nSimulation Summary:")
    for driver in drivers:
        print(f"   Driver {driver.id}: {driver.count} events")
    print(f"   Events: {events.count} (expected {intensity_integral(params, drivers, duration):.1f})")
    print(f"\nFiles saved to: {out_dir}")
    print(f"   {drivers_path.name}, {events_path.name}, {params_path.name}")

    print_next_steps([
        f"dripp fit --events {events_path} --drivers {drivers_path} "
        f"--a {params.support.a:g} --b {params.support.b:g} --smart-start --out-dir {out_dir}",
    ])
