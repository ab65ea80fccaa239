"""Segment t-test command handler."""
from pathlib import Path

from dripp.commands.utils import handle_command_errors, load_and_validate_config
from dripp.services.event_io import read_drivers, read_events, write_table
from dripp.services.metrics import segment_ttest


@handle_command_errors
def ttest(config_path, args):
    """Test each driver for a higher event rate on its kernel supports than elsewhere."""
    config = load_and_validate_config(Path(config_path), {"a": args.a, "b": args.b})
    support = config.kernel_support()
    events = read_events(args.events)
    drivers = read_drivers(args.drivers)

    print(f"Segment t-test on [{support.a:g}, {support.b:g}]s supports ({events.count} events)")
    rows = []
    for driver in drivers:
        statistic, p_value = segment_ttest(events, driver, support)
        rows.append({"driver_id": driver.id, "t_statistic": statistic, "p_value": p_value})
        print(f"   {driver.id}: t={statistic:.4g}, p={p_value:.3g}")

    if args.out:
        path = write_table(rows, ["driver_id", "t_statistic", "p_value"], args.out)
        print(f"Results saved to: {path}")
