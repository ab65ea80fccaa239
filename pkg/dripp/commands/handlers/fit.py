"""Fit command handler."""
from pathlib import Path

from dripp.commands.utils import (
    check_driver_ids,
    ensure_output_dir,
    handle_command_errors,
    load_and_validate_config,
    load_init_params,
    print_next_steps,
    print_params,
)
from dripp.services.em_solver import run_em
from dripp.services.event_io import read_drivers, read_events, write_fit_report


def _fit_path(out_dir: Path, events_path: Path) -> Path:
    return out_dir / f"{events_path.stem}.fit.json"


@handle_command_errors
def fit(config_path, args):
    """Fit the model to one or more events files against a shared driver set."""
    config = load_and_validate_config(Path(config_path), {
        "a": args.a,
        "b": args.b,
        "iterations": args.iterations,
        "sigma_floor": args.sigma_floor,
        "divergence_margin": args.divergence_margin,
        "smart_start": args.smart_start,
        "init_params": args.init_params,
        "out_dir": args.out_dir,
    })
    support = config.kernel_support()
    drivers = read_drivers(args.drivers)
    init_params = load_init_params(config)
    if init_params is not None:
        check_driver_ids(init_params, drivers)
    em_config = config.em_config(init_params)
    out_dir = ensure_output_dir(config.output_dir)

    print(f"Fitting {len(args.events)} events file(s) against {len(drivers)} driver(s)")
    print(f"   Support: [{support.a:g}, {support.b:g}]s")
    print(f"   Iterations: {em_config.n_iterations}, sigma floor: {em_config.sigma_floor:g}s, "
          f"init: {em_config.init.value}")

    reports = []
    for events_file in args.events:
        events_path = Path(events_file)
        events = read_events(events_path)
        report = run_em(events, drivers, support, em_config)
        report_path = write_fit_report(report, _fit_path(out_dir, events_path))
        reports.append((events_path, report))

        print(f"\n{events_path.name}: {events.count} events on [0, {events.duration:g}]s")
        print(f"   Termination: {report.termination.value} after {report.iterations_run} iteration(s)")
        print(f"   Final NLL: {report.nll_history[-1]:.10g}")
        print_params(report.params)
        violations = report.diagnostics.get("monotonicity_violations", [])
        if violations:
            print(f"   Warning: NLL increased at {len(violations)} iteration(s)")
        print(f"   Saved: {report_path}")

    if len(reports) > 1:
        print("\nRanking by largest alpha/mu:")
        ranked = sorted(reports, key=lambda item: -max(item[1].alpha_mu_ratio().values(), default=0.0))
        for events_path, report in ranked:
            ratios = report.alpha_mu_ratio()
            best = max(ratios, key=ratios.get) if ratios else None
            if best is None:
                print(f"   {events_path.name}: no drivers")
            else:
                print(f"   {events_path.name}: {ratios[best]:.4g} ({best})")

    print_next_steps([
        f"dripp eval --true <params.json> --estimated {_fit_path(out_dir, reports[0][0])} --driver-id <id>",
    ])
