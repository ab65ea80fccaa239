from dripp.commands.handlers import (
    binarize_activations,
    evaluate,
    experiment,
    fit,
    show_config,
    simulate,
    sweep,
    ttest,
)


def _add_support_args(parser, required=False):
    parser.add_argument(
        "--a",
        type=float,
        required=required,
        help="Kernel support lower bound a, in seconds (default: from config or 0.03)"
    )
    parser.add_argument(
        "--b",
        type=float,
        required=required,
        help="Kernel support upper bound b, in seconds (default: from config or 0.8)"
    )


def _add_iterations_arg(parser):
    parser.add_argument(
        "--iterations",
        type=int,
        help="Number of EM iterations N (default: from config or 50)"
    )


def setup_parsers(subparsers):
    """Set up every dripp subcommand parser."""
    # config command
    config_parser = subparsers.add_parser(
        "config",
        help="Display the resolved configuration"
    )
    config_parser.set_defaults(func=show_config)

    # simulate command
    simulate_parser = subparsers.add_parser(
        "simulate",
        help="Generate synthetic drivers and sample events from the configured model"
    )
    simulate_parser.add_argument(
        "--seed",
        type=int,
        help="Integer seed of the driver and thinning streams (default: from config or 0)"
    )
    simulate_parser.add_argument(
        "--duration",
        type=float,
        help="Observation window T, in seconds (default: from config or 10000)"
    )
    simulate_parser.add_argument(
        "--out-dir",
        required=True,
        help="Directory for drivers.csv, events.csv and params.json"
    )
    simulate_parser.set_defaults(func=simulate)

    # fit command
    fit_parser = subparsers.add_parser(
        "fit",
        help="Fit the model with EM to one or more events files"
    )
    fit_parser.add_argument(
        "--events",
        nargs="+",
        required=True,
        metavar="FILE",
        help="Events CSV file(s), timestamps in seconds; each is fitted independently"
    )
    fit_parser.add_argument(
        "--drivers",
        required=True,
        metavar="FILE",
        help="Drivers CSV file (driver_id,time), timestamps in seconds"
    )
    _add_support_args(fit_parser)
    _add_iterations_arg(fit_parser)
    fit_parser.add_argument(
        "--sigma-floor",
        type=float,
        help="Lower bound epsilon on kernel sigma, in seconds (default: from config or 0.01)"
    )
    fit_parser.add_argument(
        "--divergence-margin",
        type=float,
        help="Allowed excursion of m beyond [a, b], in multiples of b - a (default: from config or 1.0)"
    )
    init_group = fit_parser.add_mutually_exclusive_group(required=True)
    init_group.add_argument(
        "--smart-start",
        action="store_true",
        help="Initialize from the data (baseline outside supports, delay moments inside)"
    )
    init_group.add_argument(
        "--init-params",
        metavar="FILE",
        help="Initialize from a fit report or parameter JSON file"
    )
    fit_parser.add_argument(
        "--out-dir",
        required=True,
        help="Directory for <events stem>.fit.json reports"
    )
    fit_parser.set_defaults(func=fit)

    # eval command
    eval_parser = subparsers.add_parser(
        "eval",
        help="Sup-norm distance between true and estimated single-driver intensities"
    )
    eval_parser.add_argument(
        "--true",
        required=True,
        metavar="FILE",
        help="True parameters (JSON, as written by simulate)"
    )
    eval_parser.add_argument(
        "--estimated",
        required=True,
        metavar="FILE",
        help="Estimated parameters (fit report JSON)"
    )
    eval_parser.add_argument(
        "--driver-id",
        required=True,
        help="Driver whose intensity is compared"
    )
    eval_parser.add_argument(
        "--grid-step",
        type=float,
        help="Evaluation grid step, in seconds (default: from config or 0.001)"
    )
    eval_parser.add_argument(
        "--curve",
        metavar="FILE",
        help="Also write the true and estimated intensities (events/s) on the grid to this CSV"
    )
    eval_parser.set_defaults(func=evaluate)

    # experiment command
    experiment_parser = subparsers.add_parser(
        "experiment",
        help="Run the parameter-recovery grid over durations, kept fractions and seeds"
    )
    experiment_parser.add_argument(
        "--out-dir",
        help="Directory for recovery.csv, aggregate.csv, runtime.csv and cells/ "
             "(default: $DRIPP_OUTPUT_DIR, config output_dir or ./output)"
    )
    experiment_parser.add_argument(
        "--jobs",
        type=int,
        help="Worker processes for experiment cells, -1 for all cores (default: $DRIPP_JOBS, config or 1)"
    )
    experiment_parser.set_defaults(func=experiment)

    # binarize command
    binarize_parser = subparsers.add_parser(
        "binarize",
        help="Threshold an activation stream into events"
    )
    binarize_parser.add_argument(
        "--activations",
        required=True,
        metavar="FILE",
        help="Activations CSV (time in seconds, value >= 0)"
    )
    rule_group = binarize_parser.add_mutually_exclusive_group(required=True)
    rule_group.add_argument(
        "--threshold",
        type=float,
        help="Keep samples whose value is strictly above this absolute threshold (activation units)"
    )
    rule_group.add_argument(
        "--percentile",
        type=float,
        help="Keep samples strictly above this percentile (0-100, percent) of the positive values"
    )
    binarize_parser.add_argument(
        "--duration",
        type=float,
        help="Observation window T, in seconds (default: last sample time)"
    )
    binarize_parser.add_argument(
        "--out",
        required=True,
        metavar="FILE",
        help="Output events CSV"
    )
    binarize_parser.set_defaults(func=binarize_activations)

    # sweep command
    sweep_parser = subparsers.add_parser(
        "sweep",
        help="Re-fit across kernel support ends or binarization percentiles"
    )
    grid_group = sweep_parser.add_mutually_exclusive_group()
    grid_group.add_argument(
        "--b-values",
        nargs="+",
        type=float,
        help="Support upper bounds b to fit with a = 0, in seconds (needs --events; default: sweep.b_values)"
    )
    grid_group.add_argument(
        "--percentiles",
        nargs="+",
        type=float,
        help="Binarization percentiles (0-100, percent) of the positive activations "
             "(needs --activations; default: sweep.percentiles)"
    )
    sweep_parser.add_argument(
        "--drivers",
        required=True,
        metavar="FILE",
        help="Drivers CSV file (driver_id,time), timestamps in seconds"
    )
    source_group = sweep_parser.add_mutually_exclusive_group(required=True)
    source_group.add_argument(
        "--events",
        metavar="FILE",
        help="Events CSV, timestamps in seconds"
    )
    source_group.add_argument(
        "--activations",
        metavar="FILE",
        help="Activations CSV (time in seconds, value >= 0)"
    )
    _add_support_args(sweep_parser)
    _add_iterations_arg(sweep_parser)
    sweep_init_group = sweep_parser.add_mutually_exclusive_group()
    sweep_init_group.add_argument(
        "--smart-start",
        action="store_true",
        help="Initialize each cell from the data (default: em.init from config)"
    )
    sweep_init_group.add_argument(
        "--init-params",
        metavar="FILE",
        help="Initialize each cell from a fit report or parameter JSON file, moved onto the swept support"
    )
    sweep_parser.add_argument(
        "--duration",
        type=float,
        help="Observation window T for binarized events, in seconds (default: last sample time)"
    )
    sweep_parser.add_argument(
        "--out-dir",
        required=True,
        help="Directory for sweep_b.csv or sweep_percentile.csv"
    )
    sweep_parser.set_defaults(func=sweep)

    # ttest command
    ttest_parser = subparsers.add_parser(
        "ttest",
        help="Welch t-test of event rates on kernel supports against baseline segments"
    )
    ttest_parser.add_argument(
        "--events",
        required=True,
        metavar="FILE",
        help="Events CSV, timestamps in seconds"
    )
    ttest_parser.add_argument(
        "--drivers",
        required=True,
        metavar="FILE",
        help="Drivers CSV file (driver_id,time), timestamps in seconds"
    )
    _add_support_args(ttest_parser)
    ttest_parser.add_argument(
        "--out",
        metavar="FILE",
        help="Write driver_id,t_statistic,p_value rows to this CSV"
    )
    ttest_parser.set_defaults(func=ttest)

