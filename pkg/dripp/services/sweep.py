"""Hyperparameter sweeps: kernel support end b, and binarization percentile."""
import logging
from dataclasses import replace
from typing import List, Sequence, Tuple

from dripp.exceptions import DrippError
from dripp.models.events import ActivationStream, Driver, EventSequence
from dripp.models.params import KernelSupport
from dripp.models.report import SweepCell
from dripp.services.binarizer import PercentileThreshold, binarize
from dripp.services.em_solver import EmConfig, InitStrategy, neutral_start, run_em, uncovered_time
from dripp.services.intensity import boundary_clean

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["driver_id", "mu", "alpha", "m", "sigma", "termination", "init", "error"]

NEUTRAL_INIT = "neutral"


def cell_em_config(events: EventSequence, drivers: Sequence[Driver], support: KernelSupport,
                   em_config: EmConfig) -> Tuple[EmConfig, str]:
    """EM settings for one sweep cell and the name of the starting point used.

    Explicit initial parameters are moved onto the cell's support. Smart start
    needs at least one support width of time outside every shifted support to
    estimate the baseline; below that the cell starts from the baseline-only
    point instead.
    """
    if em_config.init is InitStrategy.EXPLICIT:
        moved = em_config.init_params.with_support(support)
        return replace(em_config, init_params=moved), InitStrategy.EXPLICIT.value
    cleaned = boundary_clean(drivers, events.duration, support)
    free_time = uncovered_time(cleaned, support, events.duration)
    if free_time < support.width:
        logger.warning(
            "Support %s leaves %.3g s outside every driver support (less than its width); "
            "starting from the baseline-only point", support, free_time,
        )
        start = neutral_start(events, cleaned, support)
        return replace(em_config, init=InitStrategy.EXPLICIT, init_params=start), NEUTRAL_INIT
    return em_config, InitStrategy.SMART_START.value


def _fit_cell(parameter: str, value: float, events: EventSequence, drivers: Sequence[Driver],
              support: KernelSupport, em_config: EmConfig) -> SweepCell:
    init = ""
    try:
        drivers = boundary_clean(drivers, events.duration, support)
        config, init = cell_em_config(events, drivers, support, em_config)
        report = run_em(events, drivers, support, config)
    except DrippError as e:
        logger.warning("Sweep %s=%g failed: %s", parameter, value, e)
        return SweepCell(parameter=parameter, value=value, report=None, error=f"{type(e).__name__}: {e}",
                         init=init)
    logger.info("Sweep %s=%g (%s start): %s", parameter, value, init, report)
    return SweepCell(parameter=parameter, value=value, report=report, init=init)


def support_sweep(events: EventSequence, drivers: Sequence[Driver], b_values: Sequence[float],
                  em_config: EmConfig = EmConfig(), a: float = 0.0) -> List[SweepCell]:
    """Fit once per support end b with support [a, b]; a failing fit is recorded on its cell."""
    cells = []
    for b in b_values:
        try:
            support = KernelSupport(a, float(b))
        except DrippError as e:
            logger.warning("Sweep b=%g skipped: %s", b, e)
            cells.append(SweepCell(parameter="b", value=float(b), report=None, error=f"{type(e).__name__}: {e}"))
            continue
        cells.append(_fit_cell("b", float(b), events, drivers, support, em_config))
    return cells


def threshold_sweep(stream: ActivationStream, drivers: Sequence[Driver], percentiles: Sequence[float],
                    support: KernelSupport, em_config: EmConfig = EmConfig(),
                    duration: float = None) -> List[SweepCell]:
    """Binarize at each percentile of the positive activations, then fit."""
    cells = []
    for q in percentiles:
        try:
            events = binarize(stream, PercentileThreshold(float(q)), duration)
        except DrippError as e:
            logger.warning("Sweep percentile=%g failed to binarize: %s", q, e)
            cells.append(SweepCell(parameter="percentile", value=float(q), report=None,
                                   error=f"{type(e).__name__}: {e}"))
            continue
        cells.append(_fit_cell("percentile", float(q), events, drivers, support, em_config))
    return cells
