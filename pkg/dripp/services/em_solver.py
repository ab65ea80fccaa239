"""EM inference of the driven point-process parameters.

One iteration assigns every event to the baseline or to a driver (E-step)
and then re-estimates mu, alpha, m and sigma from those assignments (M-step).
All per-driver updates of an iteration read the previous iterate only.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from dripp.exceptions import InitializationError, InvalidArgumentError
from dripp.models.events import Driver, EventSequence
from dripp.models.params import DriverParams, KernelSupport, ModelParams
from dripp.models.report import FitReport, Responsibilities, Termination
from dripp.services.intensity import (
    DriverDelays,
    boundary_clean,
    build_delays,
    checked_intensity,
    nll_from_table,
)
from dripp.services.kernel import kernel_eval, normalizer_ratios

logger = logging.getLogger(__name__)

MONOTONICITY_TOLERANCE = 1e-9


class InitStrategy(str, Enum):
    SMART_START = "smart_start"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class EmConfig:
    """EM settings: iteration count N, sigma floor (s), divergence margin (support widths) and init."""
    n_iterations: int = 50
    sigma_floor: float = 1e-2
    divergence_margin: float = 1.0
    init: InitStrategy = InitStrategy.SMART_START
    init_params: Optional[ModelParams] = None

    def __post_init__(self):
        errors = []
        if int(self.n_iterations) != self.n_iterations or self.n_iterations < 1:
            errors.append(f"n_iterations must be an integer >= 1, got {self.n_iterations}")
        if not self.sigma_floor > 0:
            errors.append(f"sigma_floor must be positive, got {self.sigma_floor}")
        if not self.divergence_margin > 0:
            errors.append(f"divergence_margin must be positive, got {self.divergence_margin}")
        init = InitStrategy(self.init)
        if init is InitStrategy.EXPLICIT and self.init_params is None:
            errors.append("explicit initialization requires init_params")
        if init is InitStrategy.SMART_START and self.init_params is not None:
            errors.append("init_params given together with smart_start initialization")
        if errors:
            raise InvalidArgumentError("EM configuration is invalid:\n" + "\n".join(f"  - {e}" for e in errors))
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "n_iterations", int(self.n_iterations))

    def divergence_bounds(self, support: KernelSupport) -> Tuple[float, float]:
        margin = self.divergence_margin * support.width
        return support.a - margin, support.b + margin


def empirical_delays(events: EventSequence, driver: Driver, support: KernelSupport) -> np.ndarray:
    """Delays from each event to the last driver event at or before it, kept when inside [a, b]."""
    last = np.searchsorted(driver.events, events.events, side="right") - 1
    has_prior = last >= 0
    delays = events.events[has_prior] - driver.events[last[has_prior]]
    return delays[(delays >= support.a) & (delays <= support.b)]


def merge_intervals(intervals) -> Tuple[np.ndarray, np.ndarray]:
    """Sort-and-sweep merge of closed intervals into disjoint blocks (starts, ends)."""
    intervals = np.asarray(intervals, dtype=float).reshape(-1, 2)
    if intervals.size == 0:
        return np.empty(0), np.empty(0)
    if np.any(intervals[:, 1] < intervals[:, 0]):
        raise InvalidArgumentError("interval end must not precede its start")
    intervals = intervals[np.argsort(intervals[:, 0], kind="stable")]
    starts, ends = intervals[:, 0], intervals[:, 1]
    reach = np.maximum.accumulate(ends)
    opens_block = np.ones(starts.size, dtype=bool)
    opens_block[1:] = starts[1:] > reach[:-1]
    return starts[opens_block], np.maximum.reduceat(ends, np.flatnonzero(opens_block))


def interval_union_measure(intervals) -> float:
    """Lebesgue measure of a union of closed intervals."""
    starts, ends = merge_intervals(intervals)
    return float(np.sum(ends - starts))


def _count_inside(times: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> int:
    if starts.size == 0:
        return 0
    block = np.searchsorted(starts, times, side="right") - 1
    inside = (block >= 0) & (times <= ends[np.maximum(block, 0)])
    return int(np.count_nonzero(inside))


def _shifted_supports(driver: Driver, support: KernelSupport, duration: float) -> np.ndarray:
    return np.column_stack([
        np.clip(driver.events + support.a, 0.0, duration),
        np.clip(driver.events + support.b, 0.0, duration),
    ])


def _covered_blocks(drivers: Sequence[Driver], support: KernelSupport,
                    duration: float) -> Tuple[List[np.ndarray], np.ndarray, np.ndarray]:
    all_supports = [_shifted_supports(driver, support, duration) for driver in drivers]
    union_starts, union_ends = merge_intervals(
        np.concatenate(all_supports) if all_supports else np.empty((0, 2))
    )
    return all_supports, union_starts, union_ends


def uncovered_time(drivers: Sequence[Driver], support: KernelSupport, duration: float) -> float:
    """Time in [0, T] lying outside every shifted kernel support."""
    _, starts, ends = _covered_blocks(drivers, support, duration)
    return duration - float(np.sum(ends - starts))


def neutral_start(events: EventSequence, drivers: Sequence[Driver], support: KernelSupport) -> ModelParams:
    """Baseline-only starting point: mu = #events / T, alpha = 0, kernels centred on the support."""
    kernel = DriverParams(alpha=0.0, m=support.center, sigma=support.width / 4)
    return ModelParams(
        mu=events.count / events.duration,
        per_driver={driver.id: kernel for driver in drivers},
        support=support,
    )


def smart_start(events: EventSequence, drivers: Sequence[Driver], support: KernelSupport,
                sigma_floor: float = EmConfig.sigma_floor) -> ModelParams:
    """Deterministic initial parameters.

    The baseline is the rate of events falling outside every shifted kernel
    support; alpha is the excess rate inside a driver's supports; m and sigma
    are the mean and standard deviation of the empirical delays.
    """
    duration = events.duration
    all_supports, union_starts, union_ends = _covered_blocks(drivers, support, duration)
    free_time = duration - float(np.sum(union_ends - union_starts))
    if free_time <= 0:
        raise InitializationError(
            f"kernel supports cover the whole observation window (T={duration}); "
            "use a smaller support upper bound b or an explicit initialization"
        )
    n_inside = _count_inside(events.events, union_starts, union_ends)
    mu0 = (events.count - n_inside) / free_time

    per_driver: Dict[Hashable, DriverParams] = {}
    for driver, supports in zip(drivers, all_supports):
        delays = empirical_delays(events, driver, support)
        covered = interval_union_measure(supports)
        if delays.size == 0 or covered <= 0:
            per_driver[driver.id] = DriverParams(alpha=0.0, m=support.center, sigma=support.width / 4)
            continue
        alpha0 = max(0.0, delays.size / covered - mu0)
        m0 = float(np.mean(delays))
        sigma0 = max(float(np.sqrt(np.mean((delays - m0) ** 2))), sigma_floor)
        per_driver[driver.id] = DriverParams(alpha=alpha0, m=m0, sigma=sigma0)
    logger.debug("Smart start: mu0=%.6g, %s", mu0, per_driver)
    return ModelParams(mu=mu0, per_driver=per_driver, support=support)


def _e_step_table(params: ModelParams, events: EventSequence,
                  table: Sequence[DriverDelays]) -> Tuple[Responsibilities, np.ndarray]:
    rate, drives = checked_intensity(params, events, table)
    baseline = params.mu / rate
    per_driver = {
        entry.driver_id: params[entry.driver_id].alpha * drives[entry.driver_id] / rate
        for entry in table
    }
    return Responsibilities(baseline=baseline, per_driver=per_driver), rate


def e_step(params: ModelParams, events: EventSequence, drivers: Sequence[Driver]) -> Responsibilities:
    """Probability that each event comes from the baseline (mu / lambda) or from each driver."""
    params.require_drivers(driver.id for driver in drivers)
    drivers = boundary_clean(drivers, events.duration, params.support)
    resp, _ = _e_step_table(params, events, build_delays(events, drivers, params.support))
    return resp


def _driver_update(current: DriverParams, entry: DriverDelays, assigned: float, rate: np.ndarray,
                   support: KernelSupport, sigma_floor: float) -> DriverParams:
    alpha = max(0.0, assigned / entry.n_events) if entry.n_events else 0.0
    if assigned <= 0 or current.alpha == 0:
        return DriverParams(alpha=0.0, m=current.m, sigma=current.sigma)

    weights = current.alpha * kernel_eval(entry.delays, current, support) / rate[entry.event_index]
    ratio_m, ratio_sigma = normalizer_ratios(current.m, current.sigma, support)
    m = float(np.dot(weights, entry.delays)) / assigned - current.sigma ** 2 * ratio_m
    spread = float(np.dot(weights, (entry.delays - current.m) ** 2)) / assigned
    sigma = math.cbrt(spread / ratio_sigma) if ratio_sigma > 0 else current.sigma
    if not (math.isfinite(m) and math.isfinite(sigma)):
        logger.warning("Non-finite kernel update for driver %r; dropping its kernel", entry.driver_id)
        return DriverParams(alpha=0.0, m=current.m, sigma=current.sigma)
    return DriverParams(alpha=alpha, m=m, sigma=max(sigma, sigma_floor))


def _m_step_table(params: ModelParams, resp: Responsibilities, events: EventSequence,
                  table: Sequence[DriverDelays], rate: np.ndarray, config: EmConfig) -> ModelParams:
    mu = float(np.sum(resp.baseline)) / events.duration
    per_driver = {}
    for entry in table:
        assigned = float(np.sum(resp.per_driver[entry.driver_id]))
        per_driver[entry.driver_id] = _driver_update(
            params[entry.driver_id], entry, assigned, rate, params.support, config.sigma_floor
        )
    return ModelParams(mu=mu, per_driver=per_driver, support=params.support)


def m_step(params: ModelParams, resp: Responsibilities, events: EventSequence,
           drivers: Sequence[Driver], config: EmConfig) -> ModelParams:
    """Closed-form baseline / weight updates and fixed-point kernel updates from one E-step."""
    params.require_drivers(driver.id for driver in drivers)
    drivers = boundary_clean(drivers, events.duration, params.support)
    table = build_delays(events, drivers, params.support)
    rate, _ = checked_intensity(params, events, table)
    return _m_step_table(params, resp, events, table, rate, config)


def _initial_params(events: EventSequence, drivers: Sequence[Driver], support: KernelSupport,
                    config: EmConfig) -> ModelParams:
    if config.init is InitStrategy.SMART_START:
        return smart_start(events, drivers, support, sigma_floor=config.sigma_floor)
    init = config.init_params
    if init.support != support:
        raise InvalidArgumentError(f"initial parameters use support {init.support}, expected {support}")
    init.require_drivers(driver.id for driver in drivers)
    return ModelParams(mu=init.mu, per_driver={d.id: init[d.id] for d in drivers}, support=support)


def run_em(events: EventSequence, drivers: Sequence[Driver], support: KernelSupport,
           config: EmConfig = EmConfig()) -> FitReport:
    """Run the EM algorithm for at most N iterations.

    Stops early with the baseline MLE #events / T when every alpha is 0, or
    when a latency mean leaves the support by more than the divergence margin.
    """
    ids = [driver.id for driver in drivers]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError(f"driver ids must be unique, got {ids}")
    drivers = boundary_clean(drivers, events.duration, support)
    table = build_delays(events, drivers, support)
    mle_mu = events.count / events.duration
    lower, upper = config.divergence_bounds(support)

    params = _initial_params(events, drivers, support, config)
    history: List[float] = [nll_from_table(params, events, table)]
    termination = Termination.COMPLETED
    diagnostics: Dict = {"init": config.init.value, "max_simplex_deviation": 0.0}
    iterations = 0

    for iteration in range(config.n_iterations):
        if not np.any(params.alphas > 0):
            params = params.with_baseline_only(mle_mu)
            termination = Termination.ALPHA_ZERO_MLE_EXIT
            history.append(nll_from_table(params, events, table))
            break

        resp, rate = _e_step_table(params, events, table)
        diagnostics["max_simplex_deviation"] = max(
            diagnostics["max_simplex_deviation"], resp.simplex_deviation()
        )
        params = _m_step_table(params, resp, events, table, rate, config)
        iterations += 1

        runaway = [d for d, p in params.per_driver.items() if not lower <= p.m <= upper]
        if runaway:
            logger.info("EM diverging at iteration %d (drivers %s); falling back to baseline MLE",
                        iteration + 1, runaway)
            params = params.with_baseline_only(mle_mu)
            termination = Termination.DIVERGED_FALLBACK
            diagnostics["divergence_iteration"] = iteration + 1
            diagnostics["diverged_drivers"] = [str(d) for d in runaway]
            history.append(nll_from_table(params, events, table))
            break
        history.append(nll_from_table(params, events, table))
        logger.debug("EM iteration %d: nll=%.12g", iteration + 1, history[-1])
    else:
        if not np.any(params.alphas > 0):
            params = params.with_baseline_only(mle_mu)
            termination = Termination.ALPHA_ZERO_MLE_EXIT
            history.append(nll_from_table(params, events, table))

    diagnostics["monotonicity_violations"] = _monotonicity_violations(history, termination)
    report = FitReport(
        params=params,
        nll_history=history,
        termination=termination,
        iterations_run=iterations,
        diagnostics=diagnostics,
    )
    report.diagnostics["alpha_mu_ratio"] = {str(k): v for k, v in report.alpha_mu_ratio().items()}
    logger.info("EM finished: %s", report)
    return report


def _monotonicity_violations(history: Sequence[float], termination: Termination) -> List[dict]:
    """Steps where the NLL rose by more than the relative tolerance."""
    steps = len(history) - 1
    if termination is Termination.DIVERGED_FALLBACK:
        steps -= 1
    violations = []
    for i in range(steps):
        increase = history[i + 1] - history[i]
        if increase > MONOTONICITY_TOLERANCE * abs(history[i]):
            violations.append({"iteration": i + 1, "increase": increase})
    return violations
