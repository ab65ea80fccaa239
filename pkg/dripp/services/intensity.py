"""Intensity function, its integral, negative log-likelihood and gradient.

Every driver event only contributes to the intensity while the delay
``t - t_i`` lies in the kernel support, so contributions are found by binary
search over the sorted driver events instead of summing over all of them.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Hashable, List, Sequence, Tuple

import numpy as np

from dripp.exceptions import EvaluationError
from dripp.models.events import Driver, EventSequence
from dripp.models.params import DriverParams, KernelSupport, ModelParams
from dripp.services.kernel import kernel_eval, normalizer_ratios

logger = logging.getLogger(__name__)

INTENSITY_FLOOR = 1e-300


@dataclass(frozen=True)
class DriverDelays:
    """Delays between observed times and the driver events whose kernel covers them."""
    driver_id: Hashable
    event_index: np.ndarray
    delays: np.ndarray
    n_events: int


@dataclass(frozen=True)
class DriverGradient:
    alpha: float
    m: float
    sigma: float


@dataclass(frozen=True)
class NllGradient:
    """Partial derivatives of the negative log-likelihood."""
    mu: float
    per_driver: Dict[Hashable, DriverGradient]

    def as_vector(self) -> np.ndarray:
        values = [self.mu]
        for grad in self.per_driver.values():
            values.extend([grad.alpha, grad.m, grad.sigma])
        return np.array(values)


def pair_delays(times: np.ndarray, driver_events: np.ndarray,
                support: KernelSupport) -> Tuple[np.ndarray, np.ndarray]:
    """All (time index, delay) pairs with delay = times[k] - driver_events[i] in [a, b]."""
    times = np.asarray(times, dtype=float)
    lo = np.searchsorted(driver_events, times - support.b, side="left")
    hi = np.searchsorted(driver_events, times - support.a, side="right")
    counts = np.maximum(hi - lo, 0)
    index = np.repeat(np.arange(times.size), counts)
    group_start = np.cumsum(counts) - counts
    offsets = np.arange(index.size) - np.repeat(group_start, counts)
    delays = times[index] - driver_events[np.repeat(lo, counts) + offsets]
    return index, delays


def integral_count(driver: Driver, duration: float, support: KernelSupport) -> int:
    """Driver events whose whole kernel support fits inside [0, duration]."""
    return int(np.searchsorted(driver.events, duration - support.b, side="right"))


def boundary_clean(drivers: Sequence[Driver], duration: float, support: KernelSupport) -> List[Driver]:
    """Drop driver events later than duration - b so the closed-form integral stays exact."""
    cleaned = []
    for driver in drivers:
        driver.check_within(duration)
        keep = integral_count(driver, duration, support)
        if keep < driver.count:
            logger.warning(
                "Dropping %d event(s) of driver %r later than T - b = %.6g",
                driver.count - keep, driver.id, duration - support.b,
            )
            driver = Driver(id=driver.id, events=driver.events[:keep])
        cleaned.append(driver)
    return cleaned


def build_delays(events: EventSequence, drivers: Sequence[Driver],
                 support: KernelSupport) -> List[DriverDelays]:
    """Precompute, per driver, the delays of every event that falls inside a kernel support."""
    table = []
    for driver in drivers:
        index, delays = pair_delays(events.events, driver.events, support)
        table.append(DriverDelays(
            driver_id=driver.id,
            event_index=index,
            delays=delays,
            n_events=integral_count(driver, events.duration, support),
        ))
    return table


def kernel_drive(entry: DriverDelays, params: DriverParams, support: KernelSupport,
                 n_times: int) -> np.ndarray:
    """Sum of kernel values over the driver events preceding each time (alpha excluded)."""
    values = kernel_eval(entry.delays, params, support)
    return np.bincount(entry.event_index, weights=values, minlength=n_times)


def intensity_at(t, params: ModelParams, drivers: Sequence[Driver]):
    """Evaluate lambda(t) = mu + sum_p alpha_p sum_i kappa_p(t - t_i) at one or many times."""
    params.require_drivers(driver.id for driver in drivers)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    rate = np.full(times.shape, params.mu)
    for driver in drivers:
        driver_params = params[driver.id]
        if driver_params.alpha == 0:
            continue
        index, delays = pair_delays(times, driver.events, params.support)
        values = kernel_eval(delays, driver_params, params.support)
        rate += driver_params.alpha * np.bincount(index, weights=values, minlength=times.size)
    if np.ndim(t) == 0:
        return float(rate[0])
    return rate


def intensity_integral(params: ModelParams, drivers: Sequence[Driver], duration: float) -> float:
    """Closed form of the integral of lambda over [0, T]: mu T + sum_p alpha_p n_p.

    ``n_p`` counts the driver events whose kernel support ends before T;
    later events are the ones the boundary policy drops.
    """
    params.require_drivers(driver.id for driver in drivers)
    total = params.mu * duration
    for driver in drivers:
        total += params[driver.id].alpha * integral_count(driver, duration, params.support)
    return float(total)


def _event_intensity(params: ModelParams, events: EventSequence,
                     table: Sequence[DriverDelays]) -> Tuple[np.ndarray, Dict[Hashable, np.ndarray]]:
    """Intensity at each observed event plus the per-driver kernel drives."""
    rate = np.full(events.count, params.mu)
    drives = {}
    for entry in table:
        drive = kernel_drive(entry, params[entry.driver_id], params.support, events.count)
        drives[entry.driver_id] = drive
        rate += params[entry.driver_id].alpha * drive
    return rate, drives


def checked_intensity(params: ModelParams, events: EventSequence,
                      table: Sequence[DriverDelays]) -> Tuple[np.ndarray, Dict[Hashable, np.ndarray]]:
    """Like the event intensity but raises when it vanishes at an event."""
    rate, drives = _event_intensity(params, events, table)
    degenerate = np.flatnonzero(rate < INTENSITY_FLOOR)
    if degenerate.size:
        timestamp = float(events.events[degenerate[0]])
        raise EvaluationError(
            f"intensity is zero at event t={timestamp!r}; the model assigns it zero likelihood",
            timestamp=timestamp,
        )
    return rate, drives


def nll_from_table(params: ModelParams, events: EventSequence, table: Sequence[DriverDelays]) -> float:
    rate, _ = checked_intensity(params, events, table)
    integral = params.mu * events.duration + sum(
        params[entry.driver_id].alpha * entry.n_events for entry in table
    )
    return float(integral - np.sum(np.log(rate)))


def nll(params: ModelParams, events: EventSequence, drivers: Sequence[Driver]) -> float:
    """Negative log-likelihood mu T + sum_p alpha_p n_p - sum_t log lambda(t)."""
    params.require_drivers(driver.id for driver in drivers)
    drivers = boundary_clean(drivers, events.duration, params.support)
    return nll_from_table(params, events, build_delays(events, drivers, params.support))


def nll_gradient(params: ModelParams, events: EventSequence, drivers: Sequence[Driver]) -> NllGradient:
    """Analytic partial derivatives of the negative log-likelihood."""
    params.require_drivers(driver.id for driver in drivers)
    drivers = boundary_clean(drivers, events.duration, params.support)
    support = params.support
    table = build_delays(events, drivers, support)
    rate, drives = checked_intensity(params, events, table)
    inverse_rate = 1.0 / rate

    grad_mu = events.duration - float(np.sum(inverse_rate))
    per_driver = {}
    for entry in table:
        driver_params = params[entry.driver_id]
        grad_alpha = entry.n_events - float(np.dot(drives[entry.driver_id], inverse_rate))

        ratio_m, ratio_sigma = normalizer_ratios(driver_params.m, driver_params.sigma, support)
        weights = (driver_params.alpha * kernel_eval(entry.delays, driver_params, support)
                   * inverse_rate[entry.event_index])
        centered = entry.delays - driver_params.m
        sigma = driver_params.sigma
        grad_m = -float(np.sum((centered / sigma ** 2 - ratio_m) * weights))
        grad_sigma = -float(np.sum((centered ** 2 / sigma ** 3 - ratio_sigma) * weights))
        per_driver[entry.driver_id] = DriverGradient(alpha=grad_alpha, m=grad_m, sigma=grad_sigma)
    return NllGradient(mu=grad_mu, per_driver=per_driver)
