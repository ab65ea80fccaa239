"""Recovery metrics and the stimulus-independence test."""
from typing import Hashable, Tuple

import numpy as np
from scipy import stats

from dripp.exceptions import InvalidArgumentError
from dripp.models.events import Driver, EventSequence
from dripp.models.params import KernelSupport, ModelParams
from dripp.services.em_solver import merge_intervals
from dripp.services.kernel import kernel_eval

DEFAULT_GRID_STEP = 1e-3


def evaluation_grid(params: ModelParams, grid_step: float) -> np.ndarray:
    """Uniform grid over [0, b + step], with the support ends added exactly."""
    if not grid_step > 0:
        raise InvalidArgumentError(f"grid_step must be positive, got {grid_step}")
    support = params.support
    grid = np.arange(0.0, support.b + grid_step, grid_step)
    return np.union1d(grid, [support.a, support.b])


def single_driver_intensity(params: ModelParams, driver_id: Hashable, t: np.ndarray) -> np.ndarray:
    """mu + alpha_p kappa_p(t): intensity following one driver event at time 0."""
    driver_params = params[driver_id]
    return params.mu + driver_params.alpha * kernel_eval(t, driver_params, params.support)


def intensity_curve(true_params: ModelParams, est_params: ModelParams, driver_id: Hashable,
                    grid_step: float = DEFAULT_GRID_STEP) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid, true and estimated single-driver intensities."""
    _check_same_support(true_params, est_params)
    grid = evaluation_grid(true_params, grid_step)
    return (grid, single_driver_intensity(true_params, driver_id, grid),
            single_driver_intensity(est_params, driver_id, grid))


def _check_same_support(true_params: ModelParams, est_params: ModelParams) -> None:
    if true_params.support != est_params.support:
        raise InvalidArgumentError(
            f"parameter sets use different supports: {true_params.support} vs {est_params.support}"
        )


def linf_distance(true_params: ModelParams, est_params: ModelParams, driver_id: Hashable,
                  grid_step: float = DEFAULT_GRID_STEP) -> float:
    """Largest gap between true and estimated single-driver intensities on the grid."""
    _, true_curve, est_curve = intensity_curve(true_params, est_params, driver_id, grid_step)
    return float(np.max(np.abs(true_curve - est_curve)))


def relative_linf(true_params: ModelParams, est_params: ModelParams, driver_id: Hashable,
                  grid_step: float = DEFAULT_GRID_STEP) -> float:
    """linf_distance divided by the maximum of the true single-driver intensity."""
    _, true_curve, est_curve = intensity_curve(true_params, est_params, driver_id, grid_step)
    peak = float(np.max(true_curve))
    if peak <= 0:
        raise InvalidArgumentError(f"true intensity of driver {driver_id!r} is identically zero")
    return float(np.max(np.abs(true_curve - est_curve))) / peak


def _segment_rates(times: np.ndarray, starts: np.ndarray, width: float) -> np.ndarray:
    counts = (np.searchsorted(times, starts + width, side="right")
              - np.searchsorted(times, starts, side="left"))
    return counts / width


def baseline_segments(driver: Driver, duration: float, width: float, offset: float) -> np.ndarray:
    """Starts of equal-width segments tiling [0, T] outside every [t_i + a, t_i + b].

    Each gap is tiled from its left end; the remainder shorter than a segment is discarded.
    """
    blocks = np.column_stack([driver.events + offset, driver.events + offset + width])
    blocks = blocks[(blocks[:, 1] > 0) & (blocks[:, 0] < duration)]
    busy_starts, busy_ends = merge_intervals(blocks)
    gap_starts = np.concatenate([[0.0], busy_ends])
    gap_ends = np.concatenate([busy_starts, [duration]])
    gap_starts = np.maximum(gap_starts, 0.0)
    gap_ends = np.minimum(gap_ends, duration)
    tiles = np.floor(np.maximum(gap_ends - gap_starts, 0.0) / width).astype(int)
    owner = np.repeat(np.arange(tiles.size), tiles)
    rank = np.arange(owner.size) - np.repeat(np.cumsum(tiles) - tiles, tiles)
    return gap_starts[owner] + rank * width


def segment_ttest(events: EventSequence, driver: Driver, support: KernelSupport) -> Tuple[float, float]:
    """Welch t-test of event rates on kernel-support segments against baseline segments.

    Returns (t statistic, two-sided p-value); a positive statistic means
    events are more frequent right after the driver.
    """
    width = support.width
    onsets = driver.events[driver.events + support.b <= events.duration] + support.a
    on_rates = _segment_rates(events.events, onsets, width)
    off_rates = _segment_rates(events.events, baseline_segments(driver, events.duration, width, support.a), width)
    if on_rates.size < 2 or off_rates.size < 2:
        raise InvalidArgumentError(
            f"segment t-test needs at least 2 segments per group, got {on_rates.size} on-support "
            f"and {off_rates.size} baseline segments"
        )
    result = stats.ttest_ind(on_rates, off_rates, equal_var=False)
    return float(result.statistic), float(result.pvalue)
