"""Synthetic drivers and thinning simulation of the driven process.

Random streams are derived with ``numpy.random.SeedSequence(seed,
spawn_key=(stream, index))``: stream 0 generates driver ``index`` and
stream 1 runs the thinning sampler, so an experiment cell is reproducible
from its integer seed alone, whatever order cells run in.
"""
import logging
import math
from dataclasses import dataclass
from typing import Hashable, List, Sequence, Tuple

import numpy as np

from dripp.exceptions import InvalidArgumentError, SimulationError
from dripp.models.events import Driver, EventSequence
from dripp.models.params import ModelParams
from dripp.services.intensity import intensity_at
from dripp.services.kernel import kernel_peak

logger = logging.getLogger(__name__)

DRIVER_STREAM = 0
THINNING_STREAM = 1

MAX_REDRAWS = 100


def stream_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (stream, index) pair of a seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, index)))


@dataclass(frozen=True)
class DriverGenSpec:
    """Equidistant-then-subsample driver protocol: ISI (s), kept fraction P/S and duration T (s)."""
    isi: float
    keep_fraction: float
    duration: float
    driver_id: Hashable = "driver"

    def __post_init__(self):
        if not (math.isfinite(self.isi) and self.isi > 0):
            raise InvalidArgumentError(f"isi must be positive, got {self.isi}")
        if not (0 < self.keep_fraction <= 1):
            raise InvalidArgumentError(f"keep_fraction must lie in (0, 1], got {self.keep_fraction}")
        if not (math.isfinite(self.duration) and self.duration >= self.isi):
            raise InvalidArgumentError(f"duration must be at least one isi, got T={self.duration}")

    @property
    def n_slots(self) -> int:
        return int(math.floor(self.duration / self.isi))

    @property
    def n_kept(self) -> int:
        return int(math.floor(self.keep_fraction * self.n_slots))


def gen_driver(spec: DriverGenSpec, seed: int, index: int = 0) -> Driver:
    """Sample P = floor(keep_fraction * S) of the S = floor(T / ISI) equidistant slots without replacement."""
    if spec.n_kept == 0:
        raise InvalidArgumentError(
            f"driver {spec.driver_id!r} keeps no events (S={spec.n_slots}, P/S={spec.keep_fraction})"
        )
    rng = stream_rng(seed, DRIVER_STREAM, index)
    slots = np.arange(spec.n_slots) * spec.isi
    chosen = rng.choice(spec.n_slots, size=spec.n_kept, replace=False)
    return Driver(id=spec.driver_id, events=np.sort(slots[chosen]))


def majorant(params: ModelParams, drivers: Sequence[Driver], duration: float) -> Tuple[np.ndarray, np.ndarray]:
    """Piecewise-constant upper bound of the intensity on [0, T].

    Returns segment breakpoints (starting at 0, ending at T) and the bound on
    each segment: mu plus alpha_p * max(kappa_p) for every kernel support
    [t_i + a, t_i + b] overlapping the segment.
    """
    support = params.support
    edges = [np.array([0.0, duration])]
    for driver in drivers:
        edges.append(np.clip(driver.events + support.a, 0.0, duration))
        edges.append(np.clip(driver.events + support.b, 0.0, duration))
    breakpoints = np.unique(np.concatenate(edges))

    starts = breakpoints[:-1]
    level = np.full(starts.shape, params.mu)
    for driver in drivers:
        driver_params = params[driver.id]
        if driver_params.alpha == 0 or driver.count == 0:
            continue
        peak = driver_params.alpha * kernel_peak(driver_params, support)
        # Active supports on [start, next): opened at or before start, closed after start.
        opened = np.searchsorted(driver.events + support.a, starts, side="right")
        closed = np.searchsorted(driver.events + support.b, starts, side="right")
        level = level + peak * (opened - closed)
    if not np.all(np.isfinite(level)):
        raise SimulationError("thinning majorant is not finite")
    return breakpoints, level


@dataclass(frozen=True)
class ThinningDraw:
    """One thinning pass: the accepted events, how many candidates were proposed and the majorant mass."""
    events: EventSequence
    n_candidates: int
    majorant_mass: float

    @property
    def acceptance_rate(self) -> float:
        return self.events.count / self.n_candidates if self.n_candidates else float("nan")


def thinning_simulate(params: ModelParams, drivers: Sequence[Driver], duration: float, seed: int) -> EventSequence:
    """Sample the driven inhomogeneous Poisson process on [0, T] by thinning a piecewise-constant majorant."""
    return thinning_draw(params, drivers, duration, seed).events


def thinning_draw(params: ModelParams, drivers: Sequence[Driver], duration: float, seed: int) -> ThinningDraw:
    """Thinning sampler behind thinning_simulate, keeping its candidate bookkeeping."""
    params.require_drivers(driver.id for driver in drivers)
    for driver in drivers:
        driver.check_within(duration)
    rng = stream_rng(seed, THINNING_STREAM)

    breakpoints, level = majorant(params, drivers, duration)
    lengths = np.diff(breakpoints)
    counts = rng.poisson(level * lengths)
    segment = np.repeat(np.arange(level.size), counts)
    candidates = breakpoints[segment] + rng.random(segment.size) * lengths[segment]
    keep = rng.random(segment.size) * level[segment] < intensity_at(candidates, params, drivers)
    accepted = candidates[keep]
    accepted_segment = segment[keep]
    logger.debug("Thinning accepted %d of %d candidates", accepted.size, candidates.size)

    accepted, accepted_segment = _redraw_ties(
        accepted, accepted_segment, breakpoints, level, params, drivers, rng
    )
    return ThinningDraw(
        events=EventSequence(events=accepted, duration=duration),
        n_candidates=int(candidates.size),
        majorant_mass=float(np.sum(level * lengths)),
    )


def _redraw_ties(times: np.ndarray, segment: np.ndarray, breakpoints: np.ndarray, level: np.ndarray,
                 params: ModelParams, drivers: Sequence[Driver], rng: np.random.Generator):
    """Sort accepted times and re-draw any candidate that coincides with an earlier one."""
    order = np.argsort(times, kind="stable")
    times = times[order]
    segment = segment[order]
    for _ in range(MAX_REDRAWS):
        tied = np.flatnonzero(np.diff(times) == 0) + 1
        if tied.size == 0:
            return times, segment
        pending = tied
        while pending.size:
            start = breakpoints[segment[pending]]
            fresh = start + rng.random(pending.size) * (breakpoints[segment[pending] + 1] - start)
            accept = rng.random(pending.size) * level[segment[pending]] < intensity_at(fresh, params, drivers)
            times[pending[accept]] = fresh[accept]
            pending = pending[~accept]
        order = np.argsort(times, kind="stable")
        times = times[order]
        segment = segment[order]
    raise SimulationError("could not break simultaneous event times")
