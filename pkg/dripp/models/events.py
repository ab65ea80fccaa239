from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from dripp.exceptions import InvalidArgumentError


def _frozen_timestamps(values, name: str) -> np.ndarray:
    """Copy timestamps into a read-only float array and check they are finite and increasing."""
    array = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} contains non-finite timestamps")
    if array.size and array[0] < 0:
        raise InvalidArgumentError(f"{name} contains negative timestamps")
    if np.any(np.diff(array) <= 0):
        raise InvalidArgumentError(f"{name} timestamps must be strictly increasing")
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class EventSequence:
    """Activation timestamps of the modelled process on [0, duration]."""
    events: np.ndarray
    duration: float

    def __post_init__(self):
        duration = float(self.duration)
        if not np.isfinite(duration) or duration <= 0:
            raise InvalidArgumentError(f"duration must be a positive finite number, got {self.duration}")
        events = _frozen_timestamps(self.events, "events")
        if events.size and events[-1] > duration:
            raise InvalidArgumentError(
                f"event at {events[-1]} lies beyond the duration {duration}"
            )
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "duration", duration)

    @property
    def count(self) -> int:
        return int(self.events.size)

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventSequence):
            return NotImplemented
        return self.duration == other.duration and np.array_equal(self.events, other.events)

    def __str__(self) -> str:
        return f"EventSequence(n={self.count}, T={self.duration})"


@dataclass(frozen=True)
class Driver:
    """A stimulus stream: known event times that modulate the intensity."""
    id: Hashable
    events: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        object.__setattr__(self, "events", _frozen_timestamps(self.events, f"driver {self.id!r}"))

    @property
    def count(self) -> int:
        return int(self.events.size)

    def check_within(self, duration: float) -> None:
        """Raise if any driver event falls outside [0, duration]."""
        if self.events.size and self.events[-1] > duration:
            raise InvalidArgumentError(
                f"driver {self.id!r} has an event at {self.events[-1]} beyond T={duration}"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Driver):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.events, other.events)

    def __str__(self) -> str:
        return f"Driver(id={self.id}, n={self.count})"


@dataclass(frozen=True)
class ActivationStream:
    """Continuous activation values of one atom, sampled at increasing times."""
    times: np.ndarray
    values: np.ndarray
    label: Hashable = "atom"

    def __post_init__(self):
        times = _frozen_timestamps(self.times, f"activation stream {self.label!r}")
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape != times.shape:
            raise InvalidArgumentError("activation times and values must have the same length")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("activation values must be finite")
        if np.any(values < 0):
            raise InvalidArgumentError("activation values must be non-negative")
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.times.size)
