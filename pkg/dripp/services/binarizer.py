"""Turn continuous atom activations into point-process events."""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from dripp.exceptions import InvalidArgumentError
from dripp.models.events import ActivationStream, EventSequence

# Absolute threshold used for the MNE sample dataset activations.
SAMPLE_DATASET_THRESHOLD = 6e-11


@dataclass(frozen=True)
class AbsoluteThreshold:
    threshold: float

    def __post_init__(self):
        if not (np.isfinite(self.threshold) and self.threshold >= 0):
            raise InvalidArgumentError(f"absolute threshold must be >= 0, got {self.threshold}")

    def resolve(self, values: np.ndarray) -> float:
        return float(self.threshold)

    def __str__(self) -> str:
        return f"value > {self.threshold:g}"


@dataclass(frozen=True)
class PercentileThreshold:
    """Threshold at the q-th percentile of the strictly positive activation values."""
    q: float

    def __post_init__(self):
        if not (0 <= self.q < 100):
            raise InvalidArgumentError(f"percentile must lie in [0, 100), got {self.q}")

    def resolve(self, values: np.ndarray) -> float:
        positive = values[values > 0]
        if positive.size == 0:
            raise InvalidArgumentError("percentile threshold needs at least one strictly positive activation")
        if self.q == 0:
            return 0.0
        return float(np.percentile(positive, self.q))

    def __str__(self) -> str:
        return f"value > P{self.q:g}(positive values)"


ThresholdRule = Union[AbsoluteThreshold, PercentileThreshold]


def binarize(stream: ActivationStream, rule: ThresholdRule, duration: Optional[float] = None) -> EventSequence:
    """Keep the sample times whose activation strictly exceeds the rule's threshold.

    Activations are assumed already aligned on the time point they should
    represent (for instance the atom's peak amplitude). The observation window
    defaults to [0, last sample time].
    """
    if len(stream) == 0:
        raise InvalidArgumentError(f"activation stream {stream.label!r} is empty")
    threshold = rule.resolve(stream.values)
    kept = stream.times[stream.values > threshold]
    if duration is None:
        duration = float(stream.times[-1])
    return EventSequence(events=kept, duration=duration)
