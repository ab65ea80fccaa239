import numpy as np
import pytest

from dripp.exceptions import InvalidArgumentError
from dripp.models.events import ActivationStream
from dripp.services.binarizer import (
    SAMPLE_DATASET_THRESHOLD,
    AbsoluteThreshold,
    PercentileThreshold,
    binarize,
)


def stream(values, times=None):
    times = np.arange(1, len(values) + 1, dtype=float) if times is None else times
    return ActivationStream(times=times, values=values, label="atom")


def test_zero_activations_give_no_events_with_zero_threshold():
    events = binarize(stream([0.0, 0.0, 0.0]), AbsoluteThreshold(0.0))
    assert events.count == 0
    assert events.duration == 3.0


def test_percentile_of_positive_values():
    events = binarize(stream([1.0, 2.0, 3.0, 4.0, 5.0]), PercentileThreshold(60))
    # 60th percentile of {1..5} is 3.4
    np.testing.assert_array_equal(events.events, [4.0, 5.0])


def test_percentile_zero_keeps_positive_samples():
    values = [0.0, 0.3, 0.0, 1e-12, 2.0, 0.0]
    events = binarize(stream(values), PercentileThreshold(0))
    np.testing.assert_array_equal(events.events, [2.0, 4.0, 5.0])


def test_percentile_ignores_zero_samples():
    with_zeros = binarize(stream([0.0, 0.0, 1.0, 0.0, 2.0, 3.0]), PercentileThreshold(50))
    np.testing.assert_array_equal(with_zeros.events, [6.0])


def test_raising_threshold_never_adds_events():
    rng = np.random.default_rng(1)
    activations = stream(np.where(rng.random(500) < 0.3, rng.exponential(1.0, 500), 0.0))
    previous = None
    for threshold in np.linspace(0, 4, 41):
        kept = set(binarize(activations, AbsoluteThreshold(threshold)).events)
        if previous is not None:
            assert kept <= previous
        previous = kept


def test_sample_dataset_threshold():
    activations = stream([5e-11, 6e-11, 7e-11, 1e-9])
    events = binarize(activations, AbsoluteThreshold(SAMPLE_DATASET_THRESHOLD))
    np.testing.assert_array_equal(events.events, [3.0, 4.0])


def test_explicit_duration():
    events = binarize(stream([1.0, 0.0]), AbsoluteThreshold(0.5), duration=10.0)
    assert events.duration == 10.0


def test_invalid_rules_and_streams():
    with pytest.raises(InvalidArgumentError):
        PercentileThreshold(100)
    with pytest.raises(InvalidArgumentError):
        AbsoluteThreshold(-1.0)
    with pytest.raises(InvalidArgumentError):
        binarize(stream([0.0, 0.0]), PercentileThreshold(10))
    with pytest.raises(InvalidArgumentError):
        binarize(stream([], times=[]), AbsoluteThreshold(0.0))
    with pytest.raises(InvalidArgumentError):
        stream([1.0, -1.0])
