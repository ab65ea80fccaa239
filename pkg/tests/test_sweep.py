import numpy as np
import pytest

from conftest import HEADLINE_ISI, simulate_headline
from dripp.models.events import ActivationStream, EventSequence
from dripp.models.params import KernelSupport
from dripp.models.report import Termination
from dripp.services.em_solver import EmConfig, InitStrategy
from dripp.services.sweep import NEUTRAL_INIT, SWEEP_COLUMNS, cell_em_config, support_sweep, threshold_sweep


def test_support_sweep_fits_each_b(driven_data):
    drivers, events = driven_data
    cells = support_sweep(events, drivers, [0.5, 1.0], EmConfig(n_iterations=20))
    assert [cell.value for cell in cells] == [0.5, 1.0]
    for cell in cells:
        assert cell.error is None
        assert cell.report.params.support.b == cell.value
        assert set(cell.report.params.per_driver) == {"wide", "sharp"}


def test_support_longer_than_window_falls_back_to_baseline(driven_data):
    drivers, events = driven_data
    short = EventSequence(events=events.events[events.events <= 5.0], duration=5.0)
    short_drivers = [type(d)(id=d.id, events=d.events[d.events <= 5.0]) for d in drivers]
    (cell,) = support_sweep(short, short_drivers, [10.0])
    assert cell.report.termination is Termination.ALPHA_ZERO_MLE_EXIT
    assert all(p.alpha == 0 for p in cell.report.params.per_driver.values())
    assert cell.report.params.mu == short.count / 5.0


def test_threshold_sweep_drops_low_activations(driven_data, support):
    drivers, events = driven_data
    values = np.random.default_rng(0).uniform(0.1, 1.0, size=events.count)
    stream = ActivationStream(times=events.events, values=values, label="atom")
    cells = threshold_sweep(stream, drivers, [0.0, 50.0], support, EmConfig(n_iterations=20),
                            duration=events.duration)
    assert [cell.error for cell in cells] == [None, None]
    assert cells[0].report.params.mu > cells[1].report.params.mu
    rows = [row for cell in cells for row in cell.rows()]
    assert all(set(SWEEP_COLUMNS) <= set(row) for row in rows)
    assert [row["percentile"] for row in rows] == [0.0, 0.0, 50.0, 50.0]


def test_threshold_sweep_records_failures_per_cell(driven_data, support):
    drivers, events = driven_data
    stream = ActivationStream(times=events.events, values=np.zeros(events.count), label="silent")
    cells = threshold_sweep(stream, drivers, [0.0, 20.0], support, duration=events.duration)
    assert len(cells) == 2
    for cell in cells:
        assert cell.report is None
        assert cell.error.startswith("InvalidArgumentError")
        (row,) = cell.rows()
        assert np.isnan(row["mu"]) and row["error"] == cell.error


def test_support_covering_the_window_starts_from_baseline(driven_data):
    drivers, events = driven_data
    config, init = cell_em_config(events, drivers, KernelSupport(0.0, 8.0), EmConfig())
    assert init == NEUTRAL_INIT
    assert config.init is InitStrategy.EXPLICIT
    assert config.init_params.mu == events.count / events.duration
    assert all(p.alpha == 0 for p in config.init_params.per_driver.values())

    config, init = cell_em_config(events, drivers, KernelSupport(0.0, 0.8), EmConfig())
    assert init == InitStrategy.SMART_START.value and config.init_params is None


def test_long_support_fits_flat_kernels(driven_data):
    drivers, events = driven_data
    cells = support_sweep(events, drivers, [0.5, 0.8, 8.0, 10.0], EmConfig(n_iterations=20))
    assert [cell.init for cell in cells] == ["smart_start", "smart_start", NEUTRAL_INIT, NEUTRAL_INIT]
    for short in cells[:2]:
        assert all(short.report.params[d].alpha > 0 for d in HEADLINE_ISI)
    for long in cells[2:]:
        assert long.report.termination is Termination.ALPHA_ZERO_MLE_EXIT
        assert all(long.report.params[d].alpha == 0 for d in HEADLINE_ISI)
    assert [row["init"] for row in long.rows()] == [NEUTRAL_INIT, NEUTRAL_INIT]


def test_explicit_init_moves_onto_each_support(driven_data, headline_params):
    drivers, events = driven_data
    em_config = EmConfig(n_iterations=5, init=InitStrategy.EXPLICIT, init_params=headline_params)
    cells = support_sweep(events, drivers, [0.5, 1.0], em_config)
    for cell in cells:
        assert cell.error is None and cell.init == "explicit"
        assert cell.report.params.support == KernelSupport(0.0, cell.value)


@pytest.mark.slow
def test_long_support_fits_lower_weights_across_seeds(headline_params):
    ordered = 0
    for seed in range(30):
        drivers, events = simulate_headline(headline_params, 1000.0, seed)
        short, long = support_sweep(events, drivers, [0.8, 8.0], EmConfig(n_iterations=20))
        if all(long.report.params[d].alpha < short.report.params[d].alpha for d in HEADLINE_ISI):
            ordered += 1
    assert ordered >= 25
