import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_instance
from dripp.exceptions import EvaluationError, InvalidArgumentError
from dripp.models.events import Driver, EventSequence
from dripp.models.params import DriverParams, KernelSupport, ModelParams
from dripp.services.intensity import intensity_at, intensity_integral, nll, nll_gradient
from dripp.services.kernel import kernel_eval
from dripp.services.simulator import DriverGenSpec, gen_driver


def naive_intensity(t, params, drivers):
    total = params.mu
    for driver in drivers:
        p = params[driver.id]
        for event in driver.events:
            if event <= t:
                total += p.alpha * float(kernel_eval(t - event, p, params.support))
    return total


def test_single_driver_event_matches_naive_sum(support):
    params = ModelParams(mu=0.8, per_driver={"s": DriverParams(alpha=0.8, m=0.4, sigma=0.2)}, support=support)
    drivers = [Driver(id="s", events=[0.0])]
    expected = 0.8 + 0.8 * float(kernel_eval(0.4, params["s"], support))
    assert intensity_at(0.4, params, drivers) == pytest.approx(expected, rel=1e-15)
    assert intensity_at(0.4, params, drivers) == pytest.approx(naive_intensity(0.4, params, drivers), rel=1e-15)


def test_random_instances_match_naive_sum():
    rng = np.random.default_rng(3)
    for _ in range(10):
        params, drivers, _ = random_instance(rng)
        times = rng.uniform(0, 30, size=50)
        expected = [naive_intensity(t, params, drivers) for t in times]
        np.testing.assert_allclose(intensity_at(times, params, drivers), expected, rtol=1e-12)


def test_zero_weights_give_the_baseline(headline_params, driven_data):
    drivers, _ = driven_data
    flat = headline_params.with_baseline_only(0.8)
    times = np.linspace(0, 1000, 5001)
    np.testing.assert_array_equal(intensity_at(times, flat, drivers), np.full(times.size, 0.8))


def test_baseline_before_first_support(headline_params):
    drivers = [Driver(id="wide", events=[5.0]), Driver(id="sharp", events=[7.0])]
    assert intensity_at(5.0 + 0.029, headline_params, drivers) == 0.8
    assert intensity_at(0.0, headline_params, drivers) == 0.8


def test_intensity_never_below_baseline(headline_params, driven_data):
    drivers, _ = driven_data
    times = np.linspace(0, 1000, 20001)
    assert np.all(intensity_at(times, headline_params, drivers) >= headline_params.mu)


def test_intensity_is_invariant_to_driver_order(headline_params, driven_data):
    drivers, _ = driven_data
    times = np.linspace(0, 1000, 10001)
    np.testing.assert_allclose(
        intensity_at(times, headline_params, drivers),
        intensity_at(times, headline_params, list(reversed(drivers))),
        rtol=1e-13,
    )


def test_missing_driver_params_raise(support):
    params = ModelParams(mu=0.8, per_driver={}, support=support)
    with pytest.raises(InvalidArgumentError):
        intensity_at(1.0, params, [Driver(id="x", events=[0.0])])


def test_integral_closed_form_on_headline_counts(headline_params):
    duration = 10000.0
    drivers = [
        gen_driver(DriverGenSpec(isi=1.0, keep_fraction=0.6, duration=duration, driver_id="wide"), 0, 0),
        gen_driver(DriverGenSpec(isi=1.4, keep_fraction=0.6, duration=duration, driver_id="sharp"), 0, 1),
    ]
    assert [d.count for d in drivers] == [6000, 4285]
    assert intensity_integral(headline_params, drivers, duration) == pytest.approx(8000 + 0.8 * (6000 + 4285))
    assert intensity_integral(headline_params.with_baseline_only(0.8), drivers, duration) == pytest.approx(8000)


def test_integral_matches_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(20):
        params, drivers, events = random_instance(rng)
        duration = events.duration
        support = params.support
        breaks = [0.0, duration]
        for driver in drivers:
            breaks.extend(driver.events + support.a)
            breaks.extend(driver.events + support.b)
        breaks = np.unique(np.clip(breaks, 0.0, duration))
        total = sum(
            quad(lambda t: intensity_at(t, params, drivers), lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
            for lo, hi in zip(breaks[:-1], breaks[1:])
        )
        assert intensity_integral(params, drivers, duration) == pytest.approx(total, rel=1e-6)


def test_nll_closed_form_without_drivers(support):
    events = EventSequence(events=np.linspace(0.5, 9.5, 8), duration=10.0)
    drivers = [Driver(id="silent", events=[1.0, 2.0])]
    params = ModelParams(mu=0.8, per_driver={"silent": DriverParams(alpha=0.0, m=0.4, sigma=0.2)},
                         support=support)
    assert nll(params, events, drivers) == pytest.approx(8 - 8 * math.log(0.8), rel=1e-14)


def test_baseline_mle_minimizes_nll(support):
    events = EventSequence(events=np.linspace(0.5, 9.5, 8), duration=10.0)
    grid = np.linspace(0.1, 2.0, 1901)
    values = [nll(ModelParams(mu=mu, per_driver={}, support=support), events, []) for mu in grid]
    assert grid[int(np.argmin(values))] == pytest.approx(8 / 10.0, abs=1e-3)


def test_zero_weight_driver_leaves_nll_unchanged(headline_params, driven_data):
    drivers, events = driven_data
    extra = Driver(id="extra", events=np.arange(0.5, 990.0, 3.0))
    per_driver = dict(headline_params.per_driver)
    per_driver["extra"] = DriverParams(alpha=0.0, m=0.3, sigma=0.1)
    augmented = ModelParams(mu=headline_params.mu, per_driver=per_driver, support=headline_params.support)
    assert nll(augmented, events, drivers + [extra]) == pytest.approx(
        nll(headline_params, events, drivers), rel=1e-14
    )


def test_late_driver_events_are_dropped_from_the_likelihood(support, caplog):
    params = ModelParams(mu=0.5, per_driver={"s": DriverParams(alpha=1.0, m=0.4, sigma=0.2)}, support=support)
    events = EventSequence(events=[1.4, 5.0, 9.8], duration=10.0)
    late = [Driver(id="s", events=[1.0, 9.5])]
    clean = [Driver(id="s", events=[1.0])]

    value = nll(params, events, late)
    assert "Dropping 1 event" in caplog.text
    assert value == nll(params, events, clean)
    expected = 0.5 * 10.0 + 1.0 - np.sum(np.log(intensity_at(events.events, params, clean)))
    assert value == pytest.approx(expected, rel=1e-12)
    assert nll_gradient(params, events, late) == nll_gradient(params, events, clean)


def test_zero_intensity_at_an_event_is_reported(support):
    params = ModelParams(mu=0.0, per_driver={"s": DriverParams(alpha=1.0, m=0.4, sigma=0.2)}, support=support)
    drivers = [Driver(id="s", events=[0.0])]
    events = EventSequence(events=[0.4, 3.0], duration=5.0)
    with pytest.raises(EvaluationError) as excinfo:
        nll(params, events, drivers)
    assert excinfo.value.timestamp == 3.0


def test_gradient_stationary_at_baseline_mle(support):
    events = EventSequence(events=np.linspace(0.5, 9.5, 8), duration=10.0)
    drivers = [Driver(id="s", events=[1.0, 4.0])]
    params = ModelParams(mu=0.8, per_driver={"s": DriverParams(alpha=0.0, m=0.4, sigma=0.2)}, support=support)
    grad = nll_gradient(params, events, drivers)
    assert grad.mu == pytest.approx(0.0, abs=1e-12)
    assert grad.per_driver["s"].m == 0.0
    assert grad.per_driver["s"].sigma == 0.0


def _flatten(params):
    values = [params.mu]
    for p in params.per_driver.values():
        values.extend([p.alpha, p.m, p.sigma])
    return np.array(values)


def _unflatten(vector, template):
    per_driver = {}
    for k, driver_id in enumerate(template.per_driver):
        alpha, m, sigma = vector[1 + 3 * k: 4 + 3 * k]
        per_driver[driver_id] = DriverParams(alpha=alpha, m=m, sigma=sigma)
    return ModelParams(mu=vector[0], per_driver=per_driver, support=template.support)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        params, drivers, events = random_instance(rng)
        analytic = nll_gradient(params, events, drivers).as_vector()
        x0 = _flatten(params)
        numeric = np.empty_like(x0)
        for i in range(x0.size):
            h = 1e-6 * max(1.0, abs(x0[i]))
            up, down = x0.copy(), x0.copy()
            up[i] += h
            down[i] -= h
            numeric[i] = (nll(_unflatten(up, params), events, drivers)
                          - nll(_unflatten(down, params), events, drivers)) / (2 * h)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-5)


def test_gradient_shape_follows_drivers():
    params, drivers, events = random_instance(np.random.default_rng(0), n_drivers=3)
    grad = nll_gradient(params, events, drivers)
    assert set(grad.per_driver) == {"d0", "d1", "d2"}
    assert grad.as_vector().shape == (10,)


def test_support_shared_by_every_driver():
    support = KernelSupport(0.0, 1.0)
    assert support.width == 1.0
    assert support.center == 0.5
    with pytest.raises(InvalidArgumentError):
        KernelSupport(0.5, 0.5)
