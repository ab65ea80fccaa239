import numpy as np
import pytest

from dripp.models.events import Driver, EventSequence
from dripp.models.params import DriverParams, KernelSupport, ModelParams
from dripp.services.intensity import boundary_clean
from dripp.services.simulator import DriverGenSpec, gen_driver, thinning_simulate

HEADLINE_ISI = {"wide": 1.0, "sharp": 1.4}


@pytest.fixture
def support():
    return KernelSupport(0.03, 0.8)


@pytest.fixture
def headline_params(support):
    return ModelParams(
        mu=0.8,
        per_driver={
            "wide": DriverParams(alpha=0.8, m=0.4, sigma=0.2),
            "sharp": DriverParams(alpha=0.8, m=0.4, sigma=0.05),
        },
        support=support,
    )


def simulate_headline(params, duration, seed, keep_fraction=0.6):
    """Drivers and events of the two-driver synthetic configuration."""
    drivers = [
        gen_driver(DriverGenSpec(isi=HEADLINE_ISI[driver_id], keep_fraction=keep_fraction,
                                 duration=duration, driver_id=driver_id), seed, index)
        for index, driver_id in enumerate(params.per_driver)
    ]
    drivers = boundary_clean(drivers, duration, params.support)
    return drivers, thinning_simulate(params, drivers, duration, seed)


@pytest.fixture
def driven_data(headline_params):
    drivers, events = simulate_headline(headline_params, 1000.0, seed=0)
    return drivers, events


def random_instance(rng, n_drivers=2, duration=30.0, n_events=40):
    """Random valid parameters, boundary-clean drivers and events."""
    a = rng.uniform(0.0, 0.2)
    support = KernelSupport(a, a + rng.uniform(0.3, 1.0))
    drivers = []
    per_driver = {}
    for p in range(n_drivers):
        times = np.sort(rng.uniform(0.0, duration - support.b, size=8))
        drivers.append(Driver(id=f"d{p}", events=times))
        per_driver[f"d{p}"] = DriverParams(
            alpha=rng.uniform(0.2, 1.5),
            m=rng.uniform(support.a, support.b),
            sigma=rng.uniform(0.05, 0.5),
        )
    params = ModelParams(mu=rng.uniform(0.3, 1.5), per_driver=per_driver, support=support)
    events = EventSequence(events=np.sort(rng.uniform(0.0, duration, size=n_events)), duration=duration)
    return params, drivers, events
