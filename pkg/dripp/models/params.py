from dataclasses import dataclass, replace
from typing import Dict, Hashable, Iterable

import numpy as np

from dripp.exceptions import InvalidArgumentError


def _finite(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class KernelSupport:
    """Truncation interval [a, b] shared by every driver kernel, in seconds."""
    a: float
    b: float

    def __post_init__(self):
        a = _finite(self.a, "support a")
        b = _finite(self.b, "support b")
        if a < 0 or b <= a:
            raise InvalidArgumentError(f"kernel support must satisfy 0 <= a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    def __str__(self) -> str:
        return f"[{self.a}, {self.b}]"


@dataclass(frozen=True)
class DriverParams:
    """Kernel weight alpha, latency mean m (s) and spread sigma (s) of one driver."""
    alpha: float
    m: float
    sigma: float

    def __post_init__(self):
        alpha = _finite(self.alpha, "alpha")
        m = _finite(self.m, "m")
        sigma = _finite(self.sigma, "sigma")
        if alpha < 0:
            raise InvalidArgumentError(f"alpha must be non-negative, got {alpha}")
        if sigma <= 0:
            raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class ModelParams:
    """Baseline rate mu (events/s), per-driver kernel parameters and the shared support."""
    mu: float
    per_driver: Dict[Hashable, DriverParams]
    support: KernelSupport

    def __post_init__(self):
        mu = _finite(self.mu, "mu")
        if mu < 0:
            raise InvalidArgumentError(f"mu must be non-negative, got {mu}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "per_driver", dict(self.per_driver))

    def __getitem__(self, driver_id: Hashable) -> DriverParams:
        try:
            return self.per_driver[driver_id]
        except KeyError:
            raise InvalidArgumentError(f"no kernel parameters for driver {driver_id!r}") from None

    def require_drivers(self, driver_ids: Iterable[Hashable]) -> None:
        """Raise unless parameters exist for every driver id."""
        missing = [driver_id for driver_id in driver_ids if driver_id not in self.per_driver]
        if missing:
            raise InvalidArgumentError(f"missing kernel parameters for drivers: {missing}")

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.per_driver.values()], dtype=float)

    def with_baseline_only(self, mu: float) -> "ModelParams":
        """Same kernels with every alpha set to 0 and the given baseline."""
        zeroed: Dict[Hashable, DriverParams] = {
            driver_id: replace(p, alpha=0.0) for driver_id, p in self.per_driver.items()
        }
        return ModelParams(mu=mu, per_driver=zeroed, support=self.support)

    def with_support(self, support: KernelSupport) -> "ModelParams":
        return ModelParams(mu=self.mu, per_driver=self.per_driver, support=support)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "support": {"a": self.support.a, "b": self.support.b},
            "drivers": [
                {"id": driver_id, "alpha": p.alpha, "m": p.m, "sigma": p.sigma}
                for driver_id, p in self.per_driver.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        """Build parameters from the `mu` / `support` / `drivers` layout of fit reports."""
        try:
            support = KernelSupport(a=data["support"]["a"], b=data["support"]["b"])
            per_driver = {
                entry["id"]: DriverParams(alpha=entry["alpha"], m=entry["m"], sigma=entry["sigma"])
                for entry in data["drivers"]
            }
            return cls(mu=data["mu"], per_driver=per_driver, support=support)
        except (KeyError, TypeError) as e:
            raise InvalidArgumentError(f"malformed parameter document, missing {e}") from None
