"""Truncated-Gaussian latency kernel.

The kernel of a driver is a Gaussian of mean ``m`` and spread ``sigma``
restricted to the support ``[a, b]`` and renormalised there:

    kappa(x) = exp(-(x - m)**2 / (2 sigma**2)) / C(m, sigma, a, b)   for a <= x <= b

with ``C`` the integral of the unnormalised Gaussian over ``[a, b]``. The hot
path works with ``log C`` so that means far outside the support do not turn
the kernel into 0/0.
"""
import math
from typing import Tuple

import numpy as np
from scipy.special import log_ndtr, ndtr

from dripp.exceptions import InvalidArgumentError
from dripp.models.params import DriverParams, KernelSupport

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_scale(m: float, sigma: float) -> None:
    if not (math.isfinite(m) and math.isfinite(sigma)):
        raise InvalidArgumentError(f"kernel parameters must be finite, got m={m}, sigma={sigma}")
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")


def _log_mass(lower: float, upper: float) -> float:
    """log(Phi(upper) - Phi(lower)) for lower < upper, accurate in both tails."""
    if lower > 0:
        head = log_ndtr(-lower)
        return float(head + np.log1p(-np.exp(log_ndtr(-upper) - head)))
    if upper < 0:
        head = log_ndtr(upper)
        return float(head + np.log1p(-np.exp(log_ndtr(lower) - head)))
    return float(np.log(ndtr(upper) - ndtr(lower)))


def log_normalizer(m: float, sigma: float, support: KernelSupport) -> float:
    """log C(m, sigma, a, b)."""
    _check_scale(m, sigma)
    lower = (support.a - m) / sigma
    upper = (support.b - m) / sigma
    return math.log(sigma) + _LOG_SQRT_2PI + _log_mass(lower, upper)


def trunc_gauss_constants(m: float, sigma: float, support: KernelSupport) -> Tuple[float, float, float]:
    """Return C and its partial derivatives C_m = dC/dm and C_sigma = dC/dsigma.

    C = sigma * sqrt(pi/2) * [erf((b-m)/(sqrt(2) sigma)) - erf((a-m)/(sqrt(2) sigma))]
    C_m = exp(-(a-m)^2 / 2 sigma^2) - exp(-(b-m)^2 / 2 sigma^2)
    C_sigma = C / sigma - [(b-m) exp(-(b-m)^2 / 2 sigma^2) - (a-m) exp(-(a-m)^2 / 2 sigma^2)] / sigma
    """
    m = float(m)
    sigma = float(sigma)
    log_c = log_normalizer(m, sigma, support)
    c = math.exp(log_c)
    edge_a = math.exp(-0.5 * ((support.a - m) / sigma) ** 2)
    edge_b = math.exp(-0.5 * ((support.b - m) / sigma) ** 2)
    c_m = edge_a - edge_b
    c_sigma = c / sigma - ((support.b - m) * edge_b - (support.a - m) * edge_a) / sigma
    return c, c_m, c_sigma


def normalizer_ratios(m: float, sigma: float, support: KernelSupport) -> Tuple[float, float]:
    """Return (C_m / C, C_sigma / C) evaluated in log space."""
    m = float(m)
    sigma = float(sigma)
    log_c = log_normalizer(m, sigma, support)
    lower = (support.a - m) / sigma
    upper = (support.b - m) / sigma
    edge_a = math.exp(-0.5 * lower * lower - log_c)
    edge_b = math.exp(-0.5 * upper * upper - log_c)
    ratio_m = edge_a - edge_b
    ratio_sigma = 1.0 / sigma - (upper * edge_b - lower * edge_a)
    return ratio_m, ratio_sigma


def kernel_eval(x, params: DriverParams, support: KernelSupport) -> np.ndarray:
    """Kernel density at delays ``x`` (seconds); exactly 0 outside [a, b]."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("kernel delays must be finite")
    log_c = log_normalizer(params.m, params.sigma, support)
    inside = (x >= support.a) & (x <= support.b)
    z = (x - params.m) / params.sigma
    return np.where(inside, np.exp(-0.5 * z * z - log_c), 0.0)


def kernel_peak(params: DriverParams, support: KernelSupport) -> float:
    """Largest value of the kernel, reached at m clamped into [a, b]."""
    mode = min(max(params.m, support.a), support.b)
    return float(kernel_eval(mode, params, support))
