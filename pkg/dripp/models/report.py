from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Hashable, List, Optional

import numpy as np

from dripp.models.params import ModelParams


class Termination(str, Enum):
    COMPLETED = "completed"
    ALPHA_ZERO_MLE_EXIT = "alpha_zero_mle_exit"
    DIVERGED_FALLBACK = "diverged_fallback"


@dataclass(frozen=True)
class Responsibilities:
    """Probability that each event was produced by the baseline or by each driver."""
    baseline: np.ndarray
    per_driver: Dict[Hashable, np.ndarray]

    def simplex_deviation(self) -> float:
        """Largest |P_k(t) + sum_p P_p(t) - 1| over events."""
        total = self.baseline.copy()
        for values in self.per_driver.values():
            total = total + values
        if total.size == 0:
            return 0.0
        return float(np.max(np.abs(total - 1.0)))


@dataclass
class FitReport:
    """Outcome of one EM fit."""
    params: ModelParams
    nll_history: List[float]
    termination: Termination
    iterations_run: int
    diagnostics: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        document = self.params.to_dict()
        document.update({
            "nll_history": list(self.nll_history),
            "termination": self.termination.value,
            "iterations_run": self.iterations_run,
            "diagnostics": self.diagnostics,
        })
        return document

    @classmethod
    def from_dict(cls, data: dict) -> "FitReport":
        return cls(
            params=ModelParams.from_dict(data),
            nll_history=[float(v) for v in data.get("nll_history", [])],
            termination=Termination(data.get("termination", Termination.COMPLETED.value)),
            iterations_run=int(data.get("iterations_run", 0)),
            diagnostics=dict(data.get("diagnostics", {})),
        )

    def alpha_mu_ratio(self) -> Dict[Hashable, float]:
        """alpha_p / mu per driver; infinite when the baseline vanished."""
        mu = self.params.mu
        return {
            driver_id: (p.alpha / mu if mu > 0 else (float("inf") if p.alpha > 0 else 0.0))
            for driver_id, p in self.params.per_driver.items()
        }

    def __str__(self) -> str:
        return (f"FitReport(termination={self.termination.value}, iterations={self.iterations_run}, "
                f"mu={self.params.mu:.6g})")


@dataclass(frozen=True)
class RecoveryCell:
    """Recovery error of one simulated-then-fitted repetition."""
    duration: float
    keep_fraction: float
    seed: int
    rel_linf: Dict[Hashable, Optional[float]]
    em_runtime: Optional[float]
    termination: Optional[str] = None
    error: Optional[str] = None
    init: str = ""

    def rows(self) -> List[dict]:
        return [
            {
                "T": self.duration,
                "keep_fraction": self.keep_fraction,
                "seed": self.seed,
                "driver_id": driver_id,
                "rel_linf": value,
                "runtime_s": self.em_runtime,
                "termination": self.termination or "",
                "error": self.error or "",
            }
            for driver_id, value in self.rel_linf.items()
        ]


@dataclass(frozen=True)
class SweepCell:
    """Fitted parameters for one hyperparameter value of a sweep."""
    parameter: str
    value: float
    report: Optional[FitReport]
    error: Optional[str] = None
    init: str = ""

    def rows(self) -> List[dict]:
        if self.report is None:
            return [{self.parameter: self.value, "driver_id": "", "mu": float("nan"), "alpha": float("nan"),
                     "m": float("nan"), "sigma": float("nan"), "termination": "", "init": self.init,
                     "error": self.error or ""}]
        params = self.report.params
        return [
            {
                self.parameter: self.value,
                "driver_id": driver_id,
                "mu": params.mu,
                "alpha": p.alpha,
                "m": p.m,
                "sigma": p.sigma,
                "termination": self.report.termination.value,
                "init": self.init,
                "error": "",
            }
            for driver_id, p in params.per_driver.items()
        ]
