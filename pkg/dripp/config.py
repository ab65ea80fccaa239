import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import toml

from dripp.exceptions import ParseError, ValidationError
from dripp.models.params import DriverParams, KernelSupport, ModelParams
from dripp.services.em_solver import EmConfig, InitStrategy
from dripp.services.simulator import DriverGenSpec

OUTPUT_DIR_ENV = "DRIPP_OUTPUT_DIR"
JOBS_ENV = "DRIPP_JOBS"


@dataclass
class SupportConfig:
    """Kernel support [a, b] in seconds."""
    a: float = 0.03
    b: float = 0.8


@dataclass
class EmSettings:
    """EM settings: iterations, sigma floor (s), divergence margin (support widths), init."""
    n_iterations: int = 50
    sigma_floor: float = 1e-2
    divergence_margin: float = 1.0
    init: str = "smart_start"
    init_params: str = ""  # fit report or parameter JSON, for init = "explicit"


@dataclass
class DriverConfig:
    """One synthetic driver: generation protocol plus its true kernel parameters."""
    id: str
    isi: float
    keep_fraction: float = 0.6
    alpha: float = 0.8
    m: float = 0.4
    sigma: float = 0.2


def default_drivers() -> List[DriverConfig]:
    return [
        DriverConfig(id="wide", isi=1.0, sigma=0.2),
        DriverConfig(id="sharp", isi=1.4, sigma=0.05),
    ]


@dataclass
class BaselineConfig:
    """Baseline rate mu of the synthetic model, events/s."""
    mu: float = 0.8


@dataclass
class SimulationConfig:
    T: float = 10000.0
    seed: int = 0


@dataclass
class ExperimentConfig:
    """Recovery grid: durations (s), kept fractions P/S, seeds 0..n_seeds-1, metric grid step (s)."""
    T_values: List[float] = field(default_factory=lambda: [1000.0, 3000.0, 10000.0])
    keep_values: List[float] = field(default_factory=lambda: [0.6])
    n_seeds: int = 30
    grid_step: float = 1e-3


@dataclass
class SweepConfig:
    b_values: List[float] = field(default_factory=lambda: [0.5, 1.0, 10.0])
    percentiles: List[float] = field(default_factory=lambda: [0.0, 20.0, 40.0, 60.0, 80.0])


@dataclass
class DrippConfig:
    """Main configuration for the dripp CLI."""
    support: SupportConfig = field(default_factory=SupportConfig)
    em: EmSettings = field(default_factory=EmSettings)
    drivers: List[DriverConfig] = field(default_factory=default_drivers)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "./output"
    jobs: int = 1

    @property
    def cells_dir(self) -> str:
        """Per-cell recovery files of the experiment command."""
        return f"{self.output_dir}/cells"

    @classmethod
    def from_file(cls, config_path: Path) -> "DrippConfig":
        """Load configuration from a TOML file; absent sections keep their defaults."""
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        try:
            config_data = toml.load(config_path)
        except toml.TomlDecodeError as e:
            raise ParseError(f"invalid TOML: {e.msg}", path=config_path, line=e.lineno) from None

        config = cls()
        if "support" in config_data:
            config.support = SupportConfig(**_known(config_data["support"], SupportConfig))
        if "em" in config_data:
            config.em = EmSettings(**_known(config_data["em"], EmSettings))
        if "drivers" in config_data:
            drivers = []
            for index, entry in enumerate(config_data["drivers"]):
                if "id" not in entry or "isi" not in entry:
                    raise ValidationError(f"[[drivers]] entry {index} needs both 'id' and 'isi'")
                values = _known(entry, DriverConfig)
                values["id"] = str(values["id"])
                drivers.append(DriverConfig(**values))
            config.drivers = drivers
        if "baseline" in config_data:
            config.baseline = BaselineConfig(**_known(config_data["baseline"], BaselineConfig))
        if "simulation" in config_data:
            config.simulation = SimulationConfig(**_known(config_data["simulation"], SimulationConfig))
        if "experiment" in config_data:
            config.experiment = ExperimentConfig(**_known(config_data["experiment"], ExperimentConfig))
        if "sweep" in config_data:
            config.sweep = SweepConfig(**_known(config_data["sweep"], SweepConfig))

        config.output_dir = config_data.get("output_dir", config.output_dir)
        config.jobs = config_data.get("jobs", config.jobs)
        return config

    @classmethod
    def from_cli_args(cls, config_path: Path, cli_args: dict, environ: Optional[Dict[str, str]] = None) -> "DrippConfig":
        """Load configuration with precedence flag > environment > file > default."""
        try:
            config = cls.from_file(config_path)
        except FileNotFoundError:
            config = cls()

        environ = os.environ if environ is None else environ
        if environ.get(OUTPUT_DIR_ENV):
            config.output_dir = environ[OUTPUT_DIR_ENV]
        if environ.get(JOBS_ENV):
            try:
                config.jobs = int(environ[JOBS_ENV])
            except ValueError:
                raise ValidationError(f"{JOBS_ENV} must be an integer, got {environ[JOBS_ENV]!r}") from None

        if cli_args.get("out_dir"):
            config.output_dir = cli_args["out_dir"]
        if cli_args.get("jobs") is not None:
            config.jobs = cli_args["jobs"]
        if cli_args.get("a") is not None:
            config.support.a = cli_args["a"]
        if cli_args.get("b") is not None:
            config.support.b = cli_args["b"]
        if cli_args.get("iterations") is not None:
            config.em.n_iterations = cli_args["iterations"]
        if cli_args.get("sigma_floor") is not None:
            config.em.sigma_floor = cli_args["sigma_floor"]
        if cli_args.get("divergence_margin") is not None:
            config.em.divergence_margin = cli_args["divergence_margin"]
        if cli_args.get("init_params"):
            config.em.init = InitStrategy.EXPLICIT.value
            config.em.init_params = str(cli_args["init_params"])
        elif cli_args.get("smart_start"):
            config.em.init = InitStrategy.SMART_START.value
            config.em.init_params = ""
        if cli_args.get("seed") is not None:
            config.simulation.seed = cli_args["seed"]
        if cli_args.get("duration") is not None:
            config.simulation.T = cli_args["duration"]
        if cli_args.get("grid_step") is not None:
            config.experiment.grid_step = cli_args["grid_step"]

        return config

    def validate(self):
        """Check every numeric constraint and raise one ValidationError listing all failures."""
        errors = []

        a, b = self.support.a, self.support.b
        if not (_is_real(a) and _is_real(b) and 0 <= a < b):
            errors.append(f"support must satisfy 0 <= a < b, got [{a}, {b}]")

        em = self.em
        if not (isinstance(em.n_iterations, int) and em.n_iterations >= 1):
            errors.append(f"em.n_iterations must be an integer >= 1, got {em.n_iterations!r}")
        if not (_is_real(em.sigma_floor) and em.sigma_floor > 0):
            errors.append(f"em.sigma_floor must be positive, got {em.sigma_floor!r}")
        if not (_is_real(em.divergence_margin) and em.divergence_margin > 0):
            errors.append(f"em.divergence_margin must be positive, got {em.divergence_margin!r}")
        if em.init not in [s.value for s in InitStrategy]:
            errors.append(f"em.init must be 'smart_start' or 'explicit', got {em.init!r}")
        elif em.init == InitStrategy.EXPLICIT.value:
            if not em.init_params:
                errors.append("em.init = 'explicit' requires em.init_params")
            elif not Path(em.init_params).exists():
                errors.append(f"em.init_params file not found: {em.init_params}")

        if not _is_real(self.baseline.mu) or self.baseline.mu < 0:
            errors.append(f"baseline.mu must be >= 0, got {self.baseline.mu!r}")

        ids = [d.id for d in self.drivers]
        if len(set(ids)) != len(ids):
            errors.append(f"driver ids must be unique, got {ids}")
        for driver in self.drivers:
            if not (_is_real(driver.isi) and driver.isi > 0):
                errors.append(f"driver {driver.id!r}: isi must be positive, got {driver.isi!r}")
            elif _is_real(self.simulation.T) and self.simulation.T < driver.isi:
                errors.append(f"driver {driver.id!r}: simulation.T must be at least one isi")
            if not (_is_real(driver.keep_fraction) and 0 < driver.keep_fraction <= 1):
                errors.append(f"driver {driver.id!r}: keep_fraction must lie in (0, 1], got {driver.keep_fraction!r}")
            if not (_is_real(driver.alpha) and driver.alpha >= 0):
                errors.append(f"driver {driver.id!r}: alpha must be >= 0, got {driver.alpha!r}")
            if not _is_real(driver.m):
                errors.append(f"driver {driver.id!r}: m must be finite, got {driver.m!r}")
            if not (_is_real(driver.sigma) and driver.sigma > 0):
                errors.append(f"driver {driver.id!r}: sigma must be positive, got {driver.sigma!r}")

        if not (_is_real(self.simulation.T) and self.simulation.T > 0):
            errors.append(f"simulation.T must be positive, got {self.simulation.T!r}")
        if not (isinstance(self.simulation.seed, int) and self.simulation.seed >= 0):
            errors.append(f"simulation.seed must be a non-negative integer, got {self.simulation.seed!r}")

        experiment = self.experiment
        if not experiment.T_values or not all(_is_real(t) and t > 0 for t in experiment.T_values):
            errors.append(f"experiment.T_values must be a nonempty list of positive durations, got {experiment.T_values!r}")
        if not experiment.keep_values or not all(_is_real(k) and 0 < k <= 1 for k in experiment.keep_values):
            errors.append(f"experiment.keep_values must be a nonempty list in (0, 1], got {experiment.keep_values!r}")
        if not (isinstance(experiment.n_seeds, int) and experiment.n_seeds >= 1):
            errors.append(f"experiment.n_seeds must be an integer >= 1, got {experiment.n_seeds!r}")
        if not (_is_real(experiment.grid_step) and experiment.grid_step > 0):
            errors.append(f"experiment.grid_step must be positive, got {experiment.grid_step!r}")

        if not all(_is_real(v) and v > 0 for v in self.sweep.b_values):
            errors.append(f"sweep.b_values must all be positive, got {self.sweep.b_values!r}")
        if not all(_is_real(q) and 0 <= q < 100 for q in self.sweep.percentiles):
            errors.append(f"sweep.percentiles must lie in [0, 100), got {self.sweep.percentiles!r}")

        if not (isinstance(self.jobs, int) and (self.jobs >= 1 or self.jobs == -1)):
            errors.append(f"jobs must be a positive integer or -1 (all cores), got {self.jobs!r}")

        if errors:
            raise ValidationError("Configuration validation failed:\n" + "\n".join(f"  - {error}" for error in errors))

    def kernel_support(self) -> KernelSupport:
        return KernelSupport(self.support.a, self.support.b)

    def em_config(self, init_params: Optional[ModelParams] = None) -> EmConfig:
        """EmConfig for these settings; explicit init needs the already-loaded init_params."""
        return EmConfig(
            n_iterations=self.em.n_iterations,
            sigma_floor=self.em.sigma_floor,
            divergence_margin=self.em.divergence_margin,
            init=InitStrategy(self.em.init),
            init_params=init_params if self.em.init == InitStrategy.EXPLICIT.value else None,
        )

    def true_params(self) -> ModelParams:
        """Generating parameters of the synthetic configuration."""
        return ModelParams(
            mu=self.baseline.mu,
            per_driver={d.id: DriverParams(alpha=d.alpha, m=d.m, sigma=d.sigma) for d in self.drivers},
            support=self.kernel_support(),
        )

    def driver_specs(self, duration: Optional[float] = None) -> List[DriverGenSpec]:
        duration = self.simulation.T if duration is None else duration
        return [
            DriverGenSpec(isi=d.isi, keep_fraction=d.keep_fraction, duration=duration, driver_id=d.id)
            for d in self.drivers
        ]

    def isi_map(self) -> Dict[str, float]:
        return {d.id: d.isi for d in self.drivers}


def _known(section: dict, section_type) -> dict:
    """Keep the keys a section dataclass declares; unknown keys are rejected."""
    names = set(section_type.__dataclass_fields__)
    unknown = sorted(set(section) - names)
    if unknown:
        raise ValidationError(f"unknown keys for {section_type.__name__}: {', '.join(unknown)}")
    return dict(section)


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
