"""Parameter-recovery experiment over a grid of durations and kept fractions.

Every (T, P/S, seed) cell simulates drivers and events, fits them with EM
and scores each driver with the relative sup-norm error. Cells only depend
on their own seed, so they can run in any order or in parallel.
"""
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, List, Optional, Sequence

from pathos.multiprocessing import ProcessingPool

from dripp.exceptions import DrippError, InvalidArgumentError
from dripp.models.params import ModelParams
from dripp.models.report import RecoveryCell
from dripp.services.em_solver import EmConfig, run_em
from dripp.services.event_io import write_table
from dripp.services.intensity import boundary_clean
from dripp.services.metrics import DEFAULT_GRID_STEP, relative_linf
from dripp.services.recovery_store import RECOVERY_COLUMNS
from dripp.services.simulator import DriverGenSpec, gen_driver, thinning_simulate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveryTask:
    """Everything one experiment cell needs; picklable for worker processes."""
    duration: float
    keep_fraction: float
    seed: int
    true_params: ModelParams
    isi: Dict[Hashable, float]
    em_config: EmConfig
    grid_step: float = DEFAULT_GRID_STEP
    cells_dir: Optional[str] = None

    @property
    def cell_name(self) -> str:
        return f"T{self.duration:g}_keep{self.keep_fraction:g}_seed{self.seed}.csv"


def run_recovery_cell(task: RecoveryTask) -> RecoveryCell:
    """Simulate, fit and score one cell; failures are recorded on the cell instead of raised."""
    driver_ids = list(task.true_params.per_driver)
    try:
        drivers = [
            gen_driver(DriverGenSpec(isi=task.isi[driver_id], keep_fraction=task.keep_fraction,
                                     duration=task.duration, driver_id=driver_id), task.seed, index)
            for index, driver_id in enumerate(driver_ids)
        ]
        drivers = boundary_clean(drivers, task.duration, task.true_params.support)
        events = thinning_simulate(task.true_params, drivers, task.duration, task.seed)

        started = time.perf_counter()
        report = run_em(events, drivers, task.true_params.support, task.em_config)
        runtime = time.perf_counter() - started

        scores = {
            driver_id: relative_linf(task.true_params, report.params, driver_id, task.grid_step)
            for driver_id in driver_ids
        }
        cell = RecoveryCell(duration=task.duration, keep_fraction=task.keep_fraction, seed=task.seed,
                            rel_linf=scores, em_runtime=runtime, termination=report.termination.value)
    except DrippError as e:
        logger.warning("Recovery cell T=%g P/S=%g seed=%d failed: %s",
                       task.duration, task.keep_fraction, task.seed, e)
        cell = RecoveryCell(duration=task.duration, keep_fraction=task.keep_fraction, seed=task.seed,
                            rel_linf={driver_id: None for driver_id in driver_ids}, em_runtime=None,
                            error=f"{type(e).__name__}: {e}")

    if task.cells_dir:
        write_table(cell.rows(), RECOVERY_COLUMNS, Path(task.cells_dir) / task.cell_name)
    return cell


@contextmanager
def cell_mapper(jobs: int):
    """map-like callable: built-in map for jobs=1, otherwise a process pool (-1 uses every core)."""
    if not (isinstance(jobs, int) and (jobs >= 1 or jobs == -1)):
        raise InvalidArgumentError(f"jobs must be a positive integer or -1, got {jobs!r}")
    if jobs == 1:
        yield map
        return
    pool = ProcessingPool() if jobs == -1 else ProcessingPool(nodes=jobs)
    try:
        yield pool.map
    finally:
        pool.close()
        pool.join()
        pool.clear()


def recovery_tasks(durations: Sequence[float], keep_fractions: Sequence[float], seeds: Sequence[int],
                   true_params: ModelParams, isi: Dict[Hashable, float], em_config: EmConfig,
                   grid_step: float = DEFAULT_GRID_STEP, cells_dir=None) -> List[RecoveryTask]:
    missing = [driver_id for driver_id in true_params.per_driver if driver_id not in isi]
    if missing:
        raise InvalidArgumentError(f"no inter-stimulus interval given for drivers {missing}")
    return [
        RecoveryTask(duration=float(T), keep_fraction=float(keep), seed=int(seed), true_params=true_params,
                     isi=dict(isi), em_config=em_config, grid_step=grid_step,
                     cells_dir=str(cells_dir) if cells_dir else None)
        for T in durations
        for keep in keep_fractions
        for seed in seeds
    ]


def recovery_experiment(durations: Sequence[float], keep_fractions: Sequence[float], seeds: Sequence[int],
                        true_params: ModelParams, isi: Dict[Hashable, float], em_config: EmConfig,
                        grid_step: float = DEFAULT_GRID_STEP, jobs: int = 1, cells_dir=None) -> List[RecoveryCell]:
    """Run every cell of the grid, with `jobs` worker processes (-1 for all cores).

    When cells_dir is given, each cell also writes its rows to its own CSV file.
    """
    tasks = recovery_tasks(durations, keep_fractions, seeds, true_params, isi, em_config, grid_step, cells_dir)
    if cells_dir:
        Path(cells_dir).mkdir(parents=True, exist_ok=True)
    logger.info("Running %d recovery cells with jobs=%d", len(tasks), jobs)
    with cell_mapper(jobs) as mapper:
        return list(mapper(run_recovery_cell, tasks))
