from pathlib import Path
from typing import Dict, List, Optional, Sequence

import duckdb
from scipy import stats

from dripp.exceptions import ArtifactIOError
from dripp.models.report import RecoveryCell

RECOVERY_COLUMNS = ["T", "keep_fraction", "seed", "driver_id", "rel_linf", "runtime_s", "termination", "error"]
AGGREGATE_COLUMNS = ["T", "keep_fraction", "driver_id", "n", "rel_linf_mean", "rel_linf_std"]
RUNTIME_COLUMNS = ["T", "n", "runtime_mean", "runtime_std", "runtime_ci95"]


class RecoveryStore:
    """Collects recovery rows in DuckDB and aggregates them per experiment cell."""

    def __init__(self, database_path: str = ":memory:", table_name: str = "recovery",
                 connection: Optional[duckdb.DuckDBPyConnection] = None):
        """
        Args:
            database_path: DuckDB file, or ":memory:" for an in-memory database
            table_name: Name of the recovery table
            connection: Optional existing DuckDB connection to share
        """
        self.database_path = database_path
        self.table_name = table_name
        self.connection: Optional[duckdb.DuckDBPyConnection] = connection
        self._owns_connection = connection is None

    def __enter__(self):
        if self.connection is None:
            self.connection = duckdb.connect(self.database_path)
        self.ensure_table()
        return self

    def __exit__(self, _exc_type, _exc_val, _exc_tb):
        if self.connection and self._owns_connection:
            self.connection.close()
            self.connection = None

    def _conn(self) -> duckdb.DuckDBPyConnection:
        if not self.connection:
            raise RuntimeError("Connection not established. Use within context manager.")
        return self.connection

    def ensure_table(self) -> None:
        self._conn().execute(f"""
            CREATE TABLE IF NOT EXISTS {self.table_name} (
                T DOUBLE,
                keep_fraction DOUBLE,
                seed BIGINT,
                driver_id VARCHAR,
                rel_linf DOUBLE,
                runtime_s DOUBLE,
                termination VARCHAR,
                error VARCHAR
            )
        """)

    def insert_cells(self, cells: Sequence[RecoveryCell]) -> int:
        """Insert the per-driver rows of each cell. Returns the number of rows added."""
        rows = [[row[c] for c in RECOVERY_COLUMNS] for cell in cells for row in cell.rows()]
        for row in rows:
            row[3] = str(row[3])
        if rows:
            self._conn().executemany(
                f"INSERT INTO {self.table_name} VALUES (?, ?, ?, ?, ?, ?, ?, ?)", rows
            )
        return len(rows)

    def load_cell_files(self, cells_dir) -> int:
        """Merge every per-cell CSV of a directory into the table."""
        cells_dir = Path(cells_dir)
        if not any(cells_dir.glob("*.csv")):
            raise ArtifactIOError(f"no cell files found in {cells_dir}")
        before = self.row_count()
        self._conn().execute(f"""
            INSERT INTO {self.table_name}
            SELECT T, keep_fraction, seed, driver_id, rel_linf, runtime_s,
                   coalesce(termination, ''), coalesce(error, '')
            FROM read_csv(
                '{cells_dir / "*.csv"}',
                header = true,
                columns = {{
                    'T': 'DOUBLE', 'keep_fraction': 'DOUBLE', 'seed': 'BIGINT',
                    'driver_id': 'VARCHAR', 'rel_linf': 'DOUBLE', 'runtime_s': 'DOUBLE',
                    'termination': 'VARCHAR', 'error': 'VARCHAR'
                }}
            )
        """)
        return self.row_count() - before

    def row_count(self) -> int:
        result = self._conn().execute(f"SELECT COUNT(*) FROM {self.table_name}").fetchone()
        return result[0] if result else 0

    def _dicts(self, query: str, columns: Sequence[str]) -> List[Dict]:
        return [dict(zip(columns, row)) for row in self._conn().execute(query).fetchall()]

    def recovery_rows(self) -> List[Dict]:
        """All rows, ordered independently of insertion order."""
        return self._dicts(f"""
            SELECT {', '.join(RECOVERY_COLUMNS)}
            FROM {self.table_name}
            ORDER BY T, keep_fraction, seed, driver_id
        """, RECOVERY_COLUMNS)

    def aggregate_rows(self) -> List[Dict]:
        """Mean and sample standard deviation of the relative error per (T, P/S, driver)."""
        return self._dicts(f"""
            SELECT T, keep_fraction, driver_id,
                   COUNT(*) AS n,
                   AVG(rel_linf) AS rel_linf_mean,
                   STDDEV_SAMP(rel_linf) AS rel_linf_std
            FROM {self.table_name}
            WHERE error = ''
            GROUP BY T, keep_fraction, driver_id
            ORDER BY T, keep_fraction, driver_id
        """, AGGREGATE_COLUMNS)

    def runtime_rows(self) -> List[Dict]:
        """Mean EM runtime per T with a Student-t 95% confidence half-width."""
        rows = self._dicts(f"""
            WITH fits AS (
                SELECT DISTINCT T, keep_fraction, seed, runtime_s
                FROM {self.table_name}
                WHERE error = ''
            )
            SELECT T, COUNT(*) AS n, AVG(runtime_s) AS runtime_mean, STDDEV_SAMP(runtime_s) AS runtime_std
            FROM fits
            GROUP BY T
            ORDER BY T
        """, RUNTIME_COLUMNS[:4])
        for row in rows:
            n, std = row["n"], row["runtime_std"]
            if n > 1 and std is not None:
                row["runtime_ci95"] = float(stats.t.ppf(0.975, n - 1) * std / n ** 0.5)
            else:
                row["runtime_ci95"] = float("nan")
        return rows

    def failures(self) -> List[Dict]:
        return self._dicts(f"""
            SELECT DISTINCT T, keep_fraction, seed, error
            FROM {self.table_name}
            WHERE error <> ''
            ORDER BY T, keep_fraction, seed
        """, ["T", "keep_fraction", "seed", "error"])
