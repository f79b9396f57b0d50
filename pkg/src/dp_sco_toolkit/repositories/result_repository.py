"""Result file repository.

Records are stored as newline-delimited JSON, one ResultRecord per line, with
an optional CSV mirror. Following the repository pattern used across the
service layer, write failures return False instead of raising.
"""

import csv
import json
import logging
import threading
from pathlib import Path

from pydantic import ValidationError

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.models.experiment_models import ResultRecord

logger = logging.getLogger(__name__)

CSV_FIELDS = [
    "run_id",
    "algorithm",
    "n",
    "d",
    "p",
    "epsilon",
    "delta",
    "seed",
    "success",
    "excess_empirical",
    "excess_population_est",
    "population_stderr",
    "grad_count",
    "wall_ms",
    "non_private",
    "budget_status",
    "error_type",
    "error_message",
    "param_dump",
]


class ResultRepository:
    """Single writer for one result file.

    The file is created on the first append, so a run that fails before
    producing any record leaves no output behind.
    """

    def __init__(self, path: Path, csv_mirror: bool = False) -> None:
        """Initialize repository.

        Args:
            path: NDJSON result file
            csv_mirror: Also write ``path`` with a .csv suffix
        """
        self.path = Path(path)
        self.csv_path = self.path.with_suffix(".csv") if csv_mirror else None
        self._lock = threading.Lock()
        self.records_written = 0

    def append(self, record: ResultRecord) -> bool:
        """Append one record as a single line.

        Args:
            record: Record to store

        Returns:
            bool: True if the write succeeded, False otherwise
        """
        line = record.model_dump_json() + "\n"
        with self._lock:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(line)
                    handle.flush()
                if self.csv_path is not None:
                    self._append_csv(record)
                self.records_written += 1
                return True
            except OSError as e:
                logger.error(f"Failed to write result record: {e}")  # pragma: no cover
                return False

    def _append_csv(self, record: ResultRecord) -> None:
        assert self.csv_path is not None
        new_file = not self.csv_path.exists()
        row = record.model_dump(mode="json")
        row["param_dump"] = json.dumps(row["param_dump"], sort_keys=True)
        with self.csv_path.open("a", encoding="utf-8", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS, extrasaction="ignore")
            if new_file:
                writer.writeheader()
            writer.writerow(row)


def load_records(path: Path) -> list[ResultRecord]:
    """Read every record of an NDJSON result file.

    Raises:
        DomainError: Naming the first line that is not a valid record
    """
    records = []
    with Path(path).open(encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(ResultRecord.model_validate_json(line))
            except ValidationError as e:
                raise DomainError(f"{path}:{number}: invalid result record: {e}") from e
    return records
