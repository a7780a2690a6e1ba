"""CSV and JSON manifest writers.

CSV files use ``.`` as decimal separator, ``\\n`` line endings and ``repr``
formatting of floats, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .erosion import SimResult

SIM_COLUMNS = ("iteration", "modeled_time_s", "avg_pe_usage_pct", "lb_fired", "migrated_weight")


def _plain(value: Any) -> Any:
    if is_dataclass(value) and not isinstance(value, type):
        return _plain(asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_records(path: Path, records: Sequence[Any]) -> Path:
    """One row per dataclass record, columns in field order."""
    dicts = [asdict(r) for r in records]
    header = list(dicts[0]) if dicts else []
    return write_csv(path, header, ([d[h] for h in header] for d in dicts))


def write_dicts(path: Path, rows: Sequence[dict]) -> Path:
    header = list(rows[0]) if rows else []
    return write_csv(path, header, ([r[h] for h in header] for r in rows))


def write_manifest(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def sim_rows(result: SimResult):
    usage = result.avg_pe_usage
    for i in range(result.iteration_times.size):
        yield (i, float(result.iteration_times[i]), float(usage[i]),
               int(result.lb_fired[i]), float(result.migrated[i]))


def write_sim_result(path: Path, result: SimResult) -> Path:
    return write_csv(path, SIM_COLUMNS, sim_rows(result))
