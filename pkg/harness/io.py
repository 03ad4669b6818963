import csv
import json
import math
from typing import Any, Dict, Optional, Tuple

import numpy as np
import yaml

from conicsolver.models import OPTIMAL, SolverOptions
from gcpp.models import ExchangeParams
from harness.models import ExperimentReport
from harness.tables import COLUMNS
from jordan.models import ConeSpec

CSV_FIELDS = ["n", "no"] + [f"{variant}_{part}" for variant in COLUMNS for part in ("value", "time")]


def to_jsonable(obj: Any) -> Any:
    """Plain Python structure for json.dumps; numpy values become lists and floats, NaN and inf become None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2)


def _csv_value(cell, part):
    if not cell:
        return ""
    if cell.get("status") not in (None, OPTIMAL):
        return cell["status"].upper() if part == "value" else ""
    value = cell.get(part)
    if value is None or not math.isfinite(value):
        return ""
    return f"{value:.6g}" if part == "value" else f"{value:.3f}"


def write_csv(report: ExperimentReport, path: str):
    """One row per instance with value and time columns per variant; skipped cells read SKIPPED."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for record in report.records:
            row = {"n": record["n"], "no": record["no"] + 1}
            for variant in COLUMNS:
                for part in ("value", "time"):
                    row[f"{variant}_{part}"] = _csv_value(record.get(variant), part)
            writer.writerow(row)


def load_document(path: str) -> Dict[str, Any]:
    """JSON or YAML object from `path`."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: failed to parse: {exc}")
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected an object at the top level")
    return data


def load_matrix_input(path: str) -> Tuple[ConeSpec, np.ndarray]:
    """Cone spec and symmetric matrix from a document with keys `cone` and `X`."""
    data = load_document(path)
    if "cone" not in data or "X" not in data:
        raise ValueError(f"{path}: needs both 'cone' and 'X'")
    spec = ConeSpec.from_dict(data["cone"])
    X = spec.check_matrix(np.asarray(data["X"], dtype=float), "X")
    return spec, X


def load_params(path: Optional[str]) -> Tuple[SolverOptions, ExchangeParams]:
    """Solver options and exchange parameters from the `solver` and `exchange` sections of `path`."""
    if not path:
        return SolverOptions(), ExchangeParams()
    data = load_document(path)
    unknown = sorted(set(data) - {"solver", "exchange"})
    if unknown:
        raise ValueError(f"{path}: unknown section(s): {', '.join(unknown)}")
    return SolverOptions.from_dict(data.get("solver")), ExchangeParams.from_dict(data.get("exchange"))
