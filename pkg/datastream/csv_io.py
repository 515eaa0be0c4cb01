import csv
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from core.types import DataPoint
from errors import ConfigError, DataError

DEFAULT_LABEL_MAP: Dict[str, int] = {"-1": -1, "0": -1, "1": 1, "+1": 1}


def _resolve_label_index(label_column: Union[int, str, None], names: Optional[List[str]], arity: int) -> Optional[int]:
    if label_column is None:
        return None
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if names is None or label_column not in names:
            raise ConfigError(f"label column {label_column!r} not found in header")
        return names.index(label_column)
    index = int(label_column)
    if index < 0:
        index += arity
    if not 0 <= index < arity:
        raise ConfigError(f"label column {label_column} out of range for {arity} columns")
    return index


def _map_label(raw: str, label_map: Dict[str, int], row: int) -> int:
    key = raw.strip()
    if key in label_map:
        return label_map[key]
    try:
        value = float(key)
    except ValueError:
        raise DataError(f"unmapped label {raw!r}", row=row)
    if math.isfinite(value) and value == int(value) and str(int(value)) in label_map:
        return label_map[str(int(value))]
    raise DataError(f"unmapped label {raw!r}", row=row)


def load_csv(
    path: Union[str, Path],
    label_column: Union[int, str, None] = None,
    header: bool = False,
    label_map: Optional[Dict[str, int]] = None,
) -> List[DataPoint]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    mapping = dict(DEFAULT_LABEL_MAP if label_map is None else label_map)
    if any(v not in (-1, 1) for v in mapping.values()):
        raise ConfigError("label map values must be -1 or +1")

    points: List[DataPoint] = []
    names: Optional[List[str]] = None
    arity: Optional[int] = None
    label_index: Optional[int] = None
    with path.open(newline="", encoding="utf-8-sig") as handle:
        for row_number, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if header and names is None:
                names = [cell.strip() for cell in row]
                arity = len(names)
                label_index = _resolve_label_index(label_column, names, arity)
                continue
            if arity is None:
                arity = len(row)
                label_index = _resolve_label_index(label_column, names, arity)
            if len(row) != arity:
                raise DataError(f"inconsistent arity: expected {arity} fields, got {len(row)}", row=row_number)

            features = []
            label = None
            for column, cell in enumerate(row):
                if column == label_index:
                    label = _map_label(cell, mapping, row_number)
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(f"non-numeric value {cell!r} in column {column}", row=row_number)
                if not math.isfinite(value):
                    raise DataError(f"non-finite value {cell!r} in column {column}", row=row_number)
                features.append(value)
            if not features:
                raise DataError("row has no feature columns", row=row_number)
            points.append(DataPoint(features=features, label=label))

    if not points:
        raise DataError("no rows")
    return points


def write_points_csv(points: Sequence[DataPoint], path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    labeled = bool(points) and points[0].labeled
    dim = points[0].dim if points else 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"f{j}" for j in range(dim)] + (["label"] if labeled else []))
        for point in points:
            row = [repr(float(v)) for v in point.features]
            if labeled:
                row.append(str(point.label))
            writer.writerow(row)
