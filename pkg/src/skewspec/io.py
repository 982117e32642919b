"""Result serialisation: RFC-4180 CSV with 17 significant digits, JSON with
sorted keys, and the per-run manifest."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    """Cell text: floats as %.17g (round-trips exactly), complex as 're+imj'."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_matrix_csv(path, mat, tol: float = 0.0) -> Path:
    """Entries with |value| > tol as (row, col, re, im) rows; accepts dense or scipy sparse."""
    if hasattr(mat, "tocoo"):
        coo = mat.tocoo()
        trip = zip(coo.row, coo.col, coo.data)
    else:
        mat = np.asarray(mat)
        r, c = np.nonzero(np.abs(mat) > tol)
        trip = zip(r, c, mat[r, c])
    rows = [[int(i), int(j), complex(v).real, complex(v).imag] for i, j, v in trip if abs(v) > tol]
    return write_csv(path, ["row", "col", "re", "im"], sorted(rows))


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    duration: float = 0.0
    outputs: list = field(default_factory=list)

    def write(self, path) -> Path:
        missing = [p for p in self.outputs if not Path(p).exists()]
        if missing:
            raise FileNotFoundError(f"manifest lists missing outputs: {missing}")
        return write_json(path, asdict(self))
