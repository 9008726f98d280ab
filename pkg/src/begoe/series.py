"""Labeled (abscissa, value, stderr) series and their CSV/JSON serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ObservableSeries", "format_float", "write_csv", "read_csv", "write_json"]


@dataclass
class ObservableSeries:
    label: str
    abscissa: np.ndarray
    value: np.ndarray
    stderr: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.stderr is None:
            self.stderr = np.zeros_like(self.value)
        self.stderr = np.asarray(self.stderr, dtype=float)
        for name, col in self.extra.items():
            self.extra[name] = np.asarray(col, dtype=float)
        n = len(self.abscissa)
        for col in (self.value, self.stderr, *self.extra.values()):
            if len(col) != n:
                raise ValueError(f"column length mismatch in series {self.label!r}")

    def columns(self) -> dict:
        cols = {"abscissa": self.abscissa, "value": self.value, "stderr": self.stderr}
        cols.update(self.extra)
        return cols


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, series: ObservableSeries, header: dict | None = None) -> None:
    """Write a series as CSV with '#'-prefixed JSON header lines."""
    cols = series.columns()
    names = list(cols)
    lines = [f"# label: {series.label}"]
    for key, val in (header or {}).items():
        lines.append(f"# {key}: {json.dumps(val, sort_keys=True)}")
    lines.append(",".join(names))
    data = np.column_stack([cols[n] for n in names])
    for row in data:
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[dict, dict]:
    """Return ``(header, columns)`` from a file written by :func:`write_csv`."""
    header, rows, names = {}, [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(": ")
                if key == "label":
                    header[key] = val
                else:
                    header[key] = json.loads(val)
            elif names is None:
                names = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, len(names))
    return header, {n: arr[:, i] for i, n in enumerate(names)}


def write_json(path, series: ObservableSeries, header: dict | None = None) -> None:
    payload = {
        "label": series.label,
        "header": header or {},
        "columns": {k: [float(v) for v in col] for k, col in series.columns().items()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
