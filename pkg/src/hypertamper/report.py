"""Run reports (JSON) and delimited series (CSV).

JSON rendering rules: a :class:`~fractions.Fraction` becomes the string
``"num/den"``, a float stays a JSON number written with Python's shortest
round-trip repr (never more than 17 significant digits), enums become their
value. CSV cells hold floats formatted with 17 significant digits, which is
lossy for rationals; that is why exact values live in the JSON report.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__

#: environment variable naming the default output directory
OUT_ENV = "HYPERTAMPER_OUT"
DEFAULT_OUT = "hypertamper-runs"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def render(value: Any) -> Any:
    """Convert a value into JSON-safe data."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else repr(x)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: render(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): render(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [render(v) for v in value]
    return str(value)


def csv_cell(value: Any) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, Fraction)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([csv_cell(v) for v in row])
    return buf.getvalue()


@dataclass
class Metric:
    name: str
    value: Any
    se: float | None = None
    exact: bool = False
    seed: int | None = None


@dataclass
class Check:
    name: str
    ok: bool
    witness: Any = None


@dataclass
class RunReport:
    """Everything needed to rerun and audit one CLI invocation."""

    command: str
    argv: list[str]
    params: dict
    metrics: list[Metric] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    wall_time: float = 0.0
    tool: str = "hypertamper"
    version: str = __version__

    def metric(self, name: str, value: Any, se: float | None = None, exact: bool = False, seed: int | None = None) -> None:
        if not exact and seed is None:
            seed = self.params.get("seed")
        self.metrics.append(Metric(name, value, se, exact, None if exact else seed))

    def check(self, name: str, ok: bool, witness: Any = None) -> None:
        self.checks.append(Check(name, bool(ok), None if ok else witness))

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return render(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def write(self, out_dir: Path, stem: str) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{stem}.json"
        path.write_text(self.to_json())
        return path


def write_csv(out_dir: Path, stem: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.csv"
    path.write_text(csv_text(columns, rows))
    return path
