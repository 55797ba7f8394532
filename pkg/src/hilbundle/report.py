"""Run reports, CSV traces and plot-ready tables."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

FLOAT_FORMAT = "%.12e"


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str = "<="
    detail: str = ""

    @classmethod
    def at_most(cls, name: str, value: float, tolerance: float, detail: str = "") -> Check:
        value = float(value)
        return cls(name, value, tolerance, bool(value <= tolerance), "<=", detail)

    @classmethod
    def at_least(cls, name: str, value: float, tolerance: float, detail: str = "") -> Check:
        value = float(value)
        return cls(name, value, tolerance, bool(value >= tolerance), ">=", detail)

    @classmethod
    def within(cls, name: str, value: float, lo: float, hi: float, detail: str = "") -> Check:
        value = float(value)
        return cls(name, value, hi, bool(lo <= value <= hi), f"in [{lo:g}, {hi:g}]", detail)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        bound = self.relation if self.relation.startswith("in ") else f"{self.relation} {self.tolerance:.3e}"
        return f"[{flag}] {self.name}: {self.value:.3e} {bound}" + (
            f"  ({self.detail})" if self.detail else ""
        )


@dataclass
class Table:
    """Numeric table destined for a CSV file."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def add(self, *values: float) -> None:
        self.rows.append([float(v) for v in values])

    def __len__(self):
        return len(self.rows)


@dataclass
class RunReport:
    scenario: str
    config: dict[str, Any]
    checks: list[Check] = field(default_factory=list)
    convergence: dict[str, Table] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    artifacts: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "config": self.config,
            "checks": [_clean(asdict(c)) for c in self.checks],
            "convergence": {k: {"columns": t.columns, "rows": _clean(t.rows)} for k, t in self.convergence.items()},
            "notes": _clean(self.notes),
            "warnings": self.warnings,
            "wall_time_s": self.wall_time,
            "artifacts": self.artifacts,
        }

    def summary(self) -> str:
        lines = [f"scenario {self.scenario}: {'PASS' if self.passed else 'FAIL'}"]
        lines += ["  " + c.line() for c in self.checks]
        lines += [f"  warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_csv(path: Path, columns: list[str], rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([FLOAT_FORMAT % v for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_report(report: RunReport, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_plotdata(report: RunReport, trace, out_dir: Path, plots: dict[str, Table] | None = None) -> list[Path]:
    """Write the trace, the convergence tables and extra plot tables as CSV.

    Nothing is rendered.  A trace that was produced but is empty means the
    run never got going, so no files are written at all.
    """
    out_dir = Path(out_dir)
    if trace is not None and len(trace) == 0:
        report.warnings.append("empty trace: no plot data written")
        return []
    written = []
    if trace is not None:
        written.append(write_csv(out_dir / f"{report.scenario}_trace.csv", trace.columns, trace.rows))
    tables = {**report.convergence, **(plots or {})}
    for name, table in tables.items():
        if len(table):
            written.append(write_csv(out_dir / f"{report.scenario}_{name}.csv", table.columns, table.rows))
    if not written:
        report.warnings.append("nothing to plot: no plot data written")
    report.artifacts += [p.name for p in written]
    return written


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
