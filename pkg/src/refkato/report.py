"""Check records, report assembly and the JSON / CSV / Markdown writers."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from . import __version__

__all__ = ["Check", "Report", "to_json", "to_csv", "to_markdown", "FORMATS", "render"]

FORMATS = ("json", "csv", "md")


def _clean(x):
    """JSON-safe scalars: NaN and inf become None, numpy scalars become Python ones."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    return x


@dataclass
class Check:
    """One pass/fail record. ``passed`` is ``residual < tol``.

    ``expected_fail`` marks negative controls: the raw result is kept as is,
    but the summary counts the check as passed when it does fail.
    """

    name: str
    config: dict
    value: Optional[float]
    expected: Optional[float]
    residual: float
    tol: float
    expected_fail: bool = False
    undefined_points: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    @property
    def ok(self) -> bool:
        """Whether the outcome is the intended one."""
        return self.passed != self.expected_fail

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "config": self.config,
            "value": self.value,
            "expected": self.expected,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.passed,
        }
        if self.expected_fail:
            d["expected_fail"] = True
        if self.undefined_points:
            d["undefined_points"] = self.undefined_points
        if self.note:
            d["note"] = self.note
        return _clean(d)


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)
        for key, rows in other.tables.items():
            self.tables.setdefault(key, []).extend(rows)

    @property
    def summary(self) -> dict:
        ok = sum(c.ok for c in self.checks)
        return {
            "passed": ok,
            "failed": len(self.checks) - ok,
            "undefined_points": sum(c.undefined_points for c in self.checks),
        }

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.all_ok else 1

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def as_dict(self) -> dict:
        d = {
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "summary": self.summary,
        }
        if self.tables:
            d["tables"] = self.tables
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return _clean(d)


def to_json(report: Report) -> str:
    return json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"


def _csv_table(rows: list) -> str:
    cols = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt_cell(r.get(k)) for k in cols})
    return buf.getvalue()


def _fmt_cell(v):
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return ";".join(f"{k}={v[k]}" for k in sorted(v))
    return "" if v is None else v


def to_csv(report: Report) -> str:
    """Tables only. Each table gets a ``# name`` header line; checks form the last table."""
    parts = []
    for name in sorted(report.tables):
        parts.append(f"# {name}\n" + _csv_table(report.tables[name]))
    rows = [c.as_dict() for c in report.checks]
    if rows:
        parts.append("# checks\n" + _csv_table(rows))
    return "\n".join(parts)


def _num(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        if not math.isfinite(v):
            return "-"
        return f"{v:.3e}" if v != 0 and (abs(v) < 1e-3 or abs(v) >= 1e4) else f"{v:.10g}"
    return str(v)


def to_markdown(report: Report) -> str:
    s = report.summary
    lines = [
        f"# refkato {report.command} report",
        "",
        f"version {__version__}; passed {s['passed']}, failed {s['failed']}, undefined points {s['undefined_points']}",
        "",
        "## Configuration",
        "",
    ]
    for k in sorted(report.config):
        lines.append(f"- {k}: {report.config[k]}")
    lines += ["", "## Checks", "", "| check | config | value | expected | residual | tol | result |", "|---|---|---|---|---|---|---|"]
    for c in report.checks:
        cfg = ", ".join(f"{k}={c.config[k]}" for k in sorted(c.config))
        if c.expected_fail:
            result = "expected failure" if not c.passed else "UNEXPECTED PASS"
        else:
            result = "pass" if c.passed else "FAIL"
        lines.append(
            f"| {c.name} | {cfg} | {_num(c.value)} | {_num(c.expected)} | {_num(c.residual)} | {_num(c.tol)} | {result} |"
        )
    for name in sorted(report.tables):
        rows = report.tables[name]
        if not rows:
            continue
        cols = list(rows[0])
        lines += ["", f"## Table: {name}", "", "| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
        lines += ["| " + " | ".join(_num(r.get(c)) for c in cols) + " |" for r in rows]
    bad = report.failures()
    if bad:
        lines += ["", "## Failures", ""]
        lines += [f"- {c.name} ({c.note or 'residual above tolerance'})" for c in bad]
    if report.wall_time is not None:
        lines += ["", f"wall time: {report.wall_time:.2f} s"]
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    if fmt == "md":
        return to_markdown(report)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
