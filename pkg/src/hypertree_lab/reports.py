"""Deterministic report serialization (JSON lines or CSV).

Every report starts with a reproducibility header carrying the package
version and the full config. Rationals are written as "num/den" strings,
floats with 17 significant digits, infinities as "inf". No timestamps.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, fields, is_dataclass
from fractions import Fraction
from typing import Any, Optional

import numpy as np

CENSUS_COLUMNS = ("k", "empirical_pmf", "stderr", "reference_pmf")


def render(x: Any) -> Any:
    """Map a value to a JSON-safe, bit-stable form."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if isinstance(x, dict):
        return {str(k): render(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [render(v) for v in x]
    if is_dataclass(x):
        return {f.name: render(getattr(x, f.name)) for f in fields(x)}
    raise TypeError(f"cannot serialize {type(x).__name__}")


@dataclass
class Report:
    kind: str
    header: dict                 # version, config, seed
    summary: dict = field(default_factory=dict)
    columns: tuple = ()
    rows: list = field(default_factory=list)


def _csv_cell(v: Any) -> str:
    r = render(v)
    if isinstance(r, bool):
        return "true" if r else "false"
    if r is None:
        return ""
    if isinstance(r, (list, dict)):
        return json.dumps(r, sort_keys=True, separators=(",", ":"))
    return str(r)


def format_report(report: Report, fmt: str = "jsonlines") -> str:
    if fmt == "jsonlines":
        out = [json.dumps({"header": render(report.header), "kind": report.kind}, sort_keys=True)]
        if report.summary:
            out.append(json.dumps({"summary": render(report.summary)}, sort_keys=True))
        for row in report.rows:
            out.append(json.dumps(render(dict(zip(report.columns, row))), sort_keys=True))
        return "\n".join(out) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        # one metadata line: config first, then summary values
        meta = list(report.header.items()) + list(report.summary.items())
        buf.write(f"# {report.kind} " + " ".join(f"{k}={_csv_cell(v)}" for k, v in meta) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        if report.columns:
            writer.writerow(report.columns)
        for row in report.rows:
            writer.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: Report, fmt: str = "jsonlines", path: Optional[os.PathLike] = None) -> str:
    """Serialize ``report``; write it to ``path`` when given ("-" or None means return only)."""
    text = format_report(report, fmt)
    if path is not None and str(path) != "-":
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def census_report(rep, header: dict) -> Report:
    """Census table with columns exactly (k, empirical_pmf, stderr, reference_pmf)."""
    return Report("census", header, {"tv_distance": rep.tv_distance(), "trials": rep.trials},
                  CENSUS_COLUMNS, rep.rows())
