"""Report emission: report.json, report.csv, manifest.json.

Reals are serialized with 17 significant digits so binary64 values round-trip
exactly.  Wall time lives only in the manifest, keeping report.json
byte-identical across repeated runs with the same config and seed.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from . import __version__
from .experiments import Report

__all__ = ["emit_report", "report_csv_columns"]


class _F17(float):
    def __repr__(self):
        if math.isfinite(self):
            return format(self, ".17g")
        return repr(float(self))


def _wrap_floats(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return _F17(obj) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _wrap_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_wrap_floats(v) for v in obj]
    return obj


def report_csv_columns(report: Report) -> list:
    cols: list = []
    for row in report.rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def emit_report(report: Report, out_dir, wall_time_s: float | None = None) -> dict:
    """Write report.json, report.csv and manifest.json into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    doc = {
        "name": report.name,
        "params": report.params,
        "seed": report.seed,
        "rows": report.rows,
        "summary": report.summary,
        "gates": report.gates,
        "passed": report.passed,
    }
    report_path = out / "report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        # indent forces the pure-python encoder, which honors the 17-digit repr
        json.dump(_wrap_floats(doc), fh, indent=2)
        fh.write("\n")

    csv_path = out / "report.csv"
    cols = report_csv_columns(report)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in report.rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in (row.get(c, "") for c in cols)])

    manifest_path = out / "manifest.json"
    manifest = {
        "parameters": report.params,
        "seed": report.seed,
        "tool_version": __version__,
        "wall_time_s": wall_time_s if wall_time_s is not None else 0.0,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(_wrap_floats(manifest), fh, indent=2)
        fh.write("\n")
    return {"report": str(report_path), "csv": str(csv_path), "manifest": str(manifest_path)}
