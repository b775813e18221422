"""Report I/O: canonical JSON, CSV extracts, a small SVG chart and a text rendering."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..verdict import jsonable


def canonical_json(report) -> str:
    """Sorted keys, fixed indentation, non-finite floats as strings: byte-stable across runs."""
    return json.dumps(jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report, path):
    Path(path).write_text(canonical_json(report), encoding="utf-8")


def read_report(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _rows(report):
    """Tabular extract: one row per resolution, check, or sweep entry."""
    if "per_resolution" in report:
        return [{"cells": p.get("cells"), "constant": p.get("constant")} for p in report["per_resolution"]]
    if "checks" in report:
        return [{"name": c["name"], "status": c["status"], "value": json.dumps(c.get("value"))}
                for c in report["checks"]]
    if "zygmund_vs_spanne" in report:
        return [{"tuple": json.dumps(r["tuple"]), "log": r["log"], "zygmund": r["zygmund"], "spanne": r["spanne"],
                 "agree": r["agree"]} for r in report["zygmund_vs_spanne"]]
    if "hardy" in report:
        return [{"variant": k, **v} for k, v in sorted(report["hardy"].items())]
    return []


def to_csv(report) -> str:
    rows = _rows(report)
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def to_svg(report, width=360, height=240) -> str:
    """Line chart of the empirical constant against resolution (empty chart when not applicable)."""
    pts = [(p["cells"], p["constant"]) for p in report.get("per_resolution", [])
           if isinstance(p.get("constant"), (int, float))]
    pad = 30
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    if pts:
        xs = [float(x) for x, _ in pts]
        ys = [float(y) for _, y in pts]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys + [0.0]), max(ys) * 1.1 or 1.0
        sx = (lambda x: pad + (width - 2 * pad) * ((x - x0) / (x1 - x0) if x1 > x0 else 0.5))
        sy = (lambda y: height - pad - (height - 2 * pad) * ((y - y0) / (y1 - y0) if y1 > y0 else 0.5))
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="black" points="{path}"/>')
        for x, y in zip(xs, ys):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3"/>')
            parts.append(f'<text x="{sx(x):.2f}" y="{height - 8}" font-size="10" text-anchor="middle">{int(x)}</text>')
    parts.append(f'<text x="{pad}" y="16" font-size="12">{report.get("scenario", "")}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_text(report) -> str:
    lines = [f"scenario: {report.get('scenario')}", f"status:   {report.get('status')}"]
    if report.get("reason"):
        lines.append(f"reason:   {report['reason']}")
    for p in report.get("per_resolution", []):
        lines.append(f"  cells={p.get('cells')}  constant={p.get('constant')}")
    if report.get("drift") is not None:
        lines.append(f"drift:    {report['drift']}")
    for c in report.get("checks", []):
        lines.append(f"  [{c['status']}] {c['name']}: {c.get('value')}")
    for k, v in sorted(report.get("hardy", {}).items()):
        lines.append(f"  {k}: B={v['B']} largest ratio={v['largest_ratio']}")
    if "agree_zygmund" in report:
        lines.append(f"  zygmund vs spanne agree: {report['agree_zygmund']}")
        lines.append(f"  cianchi dichotomy agree: {report['agree_cianchi']}")
    return "\n".join(lines) + "\n"
