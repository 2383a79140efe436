"""Serialisation of simulation reports (CSV per node-day, JSON summary, packet log)."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .engine import SimReport

DAY_COLUMNS = [
    "node_id", "system", "app", "day", "packets", "mean_period_s", "pir_detected",
    "pir_missed_blanked", "pir_missed_dead", "downtime_s", "mean_qos", "mean_adv_interval_s",
    "advertisements",
]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def days_csv(report: SimReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DAY_COLUMNS)
    for row in report.rows():
        w.writerow([_cell(row[c]) for c in DAY_COLUMNS])
    return buf.getvalue()


def packets_csv(report: SimReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_s", "node_id", "qos_state", "voltage_v"])
    for node in report.nodes:
        for p in node.packets:
            if p.delivered:
                w.writerow([p.t, p.node_id, p.qos_state, repr(p.voltage_v)])
    return buf.getvalue()


def summary_json(report: SimReport) -> str:
    return json.dumps(report.summary(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: SimReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "days.csv": days_csv(report),
        "packets.csv": packets_csv(report),
        "summary.json": summary_json(report),
    }
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
