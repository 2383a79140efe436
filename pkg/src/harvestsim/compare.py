"""Side-by-side table of the adaptive node against the two reference systems.

For each environment in a scenario, the first node placed there serves as a
hardware template; every application is then run on its traces under each
system.
"""

from __future__ import annotations

import csv
import io
from dataclasses import replace

from .applications import App, AppKind
from .baselines import run_battery, run_pure_eh
from .engine import NodeConfig, NodeReport, run_node

SYSTEMS = ("adaptive", "battery", "pure_eh")
COLUMNS = ["environment", "system", "sense1_period_s", "sense5_period_s",
           "pir_detection_pct", "adv_interval_s", "operation"]
NO_PACKETS = "no packets"
NA = "NA"

_RUNNERS = {"adaptive": run_node, "battery": run_battery, "pure_eh": run_pure_eh}


def _templates(scenario) -> dict[str, NodeConfig]:
    out: dict[str, NodeConfig] = {}
    for cfg in scenario.nodes:
        out.setdefault(cfg.environment or cfg.id, cfg)
    return out


def _fmt(x: float, digits: int = 1) -> str:
    return f"{x:.{digits}f}"


def _period(rep: NodeReport) -> str:
    if rep.notes.get("unsupported"):
        return NA
    p = rep.mean_period_s
    return NO_PACKETS if p is None else _fmt(p)


def _pir(rep: NodeReport) -> str:
    if rep.notes.get("unsupported"):
        return NA
    pct = rep.detection_pct
    return NA if pct is None else _fmt(pct)


def _adv(rep: NodeReport) -> str:
    if rep.notes.get("unsupported"):
        return NA
    daily = [d.mean_adv_interval for d in rep.days if d.mean_adv_interval is not None]
    if not daily:
        return NO_PACKETS
    lo, hi = min(daily), max(daily)
    return _fmt(lo, 2) if abs(hi - lo) < 5e-3 else f"{lo:.2f}-{hi:.2f}"


def _operation(system: str, reports: list[NodeReport]) -> str:
    if system == "battery":
        lives = [r.notes["battery_lifetime_days"] for r in reports
                 if r.notes.get("battery_lifetime_days")]
        return f"battery-limited ({min(lives):.0f} d)" if lives else "battery-limited"
    supported = [r for r in reports if not r.notes.get("unsupported")]
    if supported and all(r.downtime_s == 0 for r in supported):
        return "perpetual"
    if system == "pure_eh":
        return "light-dependent"
    return "intermittent"


def compare_rows(scenario) -> list[dict[str, str]]:
    rows = []
    apps = [App(k) for k in (AppKind.SENSE1, AppKind.SENSE5, AppKind.PIR, AppKind.ADVERTISE)]
    for env, tmpl in _templates(scenario).items():
        for system in SYSTEMS:
            runner = _RUNNERS[system]
            reps = [runner(replace(tmpl, app=app, pinned_qos=None), scenario.duration_s,
                           scenario.seed, scenario.channel_loss_p) for app in apps]
            rows.append({
                "environment": env, "system": system,
                "sense1_period_s": _period(reps[0]), "sense5_period_s": _period(reps[1]),
                "pir_detection_pct": _pir(reps[2]), "adv_interval_s": _adv(reps[3]),
                "operation": _operation(system, reps),
            })
    return rows


def compare_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()

