"""Fit the two free constants of the energy model to measured anchors.

* leakage power: the 1-sensor node, started full in the dark under the
  adaptive manager, must brown out after ``dark_lifetime_h``;
* buck-path efficiency: a 1 F capacitor must charge from 0 V to the
  power-good level at ``coldstart_lux`` in ``coldstart_h``.

Leakage is solved first, since the cold-start time depends on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .applications import App
from .energy import ConverterConfig, SolarPanel, charge_time
from .engine import NodeConfig, dark_lifetime_s
from .environment import constant_light


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Anchors:
    dark_lifetime_h: float = 31.0
    coldstart_h: float = 2.2
    coldstart_lux: float = 750.0
    capacitance_f: float = 1.0
    leak_bracket_uw: tuple[float, float] = (0.0, 50.0)
    eta_bracket: tuple[float, float] = (0.01, 10.0)
    rtol: float = 1e-3


def bisect(f, lo: float, hi: float, rtol: float, target: float, what: str,
           max_iter: int = 200) -> float:
    """Root of a monotone ``f`` on [lo, hi], stopping once it is within ``rtol``."""
    f_lo, f_hi = f(lo), f(hi)
    if math.isnan(f_lo) or math.isnan(f_hi) or f_lo * f_hi > 0:
        raise CalibrationError(
            f"{what}: anchor {target} not bracketed on [{lo}, {hi}] "
            f"(residuals {f_lo:.4g}, {f_hi:.4g})")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) <= rtol * abs(target) and hi - lo < 1e-6 * max(1.0, abs(mid)):
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _dark_node(app: str, leak: float, cap: float, converter: ConverterConfig,
               pinned: int | None = None) -> NodeConfig:
    return NodeConfig("calibration", App(app), constant_light(0.0), capacitance_f=cap,
                      converter=converter, leakage_uw=leak, pinned_qos=pinned)


def dark_hours(app: str, leak: float, cap: float = 1.0,
               converter: ConverterConfig | None = None,
               pinned: int | None = None) -> float:
    converter = converter or ConverterConfig()
    return dark_lifetime_s(_dark_node(app, leak, cap, converter, pinned)) / 3600.0


def calibrate(anchors: Anchors | None = None,
              converter: ConverterConfig | None = None,
              panel: SolarPanel | None = None) -> dict:
    anchors = anchors or Anchors()
    converter = converter or ConverterConfig()
    panel = panel or SolarPanel()
    if anchors.dark_lifetime_h <= 0 or anchors.coldstart_h <= 0:
        raise CalibrationError("anchor times must be positive")

    target_s = anchors.dark_lifetime_h * 3600.0
    leak = bisect(
        lambda x: dark_hours("sense1", x, anchors.capacitance_f, converter) * 3600.0 - target_s,
        *anchors.leak_bracket_uw, anchors.rtol, target_s, "leakage")

    t_cs = anchors.coldstart_h * 3600.0
    v_pg = converter.v_power_good

    def coldstart_residual(eta):
        conv = replace(converter, eta_buck=eta)
        t = charge_time(anchors.capacitance_f, 0.0, v_pg, anchors.coldstart_lux, panel,
                        conv, leak)
        return (t if math.isfinite(t) else 1e30) - t_cs

    eta_buck = bisect(coldstart_residual, *anchors.eta_bracket, anchors.rtol, t_cs,
                      "eta_buck")
    conv = replace(converter, eta_buck=eta_buck)
    return {
        "leakage_uw": round(leak, 6),
        "eta_buck": round(eta_buck, 6),
        "anchors": {k: v for k, v in asdict(anchors).items()},
        "fitted": {
            "sense1_dark_h": dark_hours("sense1", leak, converter=conv),
            "coldstart_h": charge_time(anchors.capacitance_f, 0.0, v_pg,
                                       anchors.coldstart_lux, panel, conv, leak) / 3600.0,
        },
        "predictions": {
            "sense5_dark_h": dark_hours("sense5", leak, converter=conv),
            "advertise_dark_h": dark_hours("advertise", leak, converter=conv),
            "advertise_max_qos_dark_h": dark_hours("advertise", leak, converter=conv,
                                                   pinned=7),
        },
    }


def write_calibration(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_calibration(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("leakage_uw", "eta_buck"):
        if not isinstance(doc.get(key), (int, float)):
            raise ValueError(f"{path}: calibration document lacks numeric {key!r}")
    return doc
