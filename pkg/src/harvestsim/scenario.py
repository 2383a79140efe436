"""Scenario documents: JSON files describing nodes, their environment and tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .applications import SENSORS, App, AppKind, PacketBudget, PowerTable
from .energy import DEFAULT_LEAKAGE_UW, ConverterConfig, SolarPanel
from .engine import NodeConfig
from .environment import (
    DAY_S, PRESETS, EventTrace, TraceError, generate_events, generate_light, load_trace,
)
from .power_manager import QosTable


class ScenarioError(ValueError):
    """Raised with every validation problem found, not just the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Scenario:
    duration_days: float
    seed: int
    nodes: list[NodeConfig]
    channel_loss_p: float = 0.0
    source: Path | None = None
    calibration: dict | None = field(default=None, repr=False)

    @property
    def duration_s(self) -> int:
        return int(round(self.duration_days * DAY_S))


_NODE_KEYS = {
    "id", "app", "sensor", "capacitance_f", "panel_scale", "initial_voltage_v", "preset",
    "light_trace", "event_trace", "pinned_qos", "qos_table", "power_table",
    "packet_budget", "converter", "leakage_uw",
}


def _number(errors, where, value, lo=None, hi=None, lo_open=False, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if ok and integer:
        ok = float(value).is_integer()
    if ok and lo is not None:
        ok = value > lo if lo_open else value >= lo
    if ok and hi is not None:
        ok = value <= hi
    if not ok:
        rng = f" in {'(' if lo_open else '['}{lo}, {hi}]" if lo is not None else ""
        errors.append(f"{where}: expected {'an integer' if integer else 'a number'}{rng}, got {value!r}")
    return ok


def _build(errors, where, factory, payload):
    try:
        return factory(payload)
    except (TypeError, ValueError) as exc:
        errors.append(f"{where}: {exc}")
        return None


def parse_scenario(doc: dict, base_dir: Path | None = None, seed: int | None = None,
                   calibration: dict | None = None) -> Scenario:
    base_dir = Path(base_dir or ".")
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioError(["scenario must be a JSON object"])
    days = doc.get("duration_days")
    _number(errors, "duration_days", days, 0, None, lo_open=True)
    seed = doc.get("seed", 0) if seed is None else seed
    _number(errors, "seed", seed, 0, 2**64 - 1, integer=True)
    loss = doc.get("channel_loss_p", 0.0)
    _number(errors, "channel_loss_p", loss, 0, None)
    if isinstance(loss, (int, float)) and loss >= 1:
        errors.append(f"channel_loss_p: must be < 1, got {loss}")

    if calibration is None and doc.get("calibration"):
        cal_path = base_dir / doc["calibration"]
        if not cal_path.is_file():
            errors.append(f"calibration: file not found: {cal_path}")
        else:
            from .calibration import load_calibration
            try:
                calibration = load_calibration(cal_path)
            except ValueError as exc:
                errors.append(f"calibration: {exc}")

    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        errors.append("nodes: expected a non-empty list")
        raw_nodes = []
    seen: set[str] = set()
    n_days = max(1, int(-(-float(days) // 1))) if isinstance(days, (int, float)) and days > 0 else 1
    nodes = []
    for i, raw in enumerate(raw_nodes):
        node = _parse_node(errors, i, raw, base_dir, seen, n_days,
                           int(seed) if isinstance(seed, (int, float)) else 0, calibration)
        if node is not None:
            nodes.append(node)
    if errors:
        raise ScenarioError(errors)
    return Scenario(float(days), int(seed), nodes, float(loss), calibration=calibration)


def _parse_node(errors, i, raw, base_dir, seen, n_days, seed, calibration):
    where = f"nodes[{i}]"
    if not isinstance(raw, dict):
        errors.append(f"{where}: expected an object")
        return None
    n_err = len(errors)
    for key in sorted(set(raw) - _NODE_KEYS):
        errors.append(f"{where}: unknown field {key!r}")
    node_id = raw.get("id")
    if not isinstance(node_id, str) or not node_id:
        errors.append(f"{where}.id: expected a non-empty string")
        node_id = f"#{i}"
    elif node_id in seen:
        errors.append(f"{where}.id: duplicate node id {node_id!r}")
    seen.add(node_id)
    where = f"node {node_id!r}"

    app_name = raw.get("app")
    if app_name not in {k.value for k in AppKind}:
        errors.append(f"{where}.app: expected one of {[k.value for k in AppKind]}, got {app_name!r}")
        app_name = None
    sensor = raw.get("sensor", "bar")
    if sensor not in SENSORS:
        errors.append(f"{where}.sensor: expected one of {list(SENSORS)}, got {sensor!r}")
        sensor = "bar"
    cap = raw.get("capacitance_f", 1.0)
    _number(errors, f"{where}.capacitance_f", cap, 0, None, lo_open=True)
    scale = raw.get("panel_scale", 1.0)
    _number(errors, f"{where}.panel_scale", scale, 0, None, lo_open=True)
    v0 = raw.get("initial_voltage_v", 3.6)
    _number(errors, f"{where}.initial_voltage_v", v0, 0, 3.6)
    pinned = raw.get("pinned_qos")
    if pinned is not None:
        _number(errors, f"{where}.pinned_qos", pinned, 1, 7, integer=True)

    table = QosTable()
    if "qos_table" in raw:
        table = _build(errors, f"{where}.qos_table", QosTable.from_dicts, raw["qos_table"])
    power = PowerTable()
    if "power_table" in raw:
        power = _build(errors, f"{where}.power_table", lambda d: PowerTable(**d), raw["power_table"])
    budget = PacketBudget()
    if "packet_budget" in raw:
        budget = _build(errors, f"{where}.packet_budget", lambda d: PacketBudget(**d),
                        raw["packet_budget"])
    conv_fields = {}
    if calibration is not None:
        conv_fields["eta_buck"] = calibration["eta_buck"]
    if isinstance(raw.get("converter"), dict):
        conv_fields.update(raw["converter"])
    elif "converter" in raw:
        errors.append(f"{where}.converter: expected an object")
    converter = _build(errors, f"{where}.converter", lambda d: ConverterConfig(**d), conv_fields)
    leak = raw.get("leakage_uw", calibration["leakage_uw"] if calibration else DEFAULT_LEAKAGE_UW)
    _number(errors, f"{where}.leakage_uw", leak, 0, None)

    preset_name = raw.get("preset")
    light = events = None
    env_label = ""
    if preset_name is not None and "light_trace" in raw:
        errors.append(f"{where}: give either preset or light_trace, not both")
    elif preset_name is not None:
        if preset_name not in PRESETS:
            errors.append(f"{where}.preset: unknown preset {preset_name!r}; known: {sorted(PRESETS)}")
        else:
            preset = PRESETS[preset_name]
            light = generate_light(preset, n_days, seed)
            events = generate_events(preset, n_days, seed)
            env_label = preset_name
    elif "light_trace" in raw:
        light = _load(errors, f"{where}.light_trace", base_dir, raw["light_trace"], "light")
        env_label = str(raw["light_trace"])
    else:
        errors.append(f"{where}: needs a preset or a light_trace")
    if "event_trace" in raw:
        events = _load(errors, f"{where}.event_trace", base_dir, raw["event_trace"], "events")

    if len(errors) > n_err or app_name is None:
        return None
    return NodeConfig(
        id=node_id, app=App(app_name, sensor), light=light, events=events,
        capacitance_f=float(cap), initial_voltage_v=float(v0),
        panel=SolarPanel(scale=float(scale)), converter=converter, leakage_uw=float(leak),
        table=table, power=power, budget=budget,
        pinned_qos=int(pinned) if pinned is not None else None, environment=env_label,
    )


def _load(errors, where, base_dir, rel, kind):
    if not isinstance(rel, str):
        errors.append(f"{where}: expected a path string")
        return None
    path = base_dir / rel
    if not path.is_file():
        errors.append(f"{where}: file not found: {path}")
        return None
    try:
        trace = load_trace(path, kind)
    except TraceError as exc:
        errors.append(f"{where}: {exc}")
        return None
    if kind == "events" and not isinstance(trace, EventTrace):
        errors.append(f"{where}: not an event trace")
        return None
    return trace


def load_scenario(path: str | Path, seed: int | None = None,
                  calibration: dict | None = None) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError([f"scenario file not found: {path}"])
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: invalid JSON: {exc}"]) from None
    scenario = parse_scenario(doc, path.parent, seed, calibration)
    return replace(scenario, source=path)
