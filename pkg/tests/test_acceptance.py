"""Acceptance suite: one test, and one PASS/FAIL line, per criterion.

Fixed seed 42 and 15-day horizons throughout; every simulated report is kept
so the property checks in criterion 10 can walk all of them.
"""

import math
import time
from dataclasses import replace

import pytest

from harvestsim.applications import App, PirPhase, PowerTable, advertising_power, load_power
from harvestsim.baselines import run_battery, run_pure_eh
from harvestsim.energy import charge_time
from harvestsim.engine import DAY_S, NodeConfig, SimReport, dark_lifetime_s, run_node
from harvestsim.environment import PRESETS, constant_light, generate_events, generate_light
from harvestsim.power_manager import QosTable, qos_from_voltage
from harvestsim.report import days_csv, packets_csv, summary_json

SEED = 42
DAYS = 15
HORIZON = DAYS * DAY_S
REPORTS: list = []  # every acceptance run, for criterion 10


def dark_node(app, pinned=None):
    return NodeConfig(f"dark-{app}", App(app), constant_light(0.0), pinned_qos=pinned)


def preset_node(app, preset, scale=1.0):
    p = PRESETS[preset]
    cfg = NodeConfig(f"{preset}-{app}", App(app), generate_light(p, DAYS, SEED),
                     generate_events(p, DAYS, SEED), environment=preset)
    if scale != 1.0:
        cfg = replace(cfg, panel=replace(cfg.panel, scale=scale))
    return cfg


def simulate(runner, cfg, **kw):
    rep = runner(cfg, HORIZON, SEED, **kw)
    REPORTS.append(rep)
    return rep


def dark_hours(app, pinned=None):
    cfg = dark_node(app, pinned)
    rep = run_node(cfg, 10 * DAY_S, stop_at_brownout=True)
    REPORTS.append(rep)
    assert dark_lifetime_s(cfg) == rep.first_brownout_s
    return rep.first_brownout_s / 3600


def test_criterion_01_dark_endurance_anchor(verdict):
    t0 = time.perf_counter()
    hours = dark_hours("sense1")
    elapsed = time.perf_counter() - t0
    ok = hours == pytest.approx(31.0, rel=0.01) and elapsed < 1.0
    verdict(1, ok, f"1-sensor dark lifetime {hours:.3f} h (31 h +-1%), runtime {elapsed:.2f} s (<1 s)")


def test_criterion_02_held_out_dark_endurance(verdict):
    one, five, adv = dark_hours("sense1"), dark_hours("sense5"), dark_hours("advertise")
    ok = (five == pytest.approx(27.0, rel=0.20) and adv == pytest.approx(19.0, rel=0.35)
          and adv < five < one)
    verdict(2, ok, f"5-sensor {five:.2f} h (27 h +-20%), advertising {adv:.2f} h (19 h +-35%), "
                   f"ordering {adv:.1f} < {five:.1f} < {one:.1f}")


def test_criterion_03_pinned_max_qos_advertising(verdict):
    hours = dark_hours("advertise", pinned=7)
    ok = hours == pytest.approx(1.9, rel=0.15)
    verdict(3, ok, f"QoS 7 advertising dark lifetime {hours:.3f} h (1.9 h +-15%)")


def test_criterion_04_cold_start(verdict):
    t1 = charge_time(1.0, 0.0, 2.1, 750)
    t022 = charge_time(0.22, 0.0, 2.1, 750)
    sim = run_node(NodeConfig("cold", App("sense1"), constant_light(750.0),
                              initial_voltage_v=0.0), 4 * 3600)
    REPORTS.append(sim)
    t_sim = sim.recoveries[0] if sim.recoveries else math.inf
    ratio = t022 / t1
    ok = (t1 / 3600 == pytest.approx(2.2, rel=0.01) and ratio == pytest.approx(0.22, rel=0.01)
          and t_sim == pytest.approx(t1, rel=0.01))
    verdict(4, ok, f"1 F 0->2.1 V at 750 lux {t1 / 3600:.4f} h (2.2 h +-1%), simulated "
                   f"{t_sim / 3600:.4f} h, 0.22 F ratio {ratio:.4f} (0.22 +-1%)")


def test_criterion_05_voltage_bands(verdict):
    edges_mv = [2100, 2400, 2600, 2800, 3000, 3200, 3400, 3600]
    table = QosTable()
    bad = []
    for mv in range(2100, 3601):
        expected = 7 if mv == 3600 else next(i + 1 for i in range(7)
                                             if edges_mv[i] <= mv < edges_mv[i + 1])
        got = qos_from_voltage(table, mv / 1000)
        if got != expected:
            bad.append((mv, got, expected))
    verdict(5, not bad, f"1501 voltages 2.100-3.600 V, {len(bad)} mismatches"
                        + (f", first {bad[0]}" if bad else ""))


def test_criterion_06_power_anchors(verdict):
    power, table = PowerTable(), QosTable()
    minute = next(r.state for r in table.rows if r.sensing_period_s == 60)
    pir = App("pir")
    got = {
        "mcu_sleep": load_power(pir, 1, table, pir_phase=PirPhase.BLANKED),
        "mcu_pir_sleep": load_power(pir, 1, table, pir_phase=PirPhase.ARMED),
        "pir_detection": load_power(pir, 1, table, pir_phase=PirPhase.DETECTING),
    }
    for s in ("hum", "temp", "bar", "light"):
        got[f"read_{s}"] = load_power(App("sense1", s), minute, table, transaction="measured")
    for name, interval in (("adv_5s", 5.0), ("adv_2s", 2.0), ("adv_1s", 1.0),
                           ("adv_500ms", 0.5), ("adv_100ms", 0.1)):
        got[name] = advertising_power(interval, power)
    got["adv_100ms"] = load_power(App("advertise"), 7, table)  # state 7 is the 0.1 s point
    wrong = {k: v for k, v in got.items() if v != pytest.approx(getattr(power, k), abs=1e-9)}
    verdict(6, len(got) == 12 and not wrong,
            f"{len(got) - len(wrong)}/12 power-table entries reproduced"
            + (f", off: {wrong}" if wrong else ""))


def test_criterion_07_baseline_comparison(verdict):
    t0 = time.perf_counter()
    cfg = preset_node("sense1", "center_office")
    bat = simulate(run_battery, cfg)
    peh = simulate(run_pure_eh, cfg)
    ada = simulate(run_node, cfg)
    elapsed = time.perf_counter() - t0
    p_b, p_p, p_a = bat.mean_period_s, peh.mean_period_s, ada.mean_period_s
    ok = (p_b == 60 and p_p is not None and 110 <= p_p <= 170 and p_a is not None
          and p_a < p_p and ada.downtime_s == 0 and elapsed < 10)
    verdict(7, ok, f"battery {p_b} s, pure-EH {p_p:.1f} s [110,170], adaptive {p_a:.1f} s "
                   f"(< pure-EH), adaptive downtime {ada.downtime_s} s, runtime {elapsed:.2f} s")


def test_criterion_08_pir_directional(verdict):
    reps = {env: simulate(run_node, preset_node("pir", env))
            for env in ("center_office", "conference", "stairs")}
    pct = {env: r.detection_pct for env, r in reps.items()}
    st = reps["stairs"].pir_counts
    missed = st["missed_blanked"] + st["missed_dead"]
    ok = (pct["center_office"] >= 90 and pct["conference"] >= 90 and pct["stairs"] < 50
          and missed > st["detected"])
    verdict(8, ok, f"detection center-office {pct['center_office']:.1f}%, conference "
                   f"{pct['conference']:.1f}% (>=90), stairs {pct['stairs']:.1f}% (<50), "
                   f"stairs missed {missed} vs detected {st['detected']}")


def test_criterion_09_stairs_advertising(verdict):
    # Red by design: see the energy budget analysis in the decisions ledger.
    rep = simulate(run_node, preset_node("advertise", "stairs"))
    adv = rep.mean_adv_interval
    ok = adv is not None and adv <= 0.9 and rep.downtime_s == 0
    verdict(9, ok, f"stairs mean advertising interval {adv:.3f} s (<=0.9), "
                   f"downtime {rep.downtime_s} s (must be 0)")


def _closes_all(reports):
    return [r.node_id for r in reports if not r.ledger.closes(1e-6)]


def _scenario_report():
    nodes = [preset_node(a, e) for a, e in (("sense1", "door"), ("pir", "stairs"),
                                            ("advertise", "window"))]
    reps = [run_node(n, HORIZON, SEED, 0.1) for n in nodes]
    REPORTS.extend(reps)
    r = SimReport(SEED, HORIZON, reps)
    return days_csv(r) + packets_csv(r) + summary_json(r)


def test_criterion_10_properties(verdict):
    failures = []
    if _scenario_report() != _scenario_report():
        failures.append("reports differ between identical seeded runs")

    counts = {}
    for app, env in (("sense1", "center_office"), ("sense5", "door"), ("pir", "stairs"),
                     ("advertise", "door"), ("advertise", "center_office")):
        series = [simulate(run_node, preset_node(app, env, s)).service_packets
                  for s in (1.0, 1.25, 1.5, 2.0)]
        counts[f"{app}@{env}"] = series
        if any(b < a for a, b in zip(series, series[1:])):
            failures.append(f"upscaling reduced packets for {app}@{env}: {series}")
    if not any(r.system == "adaptive" for r in REPORTS):
        REPORTS.append(run_node(dark_node("sense1"), 2 * DAY_S))

    leaking = _closes_all(REPORTS)
    if leaking:
        failures.append(f"ledger open for {leaking}")
    adaptive = [r for r in REPORTS if r.system == "adaptive"]
    qos = [p.qos_state for r in adaptive for p in r.packets]
    volts = [p.voltage_v for r in adaptive for p in r.packets]
    if qos and not (min(qos) >= 1 and max(qos) <= 7):
        failures.append(f"QoS out of range {min(qos)}..{max(qos)}")
    if volts and min(volts) < 2.1:
        failures.append(f"packet sent at {min(volts):.4f} V")
    verdict(10, not failures,
            f"{len(REPORTS)} runs: ledgers closed, reports byte-identical, QoS in "
            f"{min(qos)}..{max(qos)}, min packet voltage {min(volts):.3f} V, "
            f"packets vs light scale {counts}" + (f"; {failures}" if failures else ""))
