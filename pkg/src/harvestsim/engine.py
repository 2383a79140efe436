"""Per-node simulation of the coupled energy / application / QoS state.

Time advances in whole seconds. Between consecutive events (wake-ups,
light changes, PIR events, day boundaries) the powers are constant, so the
one-second Euler steps are applied in closed form by
:func:`harvestsim.energy.advance_energy`.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .applications import (
    STATUS_EPOCH_S, App, AppKind, PacketBudget, PirOutcome, PirPhase, PowerTable,
    baseline_power, load_power, pir_capture, transaction_energy_uj, wake_schedule,
)
from .energy import (
    DEFAULT_LEAKAGE_UW, UW, ConverterConfig, SolarPanel, advance_energy, harvest_power,
)
from .environment import DAY_S, EventTrace, LightTrace
from .power_manager import (
    LIGHT_TREND, VOLTAGE_TREND, PmState, QosTable, TrendConfig, next_qos, qos_from_voltage,
)

LEDGER_RTOL = 1e-6


@dataclass
class NodeConfig:
    id: str
    app: App
    light: LightTrace
    events: EventTrace | None = None
    capacitance_f: float = 1.0
    initial_voltage_v: float = 3.6
    panel: SolarPanel = field(default_factory=SolarPanel)
    converter: ConverterConfig = field(default_factory=ConverterConfig)
    leakage_uw: float = DEFAULT_LEAKAGE_UW
    table: QosTable = field(default_factory=QosTable)
    power: PowerTable = field(default_factory=PowerTable)
    budget: PacketBudget = field(default_factory=PacketBudget)
    pinned_qos: int | None = None
    light_trend: TrendConfig = LIGHT_TREND
    volt_trend: TrendConfig = VOLTAGE_TREND
    vmax_margin_v: float = 0.02
    environment: str = ""


@dataclass(frozen=True)
class PacketRecord:
    t: int
    node_id: str
    qos_state: int
    voltage_v: float
    delivered: bool = True


@dataclass
class DayMetrics:
    day: int
    seconds: int
    packets: int = 0  # delivered
    emitted: int = 0
    detected: int = 0
    missed_blanked: int = 0
    missed_dead: int = 0
    downtime_s: int = 0
    powered_s: int = 0
    qos_s: float = 0.0  # integral of QoS state over powered time
    adv_interval_s: float = 0.0  # integral of advertising interval over powered time
    advertisements: float = 0.0  # beacons broadcast while powered
    advertises: bool = False

    @property
    def events(self) -> int:
        return self.detected + self.missed_blanked + self.missed_dead

    @property
    def mean_period_s(self) -> float | None:
        return self.seconds / self.packets if self.packets else None

    @property
    def mean_qos(self) -> float | None:
        return self.qos_s / self.powered_s if self.powered_s else None

    @property
    def mean_adv_interval(self) -> float | None:
        if not self.advertises or not self.powered_s:
            return None
        return self.adv_interval_s / self.powered_s


@dataclass
class EnergyLedger:
    initial: float
    final: float = 0.0
    harvested: float = 0.0
    consumed: float = 0.0
    leaked: float = 0.0
    clamped: float = 0.0

    @property
    def residual(self) -> float:
        return (self.final - self.initial) - (
            self.harvested - self.consumed - self.leaked - self.clamped)

    @property
    def scale(self) -> float:
        return max(abs(self.initial), abs(self.final), self.harvested, self.consumed,
                   self.leaked, abs(self.clamped), 1e-12)

    def closes(self, rtol: float = LEDGER_RTOL) -> bool:
        return abs(self.residual) <= rtol * self.scale


@dataclass
class NodeReport:
    node_id: str
    system: str
    app: str
    environment: str
    duration_s: int
    days: list[DayMetrics]
    packets: list[PacketRecord]
    ledger: EnergyLedger
    brownouts: list[int] = field(default_factory=list)
    recoveries: list[int] = field(default_factory=list)
    final_voltage_v: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def delivered(self) -> int:
        return sum(d.packets for d in self.days)

    @property
    def downtime_s(self) -> int:
        return sum(d.downtime_s for d in self.days)

    @property
    def first_brownout_s(self) -> int | None:
        return self.brownouts[0] if self.brownouts else None

    @property
    def mean_period_s(self) -> float | None:
        n = self.delivered
        return self.duration_s / n if n else None

    @property
    def pir_counts(self) -> dict[str, int]:
        return {k: sum(getattr(d, k) for d in self.days)
                for k in ("detected", "missed_blanked", "missed_dead")}

    @property
    def detection_pct(self) -> float | None:
        c = self.pir_counts
        total = sum(c.values())
        return 100.0 * c["detected"] / total if total else None

    @property
    def mean_adv_interval(self) -> float | None:
        powered = sum(d.powered_s for d in self.days if d.advertises)
        return sum(d.adv_interval_s for d in self.days) / powered if powered else None

    @property
    def advertisements(self) -> int:
        return int(sum(d.advertisements for d in self.days))

    @property
    def service_packets(self) -> int:
        """Packets carrying the application's output: beacons for advertising,
        packets received by the base station otherwise."""
        return self.advertisements if self.app == AppKind.ADVERTISE.value else self.delivered

    @property
    def mean_qos(self) -> float | None:
        powered = sum(d.powered_s for d in self.days)
        return sum(d.qos_s for d in self.days) / powered if powered else None


def deliver(packet: PacketRecord | None, channel_loss_p: float,
            rng: np.random.Generator) -> bool:
    """Bernoulli(1 - p) delivery of one packet to the base station."""
    if not 0 <= channel_loss_p < 1:
        raise ValueError("channel loss probability must be in [0, 1)")
    if channel_loss_p == 0:
        return True
    return bool(rng.random() >= channel_loss_p)


def channel_rng(seed: int, node_id: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(node_id.encode())])


def new_days(duration_s: int, advertises: bool = False) -> list[DayMetrics]:
    n = max(1, math.ceil(duration_s / DAY_S))
    return [DayMetrics(d, min(DAY_S, duration_s - d * DAY_S), advertises=advertises)
            for d in range(n)]


class _Node:
    """Mutable run state of one adaptive node."""

    def __init__(self, cfg: NodeConfig, duration_s: int, seed: int, loss_p: float):
        self.cfg = cfg
        self.T = int(duration_s)
        self.loss_p = loss_p
        self.rng = channel_rng(seed, cfg.id)
        conv = cfg.converter
        self.C = cfg.capacitance_f
        self.e_pg = 0.5 * self.C * conv.v_power_good**2
        self.v_full = conv.v_max - cfg.vmax_margin_v
        self.E = 0.5 * self.C * cfg.initial_voltage_v**2
        self.powered = self.E >= self.e_pg
        self.ledger = EnergyLedger(self.E)
        self.days = new_days(self.T, cfg.app.kind is AppKind.ADVERTISE)
        self.packets: list[PacketRecord] = []
        self.brownouts: list[int] = []
        self.recoveries: list[int] = []
        self.pm = PmState()
        self.qos = 1
        self.next_wake: int | None = None
        self.blank_until: int | None = None
        self.tx_uj = transaction_energy_uj(cfg.app, cfg.budget, cfg.power)
        self.kind = cfg.app.kind
        self.light_t = cfg.light.t
        self.light_lux = cfg.light.lux
        self.li = 0
        ev = cfg.events.t if (cfg.events is not None and self.kind is AppKind.PIR) else ()
        self.events = [int(math.floor(x)) for x in ev if x < self.T]
        self.ei = 0

    # -- helpers -----------------------------------------------------------
    @property
    def voltage(self) -> float:
        return math.sqrt(2.0 * self.E / self.C)

    def reading(self) -> float:
        # sqrt rounding can land a hair under the power-good level
        return max(self.voltage, self.cfg.table.v_min)

    def lux_at(self, t: int) -> float:
        lt = self.light_t
        while self.li + 1 < len(lt) and lt[self.li + 1] <= t:
            self.li += 1
        return float(self.light_lux[self.li])

    def day(self, t: int) -> DayMetrics:
        return self.days[min(t // DAY_S, len(self.days) - 1)]

    def emit(self, t: int) -> None:
        pkt = PacketRecord(t, self.cfg.id, self.qos, self.voltage)
        ok = deliver(pkt, self.loss_p, self.rng)
        self.packets.append(pkt if ok else replace(pkt, delivered=False))
        d = self.day(t)
        d.emitted += 1
        d.packets += ok

    def debit(self, t: int, uj: float) -> None:
        j = uj * UW
        self.E -= j
        self.ledger.consumed += j
        if self.E < 0:
            self.ledger.clamped += self.E
            self.E = 0.0
        if self.E < self.e_pg:
            self.brownout(t)

    def update_qos(self, t: int, lux: float) -> None:
        cfg = self.cfg
        if cfg.pinned_qos is not None:
            self.qos = cfg.pinned_qos
            return
        v = self.reading()
        self.qos = next_qos(self.pm, cfg.table, v, lux, v >= self.v_full,
                            cfg.light_trend, cfg.volt_trend)

    def boot(self, t: int) -> None:
        cfg = self.cfg
        self.powered = True
        self.qos = cfg.pinned_qos or qos_from_voltage(cfg.table, self.reading())
        self.pm.reset(self.qos)
        if self.kind is AppKind.PIR:
            self.blank_until = None
            self.next_wake = t + int(STATUS_EPOCH_S)
        else:
            self.next_wake = int(wake_schedule(cfg.app, self.qos, cfg.table, t))

    def brownout(self, t: int) -> None:
        if not self.powered:
            return
        self.powered = False
        self.next_wake = None
        self.blank_until = None
        self.brownouts.append(t)

    def load(self) -> float:
        if not self.powered:
            return 0.0
        if self.cfg.app.periodic:
            # transactions are charged as impulses at each wake-up
            return baseline_power(self.cfg.app, self.cfg.power)
        phase = PirPhase.BLANKED if self.blank_until is not None else PirPhase.ARMED
        return load_power(self.cfg.app, self.qos, self.cfg.table, self.cfg.power,
                          self.cfg.budget, pir_phase=phase)

    # -- event handlers ----------------------------------------------------
    def epoch(self, t: int, lux: float) -> None:
        cfg = self.cfg
        self.update_qos(t, lux)
        if self.kind is AppKind.PIR:
            self.next_wake = t + int(STATUS_EPOCH_S)
            return
        self.emit(t)
        self.next_wake = int(wake_schedule(cfg.app, self.qos, cfg.table, t))
        if self.tx_uj:
            self.debit(t, self.tx_uj)

    def pir_event(self, t: int) -> None:
        d = self.day(t)
        outcome = pir_capture(t, self.blank_until is None, self.powered)
        if outcome is PirOutcome.MISSED_DEAD:
            d.missed_dead += 1
        elif outcome is PirOutcome.MISSED_BLANKED:
            d.missed_blanked += 1
        else:
            d.detected += 1
            self.emit(t)
            self.blank_until = int(wake_schedule(self.cfg.app, self.qos, self.cfg.table, t))
            self.debit(t, self.tx_uj)

    # -- main loop ---------------------------------------------------------
    def run(self, stop_at_brownout: bool = False) -> None:
        cfg = self.cfg
        if self.powered:
            self.boot(0)
        t = 0
        T = self.T
        while t < T:
            lux = self.lux_at(t)
            if self.powered and self.next_wake == t:
                self.epoch(t, lux)
            if self.powered and self.blank_until is not None and self.blank_until <= t:
                self.blank_until = None
                self.update_qos(t, lux)
            while self.ei < len(self.events) and self.events[self.ei] <= t:
                self.pir_event(t)
                self.ei += 1
            if stop_at_brownout and self.brownouts:
                break

            nxt = min(T, (t // DAY_S + 1) * DAY_S)
            if self.li + 1 < len(self.light_t):
                nxt = min(nxt, int(math.ceil(self.light_t[self.li + 1])))
            if self.powered:
                if self.next_wake is not None:
                    nxt = min(nxt, self.next_wake)
                if self.blank_until is not None:
                    nxt = min(nxt, self.blank_until)
            if self.ei < len(self.events):
                nxt = min(nxt, self.events[self.ei])
            nxt = max(nxt, t + 1)

            was_powered = self.powered
            p_h = harvest_power(cfg.panel, lux)
            adv = advance_energy(self.E, self.powered, nxt - t, p_h, self.load(), self.C,
                                 cfg.converter, cfg.leakage_uw)
            led = self.ledger
            led.harvested += adv.harvested
            led.consumed += adv.consumed
            led.leaked += adv.leaked
            led.clamped += adv.clamped
            self.E = adv.energy
            d = self.day(t)
            if was_powered:
                d.powered_s += adv.steps
                d.qos_s += self.qos * adv.steps
                if self.kind is AppKind.ADVERTISE:
                    row = cfg.table.row(self.qos)
                    d.adv_interval_s += row.advertising_interval_s * adv.steps
                    d.advertisements += adv.steps / row.advertising_interval_s
            else:
                d.downtime_s += adv.steps
            t += adv.steps
            if adv.toggled:
                if adv.powered:
                    self.recoveries.append(t)
                    self.boot(t)
                else:
                    self.brownout(t)
                    if stop_at_brownout:
                        break
        self.ledger.final = self.E
        self.end_t = t

    def report(self) -> NodeReport:
        return NodeReport(
            node_id=self.cfg.id, system="adaptive", app=self.kind.value,
            environment=self.cfg.environment, duration_s=self.T, days=self.days,
            packets=self.packets, ledger=self.ledger, brownouts=self.brownouts,
            recoveries=self.recoveries, final_voltage_v=self.voltage,
        )


def run_node(cfg: NodeConfig, duration_s: float, seed: int = 0,
             channel_loss_p: float = 0.0, stop_at_brownout: bool = False) -> NodeReport:
    node = _Node(cfg, int(duration_s), seed, channel_loss_p)
    node.run(stop_at_brownout)
    return node.report()


def dark_lifetime_s(cfg: NodeConfig, max_s: int = 10 * DAY_S) -> float:
    """Seconds from the configured start voltage to the first brown-out."""
    rep = run_node(cfg, max_s, stop_at_brownout=True)
    return float(rep.first_brownout_s) if rep.brownouts else math.inf


@dataclass
class SimReport:
    seed: int
    duration_s: int
    nodes: list[NodeReport]

    def rows(self) -> list[dict]:
        out = []
        for n in self.nodes:
            for d in n.days:
                out.append({
                    "node_id": n.node_id, "system": n.system, "app": n.app, "day": d.day,
                    "packets": d.packets, "mean_period_s": d.mean_period_s,
                    "pir_detected": d.detected, "pir_missed_blanked": d.missed_blanked,
                    "pir_missed_dead": d.missed_dead, "downtime_s": d.downtime_s,
                    "advertisements": int(d.advertisements),
                    "mean_qos": d.mean_qos, "mean_adv_interval_s": d.mean_adv_interval,
                })
        return out

    def summary(self) -> dict:
        nodes = []
        for n in self.nodes:
            led = n.ledger
            nodes.append({
                "node_id": n.node_id, "system": n.system, "app": n.app,
                "environment": n.environment,
                "packets_delivered": n.delivered,
                "packets_emitted": len(n.packets),
                "advertisements": n.advertisements,
                "mean_period_s": n.mean_period_s,
                "pir": n.pir_counts, "pir_detection_pct": n.detection_pct,
                "downtime_s": n.downtime_s, "brownouts": len(n.brownouts),
                "first_brownout_s": n.first_brownout_s,
                "mean_qos": n.mean_qos, "mean_adv_interval_s": n.mean_adv_interval,
                "final_voltage_v": n.final_voltage_v,
                "energy_ledger_j": {
                    "initial": led.initial, "final": led.final, "harvested": led.harvested,
                    "consumed": led.consumed, "leaked": led.leaked, "clamped": led.clamped,
                    "residual": led.residual, "closes": led.closes(),
                },
                **n.notes,
            })
        return {"seed": self.seed, "duration_s": self.duration_s, "nodes": nodes}


def _run_one(args):
    cfg, duration_s, seed, loss = args
    return run_node(cfg, duration_s, seed, loss)


def run(scenario, workers: int = 1) -> SimReport:
    """Run every node of ``scenario``; node order in the report is fixed."""
    jobs = [(cfg, scenario.duration_s, scenario.seed, scenario.channel_loss_p)
            for cfg in scenario.nodes]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            reports = list(ex.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    return SimReport(scenario.seed, int(scenario.duration_s), reports)
