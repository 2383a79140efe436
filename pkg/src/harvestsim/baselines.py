"""Reference systems at the two ends of the design space.

``battery``: a mains-free node on a primary cell that never browns out and
runs at a fixed service level.
``pure_eh``: an intermittent node whose only storage holds one transaction's
worth of energy; it fires whenever that buffer fills and is silent in the dark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .applications import (
    STATUS_EPOCH_S, AppKind, advertising_power, baseline_power, transaction_energy_uj,
)
from .energy import UW, harvest_power
from .engine import (
    DayMetrics, EnergyLedger, NodeConfig, NodeReport, PacketRecord, channel_rng, deliver,
    new_days,
)
from .environment import DAY_S

SLOWEST_PERIOD_S = 600  # gaps beyond this count as silent time


@dataclass(frozen=True)
class Battery:
    period_s: int = 60
    advertising_interval_s: float = 0.1
    capacity_j: float = 2430.0  # CR2032-class coin cell, 225 mAh at 3 V


@dataclass(frozen=True)
class PureEH:
    efficiency: float = 0.8
    buffer_mj: float | None = None  # None: from the application's packet budget


def peh_threshold_mj(cfg: NodeConfig) -> float | None:
    b = cfg.budget
    return {
        AppKind.SENSE1: b.two_sensor_mj,
        AppKind.SENSE5: b.five_sensor_mj,
        AppKind.PIR: b.pir_report_mj,
    }.get(cfg.app.kind)


class _Emitter:
    def __init__(self, cfg: NodeConfig, duration_s: int, seed: int, loss_p: float):
        self.cfg = cfg
        self.loss_p = loss_p
        self.rng = channel_rng(seed, cfg.id)
        self.days = new_days(duration_s, cfg.app.kind is AppKind.ADVERTISE)
        self.packets: list[PacketRecord] = []

    def day(self, t: int) -> DayMetrics:
        return self.days[min(t // DAY_S, len(self.days) - 1)]

    def emit(self, t: int, voltage: float = 0.0) -> None:
        pkt = PacketRecord(t, self.cfg.id, 0, voltage)
        ok = deliver(pkt, self.loss_p, self.rng)
        if not ok:
            pkt = PacketRecord(t, self.cfg.id, 0, voltage, False)
        self.packets.append(pkt)
        d = self.day(t)
        d.emitted += 1
        d.packets += ok


def run_battery(cfg: NodeConfig, duration_s: float, seed: int = 0,
                channel_loss_p: float = 0.0, kind: Battery | None = None) -> NodeReport:
    kind = kind or Battery()
    T = int(duration_s)
    em = _Emitter(cfg, T, seed, channel_loss_p)
    app = cfg.app
    consumed_uj = 0.0
    if app.periodic:
        tx = transaction_energy_uj(app, cfg.budget, cfg.power)
        for t in range(0, T, kind.period_s):
            em.emit(t)
            consumed_uj += tx
        consumed_uj += baseline_power(app, cfg.power) * T
    elif app.kind is AppKind.PIR:
        tx = transaction_energy_uj(app, cfg.budget, cfg.power)
        events = cfg.events.t if cfg.events is not None else ()
        for x in events:
            if x >= T:
                break
            t = int(math.floor(x))
            em.day(t).detected += 1
            em.emit(t)
            consumed_uj += tx
        consumed_uj += baseline_power(app, cfg.power) * T
    else:
        for t in range(0, T, int(STATUS_EPOCH_S)):
            em.emit(t)
        consumed_uj += advertising_power(kind.advertising_interval_s, cfg.power) * T
    for d in em.days:
        d.powered_s = d.seconds
        if app.kind is AppKind.ADVERTISE:
            d.adv_interval_s = kind.advertising_interval_s * d.seconds
            d.advertisements = d.seconds / kind.advertising_interval_s
    consumed = consumed_uj * UW
    ledger = EnergyLedger(kind.capacity_j, kind.capacity_j - consumed, consumed=consumed)
    avg_w = consumed / T if T else 0.0
    return NodeReport(
        node_id=cfg.id, system="battery", app=app.kind.value, environment=cfg.environment,
        duration_s=T, days=em.days, packets=em.packets, ledger=ledger,
        notes={"battery_lifetime_days": kind.capacity_j / avg_w / DAY_S if avg_w else None},
    )


def _add_silent(days: list[DayMetrics], lo: int, hi: int) -> None:
    while lo < hi:
        d = days[min(lo // DAY_S, len(days) - 1)]
        end = min(hi, (lo // DAY_S + 1) * DAY_S)
        d.downtime_s += end - lo
        lo = end


def run_pure_eh(cfg: NodeConfig, duration_s: float, seed: int = 0,
                channel_loss_p: float = 0.0, kind: PureEH | None = None) -> NodeReport:
    kind = kind or PureEH()
    T = int(duration_s)
    em = _Emitter(cfg, T, seed, channel_loss_p)
    thr_mj = kind.buffer_mj if kind.buffer_mj is not None else peh_threshold_mj(cfg)
    ledger = EnergyLedger(0.0)
    report = NodeReport(
        node_id=cfg.id, system="pure_eh", app=cfg.app.kind.value,
        environment=cfg.environment, duration_s=T, days=em.days, packets=em.packets,
        ledger=ledger,
    )
    if thr_mj is None:
        report.notes["unsupported"] = True
        for d in em.days:
            d.downtime_s = d.seconds
        return report

    thr = thr_mj * 1e-3
    is_pir = cfg.app.kind is AppKind.PIR
    events = [int(math.floor(x)) for x in (cfg.events.t if cfg.events is not None else ())
              if x < T] if is_pir else []
    light_t, light_lux = cfg.light.t, cfg.light.lux
    li, ei, t, b = 0, 0, 0, 0.0
    not_ready_from = 0 if is_pir else None
    while t < T:
        while li + 1 < len(light_t) and light_t[li + 1] <= t:
            li += 1
        while ei < len(events) and events[ei] <= t:
            d = em.day(t)
            if b >= thr * (1 - 1e-12):
                d.detected += 1
                em.emit(t)
                ledger.consumed += b
                b = 0.0
                not_ready_from = t
            else:
                d.missed_dead += 1
            ei += 1
        nxt = min(T, (t // DAY_S + 1) * DAY_S)
        if li + 1 < len(light_t):
            nxt = min(nxt, int(math.ceil(light_t[li + 1])))
        if ei < len(events):
            nxt = min(nxt, events[ei])
        nxt = max(nxt, t + 1)
        n = nxt - t
        r = harvest_power(cfg.panel, float(light_lux[li])) * kind.efficiency * UW
        ledger.harvested += n * r
        if is_pir:
            if r > 0 and not_ready_from is not None and b + n * r >= thr:
                k = max(1, math.ceil((thr - b) / r))
                _add_silent(em.days, not_ready_from, t + k)
                not_ready_from = None
            raw = b + n * r
            b = min(raw, thr)
            ledger.clamped += raw - b
        elif r > 0:
            pos = 0
            while True:
                k = max(1, math.ceil((thr - b) / r))
                if pos + k > n:
                    break
                pos += k
                b += k * r - thr
                ledger.consumed += thr
                em.emit(t + pos)
            b += (n - pos) * r
        t = nxt
    if is_pir and not_ready_from is not None:
        _add_silent(em.days, not_ready_from, T)
    ledger.final = b
    if not is_pir:
        prev = 0
        for p in em.packets + [PacketRecord(T, cfg.id, 0, 0.0)]:
            if p.t - prev > SLOWEST_PERIOD_S:
                _add_silent(em.days, prev + SLOWEST_PERIOD_S, p.t)
            prev = p.t
    for d in em.days:
        d.powered_s = d.seconds - d.downtime_s
    return report
