"""Workload models: average power draw and wake-up schedule per application."""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields

import numpy as np

from .power_manager import QosTable

STATUS_EPOCH_S = 600.0  # base-station status query period
MEASUREMENT_WINDOW_S = 60.0  # averaging window of the power table

SENSORS = ("hum", "temp", "bar", "light")
# light, ambient temperature, object temperature, pressure, humidity
FIVE_SENSOR_SET = ("light", "temp", "temp", "bar", "hum")


@dataclass(frozen=True)
class PowerTable:
    """Average power in uW of each platform operation, measured at 3 V."""

    mcu_sleep: float = 19.0
    read_hum: float = 51.0
    read_temp: float = 54.0
    read_bar: float = 54.0
    read_light: float = 47.0
    mcu_pir_sleep: float = 22.0
    pir_detection: float = 32.0
    adv_5s: float = 69.0
    adv_2s: float = 86.0
    adv_1s: float = 106.0
    adv_500ms: float = 171.0
    adv_100ms: float = 648.0

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"power entry {f.name} must be positive")
        if not self.adv_5s > self.mcu_sleep:
            raise ValueError("adv_5s must exceed mcu_sleep")
        if not (self.pir_detection >= self.mcu_pir_sleep):
            raise ValueError("pir_detection must be >= mcu_pir_sleep")
        powers = [p for _, p in self.advertising_anchors()]
        if any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValueError("advertising power must increase as the interval shrinks")

    def advertising_anchors(self) -> list[tuple[float, float]]:
        """(interval_s, power_uw) pairs, longest interval first."""
        return [(5.0, self.adv_5s), (2.0, self.adv_2s), (1.0, self.adv_1s),
                (0.5, self.adv_500ms), (0.1, self.adv_100ms)]

    def read_power(self, sensor: str) -> float:
        if sensor not in SENSORS:
            raise ValueError(f"unknown sensor {sensor!r}; expected one of {SENSORS}")
        return getattr(self, f"read_{sensor}")


@dataclass(frozen=True)
class PacketBudget:
    """Energy per sense-and-send transaction, in millijoules."""

    one_sensor_mj: float = 3.20
    two_sensor_mj: float = 6.40
    five_sensor_mj: float = 8.0
    pir_report_mj: float = 5.12
    peh_single_mj: float = 1.56

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"budget entry {f.name} must be positive")


class AppKind(str, enum.Enum):
    SENSE1 = "sense1"
    SENSE5 = "sense5"
    PIR = "pir"
    ADVERTISE = "advertise"


@dataclass(frozen=True)
class App:
    kind: AppKind
    sensor: str = "bar"

    def __post_init__(self):
        object.__setattr__(self, "kind", AppKind(self.kind))
        if self.sensor not in SENSORS:
            raise ValueError(f"unknown sensor {self.sensor!r}")

    @property
    def periodic(self) -> bool:
        return self.kind in (AppKind.SENSE1, AppKind.SENSE5)


class PirPhase(str, enum.Enum):
    ARMED = "armed"
    BLANKED = "blanked"
    DETECTING = "detecting"


class PirOutcome(str, enum.Enum):
    DETECTED = "detected"
    MISSED_BLANKED = "missed_blanked"
    MISSED_DEAD = "missed_dead"


def advertising_power(interval_s: float, power: PowerTable | None = None) -> float:
    """Interpolate advertising power linearly in rate (1/interval) space.

    Exact at the five table anchors; outside them the end segments are
    extended, never dropping below MCU sleep power.
    """
    if not interval_s > 0:
        raise ValueError("advertising interval must be positive")
    power = power or PowerTable()
    anchors = power.advertising_anchors()
    rates = np.array([1.0 / i for i, _ in anchors])
    watts = np.array([p for _, p in anchors])
    rate = 1.0 / interval_s
    if rate < rates[0]:
        slope = (watts[1] - watts[0]) / (rates[1] - rates[0])
        value = watts[0] + slope * (rate - rates[0])
    elif rate > rates[-1]:
        slope = (watts[-1] - watts[-2]) / (rates[-1] - rates[-2])
        value = watts[-1] + slope * (rate - rates[-1])
    else:
        value = float(np.interp(rate, rates, watts))
    return max(float(value), power.mcu_sleep)


def transaction_energy_uj(app: App, budget: PacketBudget | None = None,
                          power: PowerTable | None = None,
                          source: str = "budget") -> float:
    """Energy of one sense-and-send (or PIR report) transaction in uJ.

    ``source="budget"`` uses the per-packet budgets; ``source="measured"``
    derives it from the one-minute power averages of the power table.
    """
    budget = budget or PacketBudget()
    power = power or PowerTable()
    if source == "budget":
        return {
            AppKind.SENSE1: budget.one_sensor_mj,
            AppKind.SENSE5: budget.five_sensor_mj,
            AppKind.PIR: budget.pir_report_mj,
            AppKind.ADVERTISE: 0.0,
        }[app.kind] * 1000.0
    if source != "measured":
        raise ValueError(f"unknown transaction energy source {source!r}")
    sensors = {AppKind.SENSE1: (app.sensor,), AppKind.SENSE5: FIVE_SENSOR_SET}.get(app.kind)
    if sensors is None:
        return transaction_energy_uj(app, budget, power, "budget")
    return sum((power.read_power(s) - power.mcu_sleep) * MEASUREMENT_WINDOW_S
               for s in sensors)


def baseline_power(app: App, power: PowerTable | None = None,
                   pir_phase: PirPhase | str = PirPhase.ARMED) -> float:
    power = power or PowerTable()
    if app.kind is AppKind.PIR:
        return {
            PirPhase.ARMED: power.mcu_pir_sleep,
            PirPhase.BLANKED: power.mcu_sleep,
            PirPhase.DETECTING: power.pir_detection,
        }[PirPhase(pir_phase)]
    if app.kind is AppKind.ADVERTISE:
        return 0.0  # advertising power already includes the sleeping MCU
    return power.mcu_sleep


def load_power(app: App, qos: int, table: QosTable, power: PowerTable | None = None,
               budget: PacketBudget | None = None, *,
               pir_phase: PirPhase | str = PirPhase.ARMED,
               transaction: str = "budget") -> float:
    """Average draw in uW of ``app`` at QoS state ``qos``.

    PIR report energy is an impulse charged per detection by the engine and
    is not part of this average.
    """
    power = power or PowerTable()
    row = table.row(qos)
    if app.kind is AppKind.ADVERTISE:
        return advertising_power(row.advertising_interval_s, power)
    base = baseline_power(app, power, pir_phase)
    if app.kind is AppKind.PIR:
        return base
    return base + transaction_energy_uj(app, budget, power, transaction) / row.sensing_period_s


def wake_schedule(app: App, qos: int, table: QosTable, now: float) -> float:
    """Next wake-up after ``now``.

    For PIR this is the re-arm time following an event detected at ``now``.
    """
    row = table.row(qos)
    if app.periodic:
        return now + row.sensing_period_s
    if app.kind is AppKind.PIR:
        return now + row.pir_blanking_s
    return now + STATUS_EPOCH_S


def pir_capture(event_t: float, armed: bool, powered: bool) -> PirOutcome:
    if not powered:
        return PirOutcome.MISSED_DEAD
    if not armed:
        return PirOutcome.MISSED_BLANKED
    return PirOutcome.DETECTED
