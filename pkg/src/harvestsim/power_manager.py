"""On-node power management: voltage-band QoS lookup refined by trends.

The QoS state is looked up from the voltage table right after boot and
whenever the capacitor is full. On every other epoch it moves by at most one
level for the light trend and one for the voltage trend, relative to the
previous state.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

HISTORY_LEN = 5


class BrownOut(ValueError):
    """Voltage below the bottom of the QoS table: the MCU cannot be running."""


@dataclass(frozen=True)
class QosRow:
    state: int
    v_low: float
    v_high: float
    sensing_period_s: float
    pir_blanking_s: float
    advertising_interval_s: float


DEFAULT_ROWS = (
    QosRow(7, 3.4, 3.6, 20, 10, 0.1),
    QosRow(6, 3.2, 3.4, 40, 20, 0.2),
    QosRow(5, 3.0, 3.2, 60, 30, 0.4),
    QosRow(4, 2.8, 3.0, 120, 60, 0.64),
    QosRow(3, 2.6, 2.8, 240, 120, 0.9),
    QosRow(2, 2.4, 2.6, 300, 300, 2.0),
    QosRow(1, 2.1, 2.4, 600, 600, 5.0),
)


@dataclass(frozen=True)
class QosTable:
    rows: tuple[QosRow, ...] = DEFAULT_ROWS

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: r.state))
        object.__setattr__(self, "rows", rows)
        errors = validate_table(rows)
        if errors:
            raise ValueError("; ".join(errors))

    @classmethod
    def from_dicts(cls, rows: list[dict]) -> QosTable:
        return cls(tuple(QosRow(**r) for r in rows))

    @property
    def v_min(self) -> float:
        return self.rows[0].v_low

    @property
    def v_top(self) -> float:
        return self.rows[-1].v_high

    def row(self, state: int) -> QosRow:
        if not 1 <= state <= len(self.rows):
            raise ValueError(f"QoS state {state} outside 1..{len(self.rows)}")
        return self.rows[state - 1]


def validate_table(rows) -> list[str]:
    rows = sorted(rows, key=lambda r: r.state)
    errors = []
    if len(rows) != 7:
        errors.append(f"expected 7 rows, got {len(rows)}")
    if [r.state for r in rows] != list(range(1, len(rows) + 1)):
        errors.append("states must be 1..7, each exactly once")
    for lo, hi in zip(rows, rows[1:]):
        if abs(lo.v_high - hi.v_low) > 1e-12:
            errors.append(f"voltage gap/overlap between states {lo.state} and {hi.state}")
        if not hi.sensing_period_s < lo.sensing_period_s:
            errors.append(f"sensing period must shrink from state {lo.state} to {hi.state}")
        if not hi.pir_blanking_s < lo.pir_blanking_s:
            errors.append(f"PIR blanking must shrink from state {lo.state} to {hi.state}")
        if not hi.advertising_interval_s < lo.advertising_interval_s:
            errors.append(f"advertising interval must shrink from state {lo.state} to {hi.state}")
    for r in rows:
        if not r.v_low < r.v_high:
            errors.append(f"state {r.state}: empty voltage band")
    return errors


def qos_from_voltage(table: QosTable, v: float) -> int:
    """State whose band [v_low, v_high) holds ``v``; the top band is closed."""
    if v < table.v_min:
        raise BrownOut(f"{v:.4f} V is below {table.v_min} V")
    for row in table.rows:
        if v < row.v_high:
            return row.state
    return table.rows[-1].state


class Trend(str, enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    FLAT = "flat"
    OFF = "off"
    INSUFFICIENT = "insufficient"


@dataclass(frozen=True)
class TrendConfig:
    zero_floor: float | None = None
    rel_tol: float = 0.0
    abs_tol: float = 0.0


LIGHT_TREND = TrendConfig(zero_floor=10.0, rel_tol=0.01, abs_tol=1.0)
VOLTAGE_TREND = TrendConfig(zero_floor=None, rel_tol=0.0, abs_tol=0.005)


class History5:
    """Ring buffer of the last five readings, oldest first."""

    def __init__(self, samples=()):
        self._buf = deque(samples, maxlen=HISTORY_LEN)

    def push(self, value: float) -> None:
        self._buf.append(float(value))

    def clear(self) -> None:
        self._buf.clear()

    @property
    def samples(self) -> tuple[float, ...]:
        return tuple(self._buf)

    @property
    def count(self) -> int:
        return len(self._buf)

    def __repr__(self):
        return f"History5({list(self._buf)})"


def _slope(ys) -> float:
    n = len(ys)
    x_mean = (n - 1) / 2.0
    y_mean = sum(ys) / n
    num = sum((i - x_mean) * (y - y_mean) for i, y in enumerate(ys))
    den = sum((i - x_mean) ** 2 for i in range(n))
    return num / den


def trend_of(hist: History5, zero_floor: float | None = None,
             rel_tol: float = 0.01, abs_tol: float = 0.0) -> Trend:
    """Classify the stored samples by the sign of their least-squares slope."""
    ys = hist.samples
    if ys and zero_floor is not None and ys[-1] < zero_floor:
        return Trend.OFF
    if len(ys) < 2:
        return Trend.INSUFFICIENT
    slope = _slope(ys)
    tol = max(rel_tol * abs(sum(ys) / len(ys)), abs_tol)
    if abs(slope) <= tol:
        return Trend.FLAT
    return Trend.RISING if slope > 0 else Trend.FALLING


def _trend(hist: History5, cfg: TrendConfig) -> Trend:
    return trend_of(hist, cfg.zero_floor, cfg.rel_tol, cfg.abs_tol)


@dataclass
class PmState:
    light_hist: History5 = field(default_factory=History5)
    volt_hist: History5 = field(default_factory=History5)
    current_qos: int = 1
    fresh: bool = True  # no epoch has run since boot

    def reset(self, qos: int) -> None:
        self.light_hist.clear()
        self.volt_hist.clear()
        self.current_qos = qos
        self.fresh = True


def next_qos(pm: PmState, table: QosTable, v_now: float, lux_now: float,
             at_vmax: bool, light_cfg: TrendConfig = LIGHT_TREND,
             volt_cfg: TrendConfig = VOLTAGE_TREND) -> int:
    """Run one power-management epoch, updating ``pm`` in place."""
    pm.light_hist.push(lux_now)
    pm.volt_hist.push(v_now)
    if pm.fresh or at_vmax:
        qos = qos_from_voltage(table, v_now)
    else:
        qos = pm.current_qos
    pm.fresh = False

    light = _trend(pm.light_hist, light_cfg)
    if light in (Trend.OFF, Trend.FALLING):
        qos -= 1
    elif light is Trend.RISING:
        qos += 1

    if at_vmax:
        qos += 1
    else:
        volt = _trend(pm.volt_hist, volt_cfg)
        if volt in (Trend.FALLING, Trend.FLAT):
            qos -= 1
        elif volt is Trend.RISING:
            qos += 1

    pm.current_qos = min(max(qos, 1), len(table.rows))
    return pm.current_qos
