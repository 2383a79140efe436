"""Energy flow: solar panel -> converter -> super-capacitor -> load / leakage.

Units used throughout: volts, farads, joules, seconds, and microwatts for
power (the magnitudes of this platform make uW the natural unit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

UW = 1e-6  # microwatt -> watt

# Frozen outputs of ``harvestsim.calibration.calibrate()`` on default tables.
DEFAULT_LEAKAGE_UW = 13.399643
DEFAULT_ETA_BUCK = 1.643993


@dataclass(frozen=True)
class SuperCapacitor:
    capacitance: float = 1.0
    voltage: float = 0.0
    v_max: float = 3.6
    leakage_power: float = DEFAULT_LEAKAGE_UW

    def __post_init__(self):
        if not self.capacitance > 0:
            raise ValueError(f"capacitance must be > 0, got {self.capacitance}")
        if self.leakage_power < 0:
            raise ValueError(f"leakage_power must be >= 0, got {self.leakage_power}")
        if not 0 <= self.voltage <= self.v_max:
            raise ValueError(f"voltage {self.voltage} outside [0, {self.v_max}]")

    @property
    def stored_energy(self) -> float:
        return voltage_to_energy(self)

    @property
    def max_energy(self) -> float:
        return 0.5 * self.capacitance * self.v_max**2

    def energy_at(self, voltage: float) -> float:
        return 0.5 * self.capacitance * voltage**2


@dataclass(frozen=True)
class SolarPanel:
    power_at_300lux: float = 71.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.power_at_300lux > 0 or not self.scale > 0:
            raise ValueError("panel power and scale must be positive")


@dataclass(frozen=True)
class ConverterConfig:
    """Behavioral model of the dual-path charger.

    Below ``v_cold_start_exit`` the buck path charges the capacitor with
    ``eta_buck``; at and above it the boost path uses ``eta_bat``. The MCU is
    powered while the storage voltage is at or above ``v_power_good``.

    ``eta_buck`` exceeds 1 by default. It is a calibration constant that makes
    the linear panel model reproduce the measured buck charging time, not a
    physical efficiency.
    """

    v_power_good: float = 2.1
    v_cold_start_exit: float = 2.1
    eta_buck: float = DEFAULT_ETA_BUCK
    eta_bat: float = 1.0
    v_max: float = 3.6

    def __post_init__(self):
        if not 0 < self.eta_bat <= 1:
            raise ValueError(f"eta_bat must be in (0, 1], got {self.eta_bat}")
        if not self.eta_buck > 0:
            raise ValueError(f"eta_buck must be > 0, got {self.eta_buck}")
        if not self.v_power_good <= self.v_cold_start_exit <= self.v_max:
            raise ValueError("require v_power_good <= v_cold_start_exit <= v_max")

    def efficiency(self, voltage: float) -> float:
        return self.eta_buck if voltage < self.v_cold_start_exit else self.eta_bat


@dataclass(frozen=True)
class EnergyState:
    cap: SuperCapacitor
    converter: ConverterConfig = field(default_factory=ConverterConfig)
    mcu_powered: bool = False

    @classmethod
    def initial(cls, cap: SuperCapacitor, converter: ConverterConfig | None = None):
        converter = converter or ConverterConfig()
        return cls(cap, converter, cap.voltage >= converter.v_power_good)


def voltage_to_energy(cap: SuperCapacitor) -> float:
    return 0.5 * cap.capacitance * cap.voltage**2


def energy_to_voltage(energy: float, capacitance: float) -> float:
    if energy < 0:
        raise ValueError(f"energy must be >= 0, got {energy}")
    if not capacitance > 0:
        raise ValueError(f"capacitance must be > 0, got {capacitance}")
    return math.sqrt(2.0 * energy / capacitance)


def harvest_power(panel: SolarPanel, lux: float) -> float:
    """Panel output in uW, linear in illuminance through the origin."""
    if lux < 0:
        raise ValueError(f"lux must be >= 0, got {lux}")
    return panel.power_at_300lux * (lux / 300.0) * panel.scale


def step_energy(state: EnergyState, p_harvest: float, p_load: float,
                dt: float = 1.0) -> EnergyState:
    """One forward-Euler update of the storage element.

    The efficiency and the load gate are taken from the state at the start of
    the step; the MCU power flag is re-evaluated from the end-of-step voltage.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if p_load < 0:
        raise ValueError("p_load must be >= 0")
    if p_load > 0 and not state.mcu_powered:
        raise ValueError("load drawn while MCU is unpowered")
    cap, conv = state.cap, state.converter
    eta = conv.efficiency(cap.voltage)
    energy = voltage_to_energy(cap)
    energy += (p_harvest * eta - p_load - cap.leakage_power) * UW * dt
    energy = min(max(energy, 0.0), cap.max_energy)
    voltage = min(energy_to_voltage(energy, cap.capacitance), cap.v_max)
    return replace(state, cap=replace(cap, voltage=voltage),
                   mcu_powered=voltage >= conv.v_power_good)


def charge_time(cap_farads: float, v_from: float, v_to: float, lux: float,
                panel: SolarPanel | None = None,
                converter: ConverterConfig | None = None,
                leakage_power: float = DEFAULT_LEAKAGE_UW) -> float:
    """Seconds to charge from ``v_from`` to ``v_to`` with zero load.

    Returns ``math.inf`` when the net charging power is not positive on some
    part of the window.
    """
    panel = panel or SolarPanel()
    converter = converter or ConverterConfig()
    if v_from > v_to:
        raise ValueError("v_from must not exceed v_to")
    if v_to > converter.v_max:
        raise ValueError(f"v_to above v_max ({converter.v_max})")
    if v_from == v_to:
        return 0.0
    p = harvest_power(panel, lux)
    split = converter.v_cold_start_exit
    total = 0.0
    for lo, hi, eta in ((v_from, min(v_to, split), converter.eta_buck),
                        (max(v_from, split), v_to, converter.eta_bat)):
        if hi <= lo:
            continue
        net = (p * eta - leakage_power) * UW
        if net <= 0:
            return math.inf
        total += 0.5 * cap_farads * (hi**2 - lo**2) / net
    return total


@dataclass
class Advance:
    """Outcome of :func:`advance_energy`; all energies in joules."""

    energy: float
    steps: int
    harvested: float = 0.0
    consumed: float = 0.0
    leaked: float = 0.0
    clamped: float = 0.0
    powered: bool = False
    toggled: bool = False


def advance_energy(energy: float, powered: bool, n_steps: int, p_harvest: float,
                   p_load: float, capacitance: float, converter: ConverterConfig,
                   leakage_power: float) -> Advance:
    """Apply up to ``n_steps`` one-second Euler steps at constant powers.

    Equivalent to iterating :func:`step_energy`, but each run of steps with
    an unchanged regime is applied as a single linear update. Stops early
    right after the step on which the MCU power flag flips.
    ``clamped`` is signed: positive when energy was discarded at full charge,
    negative when a deficit was absorbed at zero.
    """
    e_max = 0.5 * capacitance * converter.v_max**2
    e_pg = 0.5 * capacitance * converter.v_power_good**2
    e_cs = 0.5 * capacitance * converter.v_cold_start_exit**2
    out = Advance(energy, 0, powered=powered)
    remaining = n_steps
    while remaining > 0:
        e = out.energy
        eta = converter.eta_buck if e < e_cs else converter.eta_bat
        load = p_load if out.powered else 0.0
        rate = (p_harvest * eta - load - leakage_power) * UW
        k = remaining
        if rate > 0:
            for thr in (e_cs, e_pg):
                if e < thr:
                    k = min(k, max(1, math.ceil((thr - e) / rate)))
        elif rate < 0:
            for thr in (e_cs, e_pg):
                if e >= thr:
                    k = min(k, math.floor((e - thr) / -rate) + 1)
        raw = e + k * rate
        new = min(max(raw, 0.0), e_max)
        out.harvested += k * p_harvest * eta * UW
        out.consumed += k * load * UW
        out.leaked += k * leakage_power * UW
        out.clamped += raw - new
        out.energy = new
        out.steps += k
        remaining -= k
        now_powered = new >= e_pg
        if now_powered != out.powered:
            out.powered = now_powered
            out.toggled = True
            break
    return out
