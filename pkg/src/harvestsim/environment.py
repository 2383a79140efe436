"""Illuminance and occupancy traces, synthetic location presets, CSV I/O."""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DAY_S = 86400
SEGMENT_S = 300  # zero-order-hold granularity of generated light traces


class TraceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LightTrace:
    """Step function of illuminance; the last sample extends to the end."""

    t: np.ndarray
    lux: np.ndarray
    duration: float | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        lux = np.asarray(self.lux, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "lux", lux)
        if t.ndim != 1 or t.shape != lux.shape or t.size == 0:
            raise TraceError("light trace needs matching, non-empty t and lux arrays")
        if t[0] != 0:
            raise TraceError("light trace must start at t=0")
        if np.any(np.diff(t) <= 0):
            raise TraceError("light trace timestamps must strictly increase")
        if np.any(lux < 0) or not np.all(np.isfinite(lux)):
            raise TraceError("lux values must be finite and >= 0")

    def at(self, when: float) -> float:
        i = int(np.searchsorted(self.t, when, side="right")) - 1
        return float(self.lux[max(i, 0)])

    def scaled(self, factor: float) -> LightTrace:
        return LightTrace(self.t.copy(), self.lux * factor, self.duration)

    def daily_means(self, days: int) -> np.ndarray:
        """Time-weighted mean lux of each whole day."""
        edges = np.append(self.t, days * DAY_S)
        out = np.zeros(days)
        for d in range(days):
            lo, hi = d * DAY_S, (d + 1) * DAY_S
            seg_lo = np.clip(edges[:-1], lo, hi)
            seg_hi = np.clip(edges[1:], lo, hi)
            out[d] = float(np.sum(self.lux * (seg_hi - seg_lo))) / DAY_S
        return out

    def __eq__(self, other):
        return (isinstance(other, LightTrace) and np.array_equal(self.t, other.t)
                and np.array_equal(self.lux, other.lux))


@dataclass(frozen=True, eq=False)
class EventTrace:
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        object.__setattr__(self, "t", t)
        if np.any(np.diff(t) <= 0):
            raise TraceError("event timestamps must strictly increase")
        if t.size and t[0] < 0:
            raise TraceError("event timestamps must be >= 0")

    def __len__(self):
        return int(self.t.size)

    def __eq__(self, other):
        return isinstance(other, EventTrace) and np.array_equal(self.t, other.t)


@dataclass(frozen=True)
class LocationPreset:
    name: str
    target_mean_lux: float
    on_hour: float = 8.0
    off_hour: float = 19.0
    on_lux: float = 0.0
    off_lux: float = 0.0
    jitter: float = 0.0  # relative half-width of per-segment noise
    day_jitter: float = 0.0  # relative half-width of per-day brightness factor
    daylight_peak_lux: float = 0.0
    daylight_center_h: float = 13.0
    daylight_sigma_h: float = 2.5
    occupied_fraction: float | None = None  # None: lights follow on/off hours
    occupancy_slot_s: int = 1800
    event_rate_on: float = 0.0  # PIR events per hour while lit/occupied
    event_rate_off: float = 0.0  # events per hour otherwise

    def expected_mean_lux(self) -> float:
        on_h = (self.off_hour - self.on_hour) % 24 or (24.0 if self.off_hour != self.on_hour else 0.0)
        if self.occupied_fraction is not None:
            slots = round(on_h * 3600 / self.occupancy_slot_s)
            lit_h = round(slots * self.occupied_fraction) * self.occupancy_slot_s / 3600
        else:
            lit_h = on_h
        daylight = self.daylight_peak_lux * self.daylight_sigma_h * math.sqrt(2 * math.pi)
        return (lit_h * self.on_lux + (24 - lit_h) * self.off_lux + daylight) / 24


PRESETS: dict[str, LocationPreset] = {
    p.name: p
    for p in (
        LocationPreset("door", 121.0, on_lux=261.6, off_lux=2.0, jitter=0.10,
                       day_jitter=0.05, event_rate_on=8.0, event_rate_off=0.2),
        LocationPreset("center_office", 246.0, on_lux=533.3, off_lux=3.0, jitter=0.08,
                       day_jitter=0.04, event_rate_on=5.0, event_rate_off=0.0),
        LocationPreset("window", 7595.0, on_lux=300.0, off_lux=2.0, jitter=0.15,
                       day_jitter=0.05, daylight_peak_lux=28557.0, event_rate_on=5.0),
        LocationPreset("stairs", 235.0, on_hour=0.0, off_hour=24.0, on_lux=235.0,
                       off_lux=235.0, jitter=0.03, event_rate_on=60.0, event_rate_off=6.0),
        LocationPreset("conference", 1085.0, on_hour=7.0, off_hour=21.0, on_lux=2500.0,
                       off_lux=0.0, jitter=0.05, occupied_fraction=0.75,
                       event_rate_on=4.0, event_rate_off=0.0),
    )
}


def get_preset(name: str) -> LocationPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None


def _rng(preset: LocationPreset, seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(preset.name.encode()), stream])


def _lit_mask(preset: LocationPreset, days: int, seed: int) -> np.ndarray:
    """Boolean per segment: electric lights on (or room occupied)."""
    n = days * DAY_S // SEGMENT_S
    start = np.arange(n) * SEGMENT_S
    hour = (start % DAY_S) / 3600.0
    if preset.off_hour - preset.on_hour >= 24:
        window = np.ones(n, dtype=bool)
    elif preset.on_hour <= preset.off_hour:
        window = (hour >= preset.on_hour) & (hour < preset.off_hour)
    else:
        window = (hour >= preset.on_hour) | (hour < preset.off_hour)
    if preset.occupied_fraction is None:
        return window
    rng = _rng(preset, seed, 2)
    per_slot = preset.occupancy_slot_s // SEGMENT_S
    slot_hours = preset.off_hour - preset.on_hour
    slots_per_day = round(slot_hours * 3600 / preset.occupancy_slot_s)
    k = round(slots_per_day * preset.occupied_fraction)
    occupied = np.zeros(n, dtype=bool)
    first = int(preset.on_hour * 3600 // SEGMENT_S)
    for d in range(days):
        chosen = rng.choice(slots_per_day, size=k, replace=False)
        for s in chosen:
            i0 = d * (DAY_S // SEGMENT_S) + first + s * per_slot
            occupied[i0:i0 + per_slot] = True
    return occupied & window


def generate_light(preset: LocationPreset, days: int, seed: int) -> LightTrace:
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = _rng(preset, seed, 1)
    n = days * DAY_S // SEGMENT_S
    start = np.arange(n) * SEGMENT_S
    mid_h = ((start + SEGMENT_S / 2) % DAY_S) / 3600.0
    lit = _lit_mask(preset, days, seed)
    lux = np.where(lit, preset.on_lux, preset.off_lux).astype(float)
    if preset.daylight_peak_lux:
        z = (mid_h - preset.daylight_center_h) / preset.daylight_sigma_h
        lux = lux + preset.daylight_peak_lux * np.exp(-0.5 * z * z)
    noise = 1.0 + preset.jitter * rng.uniform(-1.0, 1.0, n)
    day_factor = 1.0 + preset.day_jitter * rng.uniform(-1.0, 1.0, days)
    lux = lux * noise * np.repeat(day_factor, DAY_S // SEGMENT_S)
    return LightTrace(start.astype(float), np.round(lux, 3), float(days * DAY_S))


def generate_events(preset: LocationPreset, days: int, seed: int) -> EventTrace:
    """Poisson occupancy events, denser while the location is lit/occupied."""
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = _rng(preset, seed, 3)
    lit = _lit_mask(preset, days, seed)
    rate = np.where(lit, preset.event_rate_on, preset.event_rate_off) / 3600.0
    counts = rng.poisson(rate * SEGMENT_S)
    times = []
    for i in np.flatnonzero(counts):
        times.append(i * SEGMENT_S + rng.integers(0, SEGMENT_S, counts[i]))
    if not times:
        return EventTrace(np.array([], dtype=float))
    return EventTrace(np.unique(np.concatenate(times)).astype(float))


def save_trace(trace: LightTrace | EventTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(trace, LightTrace):
            w.writerow(["t_s", "lux"])
            for t, lux in zip(trace.t, trace.lux):
                w.writerow([_num(t), _num(lux)])
        else:
            w.writerow(["t_s"])
            for t in trace.t:
                w.writerow([_num(t)])


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def load_trace(path: str | Path, kind: str | None = None) -> LightTrace | EventTrace:
    """Parse a trace CSV; the header (or ``kind``) selects light vs. events.

    A file without a header is read as a light trace when rows have two
    columns and as an event trace when they have one.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh), start=1) if r]
    if not rows:
        raise TraceError(f"{path}: empty trace file")
    first = [c.strip() for c in rows[0][1]]
    if first and first[0] == "t_s":
        kind = kind or ("light" if first == ["t_s", "lux"] else "events")
        if first not in (["t_s", "lux"], ["t_s"]):
            raise TraceError(f"{path}:1: unknown header {','.join(first)}")
        rows = rows[1:]
    else:
        kind = kind or ("light" if len(first) == 2 else "events")
    width = 2 if kind == "light" else 1
    if kind == "light" and not rows:
        raise TraceError(f"{path}: light trace has no samples")
    values = []
    prev = None
    for n, r in rows:
        if len(r) != width:
            raise TraceError(f"{path}:{n}: expected {width} column(s), got {len(r)}")
        try:
            vals = [float(c) for c in r]
        except ValueError:
            raise TraceError(f"{path}:{n}: not a number: {','.join(r)}") from None
        if not all(math.isfinite(v) for v in vals):
            raise TraceError(f"{path}:{n}: non-finite value")
        if prev is not None and vals[0] <= prev:
            raise TraceError(f"{path}:{n}: timestamp {vals[0]} not after {prev}")
        if kind == "light" and vals[1] < 0:
            raise TraceError(f"{path}:{n}: negative lux")
        prev = vals[0]
        values.append(vals)
    arr = np.array(values, dtype=float).reshape(-1, width)
    if kind == "light":
        if arr[0, 0] != 0:
            raise TraceError(f"{path}:{rows[0][0]}: light trace must start at t=0")
        return LightTrace(arr[:, 0], arr[:, 1])
    if arr.size and arr[0, 0] < 0:
        raise TraceError(f"{path}:{rows[0][0]}: negative timestamp")
    return EventTrace(arr[:, 0])


def constant_light(lux: float, duration: float | None = None) -> LightTrace:
    return LightTrace(np.array([0.0]), np.array([float(lux)]), duration)
