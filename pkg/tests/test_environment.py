from dataclasses import replace

import numpy as np
import pytest

from harvestsim.environment import (
    DAY_S, PRESETS, EventTrace, LightTrace, TraceError, constant_light, generate_events,
    generate_light, get_preset, load_trace, save_trace,
)


class TestLight:
    def test_stairs_constant(self):
        tr = generate_light(PRESETS["stairs"], 3, seed=7)
        assert tr.lux.min() > 235 * 0.9 and tr.lux.max() < 235 * 1.1
        assert tr.daily_means(3) == pytest.approx([235] * 3, rel=0.02)

    def test_zero_preset(self):
        dark = replace(PRESETS["door"], on_lux=0.0, off_lux=0.0)
        assert not generate_light(dark, 2, seed=1).lux.any()

    def test_center_office_daily_means(self):
        means = generate_light(PRESETS["center_office"], 15, seed=42).daily_means(15)
        assert means.min() >= 221 and means.max() <= 271

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_preset_means_near_target(self, name):
        p = PRESETS[name]
        means = generate_light(p, 15, seed=3).daily_means(15)
        assert means.mean() == pytest.approx(p.target_mean_lux, rel=0.10)

    def test_window_daylight(self):
        assert generate_light(PRESETS["window"], 2, seed=0).lux.max() >= 6000

    def test_conference_bursts(self):
        lux = generate_light(PRESETS["conference"], 5, seed=0).lux
        assert (lux == 0).any() and (lux > 1000).any()

    def test_deterministic(self):
        a = generate_light(PRESETS["door"], 4, seed=11)
        assert a == generate_light(PRESETS["door"], 4, seed=11)
        assert a != generate_light(PRESETS["door"], 4, seed=12)

    def test_lookup(self):
        tr = LightTrace([0, 10, 20], [1.0, 2.0, 3.0])
        assert (tr.at(0), tr.at(9.99), tr.at(10), tr.at(1e9)) == (1.0, 1.0, 2.0, 3.0)
        assert constant_light(42).at(12345) == 42

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="attic"):
            get_preset("attic")


class TestEvents:
    def test_zero_rate(self):
        quiet = replace(PRESETS["stairs"], event_rate_on=0.0, event_rate_off=0.0)
        assert len(generate_events(quiet, 3, seed=1)) == 0

    def test_stairs_busier(self):
        stairs = generate_events(PRESETS["stairs"], 15, seed=42)
        conf = generate_events(PRESETS["conference"], 15, seed=42)
        assert len(stairs) > 5 * len(conf)

    def test_within_duration(self):
        ev = generate_events(PRESETS["door"], 4, seed=5)
        assert ev.t.min() >= 0 and ev.t.max() < 4 * DAY_S

    def test_office_events_only_when_lit(self):
        p = PRESETS["center_office"]
        ev = generate_events(p, 5, seed=9)
        hours = (ev.t % DAY_S) / 3600
        assert ((hours >= p.on_hour) & (hours < p.off_hour)).all()

    def test_deterministic(self):
        p = PRESETS["conference"]
        assert generate_events(p, 3, 1) == generate_events(p, 3, 1)


class TestTraceFiles:
    def test_two_step(self, tmp_path):
        f = tmp_path / "l.csv"
        f.write_text("0,300\n3600,0\n")
        tr = load_trace(f)
        assert isinstance(tr, LightTrace)
        assert list(tr.t) == [0, 3600] and list(tr.lux) == [300, 0]

    def test_empty(self, tmp_path):
        f = tmp_path / "e.csv"
        f.write_text("")
        with pytest.raises(TraceError, match="empty"):
            load_trace(f)

    def test_out_of_order_names_line(self, tmp_path):
        f = tmp_path / "o.csv"
        f.write_text("t_s,lux\n0,1\n50,2\n40,3\n")
        with pytest.raises(TraceError, match=":4:"):
            load_trace(f)

    def test_malformed_names_line(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("0,1\n10,abc\n")
        with pytest.raises(TraceError, match=":2:"):
            load_trace(f)

    def test_round_trip(self, tmp_path):
        light = generate_light(PRESETS["window"], 2, seed=4)
        events = generate_events(PRESETS["window"], 2, seed=4)
        save_trace(light, tmp_path / "l.csv")
        save_trace(events, tmp_path / "e.csv")
        assert load_trace(tmp_path / "l.csv") == light
        assert load_trace(tmp_path / "e.csv") == events

    def test_event_header(self, tmp_path):
        f = tmp_path / "ev.csv"
        f.write_text("t_s\n5\n9.5\n")
        ev = load_trace(f)
        assert isinstance(ev, EventTrace) and len(ev) == 2

    def test_invariants(self):
        with pytest.raises(TraceError):
            LightTrace(np.array([5.0]), np.array([1.0]))
        with pytest.raises(TraceError):
            LightTrace([0.0, 1.0], [1.0, -1.0])
        with pytest.raises(TraceError):
            EventTrace([3.0, 2.0])
