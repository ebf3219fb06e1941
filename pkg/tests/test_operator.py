"""Synthetic operator: behavior timing, induced load, physiology."""
from __future__ import annotations

import numpy as np
import pytest

from matbsim.config import PHYSIO_CHANNELS, load_config
from matbsim.engine.conditions import ScheduledEvent, build_condition
from matbsim.engine.world import Engine
from matbsim.errors import ConfigError
from matbsim.operators import (
    InducedLoad,
    PhysioSynth,
    SyntheticOperator,
    make_profile,
)
from matbsim.rng import stream
from matbsim.tasks import Task


class Recorder:
    def __init__(self):
        self.events = []

    def __call__(self, t, kind, payload):
        self.events.append({"t": t, "kind": kind, "payload": payload})


def make_world(label="UL", seed=2, profile="deterministic-zero-noise", start=Task.SYSMON):
    cfg = load_config(overrides={"seed": seed})
    rec = Recorder()
    eng = Engine(cfg, stream(seed, "engine"), rec)
    eng.start_block(label, build_condition(label, cfg.conditions), [])
    op = SyntheticOperator(make_profile(profile), eng, stream(seed, "operator"), start_station=start)
    return eng, op, rec


def drive(eng, op, seconds):
    hz = eng.cfg.engine.tick_hz
    applied = []
    for _ in range(round(seconds * hz)):
        eng.advance_tick()
        now = eng.clock.elapsed
        for inp in op.step(now, eng.clock.tick_seconds):
            eng.apply_input(inp)
            applied.append(inp)
    return applied


class TestProfiles:
    def test_presets_exist(self):
        for name in ("nominal", "slow", "deterministic-zero-noise"):
            assert make_profile(name).name == name

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigError):
            make_profile("sprinter")

    def test_slow_profile_scales_reaction_times(self):
        nominal = make_profile("nominal")
        slow = make_profile("slow")
        assert slow.base_rt["sysmon"] > nominal.base_rt["sysmon"]

    def test_override_fields(self):
        p = make_profile("nominal", {"walk_speed": 2.0})
        assert p.walk_speed == 2.0
        with pytest.raises(ConfigError):
            make_profile("nominal", {"sprint_speed": 2.0})


class TestReactionTiming:
    def test_single_visible_demand_resolved_near_base_rt(self):
        eng, op, rec = make_world()
        eng._events.append(ScheduledEvent(1.0, "sysmon", {"target": "gauge1"}))
        drive(eng, op, 8.0)
        resolves = [e for e in rec.events if e["kind"] == "resolve"]
        assert len(resolves) == 1
        rt = resolves[0]["payload"]["rt"]
        base = make_profile("deterministic-zero-noise").base_rt["sysmon"]
        # one tick of perception delay plus the sampled (noise-free) delay
        assert rt == pytest.approx(base, abs=0.2)

    def test_remote_demand_includes_walk_time(self):
        # operator parked at comms; gauge demand is 2 stations away
        eng, op, rec = make_world(start=Task.COMMS)
        op.next_patrol = 1e9  # hold position until the demand appears
        eng._events.append(ScheduledEvent(1.0, "sysmon", {"target": "gauge1"}))
        drive(eng, op, 2.0)
        # not visible from comms: nothing known yet, no resolution
        resolves = [e for e in rec.events if e["kind"] == "resolve"]
        assert not resolves

    def test_walk_consumes_layout_distance_over_speed(self):
        eng, op, rec = make_world(start=Task.TRACKING)
        op.known[("sysmon", 999)] = type(op).__mro__  # placeholder never used
        op.known.clear()
        t0 = eng.clock.elapsed
        op._start_walk(Task.SYSMON, t0)
        expected = eng.layout.distance(Task.TRACKING, Task.SYSMON) / op.profile.walk_speed
        assert op.arrive_at - t0 == pytest.approx(expected)

    def test_zero_pending_demands_no_task_inputs(self):
        eng, op, rec = make_world()
        op.next_patrol = 1e9
        inputs = drive(eng, op, 5.0)
        assert [i for i in inputs if i.kind not in ("move_to_station",)] == []

    def test_speech_mode_answers_without_walking(self):
        eng, op, rec = make_world(start=Task.TRACKING)
        eng.comms.speech_mode = True
        op.next_patrol = 1e9
        eng._events.append(
            ScheduledEvent(1.0, "comms_request",
                           {"callsign": "NASA 504", "radio": "COM1", "frequency": 127.55})
        )
        drive(eng, op, 6.0)
        resolves = [e for e in rec.events if e["kind"] == "resolve"]
        assert len(resolves) == 1
        assert resolves[0]["payload"]["outcome"] == "resolved"
        # never left tracking
        assert op.station == Task.TRACKING
        rt = resolves[0]["payload"]["rt"]
        assert rt == pytest.approx(op.profile.utterance_s, abs=0.3)

    def test_seeded_operator_reproducible(self):
        _, _, rec1 = make_world(label="NL", seed=9, profile="nominal")
        eng1, op1, rec1 = make_world(label="NL", seed=9, profile="nominal")
        eng2, op2, rec2 = make_world(label="NL", seed=9, profile="nominal")
        drive(eng1, op1, 30.0)
        drive(eng2, op2, 30.0)
        assert rec1.events == rec2.events


class TestInducedLoad:
    def test_idle_near_baseline(self):
        eng, op, _ = make_world()
        drive(eng, op, 1.0)
        load = op.induced_load(eng.clock.elapsed)
        assert load.cognitive <= 0.1
        assert load.physical <= 0.1
        assert load.speech == 0.0

    def test_walking_raises_physical(self):
        eng, op, _ = make_world(start=Task.TRACKING)
        idle = op.induced_load(eng.clock.elapsed).physical
        op._start_walk(Task.SYSMON, eng.clock.elapsed)
        walking = op.induced_load(eng.clock.elapsed).physical
        assert walking > idle

    def test_speaking_sets_speech_load(self):
        eng, op, _ = make_world()
        op.speaking_until = eng.clock.elapsed + 2.0
        load = op.induced_load(eng.clock.elapsed)
        assert load.speech > 0.5

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            InducedLoad(1.5, 0.0, 0.0, 0.0, 0.0)


class TestPhysioSynth:
    def test_zero_load_zero_noise_at_baseline(self):
        profile = make_profile("deterministic-zero-noise")
        synth = PhysioSynth(profile, np.random.default_rng(0))
        load = InducedLoad(0, 0, 0, 0, 0)
        sample = synth.step(load, speaking=False, now=1.0, dt=0.5)
        assert sample.heart_rate == profile.physio_baseline["heart_rate"]
        assert sample.noise_level == profile.physio_baseline["noise_level"]

    def test_speech_channels_gated_when_silent(self):
        profile = make_profile("nominal")
        synth = PhysioSynth(profile, np.random.default_rng(0))
        sample = synth.step(InducedLoad(0.5, 0.5, 0.5, 0.5, 0.0), False, 1.0, 0.5)
        assert sample.speech_rate == 0.0
        assert sample.speech_intensity == 0.0
        assert sample.pitch == 0.0

    def test_first_order_response_toward_gain(self):
        profile = make_profile("deterministic-zero-noise")
        synth = PhysioSynth(profile, np.random.default_rng(0))
        base = profile.physio_baseline["heart_rate"]
        gain = profile.physio_gains["heart_rate"]["cognitive"]
        load = InducedLoad(1.0, 0.0, 0.0, 0.0, 0.0)
        values = [synth.step(load, False, t * 0.5, 0.5).heart_rate for t in range(1, 61)]
        # monotone rise toward base + gain with time constant ~5 s
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(base + gain, rel=0.01)
        assert values[5] > base + 0.3 * gain

    def test_monotone_coupling_noise_free(self):
        # raising any load component never lowers any mapped channel
        profile = make_profile("deterministic-zero-noise")
        components = ("cognitive", "physical", "visual", "auditory", "speech")
        for i, comp in enumerate(components):
            lo_vec = [0.2] * 5
            hi_vec = list(lo_vec)
            hi_vec[i] = 0.9
            synth_lo = PhysioSynth(profile, np.random.default_rng(0))
            synth_hi = PhysioSynth(profile, np.random.default_rng(0))
            for t in range(1, 200):
                lo = synth_lo.step(InducedLoad(*lo_vec), True, t * 0.5, 0.5)
                hi = synth_hi.step(InducedLoad(*hi_vec), True, t * 0.5, 0.5)
            for channel, low_val in zip(PHYSIO_CHANNELS, lo.channels()):
                high_val = dict(zip(PHYSIO_CHANNELS, hi.channels()))[channel]
                assert high_val >= low_val - 1e-9, (comp, channel)

    def test_channels_non_negative(self):
        profile = make_profile("nominal")
        synth = PhysioSynth(profile, np.random.default_rng(3))
        for t in range(1, 200):
            sample = synth.step(InducedLoad(0, 0, 0, 0, 0), False, t * 0.5, 0.5)
            assert all(v >= 0.0 for v in sample.channels())
