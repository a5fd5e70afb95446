import math

import numpy as np
import pytest

from globalspin import schedule as sched
from globalspin.circuits import (Circuit, Exchange, GlobalField, XYExchange,
                                 controlled_phase_circuit, evaluate,
                                 parallel_apply, refocused_rotation_circuit)
from globalspin.device import (ANTIPARALLEL, PARALLEL, DeviceGeometry,
                               SpinSite, WireSpec, device_constants,
                               field_profile, twin_wire_preset)
from globalspin.linalg import phase_distance
from globalspin.schedule import (DurationCapExceeded, ExchangeEvent,
                                 FieldEvent, Schedule, UnrealizableAngles,
                                 compile_schedule, schedule_from_text,
                                 schedule_to_text, simulate_schedule,
                                 unitary_digest, validate_schedule)
from globalspin.spins import RegisterSpec, ZeemanConvention

GEOM2 = twin_wire_preset(2)
GEOM4 = twin_wire_preset(4)


def device_profiles(g, n):
    par = device_constants(field_profile(g, PARALLEL))
    anti = device_constants(field_profile(g, ANTIPARALLEL))
    return {"z": par.ratios[:n], "x": anti.ratios[:n]}


def tied_cp_circuit():
    # Pair z angles (theta, theta+pi) proportional to the parallel profile
    # (1, 0.75) force theta = -4 pi.
    c, t = controlled_phase_circuit(RegisterSpec(2), 0, 1, -4.0 * math.pi)
    return c, t


def test_compile_structure_and_realizability():
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2)
    kinds = [type(e).__name__ for e in s.events]
    assert kinds == ["FieldEvent", "ExchangeEvent", "FieldEvent",
                     "ExchangeEvent"]
    f0, _, f1, _ = s.events
    assert f0.config == PARALLEL and f1.config == PARALLEL
    assert f0.sign == -f1.sign
    assert abs(f0.duration - f1.duration) < 1e-24
    assert s.total_time > 0
    # Events tile the line with no gaps.
    t = 0.0
    for ev in s.events:
        assert abs(ev.t_start - t) < 1e-18
        t += ev.duration


def test_compile_then_simulate_matches_circuit():
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2)
    assert phase_distance(simulate_schedule(s), evaluate(c)) < 1e-10


def test_compile_refocused_rotation():
    reg = RegisterSpec(4)
    c, _ = refocused_rotation_circuit(reg, "z", 0, 1, 1.234,
                                      device_profiles(GEOM4, 4))
    s = compile_schedule(c, GEOM4)
    assert phase_distance(simulate_schedule(s), evaluate(c)) < 1e-10
    # Both configurations appear: z pulses parallel, x pulses antiparallel.
    configs = {e.config for e in s.events if isinstance(e, FieldEvent)}
    assert configs == {PARALLEL, ANTIPARALLEL}
    assert sum(isinstance(e, ExchangeEvent) for e in s.events) == 4


def test_compile_convention_changes_duration():
    c, _ = tied_cp_circuit()
    s_full = compile_schedule(c, GEOM2, convention=ZeemanConvention.FULL_GYRO)
    s_half = compile_schedule(c, GEOM2, convention=ZeemanConvention.HALF_GYRO)
    d_full = s_full.events[0].duration
    d_half = s_half.events[0].duration
    assert abs(d_half - 2.0 * d_full) < 1e-12 * d_half
    assert phase_distance(simulate_schedule(s_half), evaluate(c)) < 1e-10


def test_compile_skips_identity_pulses():
    c = Circuit(RegisterSpec(2), (GlobalField("z", (0.0, 0.0)),
                                  Exchange(0, 1, math.pi)))
    s = compile_schedule(c, GEOM2)
    assert len(s.events) == 1
    assert isinstance(s.events[0], ExchangeEvent)


def test_compile_groups_disjoint_exchanges():
    reg = RegisterSpec(4)
    template, _ = tied_cp_circuit()
    c = parallel_apply(template, ((0, 1), (2, 3)), reg)
    s = compile_schedule(c, GEOM4)
    ex = [e for e in s.events if isinstance(e, ExchangeEvent)]
    assert len(ex) == 2
    assert all(len(e.pairs) == 2 for e in ex)
    assert phase_distance(simulate_schedule(s), evaluate(c)) < 1e-10


def test_compile_splits_overlapping_exchanges():
    c = Circuit(RegisterSpec(3), (Exchange(0, 1, math.pi),
                                  Exchange(1, 2, math.pi)))
    s = compile_schedule(c, twin_wire_preset(3))
    assert len(s.events) == 2


def test_compile_honors_duration_hints():
    c = Circuit(RegisterSpec(2), (Exchange(0, 1, math.pi, 25e-9),))
    s = compile_schedule(c, GEOM2)
    assert s.events[0].duration == 25e-9
    s = compile_schedule(Circuit(RegisterSpec(2), (Exchange(0, 1, 1.0),)),
                         GEOM2, exchange_duration=4e-9)
    assert s.events[0].duration == 4e-9


def test_compile_rejects_off_profile_angles():
    c = Circuit(RegisterSpec(2), (Exchange(0, 1, math.pi),
                                  GlobalField("z", (1.0, 1.0))))
    with pytest.raises(UnrealizableAngles) as info:
        compile_schedule(c, GEOM2)
    assert info.value.op_index == 1


def test_compile_rejects_y_axis_and_planar_exchange():
    with pytest.raises(UnrealizableAngles):
        compile_schedule(Circuit(RegisterSpec(2),
                                 (GlobalField("y", (1.0, 0.75)),)), GEOM2)
    with pytest.raises(UnrealizableAngles) as info:
        compile_schedule(Circuit(RegisterSpec(2), (XYExchange(0, 1, 0.5),)),
                         GEOM2)
    assert info.value.op_index == 0


def test_compile_duration_cap():
    c, _ = tied_cp_circuit()
    with pytest.raises(DurationCapExceeded):
        compile_schedule(c, GEOM2, field_duration_cap=1e-12)


def test_compile_rejects_multi_row_exchange():
    sites = tuple(SpinSite(s.position, s.g_factor, row_id=k % 2)
                  for k, s in enumerate(GEOM4.sites))
    split = DeviceGeometry(GEOM4.wires, sites)
    c = Circuit(RegisterSpec(4), (Exchange(0, 1, math.pi),))
    with pytest.raises(ValueError):
        compile_schedule(c, split)


def test_validate_schedule_passes_compiled():
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2)
    report = validate_schedule(s)
    assert report.ok, report


def test_validate_schedule_catches_overlap():
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2)
    shifted = list(s.events)
    ev = shifted[1]
    shifted[1] = ExchangeEvent(t_start=ev.t_start - 0.9 * s.events[0].duration,
                               duration=ev.duration, pairs=ev.pairs)
    bad = Schedule(s.register, tuple(shifted), s.geometry, s.geometry_name,
                   s.convention, s.active_row)
    report = validate_schedule(bad)
    assert not report.ok
    assert {c.name for c in report.checks if not c.ok} == {"non_overlap"}


def test_validate_schedule_catches_shared_spin():
    bad = Schedule(RegisterSpec(3), (ExchangeEvent(0.0, 1e-8,
                                                   ((0, 1, 1.0), (1, 2, 1.0))),),
                   twin_wire_preset(3), "custom",
                   ZeemanConvention.FULL_GYRO, 0)
    report = validate_schedule(bad)
    assert not report.ok
    assert {c.name for c in report.checks if not c.ok} == {"pair_disjointness"}


def test_validate_schedule_catches_row_violation():
    sites = tuple(SpinSite(s.position, s.g_factor, row_id=1)
                  for s in GEOM2.sites)
    other_row = DeviceGeometry(GEOM2.wires, sites)
    bad = Schedule(RegisterSpec(2), (ExchangeEvent(0.0, 1e-8, ((0, 1, 1.0),)),),
                   other_row, "custom", ZeemanConvention.FULL_GYRO, 0)
    report = validate_schedule(bad)
    assert not report.ok
    assert {c.name for c in report.checks if not c.ok} == {"row_addressing"}


def test_validate_schedule_catches_excess_current():
    hot = DeviceGeometry(tuple(
        WireSpec(w.center, w.cross_section, 1.0e-3,
                 w.critical_current_density) for w in GEOM2.wires),
        GEOM2.sites)
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, hot)
    report = validate_schedule(s)
    assert not report.ok
    assert {c.name for c in report.checks if not c.ok} == {"current_limits"}


def test_validate_schedule_catches_current_annotation_mismatch():
    # An edited schedule file can claim any drive current; the claim must
    # agree with what the geometry (and hence the simulation) actually uses.
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2, geometry_name="twin_wire_zigzag")
    text = schedule_to_text(s).replace(" 0.7", " 0.95")
    back = schedule_from_text(text, GEOM2)
    report = validate_schedule(back)
    assert not report.ok
    bad = {c.name for c in report.checks if not c.ok}
    assert bad == {"current_limits"}
    detail = next(c.detail for c in report.checks if c.name == "current_limits")
    assert "0.95" in detail and "0.7" in detail


def test_schedule_text_round_trip():
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2, geometry_name="twin_wire_zigzag")
    text = schedule_to_text(s)
    back = schedule_from_text(text, GEOM2)
    assert back.register == s.register
    assert back.convention == s.convention
    assert back.geometry_name == "twin_wire_zigzag"
    assert len(back.events) == len(s.events)
    # Times are quantized to 1 fs by the text format.
    for a, b in zip(back.events, s.events):
        assert abs(a.t_start - b.t_start) < 1e-15
        assert abs(a.duration - b.duration) < 1e-15
    assert schedule_to_text(back) == text


def test_schedule_text_drift_stays_below_criterion():
    # 1 fs quantization moves each pulse angle by ~2e-7 rad at most; the
    # replayed unitary stays well inside the 1e-8 in-memory bound only
    # when both sides are parsed from the same text, which is how golden
    # digests are defined.
    c, _ = tied_cp_circuit()
    s = compile_schedule(c, GEOM2)
    text = schedule_to_text(s)
    a = schedule_from_text(text, GEOM2)
    b = schedule_from_text(text, GEOM2)
    assert unitary_digest(simulate_schedule(a)) == unitary_digest(simulate_schedule(b))
    assert phase_distance(simulate_schedule(a), evaluate(c)) < 1e-6


def test_schedule_text_errors():
    with pytest.raises(ValueError):
        schedule_from_text("F 0.0 1.0 parallel +1 0.7\n", GEOM2)
    with pytest.raises(ValueError):
        schedule_from_text("SCHEDULE register=2 convention=full_gyromagnetic\n"
                           "Q 0 1\n", GEOM2)


def test_unitary_digest_phase_invariant():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(m)
    assert unitary_digest(q) == unitary_digest(np.exp(1j * 0.83) * q)
    assert unitary_digest(q) != unitary_digest(q.conj())
    assert len(unitary_digest(q)) == 64
