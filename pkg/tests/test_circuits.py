import math

import numpy as np
import pytest

from globalspin import circuits as cir
from globalspin.circuits import (Circuit, Equivalence, Exchange, GateTarget,
                                 GlobalField, NotUnitary2x2, OverlappingPairs,
                                 XYExchange, circuit_from_text,
                                 circuit_to_text, evaluate, euler_zxz,
                                 parallel_apply, su2_compile, verify_target)
from globalspin.linalg import hermitian_expm, kron, max_abs, phase_distance
from globalspin.spins import (EqualIndices, RegisterSpec, rotation_2x2,
                              spin_operator)

REG2 = RegisterSpec(2)
REG3 = RegisterSpec(3)
REG4 = RegisterSpec(4)

PROFILES2 = {"z": (1.0, 0.75), "x": (1.0, 0.5)}
PROFILES4 = {"z": (1.0, 0.75, 1.0, 0.75), "x": (1.0, 0.5, 1.0, 0.5)}


def random_su2(rng):
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q / np.sqrt(np.linalg.det(q).astype(complex))


def bystanders(rng, n, i, j):
    return {k: float(rng.uniform(-3, 3)) for k in range(n) if k not in (i, j)}


def test_evaluate_applies_first_op_first():
    c = Circuit(REG2, (GlobalField("z", (0.7, 0.0)),
                       GlobalField("x", (1.1, 0.0))))
    want = kron(rotation_2x2("x", 1.1) @ rotation_2x2("z", 0.7), np.eye(2))
    assert max_abs(evaluate(c) - want) < 1e-15


def test_op_unitary_rejects_unknown_op():
    with pytest.raises(TypeError):
        cir.op_unitary(REG2, "EX 0 1")


def test_circuit_counts():
    c = Circuit(REG2, (Exchange(0, 1, math.pi), GlobalField("z", (0.1, 0.2)),
                       XYExchange(0, 1, 0.3)))
    assert c.step_count == 3
    assert c.exchange_count == 2
    assert c.field_count == 1


def test_swap_conjugation_exact():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c, t = cir.swap_conjugation(reg, i, j, float(rng.uniform(-3, 3)),
                                    float(rng.uniform(-3, 3)),
                                    bystanders(rng, n, i, j))
        rep = verify_target(c, t, 1e-12)
        assert rep.passed, rep
        assert rep.equivalence is Equivalence.EXACT


def test_dressed_swap_literal_factor_is_plus_i():
    # Compared entrywise: the scalar i is part of the identity.
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c, expected = cir.dressed_swap_phase_conjugation(
            reg, i, j, float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)),
            float(rng.uniform(-3, 3)))
        assert max_abs(evaluate(c) - expected) < 1e-12


def test_dressed_swap_factor_flips_with_exchange_sign():
    # Same construction with exchange +pi instead of -pi lands on -i; the
    # entrywise comparison must be able to see the difference.
    c, expected = cir.dressed_swap_phase_conjugation(REG2, 0, 1, 0.4, 0.9, -1.2)
    flipped = []
    for op in c.ops:
        if isinstance(op, Exchange):
            flipped.append(Exchange(op.i, op.j, -op.xi))
        else:
            flipped.append(op)
    got = evaluate(Circuit(REG2, tuple(flipped)))
    assert max_abs(got - expected) > 1.0
    assert max_abs(got + expected) < 1e-12


def test_controlled_phase_exact_for_any_dressing_angle():
    rng = np.random.default_rng(2)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c, t = cir.controlled_phase_circuit(reg, i, j,
                                            float(rng.uniform(-3, 3)),
                                            bystanders(rng, n, i, j))
        rep = verify_target(c, t, 1e-12)
        assert rep.passed, rep


def test_controlled_phase_local_z_target_structure():
    t = cir.controlled_phase_local_z_target(REG2, 0, 1)
    assert max_abs(t.unitary - np.diag([1, 1, 1, -1]).astype(complex)) == 0.0
    assert t.equivalence is Equivalence.LOCAL_Z


def test_controlled_phase_matches_local_z_target():
    # Regression: the aligned-distance path must sit at machine precision
    # for an exact circuit, not at the 1e-8 floor of the naive formula.
    c, _ = cir.controlled_phase_circuit(REG3, 0, 2, 0.7, {1: 0.4})
    t = cir.controlled_phase_local_z_target(REG3, 0, 2)
    rep = verify_target(c, t, 1e-9)
    assert rep.passed
    assert rep.distance < 1e-12


def test_local_z_verification_absorbs_pair_z_only():
    c, _ = cir.controlled_phase_circuit(REG3, 0, 2, 0.7, {1: 0.4})
    t = cir.controlled_phase_local_z_target(REG3, 0, 2)
    dressed = Circuit(REG3, c.ops + (GlobalField("z", (0.9, 0.0, -1.3)),))
    assert verify_target(dressed, t, 1e-9).passed
    tilted = Circuit(REG3, c.ops + (GlobalField("x", (0.03, 0.0, 0.0)),))
    rep = verify_target(tilted, t, 1e-9)
    assert not rep.passed
    assert rep.distance > 1e-3


def test_local_z_needs_two_acted_spins():
    t = GateTarget(np.eye(8), frozenset((0,)), Equivalence.LOCAL_Z)
    with pytest.raises(ValueError):
        verify_target(Circuit(REG3, ()), t, 1e-9)


def test_verify_target_reports_bystander_leakage():
    # A pulse on a spin outside acted_spins must show up as leakage even
    # when the acted-pair action is perfect.
    c, t = cir.controlled_phase_circuit(REG3, 0, 1, 0.0)
    leaky = Circuit(REG3, c.ops + (GlobalField("x", (0.0, 0.0, 0.2)),))
    rep = verify_target(leaky, t, 1e-10)
    assert rep.bystander_deviation > 1e-3
    assert not rep.passed


def test_verify_target_dimension_mismatch():
    c, _ = cir.controlled_phase_circuit(REG3, 0, 1, 0.0)
    t = GateTarget(np.eye(4), frozenset((0, 1)), Equivalence.EXACT)
    with pytest.raises(cir.DimensionMismatch):
        verify_target(c, t, 1e-10)


def test_xy_x_rotation_identity():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c, t = cir.xy_x_rotation_circuit(reg, i, j, float(rng.uniform(-3, 3)),
                                         float(rng.uniform(-3, 3)),
                                         bystanders(rng, n, i, j))
        rep = verify_target(c, t, 1e-12)
        assert rep.passed, rep


def test_xy_x_rotation_literal_overall_minus_one():
    c, t = cir.xy_x_rotation_circuit(REG2, 0, 1, 0.8, -0.3)
    assert max_abs(evaluate(c) + t.unitary) < 1e-13


def test_xy_controlled_phase_identity():
    rng = np.random.default_rng(4)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        c, t = cir.xy_controlled_phase_circuit(reg, i, j,
                                               float(rng.uniform(-3, 3)))
        rep = verify_target(c, t, 1e-12)
        assert rep.passed, rep


def test_xy_controlled_phase_literal_overall_minus_one():
    c, t = cir.xy_controlled_phase_circuit(REG2, 0, 1, 0.9)
    assert max_abs(evaluate(c) + t.unitary) < 1e-13


def test_refocused_rotation_shape():
    c, t = cir.refocused_rotation_circuit(REG4, "z", 0, 1, 1.234, PROFILES4)
    assert c.step_count == 11
    exchanges = [op for op in c.ops if isinstance(op, Exchange)]
    assert len(exchanges) == 4
    assert all(op.xi == math.pi for op in exchanges)
    assert c.field_count == 7
    assert t.equivalence is Equivalence.GLOBAL_PHASE


def test_refocused_rotation_pulses_follow_profiles():
    # Device constraint: every field pulse is a scalar multiple of the
    # profile for its axis, otherwise the hardware cannot play it.
    c, _ = cir.refocused_rotation_circuit(REG4, "x", 0, 1, -0.77, PROFILES4)
    for op in c.ops:
        if not isinstance(op, GlobalField):
            continue
        prof = np.array(PROFILES4[op.axis])
        ang = np.array(op.angles)
        scale = ang @ prof / (prof @ prof)
        assert max_abs(ang - scale * prof) < 1e-12


def test_refocused_rotation_identity_both_axes():
    rng = np.random.default_rng(5)
    for axis in ("z", "x"):
        for _ in range(10):
            angle = float(rng.uniform(-6, 6))
            c, t = cir.refocused_rotation_circuit(REG4, axis, 0, 1, angle,
                                                  PROFILES4)
            rep = verify_target(c, t, 1e-12)
            assert rep.passed, (axis, angle, rep)


def test_refocused_rotation_other_pair_positions():
    c, t = cir.refocused_rotation_circuit(REG4, "z", 2, 3, 0.9, PROFILES4)
    assert verify_target(c, t, 1e-12).passed


def test_refocused_rotation_input_checks():
    with pytest.raises(ValueError):
        cir.refocused_rotation_circuit(REG4, "y", 0, 1, 1.0, PROFILES4)
    flat = {"z": (1.0, 1.0, 1.0, 1.0), "x": (1.0, 0.5, 1.0, 0.5)}
    with pytest.raises(ValueError):
        cir.refocused_rotation_circuit(REG4, "z", 0, 1, 1.0, flat)


def test_parallel_apply_equals_tensor_product():
    rng = np.random.default_rng(6)
    for _ in range(5):
        angle = float(rng.uniform(-3, 3))
        template, _ = cir.controlled_phase_circuit(REG2, 0, 1, angle)
        pair_gate = evaluate(template)
        c = parallel_apply(template, ((0, 1), (2, 3)), REG4)
        assert max_abs(evaluate(c) - kron(pair_gate, pair_gate)) < 1e-12


def test_parallel_apply_rejects_bad_pairs():
    template, _ = cir.controlled_phase_circuit(REG2, 0, 1, 0.0)
    with pytest.raises(OverlappingPairs):
        parallel_apply(template, ((0, 1), (1, 2)), REG3)
    with pytest.raises(EqualIndices):
        parallel_apply(template, ((2, 2),), REG3)
    with pytest.raises(IndexError):
        parallel_apply(template, ((0, 7),), REG3)
    with pytest.raises(ValueError):
        parallel_apply(Circuit(REG3, ()), ((0, 1),), REG4)


def euler_recompose(delta, alpha, beta, gamma):
    return (np.exp(1j * delta) * rotation_2x2("z", gamma)
            @ rotation_2x2("x", beta) @ rotation_2x2("z", alpha))


def test_euler_zxz_recomposes_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        u = random_su2(rng)
        if rng.uniform() < 0.3:
            u = u * np.exp(1j * rng.uniform(-math.pi, math.pi))
        delta, alpha, beta, gamma = euler_zxz(u)
        assert 0.0 <= beta <= math.pi + 1e-12
        assert max_abs(euler_recompose(delta, alpha, beta, gamma) - u) < 1e-10


def test_euler_zxz_special_points():
    cases = [np.eye(2),
             np.diag([1j, -1j]),
             np.array([[0, 1], [1, 0]], dtype=complex),
             np.array([[0, -1j], [-1j, 0]]),
             rotation_2x2("x", math.pi),
             rotation_2x2("z", -2.5)]
    for u in cases:
        delta, alpha, beta, gamma = euler_zxz(u)
        assert max_abs(euler_recompose(delta, alpha, beta, gamma) - u) < 1e-10


def test_euler_zxz_rejects_non_unitary():
    with pytest.raises(NotUnitary2x2):
        euler_zxz(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotUnitary2x2):
        euler_zxz(np.eye(3))


def test_su2_compile_meets_budget_and_distance():
    rng = np.random.default_rng(8)
    for _ in range(20):
        u = random_su2(rng)
        c = su2_compile(u, REG2, 0, 1, PROFILES2)
        assert c.field_count <= 21
        assert c.step_count <= 33
        full = kron(u, np.eye(2))
        assert phase_distance(evaluate(c), full) < 1e-8


def test_su2_compile_identity_is_empty():
    c = su2_compile(np.eye(2), REG2, 0, 1, PROFILES2)
    assert c.step_count == 0


def test_su2_compile_bystanders_clean_on_wider_register():
    rng = np.random.default_rng(9)
    u = random_su2(rng)
    c = su2_compile(u, REG4, 0, 1, PROFILES4)
    t = GateTarget(kron(u, np.eye(8)), frozenset((0,)),
                   Equivalence.GLOBAL_PHASE)
    rep = verify_target(c, t, 1e-8)
    assert rep.passed, rep


def test_circuit_text_round_trip_is_exact():
    c, _ = cir.refocused_rotation_circuit(REG4, "z", 0, 1, 0.37712, PROFILES4)
    c = Circuit(REG4, c.ops + (XYExchange(1, 2, -0.25),))
    text = circuit_to_text(c)
    back = circuit_from_text(text)
    assert back == c
    assert circuit_to_text(back) == text


def test_circuit_text_ignores_comments_and_blanks():
    c = circuit_from_text("# header\nREG 2\n\nEX 0 1 3.14  # tail\n")
    assert c.register.n_spins == 2
    assert c.ops == (Exchange(0, 1, 3.14),)


def test_circuit_text_errors():
    with pytest.raises(ValueError):
        circuit_from_text("EX 0 1 1.0\n")
    with pytest.raises(ValueError):
        circuit_from_text("REG 2\nREG 2\n")
    with pytest.raises(ValueError):
        circuit_from_text("REG 2\nZZ 0 1\n")
    with pytest.raises(ValueError):
        circuit_from_text("REG 3\nGF z 0.1 0.2\n")
