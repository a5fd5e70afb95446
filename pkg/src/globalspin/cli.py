"""Command line front end: identity verification, sequence synthesis, device
analysis, and schedule compilation as reproducible commands.

Every command embeds its seed and the sha256 of each input file in the
report, so any published number can be re-derived from the command line
alone. Exit codes: 0 all checks pass, 1 check failure, 2 input error,
3 search budget exceeded, 4 unschedulable circuit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import circuits, device, schedule as sched, synth
from .linalg import max_abs, phase_distance
from .spins import RegisterSpec, ZeemanConvention

VERIFY_SUITES = ("swap", "dressed", "cp", "xy", "xycp", "parallel")
DRAWS_PER_SUITE = 60


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: object  # float, or str for identifiers like digests
    threshold: Optional[float]  # None marks an informational value
    passed: bool


@dataclass(frozen=True)
class RunReport:
    command: str
    seed: int
    inputs: tuple  # (path, sha256) pairs
    checks: tuple
    wall_time_s: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _preset_path(name: str) -> str:
    """Resolve a preset file by name: GLOBALSPIN_PRESET_DIR first, then the
    files bundled with the package."""
    fname = name + ".txt"
    env_dir = os.environ.get("GLOBALSPIN_PRESET_DIR")
    candidates = []
    if env_dir:
        candidates.append(os.path.join(env_dir, fname))
    candidates.append(os.path.join(os.path.dirname(__file__), "presets", fname))
    for c in candidates:
        if os.path.isfile(c):
            return c
    raise FileNotFoundError(f"no preset {name!r} in "
                            + ", ".join(os.path.dirname(c) for c in candidates))


def _emit(report: RunReport, fmt: str, stream=None) -> None:
    stream = stream if stream is not None else sys.stdout
    if fmt == "json-lines":
        print(json.dumps({"kind": "header", "command": report.command,
                          "seed": report.seed,
                          "inputs": [{"path": p, "sha256": d}
                                     for p, d in report.inputs]}), file=stream)
        for c in report.checks:
            print(json.dumps({"kind": "check", "name": c.name,
                              "measured": c.measured,
                              "threshold": c.threshold,
                              "pass": c.passed}), file=stream)
        print(json.dumps({"kind": "summary", "ok": report.ok,
                          "wall_time_s": report.wall_time_s}), file=stream)
        return
    print(f"globalspin {report.command}", file=stream)
    print(f"seed = {report.seed}", file=stream)
    for p, d in report.inputs:
        print(f"input {p} sha256={d}", file=stream)
    for c in report.checks:
        measured = (f"{c.measured:.6e}" if isinstance(c.measured, float)
                    else str(c.measured))
        if c.threshold is None:
            print(f"  {c.name:42s} {measured:>26s}  INFO", file=stream)
        else:
            verdict = "PASS" if c.passed else "FAIL"
            print(f"  {c.name:42s} {measured:>26s}  threshold={c.threshold:g}"
                  f"  {verdict}", file=stream)
    print(f"wall_time_s = {report.wall_time_s:.3f}", file=stream)
    print(f"overall: {'PASS' if report.ok else 'FAIL'}", file=stream)


def _value(name: str, measured) -> CheckResult:
    return CheckResult(name, measured, None, True)


def _bounded_check(name: str, measured: float, threshold: float) -> CheckResult:
    return CheckResult(name, measured, threshold, measured <= threshold)


def _random_pair(rng: np.random.Generator, n: int):
    i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
    return i, j


def _bystanders(rng: np.random.Generator, n: int, i: int, j: int) -> dict:
    return {k: float(rng.uniform(-3.0, 3.0))
            for k in range(n) if k not in (i, j)}


def _suite_swap(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = _random_pair(rng, n)
        c, t = circuits.swap_conjugation(
            reg, i, j, float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)),
            _bystanders(rng, n, i, j))
        rep = circuits.verify_target(c, t, tol)
        worst = max(worst, rep.distance, rep.bystander_deviation)
    return [_bounded_check("swap_conjugation_exact", worst, tol)]


def _suite_dressed(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = _random_pair(rng, n)
        c, expected = circuits.dressed_swap_phase_conjugation(
            reg, i, j, float(rng.uniform(-3, 3)),
            float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        worst = max(worst, max_abs(circuits.evaluate(c) - expected))
    return [_bounded_check("dressed_swap_phase_factor", worst, tol)]


def _suite_cp(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = _random_pair(rng, n)
        c, t = circuits.controlled_phase_circuit(
            reg, i, j, float(rng.uniform(-3, 3)), _bystanders(rng, n, i, j))
        rep = circuits.verify_target(c, t, tol)
        worst = max(worst, rep.distance, rep.bystander_deviation)
    return [_bounded_check("controlled_phase_exact", worst, tol)]


def _suite_xy(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = _random_pair(rng, n)
        c, t = circuits.xy_x_rotation_circuit(
            reg, i, j, float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)),
            _bystanders(rng, n, i, j))
        rep = circuits.verify_target(c, t, tol)
        worst = max(worst, rep.distance, rep.bystander_deviation)
    return [_bounded_check("xy_x_rotation_phase", worst, tol)]


def _suite_xycp(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE):
        n = int(rng.integers(2, 5))
        reg = RegisterSpec(n)
        i, j = _random_pair(rng, n)
        c, t = circuits.xy_controlled_phase_circuit(
            reg, i, j, float(rng.uniform(-3, 3)))
        rep = circuits.verify_target(c, t, tol)
        worst = max(worst, rep.distance, rep.bystander_deviation)
    return [_bounded_check("xy_controlled_phase", worst, tol)]


def _suite_parallel(rng, tol):
    worst = 0.0
    for _ in range(DRAWS_PER_SUITE // 4):
        reg2 = RegisterSpec(2)
        template, _ = circuits.controlled_phase_circuit(
            reg2, 0, 1, float(rng.uniform(-3, 3)))
        for n, pairs in ((4, ((0, 1), (2, 3))), (6, ((0, 1), (2, 3), (4, 5)))):
            reg = RegisterSpec(n)
            c = circuits.parallel_apply(template, pairs, reg)
            target = np.eye(reg.dim, dtype=complex)
            for p, q in pairs:
                target = circuits._diag_zz_phase(reg, p, q, math.pi) @ target
            worst = max(worst, max_abs(circuits.evaluate(c) - target))
    return [_bounded_check("parallel_pair_replication", worst, tol)]


_SUITE_RUNNERS = {"swap": _suite_swap, "dressed": _suite_dressed,
                  "cp": _suite_cp, "xy": _suite_xy, "xycp": _suite_xycp,
                  "parallel": _suite_parallel}


def cmd_verify(args) -> RunReport:
    rng = np.random.default_rng(args.seed)
    names = VERIFY_SUITES if args.suite == "all" else (args.suite,)
    checks = []
    for name in names:
        checks.extend(_SUITE_RUNNERS[name](rng, args.tol))
    return RunReport(command="verify", seed=args.seed, inputs=(),
                     checks=tuple(checks), wall_time_s=0.0)


def cmd_synthesize(args) -> RunReport:
    pr_path = args.problem if os.path.isfile(args.problem) \
        else _preset_path(args.problem)
    with open(pr_path) as fh:
        problem = synth.problem_from_text(fh.read())
    if args.samples is not None or args.tol is not None:
        from dataclasses import replace
        problem = replace(
            problem,
            search_samples=args.samples or problem.search_samples,
            tolerance=args.tol or problem.tolerance)
    result = synth.enumerate_sequences(problem, budget=args.budget,
                                       workers=args.workers,
                                       prune=not args.no_prune,
                                       seed=args.seed)
    out = args.out or (problem.name + ".result.txt")
    with open(out, "w") as fh:
        fh.write(synth.result_to_text(result))
    st = result.stats
    rate = (st.words_total * st.placements) / max(st.elapsed_s, 1e-9)
    checks = [
        _value("words_total", st.words_total),
        _value("placements", st.placements),
        _value("bystander_survivors", st.bystander_survivors),
        _value("pair_candidates", st.pair_candidates),
        _value("candidates_per_second", float(rate)),
        _value("result_file", out),
    ]
    n_sol = len(result.solutions)
    if args.require_solution:
        checks.append(CheckResult("solutions_found", n_sol, 1.0, n_sol >= 1))
    else:
        checks.append(_value("solutions_found", n_sol))
    for k, sol in enumerate(result.solutions):
        checks.append(_bounded_check(f"solution_{k}_distance",
                                     sol.max_distance, problem.tolerance))
    return RunReport(command="synthesize", seed=args.seed,
                     inputs=((pr_path, _sha256_file(pr_path)),),
                     checks=tuple(checks), wall_time_s=0.0)


def _load_geometry(args):
    if args.geometry:
        path = args.geometry
        name = "custom"
    else:
        path = _preset_path(args.preset)
        name = args.preset
    with open(path) as fh:
        geom = device.geometry_from_text(fh.read())
    return geom, name, path


def cmd_device(args) -> RunReport:
    geom, _, path = _load_geometry(args)
    fp = device.field_profile(geom, args.config)
    axis = device.ACTIVE_AXIS[args.config]
    comp = fp.component(axis)
    checks = []
    rows = []
    for k, (bx, bz) in enumerate(fp.site_fields):
        checks.append(_value(f"site{k}_B{axis}_mT", comp[k] * 1e3))
        rows.append((k, bx * 1e3, bz * 1e3))
    for k in range(len(comp) - 1):
        checks.append(_value(f"grad_{k}{k + 1}_mT", abs(comp[k] - comp[k + 1]) * 1e3))
    try:
        const = device.device_constants(fp)
        for k, r in enumerate(const.ratios):
            checks.append(_value(f"ratio_site{k}", r))
    except device.ZeroFieldSite:
        checks.append(_value("ratio_sites", "undefined (zero-field site)"))
    if len(comp) >= 2 and abs(comp[0] - comp[1]) > 0:
        db = abs(comp[0] - comp[1])
        g0 = geom.sites[0].g_factor
        for conv in ZeemanConvention:
            dur = device.pulse_duration(math.pi, db, g0, conv)
            checks.append(_value(f"duration_pi_{conv.value}_ns", dur * 1e9))
        dur_full = device.pulse_duration(math.pi, db, g0,
                                         ZeemanConvention.FULL_GYRO)
        checks.append(_value("gate_time_21_us",
                             device.gate_time_estimate(21, dur_full) * 1e6))
    budget = device.error_budget(21, 1e-4)
    checks.append(_value("per_pulse_budget_21", budget))
    if geom.is_twin_wire:
        try:
            tol_m = device.position_sensitivity(geom, budget, args.config)
            checks.append(_value("position_tolerance_angstrom", tol_m * 1e10))
        except device.NonpositiveGradient:
            pass
    for k, w in enumerate(device.validate_currents(geom)):
        checks.append(CheckResult(f"wire{k}_current_margin_mA",
                                  w.margin_a * 1e3, 0.0,
                                  w.ok))
    checks.append(CheckResult("twin_wire_layout", len(geom.wires), 2.0,
                              geom.is_twin_wire))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("site,Bx_mT,Bz_mT\n")
            for k, bx, bz in rows:
                fh.write(f"{k},{bx:.9g},{bz:.9g}\n")
    return RunReport(command="device", seed=args.seed,
                     inputs=((path, _sha256_file(path)),),
                     checks=tuple(checks), wall_time_s=0.0)


def cmd_schedule(args) -> RunReport:
    geom, name, gpath = _load_geometry(args)
    convention = ZeemanConvention(args.convention)
    inputs = [(gpath, _sha256_file(gpath))]
    checks = []
    if args.simulate_only:
        with open(args.input) as fh:
            s = sched.schedule_from_text(fh.read(), geom)
        inputs.append((args.input, _sha256_file(args.input)))
    else:
        with open(args.input) as fh:
            c = circuits.circuit_from_text(fh.read())
        inputs.append((args.input, _sha256_file(args.input)))
        s = sched.compile_schedule(c, geom, convention,
                                   exchange_duration=args.exchange_ns * 1e-9,
                                   geometry_name=name)
        d = phase_distance(sched.simulate_schedule(s), circuits.evaluate(c))
        checks.append(_bounded_check("round_trip_distance", d, 1e-8))
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(sched.schedule_to_text(s))
            checks.append(_value("schedule_file", args.out))
        # Report the digest of the schedule as serialized, so it is the same
        # number a later --simulate-only run on the written file prints.
        s = sched.schedule_from_text(sched.schedule_to_text(s), geom)
    checks.append(_value("events", len(s.events)))
    checks.append(_value("total_time_us", s.total_time * 1e6))
    checks.append(_value("unitary_digest",
                         sched.unitary_digest(sched.simulate_schedule(s))))
    for item in sched.validate_schedule(s).checks:
        checks.append(CheckResult(item.name, 1.0 if item.ok else 0.0, 1.0,
                                  item.ok))
    return RunReport(command="schedule", seed=args.seed,
                     inputs=tuple(inputs), checks=tuple(checks),
                     wall_time_s=0.0)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="globalspin",
        description="Global-field spin-chain control toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("human", "json-lines"),
                       default="human")

    p = sub.add_parser("verify", help="run the pulse identity suites")
    p.add_argument("--suite", choices=("all",) + VERIFY_SUITES, default="all")
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)

    p = sub.add_parser("synthesize", help="search for pulse sequences")
    p.add_argument("--problem", required=True,
                   help="problem file path or preset name")
    p.add_argument("--budget", type=int, default=synth.DEFAULT_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--require-solution", action="store_true")
    p.add_argument("--out", default=None)
    common(p)

    p = sub.add_parser("device", help="field table and device constants")
    p.add_argument("--preset", default="twin_wire_zigzag")
    p.add_argument("--geometry", default=None, help="geometry file path")
    p.add_argument("--config", choices=(device.PARALLEL, device.ANTIPARALLEL),
                   default=device.PARALLEL)
    p.add_argument("--csv", default=None)
    common(p)

    p = sub.add_parser("schedule", help="compile a circuit to a schedule")
    p.add_argument("input", help="circuit file, or schedule file with "
                                 "--simulate-only")
    p.add_argument("--preset", default="twin_wire_zigzag")
    p.add_argument("--geometry", default=None)
    p.add_argument("--convention",
                   choices=tuple(c.value for c in ZeemanConvention),
                   default=ZeemanConvention.FULL_GYRO.value)
    p.add_argument("--exchange-ns", type=float, default=10.0)
    p.add_argument("--simulate-only", action="store_true")
    p.add_argument("--out", default=None)
    common(p)
    return parser


_COMMANDS = {"verify": cmd_verify, "synthesize": cmd_synthesize,
             "device": cmd_device, "schedule": cmd_schedule}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        report = _COMMANDS[args.command](args)
    except synth.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (sched.UnrealizableAngles, sched.DurationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = RunReport(command=report.command, seed=report.seed,
                       inputs=report.inputs, checks=report.checks,
                       wall_time_s=time.perf_counter() - t0)
    _emit(report, args.format)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
