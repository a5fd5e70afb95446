"""Schedule compilation: lower a pulse circuit onto a device geometry as a
timed sequence of current configurations and exchange windows, and replay a
schedule back into a unitary for round-trip verification.

A field pulse is schedulable only when its per-spin angles are proportional
to the device's site fields under one current configuration; that constraint
is the hardware's defining restriction and violating it is a hard error, not
an approximation.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuits import Circuit, Exchange, GlobalField, XYExchange
from .device import ACTIVE_AXIS, ANTIPARALLEL, PARALLEL, DeviceGeometry, field_profile
from .spins import (HBAR, MU_BOHR, RegisterSpec, ZeemanConvention,
                    ZeemanPulseParams, exchange_unitary, global_field_unitary,
                    zeeman_angles)

DEFAULT_EXCHANGE_DURATION = 10e-9  # seconds
DEFAULT_FIELD_DURATION_CAP = 1e-5  # seconds
# Relative residual allowed when fitting angles to the site-field profile.
REALIZABLE_RTOL = 1e-9

CONFIG_FOR_AXIS = {"z": PARALLEL, "x": ANTIPARALLEL}


class UnrealizableAngles(ValueError):
    """Field pulse angles not proportional to any device profile."""

    def __init__(self, op_index: int, message: str) -> None:
        super().__init__(f"op {op_index}: {message}")
        self.op_index = op_index


class DurationCapExceeded(ValueError):
    def __init__(self, op_index: int, duration: float, cap: float) -> None:
        super().__init__(f"op {op_index}: duration {duration:.3e} s over cap {cap:.3e} s")
        self.op_index = op_index


@dataclass(frozen=True)
class FieldEvent:
    t_start: float  # seconds
    duration: float
    config: str
    sign: int  # +1 keeps the stored currents, -1 reverses both
    current_ma: float


@dataclass(frozen=True)
class ExchangeEvent:
    t_start: float
    duration: float
    pairs: tuple  # of (i, j, xi), mutually disjoint


@dataclass(frozen=True)
class Schedule:
    register: RegisterSpec
    events: tuple
    geometry: DeviceGeometry
    geometry_name: str
    convention: ZeemanConvention
    active_row: int

    @property
    def total_time(self) -> float:
        if not self.events:
            return 0.0
        last = self.events[-1]
        return last.t_start + last.duration


def _site_rates(g: DeviceGeometry, n: int, config: str,
                convention: ZeemanConvention):
    """Per-site angle accumulation rates (rad/s) on the active axis."""
    axis = ACTIVE_AXIS[config]
    comp = field_profile(g, config).component(axis)[:n]
    divisor = 2.0 if convention is ZeemanConvention.HALF_GYRO else 1.0
    return [g.sites[k].g_factor * MU_BOHR / (divisor * HBAR) * comp[k]
            for k in range(n)]


def compile_schedule(c: Circuit, g: DeviceGeometry,
                     convention: ZeemanConvention = ZeemanConvention.FULL_GYRO,
                     exchange_duration: float = DEFAULT_EXCHANGE_DURATION,
                     field_duration_cap: float = DEFAULT_FIELD_DURATION_CAP,
                     geometry_name: str = "custom") -> Schedule:
    """Lower a circuit to a timed schedule on the given geometry.

    Field ops map to the configuration serving their axis (z -> parallel,
    x -> antiparallel); the signed proportionality scalar between the angle
    list and the site rates fixes duration and current direction. Exchange
    ops become windows of the default duration unless hinted; consecutive
    exchanges on disjoint pairs merge into one simultaneous event.
    """
    n = c.register.n_spins
    if len(g.sites) < n:
        raise ValueError(f"geometry has {len(g.sites)} sites, register needs {n}")
    rates = {cfg: _site_rates(g, n, cfg, convention)
             for cfg in (PARALLEL, ANTIPARALLEL)}
    current_ma = abs(g.wires[0].current) * 1e3
    events = []
    t = 0.0
    run: list = []  # accumulating (i, j, xi, duration) for one exchange event
    run_spins: set = set()

    def flush_run() -> None:
        nonlocal t, run, run_spins
        if not run:
            return
        duration = max(d for (_, _, _, d) in run)
        events.append(ExchangeEvent(
            t_start=t, duration=duration,
            pairs=tuple((i, j, xi) for (i, j, xi, _) in run)))
        t += duration
        run = []
        run_spins = set()

    for idx, op in enumerate(c.ops):
        if isinstance(op, Exchange):
            if {op.i, op.j} & run_spins:
                flush_run()
            run.append((op.i, op.j, op.xi,
                        op.duration_hint if op.duration_hint else exchange_duration))
            run_spins |= {op.i, op.j}
            continue
        flush_run()
        if isinstance(op, XYExchange):
            raise UnrealizableAngles(idx, "planar exchange has no device configuration")
        if not isinstance(op, GlobalField):
            raise TypeError(f"not a pulse op: {op!r}")
        config = CONFIG_FOR_AXIS.get(op.axis)
        if config is None:
            raise UnrealizableAngles(idx, f"no configuration drives axis {op.axis!r}")
        w = rates[config]
        angles = op.angles
        if all(abs(a) < 1e-15 for a in angles):
            continue  # identity pulse, nothing to schedule
        denom = sum(r * r for r in w)
        scale = sum(a * r for a, r in zip(angles, w)) / denom
        worst = max(abs(a - scale * r) for a, r in zip(angles, w))
        if worst > REALIZABLE_RTOL * max(abs(a) for a in angles):
            raise UnrealizableAngles(
                idx, f"angles not proportional to the {config} profile "
                     f"(residual {worst:.3e})")
        duration = abs(scale)
        if duration > field_duration_cap:
            raise DurationCapExceeded(idx, duration, field_duration_cap)
        events.append(FieldEvent(t_start=t, duration=duration, config=config,
                                 sign=1 if scale >= 0 else -1,
                                 current_ma=current_ma))
        t += duration
    flush_run()
    rows = {g.sites[s].row_id
            for e in events if isinstance(e, ExchangeEvent)
            for (i, j, _) in e.pairs for s in (i, j)}
    if len(rows) > 1:
        raise ValueError(f"exchange pairs span rows {sorted(rows)}; one row only")
    return Schedule(register=c.register, events=tuple(events), geometry=g,
                    geometry_name=geometry_name, convention=convention,
                    active_row=rows.pop() if rows else 0)


def simulate_schedule(s: Schedule) -> np.ndarray:
    """Replay the schedule into a unitary, first event applied first."""
    n = s.register.n_spins
    u = np.eye(s.register.dim, dtype=complex)
    gf = [site.g_factor for site in s.geometry.sites[:n]]
    for ev in s.events:
        if isinstance(ev, FieldEvent):
            axis = ACTIVE_AXIS[ev.config]
            comp = field_profile(s.geometry, ev.config).component(axis)[:n]
            signed = [ev.sign * b for b in comp]
            angles = zeeman_angles(gf, signed, ev.duration, s.convention)
            pulse = global_field_unitary(
                s.register, ZeemanPulseParams(axis, angles))
            u = pulse @ u
        elif isinstance(ev, ExchangeEvent):
            for (i, j, xi) in ev.pairs:
                u = exchange_unitary(s.register, i, j, xi) @ u
        else:
            raise TypeError(f"not an event: {ev!r}")
    return u


@dataclass(frozen=True)
class ScheduleCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ScheduleReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def validate_schedule(s: Schedule, g: Optional[DeviceGeometry] = None) -> ScheduleReport:
    """Itemized constraint report: timing, currents, pair and row addressing."""
    from .device import validate_currents
    geom = g if g is not None else s.geometry
    checks = []
    overlap_ok = True
    detail = "events strictly sequential"
    prev_end = -math.inf
    for ev in s.events:
        if ev.duration <= 0:
            overlap_ok = False
            detail = f"nonpositive duration at t={ev.t_start}"
            break
        if ev.t_start < prev_end - 1e-12:
            overlap_ok = False
            detail = f"overlap at t={ev.t_start}"
            break
        prev_end = ev.t_start + ev.duration
    checks.append(ScheduleCheck("non_overlap", overlap_ok, detail))
    cur = validate_currents(geom)
    detail = "; ".join(f"|I|={w.current_a * 1e3:.3f} mA limit={w.limit_a * 1e3:.3f} mA"
                       for w in cur)
    # Field rows carry the drive current only as an annotation; simulation
    # uses the geometry's configured current, so a disagreeing annotation
    # means the file no longer describes this geometry.
    drive_ma = abs(geom.wires[0].current) * 1e3
    mismatched = [ev for ev in s.events
                  if isinstance(ev, FieldEvent)
                  and abs(ev.current_ma - drive_ma) > 1e-9 * max(drive_ma, 1.0)]
    if mismatched:
        ev = mismatched[0]
        detail += (f"; event at t={ev.t_start * 1e9:.6f} ns records "
                   f"{ev.current_ma} mA, geometry drives {drive_ma} mA")
    checks.append(ScheduleCheck(
        "current_limits", all(w.ok for w in cur) and not mismatched, detail))
    disjoint_ok = True
    detail = "exchange pairs disjoint"
    for ev in s.events:
        if isinstance(ev, ExchangeEvent):
            spins = [s_ for (i, j, _) in ev.pairs for s_ in (i, j)]
            if len(spins) != len(set(spins)):
                disjoint_ok = False
                detail = f"shared spin in event at t={ev.t_start}"
                break
    checks.append(ScheduleCheck("pair_disjointness", disjoint_ok, detail))
    row_ok = True
    detail = f"active row {s.active_row}"
    for ev in s.events:
        if isinstance(ev, ExchangeEvent):
            for (i, j, _) in ev.pairs:
                for spin in (i, j):
                    if geom.sites[spin].row_id != s.active_row:
                        row_ok = False
                        detail = f"spin {spin} outside row {s.active_row}"
    checks.append(ScheduleCheck("row_addressing", row_ok, detail))
    mixed_ok = all(isinstance(ev, (FieldEvent, ExchangeEvent)) for ev in s.events)
    checks.append(ScheduleCheck("event_kinds", mixed_ok,
                                "field and exchange windows never overlap"))
    return ScheduleReport(checks=tuple(checks))


def schedule_to_text(s: Schedule) -> str:
    """Header plus one event per line; times in ns with 6 decimals."""
    lines = [f"SCHEDULE register={s.register.n_spins} "
             f"geometry={s.geometry_name} convention={s.convention.value} "
             f"active_row={s.active_row}"]
    for ev in s.events:
        t_ns = ev.t_start * 1e9
        d_ns = ev.duration * 1e9
        if isinstance(ev, FieldEvent):
            lines.append(f"F {t_ns:.6f} {d_ns:.6f} {ev.config} "
                         f"{ev.sign:+d} {ev.current_ma!r}")
        else:
            pairs = ",".join(f"({i},{j},{xi:.17g})" for (i, j, xi) in ev.pairs)
            lines.append(f"E {t_ns:.6f} {d_ns:.6f} {pairs}")
    return "\n".join(lines) + "\n"


def schedule_from_text(text: str, geometry: DeviceGeometry) -> Schedule:
    register = None
    convention = None
    geometry_name = "custom"
    active_row = 0
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "SCHEDULE":
                kv = dict(p.split("=", 1) for p in parts[1:])
                register = RegisterSpec(int(kv["register"]))
                convention = ZeemanConvention(kv["convention"])
                geometry_name = kv.get("geometry", "custom")
                active_row = int(kv.get("active_row", 0))
            elif parts[0] == "F":
                events.append(FieldEvent(
                    t_start=float(parts[1]) * 1e-9,
                    duration=float(parts[2]) * 1e-9,
                    config=parts[3], sign=int(parts[4]),
                    current_ma=float(parts[5])))
            elif parts[0] == "E":
                pairs = []
                for chunk in parts[3].split("),"):
                    i, j, xi = chunk.strip("()").split(",")
                    pairs.append((int(i), int(j), float(xi)))
                events.append(ExchangeEvent(
                    t_start=float(parts[1]) * 1e-9,
                    duration=float(parts[2]) * 1e-9,
                    pairs=tuple(pairs)))
            else:
                raise ValueError(f"unknown directive {parts[0]!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if register is None or convention is None:
        raise ValueError("missing SCHEDULE header")
    return Schedule(register=register, events=tuple(events), geometry=geometry,
                    geometry_name=geometry_name, convention=convention,
                    active_row=active_row)


def unitary_digest(u: np.ndarray) -> str:
    """Phase-normalized sha256 fingerprint of a unitary, for golden checks."""
    u = np.asarray(u, dtype=complex)
    flat_index = int(np.argmax(np.abs(u)))
    anchor = u.flat[flat_index]
    normalized = u / (anchor / abs(anchor))
    # +0.0 collapses -0.0 so the byte image is sign-of-zero stable.
    re = np.round(normalized.real, 9) + 0.0
    im = np.round(normalized.imag, 9) + 0.0
    h = hashlib.sha256()
    h.update(str(u.shape).encode())
    h.update(re.tobytes())
    h.update(im.tobytes())
    return h.hexdigest()
