"""Twin-wire device model: magnetic fields at the spin sites, per-site
amplitude ratios, pulse durations, current limits, and error budgets.

Geometry lives in the x-z plane; wires run along y, so an infinite-line
Biot-Savart field is the default model and the finite cross-section only
enters as a quadrature refinement. Sites sit on the z = 0 plane midway
between the wires; that choice is what makes one field component cancel
exactly in each current configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from scipy import integrate

from .spins import HBAR, MU_BOHR, ZeemanConvention

MU_0 = 4e-7 * math.pi  # T*m/A

PARALLEL = "parallel"
ANTIPARALLEL = "antiparallel"
CUSTOM = "custom"
# Field axis that survives the symmetry cancellation in each configuration.
ACTIVE_AXIS = {PARALLEL: "z", ANTIPARALLEL: "x"}


class PointInsideWire(ValueError):
    """Field requested inside a wire cross-section."""


class QuadratureFailure(RuntimeError):
    """Cross-section integration did not reach the requested accuracy."""


class ZeroFieldSite(ValueError):
    """A site sees no field on the active axis; ratios are undefined."""


class NonpositiveGradient(ValueError):
    """Pulse duration needs a positive field increment."""


@dataclass(frozen=True)
class WireSpec:
    """Current-carrying wire along y. Positions and sizes in meters."""

    center: Tuple[float, float]  # (x, z)
    cross_section: Tuple[float, float]  # (width, height)
    current: float  # amperes, positive along +y
    critical_current_density: float  # A/m^2

    def __post_init__(self) -> None:
        if self.cross_section[0] <= 0 or self.cross_section[1] <= 0:
            raise ValueError(f"cross-section must be positive: {self.cross_section}")

    @property
    def area(self) -> float:
        return self.cross_section[0] * self.cross_section[1]

    def contains(self, point: Tuple[float, float]) -> bool:
        dx = abs(point[0] - self.center[0])
        dz = abs(point[1] - self.center[1])
        return dx <= self.cross_section[0] / 2 and dz <= self.cross_section[1] / 2


@dataclass(frozen=True)
class SpinSite:
    position: Tuple[float, float]  # (x, z) meters
    g_factor: float = 2.0
    row_id: int = 0


@dataclass(frozen=True)
class DeviceGeometry:
    wires: tuple
    sites: tuple

    @property
    def is_twin_wire(self) -> bool:
        return len(self.wires) == 2


@dataclass(frozen=True)
class FieldProfile:
    """Per-site (B^x, B^z) in tesla under one current configuration."""

    config: str
    site_fields: tuple  # of (bx, bz)

    def component(self, axis: str) -> tuple:
        k = 0 if axis == "x" else 1
        return tuple(f[k] for f in self.site_fields)


@dataclass(frozen=True)
class DeviceConstants:
    """Dimensionless per-site ratios a_i (max 1) and the amplitude scale."""

    axis: str
    ratios: tuple
    amplitude_tesla: float
    degenerate_neighbor_pairs: tuple


def line_field(w: WireSpec, point: Tuple[float, float]) -> Tuple[float, float]:
    """Infinite straight-wire field at point: mu0 I/(2 pi |d|^2) (d_z, -d_x)."""
    if w.contains(point):
        raise PointInsideWire(f"point {point} inside wire at {w.center}")
    dx = point[0] - w.center[0]
    dz = point[1] - w.center[1]
    r2 = dx * dx + dz * dz
    coef = MU_0 * w.current / (2.0 * math.pi * r2)
    return (coef * dz, -coef * dx)


def ribbon_field(w: WireSpec, point: Tuple[float, float],
                 rel_tol: float = 1e-6) -> Tuple[float, float]:
    """Field of a uniform current density over the rectangular cross-section.

    Integrates the line kernel over the section with adaptive quadrature.
    Raises QuadratureFailure when the reported error estimate exceeds the
    requested relative tolerance against the field magnitude.
    """
    if w.contains(point):
        raise PointInsideWire(f"point {point} inside wire at {w.center}")
    half_w = w.cross_section[0] / 2
    half_h = w.cross_section[1] / 2
    density = w.current / w.area
    coef = MU_0 * density / (2.0 * math.pi)

    def kernel_x(zp: float, xp: float) -> float:
        dx = point[0] - (w.center[0] + xp)
        dz = point[1] - (w.center[1] + zp)
        return coef * dz / (dx * dx + dz * dz)

    def kernel_z(zp: float, xp: float) -> float:
        dx = point[0] - (w.center[0] + xp)
        dz = point[1] - (w.center[1] + zp)
        return coef * -dx / (dx * dx + dz * dz)

    results = []
    errors = []
    for kernel in (kernel_x, kernel_z):
        val, err = integrate.dblquad(kernel, -half_w, half_w,
                                     -half_h, half_h,
                                     epsabs=0.0, epsrel=rel_tol)
        results.append(val)
        errors.append(err)
    scale = max(math.hypot(*results), 1e-30)
    for err in errors:
        if err > 10.0 * rel_tol * scale:
            raise QuadratureFailure(f"error estimate {err:.3e} vs scale {scale:.3e}")
    return (results[0], results[1])


def field_profile(g: DeviceGeometry, config: str,
                  currents: Optional[Sequence[float]] = None) -> FieldProfile:
    """Superposed line fields at every site under a current configuration.

    parallel keeps the stored currents; antiparallel negates every wire
    after the first; custom uses the currents argument as given.
    """
    if config == PARALLEL:
        eff = [w.current for w in g.wires]
    elif config == ANTIPARALLEL:
        eff = [w.current if k == 0 else -w.current
               for k, w in enumerate(g.wires)]
    elif config == CUSTOM:
        if currents is None or len(currents) != len(g.wires):
            raise ValueError("custom config needs one current per wire")
        eff = list(currents)
    else:
        raise ValueError(f"unknown config {config!r}")
    fields = []
    for site in g.sites:
        bx = 0.0
        bz = 0.0
        for w, cur in zip(g.wires, eff):
            fx, fz = line_field(WireSpec(w.center, w.cross_section, cur,
                                         w.critical_current_density),
                                site.position)
            bx += fx
            bz += fz
        fields.append((bx, bz))
    return FieldProfile(config=config, site_fields=tuple(fields))


def device_constants(fp: FieldProfile, axis: Optional[str] = None) -> DeviceConstants:
    """Normalize the active-axis site fields to ratios with max 1."""
    if axis is None:
        axis = ACTIVE_AXIS.get(fp.config)
        if axis is None:
            raise ValueError("custom profile needs an explicit axis")
    comp = fp.component(axis)
    mags = [abs(b) for b in comp]
    amp = max(mags) if mags else 0.0
    if amp <= 0.0 or any(m <= 0.0 for m in mags):
        raise ZeroFieldSite(f"axis {axis} field vanishes at some site")
    ratios = tuple(m / amp for m in mags)
    degenerate = tuple(
        (k, k + 1) for k in range(len(ratios) - 1)
        if abs(ratios[k] - ratios[k + 1]) < 1e-12)
    return DeviceConstants(axis=axis, ratios=ratios, amplitude_tesla=amp,
                           degenerate_neighbor_pairs=degenerate)


def pulse_duration(delta_theta: float, delta_b: float, g: float,
                   convention: ZeemanConvention) -> float:
    """Duration for a relative rotation delta_theta across increment delta_b."""
    if delta_b <= 0.0:
        raise NonpositiveGradient(f"delta_b = {delta_b}")
    factor = 2.0 if convention is ZeemanConvention.HALF_GYRO else 1.0
    return delta_theta * factor * HBAR / (g * MU_BOHR * delta_b)


@dataclass(frozen=True)
class WireCurrentCheck:
    current_a: float
    limit_a: float
    margin_a: float
    ok: bool


def validate_currents(g: DeviceGeometry) -> tuple:
    """Per-wire check |I| <= J_c * area."""
    checks = []
    for w in g.wires:
        limit = w.critical_current_density * w.area
        checks.append(WireCurrentCheck(current_a=w.current, limit_a=limit,
                                       margin_a=limit - abs(w.current),
                                       ok=abs(w.current) <= limit))
    return tuple(checks)


def error_budget(n_pulses: int, logical_error_target: float) -> float:
    """Per-pulse amplitude accuracy when errors add coherently."""
    if n_pulses < 1:
        raise ValueError(f"n_pulses = {n_pulses}")
    return math.sqrt(logical_error_target) / n_pulses


def gate_time_estimate(n_pulses: int, pulse_duration_s: float) -> float:
    if n_pulses < 0 or pulse_duration_s < 0:
        raise ValueError("inputs must be nonnegative")
    return n_pulses * pulse_duration_s


def _neighbor_gradient(g: DeviceGeometry, config: str) -> float:
    axis = ACTIVE_AXIS[config]
    comp = field_profile(g, config).component(axis)
    return abs(comp[0] - comp[1])


def position_sensitivity(g: DeviceGeometry, per_pulse_error: float,
                         config: str = PARALLEL,
                         step: float = 1e-11) -> float:
    """Wire placement tolerance keeping the relative gradient error within
    per_pulse_error.

    Differentiates the neighbor field increment with respect to each wire
    center coordinate by central differences (step 0.01 nm) and divides the
    allowed increment error by the worst sensitivity.
    """
    if per_pulse_error <= 0.0:
        raise ValueError(f"per_pulse_error = {per_pulse_error}")
    base = _neighbor_gradient(g, config)
    worst = 0.0
    for wk in range(len(g.wires)):
        for coord in (0, 1):
            shifted = []
            for sgn in (+1.0, -1.0):
                wires = list(g.wires)
                w = wires[wk]
                center = list(w.center)
                center[coord] += sgn * step
                wires[wk] = WireSpec(tuple(center), w.cross_section, w.current,
                                     w.critical_current_density)
                shifted.append(_neighbor_gradient(
                    DeviceGeometry(tuple(wires), g.sites), config))
            deriv = abs(shifted[0] - shifted[1]) / (2.0 * step)
            worst = max(worst, deriv)
    if worst == 0.0:
        raise ValueError("gradient insensitive to wire position; check geometry")
    return per_pulse_error * base / worst


def twin_wire_preset(n_sites: int = 4) -> DeviceGeometry:
    """Bundled zig-zag reference layout.

    Two 200x200 nm wires at x = 200 nm, z = +-100 nm carrying 0.7 mA with
    critical current density 2.2e10 A/m^2; sites alternate between x = 0 and
    x = -100 nm on the z = 0 plane, uniform g-factor 2, one row.
    """
    # Lengths built as nm * 1e-9 so the values match a parsed preset file
    # bit for bit; 200e-9 and 200.0 * 1e-9 differ in the last ulp.
    nm = 1e-9
    wires = (
        WireSpec(center=(200.0 * nm, 100.0 * nm),
                 cross_section=(200.0 * nm, 200.0 * nm),
                 current=0.7 * 1e-3, critical_current_density=2.2e10),
        WireSpec(center=(200.0 * nm, -100.0 * nm),
                 cross_section=(200.0 * nm, 200.0 * nm),
                 current=0.7 * 1e-3, critical_current_density=2.2e10),
    )
    sites = tuple(
        SpinSite(position=(0.0 if k % 2 == 0 else -100.0 * nm, 0.0),
                 g_factor=2.0, row_id=0)
        for k in range(n_sites))
    return DeviceGeometry(wires=wires, sites=sites)


def geometry_to_text(g: DeviceGeometry) -> str:
    # repr gives the shortest digits that parse back to the same float, and
    # dividing by the factor the parser multiplies by keeps the round trip
    # exact; scaling by the reciprocal would lose the last ulp.
    lines = []
    for w in g.wires:
        lines.append("[wire]")
        lines.append(f"center_x_nm = {w.center[0] / 1e-9!r}")
        lines.append(f"center_z_nm = {w.center[1] / 1e-9!r}")
        lines.append(f"width_nm = {w.cross_section[0] / 1e-9!r}")
        lines.append(f"height_nm = {w.cross_section[1] / 1e-9!r}")
        lines.append(f"current_mA = {w.current / 1e-3!r}")
        lines.append(f"jc_A_per_m2 = {w.critical_current_density!r}")
        lines.append("")
    for s in g.sites:
        lines.append("[site]")
        lines.append(f"x_nm = {s.position[0] / 1e-9!r}")
        lines.append(f"z_nm = {s.position[1] / 1e-9!r}")
        lines.append(f"g = {s.g_factor!r}")
        lines.append(f"row = {s.row_id}")
        lines.append("")
    return "\n".join(lines)


def geometry_from_text(text: str) -> DeviceGeometry:
    """Parse the block format written by geometry_to_text."""
    wires = []
    sites = []
    block = None
    fields = {}

    def flush() -> None:
        if block is None:
            return
        try:
            if block == "wire":
                wires.append(WireSpec(
                    center=(fields["center_x_nm"] * 1e-9,
                            fields["center_z_nm"] * 1e-9),
                    cross_section=(fields["width_nm"] * 1e-9,
                                   fields["height_nm"] * 1e-9),
                    current=fields["current_mA"] * 1e-3,
                    critical_current_density=fields["jc_A_per_m2"]))
            else:
                sites.append(SpinSite(
                    position=(fields["x_nm"] * 1e-9, fields["z_nm"] * 1e-9),
                    g_factor=fields.get("g", 2.0),
                    row_id=int(fields.get("row", 0))))
        except KeyError as exc:
            raise ValueError(f"[{block}] block missing key {exc}") from exc

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            flush()
            block = line.strip("[]").strip()
            if block not in ("wire", "site"):
                raise ValueError(f"line {lineno}: unknown block {block!r}")
            fields = {}
        else:
            if block is None or "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            fields[key.strip()] = float(val.strip())
    flush()
    if not wires or not sites:
        raise ValueError("geometry needs at least one wire and one site")
    return DeviceGeometry(wires=tuple(wires), sites=tuple(sites))
