"""Per-gate power, duration and phase-flip probability for stabilized cat qubits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erf

from .params import Level, MacroFactors, OperatingPoint, PhysicalConstants, derived_kappa2, epsilon_d


class GateType(enum.Enum):
    PREP_PLUS = "prep_plus"
    ZROT = "zrot"
    CNOT = "cnot"
    DEFLATE = "deflate"
    INFLATE = "inflate"
    DISPLACE = "displace"
    READOUT = "readout"
    IDLE = "idle"


class Role(enum.Enum):
    CONTROL = "control"
    TARGET = "target"


@dataclass(frozen=True)
class GateKind:
    type: GateType
    theta: float = 0.0
    role: Role | None = None
    duration: float = 0.0

    def __post_init__(self):
        if self.type is GateType.ZROT and not 0 < self.theta <= 2 * math.pi:
            raise ValueError(f"rotation angle must lie in (0, 2pi], got {self.theta}")
        if self.type is GateType.CNOT and self.role is None:
            raise ValueError("CNOT needs a role (control or target)")
        if self.type is GateType.IDLE and self.duration < 0:
            raise ValueError("idle duration must be >= 0")

    def label(self) -> str:
        if self.type is GateType.ZROT:
            return f"zrot({self.theta:.12g})"
        if self.type is GateType.CNOT:
            return f"cnot_{self.role.value}"
        if self.type is GateType.IDLE:
            return f"idle({self.duration:.6g})"
        return self.type.value


def prep_plus() -> GateKind:
    return GateKind(GateType.PREP_PLUS)


def zrot(theta: float) -> GateKind:
    return GateKind(GateType.ZROT, theta=float(theta))


def cnot(role: Role) -> GateKind:
    return GateKind(GateType.CNOT, role=role)


def deflate() -> GateKind:
    return GateKind(GateType.DEFLATE)


def inflate() -> GateKind:
    return GateKind(GateType.INFLATE)


def displace() -> GateKind:
    return GateKind(GateType.DISPLACE)


def readout() -> GateKind:
    return GateKind(GateType.READOUT)


def idle(duration: float) -> GateKind:
    return GateKind(GateType.IDLE, duration=float(duration))


def measurement_sequence() -> tuple[GateKind, ...]:
    """X-basis measurement: rotate, deflate, inflate, displace, read out."""
    return (zrot(math.pi / 2), deflate(), inflate(), displace(), readout())


@dataclass(frozen=True)
class GateCost:
    power: Any
    duration: Any
    energy: Any
    pz: Any
    saturated: bool = False


def _levels(level: Level | str, mf: MacroFactors) -> MacroFactors:
    level = Level.parse(level)
    if level is Level.MICRO:
        return MacroFactors(1.0, 1.0, 1.0, 1.0, 1.0)
    if level is Level.MACRO:
        return mf
    raise ValueError("billed level has no per-gate powers; use energy.billed with a scenario")


def pump_power(pc: PhysicalConstants, mf: MacroFactors, op: OperatingPoint, level=None):
    m = _levels(level or op.level, mf)
    return m.M_p * pc.p_const * (pc.kappa_b / 4) * derived_kappa2(pc, op)


def buffer_drive_power(pc: PhysicalConstants, mf: MacroFactors, op: OperatingPoint, level=None):
    m = _levels(level or op.level, mf)
    return m.M_d * pc.d_const * epsilon_d(pc, op) ** 2


def stabilization_power(pc: PhysicalConstants, mf: MacroFactors, op: OperatingPoint, level=None):
    return pump_power(pc, mf, op, level) + buffer_drive_power(pc, mf, op, level)


# ------------------------------------------------------------- error formulas


def zrot_duration(theta, pc: PhysicalConstants, op: OperatingPoint, epsilon_z=None):
    eps = op.epsilon_z if epsilon_z is None else epsilon_z
    return theta / (4 * np.abs(op.alpha) * eps)


def zrot_pz(theta, pc: PhysicalConstants, op: OperatingPoint, epsilon_z=None, thermal: bool = True):
    eps = op.epsilon_z if epsilon_z is None else epsilon_z
    a2 = np.abs(op.alpha) ** 2
    A, B = (pc.memory_thermal, pc.buffer_thermal) if thermal else (1.0, 1.0)
    t = zrot_duration(theta, pc, op, eps)
    k2 = derived_kappa2(pc, op)
    return math.pi * pc.kappa1 * a2 * t * A + eps**2 / (k2 * a2) * t * B


def cnot_duration(op: OperatingPoint, g_cnot=None):
    g = op.g_cnot if g_cnot is None else g_cnot
    return math.pi / (4 * np.abs(op.alpha) * g)


def cnot_control_pz(pc: PhysicalConstants, op: OperatingPoint, g_cnot=None, thermal: bool = True):
    g = op.g_cnot if g_cnot is None else g_cnot
    a = np.abs(op.alpha)
    A, B = (pc.memory_thermal, pc.buffer_thermal) if thermal else (1.0, 1.0)
    k2 = derived_kappa2(pc, op)
    return math.pi / 4 * (pc.kappa1 * a / g * A + g / (k2 * a) * B)


def cnot_target_pz(pc: PhysicalConstants, op: OperatingPoint, g_cnot=None):
    return np.abs(op.alpha) ** 2 * pc.kappa1 * cnot_duration(op, g_cnot)


def deflate_pz(pc: PhysicalConstants, op: OperatingPoint):
    return pc.a1 * pc.kappa1 / derived_kappa2(pc, op) + pc.a2 * pc.nth_m


def inflate_pz(pc: PhysicalConstants, op: OperatingPoint):
    return np.abs(op.alpha) ** 2 * pc.kappa1 / derived_kappa2(pc, op) * pc.memory_thermal


# ---------------------------------------------------------------- readout


def readout_fidelity(t, pc: PhysicalConstants):
    """Probability of a correct longitudinal readout after integrating for ``t``."""
    t = np.asarray(t, dtype=float)
    snr_half = np.sqrt(4 * pc.eta * pc.g_l**2 / pc.kappa_b * (t + 3 / pc.kappa_b))
    return np.exp(-pc.kappa1 * t) * erf(snr_half)


def readout_optimal_time(pc: PhysicalConstants, coarse: int = 4097) -> float:
    """Integration time maximizing readout fidelity on [0, 100/kappa1]."""
    t_max = 100.0 / pc.kappa1
    grid = np.linspace(0.0, t_max, coarse)
    f = readout_fidelity(grid, pc)
    k = int(np.argmax(f))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, coarse - 1)]
    res = minimize_scalar(
        lambda t: -float(readout_fidelity(t, pc)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": max(hi * 1e-12, 1e-300)},
    )
    # the bounded search never evaluates the bracket ends themselves
    cands = [(float(readout_fidelity(x, pc)), -x, x) for x in (lo, float(res.x), hi)]
    return max(cands)[2]


# ---------------------------------------------------------------- inversions


class InfeasibleTarget(ValueError):
    pass


def _quadratic_small_root(u, v, pz):
    """Smaller positive x with u/x + v*x = pz; None where no real root exists."""
    disc = pz**2 - 4 * u * v
    ok = disc >= 0
    root = 2 * u / (pz + np.sqrt(np.where(ok, disc, 0.0)))
    return root, ok


def epsilon_z_for_target_pz(pz_target, theta, pc: PhysicalConstants, op: OperatingPoint, level=None):
    """Z-drive amplitude giving rotation error ``pz_target``.

    The macroscopic form carries the thermal factors of the forward formula and
    inverts it exactly; the microscopic form inverts the thermal-free formula.
    Of the two roots the weaker drive is returned (it stays finite as kappa2 grows).
    """
    thermal = Level.parse(level or op.level) is not Level.MICRO
    a = np.abs(op.alpha)
    A, B = (pc.memory_thermal, pc.buffer_thermal) if thermal else (1.0, 1.0)
    k2 = derived_kappa2(pc, op)
    u = math.pi * pc.kappa1 * a * A * theta / 4
    v = B * theta / (4 * k2 * a**3)
    eps, ok = _quadratic_small_root(u, v, np.asarray(pz_target, dtype=float))
    if not np.all(ok):
        raise InfeasibleTarget("target rotation error below the minimum reachable at this kappa2")
    return eps


def g_cnot_for_target_pz(pz_target, pc: PhysicalConstants, op: OperatingPoint, level=None):
    """CNOT coupling whose control-qubit error equals ``pz_target`` (weaker root)."""
    thermal = Level.parse(level or op.level) is not Level.MICRO
    a = np.abs(op.alpha)
    A, B = (pc.memory_thermal, pc.buffer_thermal) if thermal else (1.0, 1.0)
    k2 = derived_kappa2(pc, op)
    u = math.pi * pc.kappa1 * a * A / 4
    v = math.pi * B / (4 * k2 * a)
    g, ok = _quadratic_small_root(u, v, np.asarray(pz_target, dtype=float))
    if not np.all(ok):
        raise InfeasibleTarget("target CNOT error below the minimum reachable at this kappa2")
    return g


def min_error_g_cnot(pc: PhysicalConstants, op: OperatingPoint):
    """Coupling minimizing the control-qubit error."""
    return np.sqrt(pc.kappa1 * derived_kappa2(pc, op) * np.abs(op.alpha) ** 2 * pc.memory_thermal / pc.buffer_thermal)


def matched_g_cnot(pc: PhysicalConstants, op: OperatingPoint):
    """Coupling whose control error equals the Z(pi/2) error at the same point.

    Where that target is below the reachable minimum, the minimum-error coupling
    is used instead.
    """
    a = np.abs(op.alpha)
    A, B = pc.memory_thermal, pc.buffer_thermal
    k2 = derived_kappa2(pc, op)
    target = zrot_pz(math.pi / 2, pc, op)
    u = math.pi * pc.kappa1 * a * A / 4
    v = math.pi * B / (4 * k2 * a)
    g, ok = _quadratic_small_root(u, v, target)
    return np.where(ok, g, min_error_g_cnot(pc, op))


# ---------------------------------------------------------------- gate costs


def gate_cost(kind: GateKind, pc: PhysicalConstants, mf: MacroFactors, op: OperatingPoint, level=None) -> GateCost:
    level = Level.parse(level or op.level)
    m = _levels(level, mf)
    k2 = derived_kappa2(pc, op)
    p_stab = stabilization_power(pc, mf, op, level)
    t = kind.type
    if t is GateType.PREP_PLUS:
        power, dur, pz = p_stab, 1 / k2, 0.0
    elif t is GateType.ZROT:
        dur = zrot_duration(kind.theta, pc, op)
        power = p_stab + m.M_z * pc.z_const * op.epsilon_z**2
        pz = zrot_pz(kind.theta, pc, op)
    elif t is GateType.CNOT:
        dur = cnot_duration(op)
        if kind.role is Role.TARGET:
            power = m.M_c * pc.c_const * op.g_cnot**2 + p_stab
            pz = cnot_target_pz(pc, op)
        else:
            power = p_stab
            pz = cnot_control_pz(pc, op)
    elif t is GateType.DEFLATE:
        power, dur, pz = pump_power(pc, mf, op, level), pc.a3 / k2, deflate_pz(pc, op)
    elif t is GateType.INFLATE:
        power, dur, pz = p_stab, 1 / k2, inflate_pz(pc, op)
    elif t is GateType.DISPLACE:
        power, dur, pz = 0.0, 0.0, 0.0
    elif t is GateType.READOUT:
        power, dur, pz = m.M_l * pc.l_const * pc.g_l**2, readout_optimal_time(pc), 0.0
    elif t is GateType.IDLE:
        power, dur, pz = p_stab, kind.duration, 0.0
    else:  # pragma: no cover
        raise ValueError(f"unknown gate {kind}")
    pz = np.asarray(pz, dtype=float)
    saturated = bool(np.any(pz > 0.5))
    if saturated:
        pz = np.minimum(pz, 0.5)
    if pz.ndim == 0:
        pz = float(pz)
    return GateCost(power=power, duration=dur, energy=power * dur, pz=pz, saturated=saturated)


class GateTable:
    """Cached gate costs for one (constants, operating point) pair."""

    def __init__(self, pc: PhysicalConstants, mf: MacroFactors, op: OperatingPoint):
        self.pc, self.mf, self.op = pc, mf, op
        self._cache: dict[tuple[GateKind, Level], GateCost] = {}
        self._stab: dict[Level, Any] = {}
        self.channel_cache: dict = {}  # per-step channel factors, filled by the fidelity model

    def cost(self, kind: GateKind, level=None) -> GateCost:
        level = Level.parse(level or self.op.level)
        if level is Level.BILLED:
            level = Level.MACRO  # durations and errors do not depend on the level
        key = (kind, level)
        c = self._cache.get(key)
        if c is None:
            c = gate_cost(kind, self.pc, self.mf, self.op, level)
            self._cache[key] = c
        return c

    def duration(self, kind: GateKind):
        return self.cost(kind, Level.MICRO).duration

    def pz(self, kind: GateKind):
        return self.cost(kind, Level.MICRO).pz

    def stab_power(self, level):
        level = Level.parse(level)
        if level not in self._stab:
            self._stab[level] = stabilization_power(self.pc, self.mf, self.op, level)
        return self._stab[level]
