"""Gate programs for the semiclassical QFT and their schedule in time.

A program is a sequence of *steps*. Each step is one logical-level operation
(preparation, conditional rotation, QEC round, measurement) made of parallel
*layers*; a layer lists the physical gates applied at once together with how
many qubits of the block are powered during it. Identical steps are shared
objects, so costs can be cached per step and grid sweeps stay cheap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

import numpy as np

from .gates import (
    GateKind,
    GateTable,
    Role,
    cnot,
    measurement_sequence,
    prep_plus,
    zrot,
)
from .params import CodeConfig


class StepKind(enum.Enum):
    PREP = "prep"
    ROTATION = "rotation"
    QEC_ROUND = "qec_round"
    MEASUREMENT = "measurement"


@dataclass(frozen=True)
class Layer:
    ops: tuple[tuple[GateKind, int], ...]  # (gate, number of physical copies)
    active: int  # powered qubits of the block during the layer

    def __post_init__(self):
        if sum(c for _, c in self.ops) > self.active:
            raise ValueError("more gate copies than active qubits in a layer")


@dataclass(frozen=True)
class Step:
    kind: StepKind
    layers: tuple[Layer, ...]
    repeat: int = 1
    trigger: int | None = None  # qubit whose measurement conditions this step
    channel: tuple[GateKind, ...] = ()  # gates whose error lands on each data qubit

    def gates(self) -> Iterator[GateKind]:
        for _ in range(self.repeat):
            for layer in self.layers:
                for g, copies in layer.ops:
                    for _ in range(copies):
                        yield g


@dataclass(frozen=True)
class QubitProgram:
    qubit_index: int
    steps: tuple[Step, ...]
    data_qubits: int = 1
    footprint: int = 1  # physical qubits hosted for this logical qubit
    segment_marks: tuple[int, ...] = ()  # indices of steps that close a code segment

    def __post_init__(self):
        if list(self.segment_marks) != sorted(set(self.segment_marks)):
            raise ValueError("segment marks must be strictly increasing")
        if not self.steps or self.steps[-1].kind is not StepKind.MEASUREMENT:
            raise ValueError("a program must end with its measurement")

    @property
    def gates(self) -> tuple[GateKind, ...]:
        return tuple(g for s in self.steps for g in s.gates())

    def circuit_steps(self) -> list[int]:
        return [i for i, s in enumerate(self.steps) if s.kind in (StepKind.ROTATION, StepKind.MEASUREMENT)]


@dataclass(frozen=True)
class LogicalLayout:
    n_logical: int
    d_c: int
    n_b: int | None

    @property
    def physical_qubits_per_logical(self) -> int:
        return 2 * self.d_c - 1

    @property
    def ancilla_pool_for_rz(self) -> int:
        return self.d_c


def physical_qubit_count(layout: LogicalLayout) -> int:
    return layout.n_logical * (layout.physical_qubits_per_logical + layout.ancilla_pool_for_rz)


def rotation_angle(target: int, control: int) -> float:
    return math.pi / 2 ** (target - control)


# ------------------------------------------------------------ physical build

_MEAS_CHANNEL = measurement_sequence()


def _measurement_step(copies: int) -> Step:
    layers = tuple(Layer(((g, copies),), copies) for g in _MEAS_CHANNEL)
    return Step(StepKind.MEASUREMENT, layers, channel=_MEAS_CHANNEL)


def build_physical_qft(n: int) -> list[QubitProgram]:
    if n < 1:
        raise ValueError("need at least one qubit")
    prep = Step(StepKind.PREP, (Layer(((prep_plus(), 1),), 1),), channel=(prep_plus(),))
    meas = _measurement_step(1)
    programs = []
    for j in range(n):
        steps = [prep]
        for i in range(j):
            g = zrot(rotation_angle(j, i))
            steps.append(Step(StepKind.ROTATION, (Layer(((g, 1),), 1),), trigger=i, channel=(g,)))
        steps.append(meas)
        programs.append(QubitProgram(j, tuple(steps)))
    return programs


# ------------------------------------------------------------- logical build


def qec_round(d: int) -> Step:
    """d cycles; each cycle preps d-1 ancillas, runs two CNOT layers with the
    neighbouring data qubits and measures the ancillas."""
    a = d - 1
    active = d + a
    ctrl, targ = cnot(Role.CONTROL), cnot(Role.TARGET)
    cycle = (
        Layer(((prep_plus(), a),), active),
        Layer(((targ, a), (ctrl, a)), active),
        Layer(((targ, a), (ctrl, a)), active),
    ) + tuple(Layer(((g, a),), active) for g in _MEAS_CHANNEL)
    return Step(StepKind.QEC_ROUND, cycle, repeat=d)


def logical_rotation(theta: float, d: int, trigger: int) -> Step:
    """Ancilla-assisted rotation: d ancillas entangled transversally, one
    physical rotation on an ancilla, then the inverse CNOT layer."""
    ctrl, targ = cnot(Role.CONTROL), cnot(Role.TARGET)
    g = zrot(theta)
    active = 2 * d
    layers = (
        Layer(((prep_plus(), d),), active),
        Layer(((ctrl, d), (targ, d)), active),
        Layer(((g, 1),), active),
        Layer(((ctrl, d), (targ, d)), active),
    )
    return Step(StepKind.ROTATION, layers, trigger=trigger, channel=(ctrl, g, ctrl))


def build_logical_qft(n: int, code: CodeConfig) -> tuple[list[QubitProgram], LogicalLayout]:
    if n < 1:
        raise ValueError("need at least one qubit")
    if not code.enabled:
        raise ValueError("logical build requires an enabled code")
    d, nb = code.d_c, code.n_b
    layout = LogicalLayout(n, d, nb)
    footprint = 3 * d - 1
    if d == 1:
        # a distance-1 code has no ancillas to check with: the bare circuit
        progs = [
            QubitProgram(p.qubit_index, p.steps, 1, footprint, ()) for p in build_physical_qft(n)
        ]
        return progs, layout

    prep = Step(StepKind.PREP, (Layer(((prep_plus(), d),), d),), channel=(prep_plus(),))
    rnd = qec_round(d)
    meas = _measurement_step(d)
    rot_cache: dict[tuple[float, int], Step] = {}
    programs = []
    for j in range(n):
        steps: list[Step] = [prep] + [rnd] * d
        marks: list[int] = []
        gates_in_segment = 0
        for i in range(j):
            theta = rotation_angle(j, i)
            key = (theta, i)
            if key not in rot_cache:
                rot_cache[key] = logical_rotation(theta, d, i)
            steps.append(rot_cache[key])
            gates_in_segment += 1
            if nb is not None and gates_in_segment == nb:
                marks.append(len(steps))
                steps.append(rnd)
                gates_in_segment = 0
        steps.append(meas)
        programs.append(QubitProgram(j, tuple(steps), d, footprint, tuple(marks)))
    return programs, layout


def build_programs(n: int, code: CodeConfig) -> list[QubitProgram]:
    if code.enabled:
        return build_logical_qft(n, code)[0]
    return build_physical_qft(n)


# ------------------------------------------------------------------ timing


def layer_duration(layer: Layer, table: GateTable):
    durs = [table.duration(g) for g, _ in layer.ops]
    out = durs[0]
    for d in durs[1:]:
        out = np.maximum(out, d)
    return out


def step_duration(step: Step, table: GateTable):
    total = 0.0
    for layer in step.layers:
        total = total + layer_duration(layer, table)
    return total * step.repeat


@dataclass(frozen=True)
class Interval:
    start: Any
    end: Any
    gate: GateKind | Step


class Timeline:
    """When each program's steps run.

    Start times are not stored per step (grid sweeps would need one array per
    step); ``intervals`` replays the deterministic schedule on demand.
    """

    def __init__(self, programs: Sequence[QubitProgram], table: GateTable, mode: str,
                 order: list[tuple[int, int]], starts: list, ends: list, total):
        self.programs = tuple(programs)
        self.table = table
        self.mode = mode
        self.order = order
        self.starts = starts
        self.ends = ends
        self.total_duration = total
        self._by_id: dict[int, tuple[Step, Any]] = {}
        self._by_value: dict[tuple, Any] = {}
        self.energy_cache: dict = {}
        self._idle = None

    def step_duration(self, step: Step):
        hit = self._by_id.get(id(step))
        if hit is not None:
            return hit[1]
        key = (step.layers, step.repeat)
        d = self._by_value.get(key)
        if d is None:
            d = step_duration(step, self.table)
            self._by_value[key] = d
        self._by_id[id(step)] = (step, d)  # keep the step alive so its id stays unique
        return d

    def lifetime(self, q: int):
        return self.ends[q] - self.starts[q]

    def busy_time(self, q: int):
        total = 0.0
        for s in self.programs[q].steps:
            total = total + self.step_duration(s)
        return total

    def data_idle_time(self):
        """Qubit-seconds that data qubits spend waiting between steps."""
        if self._idle is None:
            gap = 0.0
            for q, prog in enumerate(self.programs):
                counts: dict[int, int] = {}
                for s in prog.steps:
                    counts[id(s)] = counts.get(id(s), 0) + 1
                seen = {id(s): s for s in prog.steps}
                busy = 0.0
                for sid, cnt in counts.items():
                    busy = busy + cnt * self.step_duration(seen[sid])
                gap = gap + prog.data_qubits * (self.lifetime(q) - busy)
            self._idle = np.maximum(gap, 0.0)
        return self._idle

    def step_intervals(self) -> list[list[Interval]]:
        out: list[list[Interval]] = [[] for _ in self.programs]
        for q, k, start in _replay(self):
            step = self.programs[q].steps[k]
            out[q].append(Interval(start, start + self.step_duration(step), step))
        return out

    def intervals(self) -> list[list[Interval]]:
        """Per-program physical gate intervals (gates of one layer share a start)."""
        result = []
        for q, ivs in enumerate(self.step_intervals()):
            rows = []
            for iv in ivs:
                t = iv.start
                for _ in range(iv.gate.repeat):
                    for layer in iv.gate.layers:
                        for g, copies in layer.ops:
                            dur = self.table.duration(g)
                            rows.extend(Interval(t, t + dur, g) for _ in range(copies))
                        t = t + layer_duration(layer, self.table)
            result.append(rows)
        return result

    def active_qubits(self, t: float) -> int:
        """Logical qubits alive (prepared, not yet read out) at time ``t``."""
        return sum(1 for q in range(len(self.programs)) if self.starts[q] <= t < self.ends[q])


def _replay(tl: Timeline):
    if tl.mode == "serial":
        t = 0.0
        for q, k in tl.order:
            yield q, k, t
            t = t + tl.step_duration(tl.programs[q].steps[k])
    else:
        meas_end: dict[int, Any] = {}
        for q, prog in enumerate(tl.programs):
            cur = 0.0
            for k, step in enumerate(prog.steps):
                start = cur if step.trigger is None else np.maximum(cur, meas_end[step.trigger])
                yield q, k, start
                cur = start + tl.step_duration(step)
            meas_end[prog.qubit_index] = cur


def _serial_order(programs: Sequence[QubitProgram]) -> list[tuple[int, int]]:
    """Measure qubits one after another; after each measurement apply the
    rotations it conditions, target by target, each followed by any QEC round
    due. A program starts (is prepared) just before its first gate."""
    n = len(programs)
    ptr = [0] * n
    done: set[int] = set()
    order: list[tuple[int, int]] = []
    for j in range(n):
        prog = programs[j]
        while ptr[j] < len(prog.steps):
            s = prog.steps[ptr[j]]
            if s.trigger is not None and s.trigger not in done:
                raise ValueError(f"qubit {prog.qubit_index} depends on unmeasured qubit {s.trigger}")
            order.append((j, ptr[j]))
            ptr[j] += 1
        done.add(prog.qubit_index)
        for i in range(j + 1, n):
            p = programs[i]
            while ptr[i] < len(p.steps):
                s = p.steps[ptr[i]]
                if s.kind is StepKind.MEASUREMENT or (s.trigger is not None and s.trigger not in done):
                    break
                order.append((i, ptr[i]))
                ptr[i] += 1
    return order


def schedule(programs: Sequence[QubitProgram], table: GateTable, mode: str = "serial") -> Timeline:
    """Place every step in time.

    ``serial``: one operation at a time across the whole register.
    ``parallel``: rotations conditioned on one measurement start together on
    all their targets; qubits run independently otherwise.
    """
    if not programs:
        raise ValueError("nothing to schedule")
    progs = sorted(programs, key=lambda p: p.qubit_index)
    n = len(progs)
    starts: list[Any] = [None] * n
    ends: list[Any] = [None] * n
    order: list[tuple[int, int]] = []
    tl = Timeline(progs, table, mode, order, starts, ends, 0.0)
    if mode == "serial":
        order.extend(_serial_order(progs))
    elif mode != "parallel":
        raise ValueError(f"unknown schedule mode {mode!r}")
    for q, k, start in _replay(tl):
        if starts[q] is None:
            starts[q] = start
        if k == len(progs[q].steps) - 1:
            ends[q] = start + tl.step_duration(progs[q].steps[k])
    total = ends[0]
    for e in ends[1:]:
        total = np.maximum(total, e)
    tl.total_duration = total
    return tl
