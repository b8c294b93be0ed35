"""Energy integration over a timeline at microscopic, macroscopic and billed levels."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .circuit import Step, StepKind, Timeline, layer_duration
from .gates import GateKind, GateTable, GateType
from .params import BilledScenario, Level

CATEGORIES = ("stabilization_idle", "prep", "rotations", "cnots", "measurement", "qec_rounds")

CSV_COLUMNS = ("level", "total_energy_j", "total_time_s", "physical_qubits", "repetitions") + tuple(
    f"{c}_j" for c in CATEGORIES
)


@dataclass
class CostReport:
    level: Level
    total_energy: Any
    total_time: Any
    physical_qubits: int
    breakdown: dict[str, Any] = field(default_factory=dict)
    repetitions_multiplier: int = 1

    def to_dict(self) -> dict[str, Any]:
        def f(x):
            return float(x) if np.ndim(x) == 0 else np.asarray(x).tolist()

        return {
            "level": self.level.value,
            "total_energy_j": f(self.total_energy),
            "total_time_s": f(self.total_time),
            "physical_qubits": self.physical_qubits,
            "repetitions": self.repetitions_multiplier,
            "breakdown_j": {k: f(v) for k, v in self.breakdown.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_row(self) -> list[str]:
        d = self.to_dict()
        vals = [d["level"], d["total_energy_j"], d["total_time_s"], d["physical_qubits"], d["repetitions"]]
        vals += [d["breakdown_j"].get(c, 0.0) for c in CATEGORIES]
        return [v if isinstance(v, str) else repr(v) for v in vals]


def _op_category(step: Step, g: GateKind) -> str:
    if step.kind is StepKind.QEC_ROUND:
        return "qec_rounds"
    if step.kind is StepKind.PREP:
        return "prep"
    if step.kind is StepKind.MEASUREMENT:
        return "measurement"
    return "cnots" if g.type is GateType.CNOT else "rotations"


def step_energy(step: Step, table: GateTable, level: Level) -> dict[str, Any]:
    """Energy of one step split by category. Qubits of the block that are
    powered but not gated hold at stabilization power for the layer."""
    out: dict[str, Any] = {}
    p_stab = table.stab_power(level)
    idle_cat = "qec_rounds" if step.kind is StepKind.QEC_ROUND else "stabilization_idle"
    for layer in step.layers:
        span = layer_duration(layer, table)
        busy = 0.0
        for g, copies in layer.ops:
            c = table.cost(g, level)
            cat = _op_category(step, g)
            out[cat] = out.get(cat, 0.0) + copies * c.energy
            busy = busy + copies * c.duration
        out[idle_cat] = out.get(idle_cat, 0.0) + p_stab * (layer.active * span - busy)
    if step.repeat != 1:
        out = {k: v * step.repeat for k, v in out.items()}
    return out


def _cached_step_energy(tl: Timeline, step: Step, level: Level) -> dict[str, Any]:
    key = (id(step), level)
    hit = tl.energy_cache.get(key)
    if hit is None:
        vkey = (step.kind, step.layers, step.repeat, level)
        value = tl.energy_cache.get(vkey)
        if value is None:
            value = step_energy(step, tl.table, level)
            tl.energy_cache[vkey] = value
        hit = (step, value)  # holding the step keeps its id unique
        tl.energy_cache[key] = hit
    return hit[1]


def account(
    timeline: Timeline,
    pc=None,
    mf=None,
    op=None,
    level: Level | str | None = None,
    repetitions: int = 1,
    scenario: BilledScenario | None = None,
) -> CostReport:
    """Total energy of a scheduled circuit.

    Gate intervals are billed at the gate's power; gaps between a logical
    qubit's steps hold its data qubits at stabilization power; nothing is
    billed after a qubit's readout.
    """
    table = timeline.table
    for given, have in ((pc, table.pc), (mf, table.mf), (op, table.op)):
        if given is not None and given is not have:
            raise ValueError("timeline was scheduled with different parameters")
    level = Level.parse(level or table.op.level)
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if level is Level.BILLED:
        if scenario is None:
            raise ValueError("billed level needs a BilledScenario")
        return billed(timeline, None, scenario)

    counts: Counter[int] = Counter()
    steps: dict[int, Step] = {}
    for prog in timeline.programs:
        for s in prog.steps:
            counts[id(s)] += 1
            steps[id(s)] = s

    breakdown = {c: 0.0 for c in CATEGORIES}
    for sid, cnt in counts.items():
        for cat, e in _cached_step_energy(timeline, steps[sid], level).items():
            breakdown[cat] = breakdown[cat] + cnt * e

    # data qubits waiting between steps
    gap = timeline.data_idle_time()
    breakdown["stabilization_idle"] = breakdown["stabilization_idle"] + table.stab_power(level) * gap

    if repetitions != 1:
        breakdown = {k: v * repetitions for k, v in breakdown.items()}
    total = 0.0
    for c in CATEGORIES:
        total = total + breakdown[c]
    return CostReport(level, total, timeline.total_duration, physical_qubits(timeline), breakdown, repetitions)


def physical_qubits(timeline: Timeline) -> int:
    return sum(p.footprint for p in timeline.programs)


def billed(timeline: Timeline, qubits: int | None, scenario: BilledScenario | None) -> CostReport:
    """Facility energy: per-qubit wall-plug power for every hosted qubit over
    the whole run."""
    if scenario is None:
        raise ValueError("billed energy needs a scenario")
    if qubits is None:
        qubits = physical_qubits(timeline)
    e = scenario.power_per_qubit * qubits * timeline.total_duration
    return CostReport(Level.BILLED, e, timeline.total_duration, qubits, {"billed": e})

