"""One-call evaluation of the QFT at an operating point (scalar or grid)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from .circuit import QubitProgram, Timeline, build_programs, schedule
from .energy import CostReport, account, billed
from .fidelity import ChannelReport, qubit_fidelity, total_fidelity
from .gates import GateTable, matched_g_cnot
from .params import (
    BilledScenario,
    CodeConfig,
    Level,
    MacroFactors,
    ModelOptions,
    OperatingPoint,
    PhysicalConstants,
)


@dataclass
class Evaluation:
    programs: Sequence[QubitProgram]
    timeline: Timeline
    reports: list[ChannelReport]
    costs: dict[Level, CostReport]

    @property
    def total_time(self):
        return self.timeline.total_duration

    @property
    def fidelity_last(self):
        return self.reports[-1].avg_fidelity

    @property
    def fidelity_total(self):
        return total_fidelity(self.reports)

    @property
    def fidelity_min(self):
        out = self.reports[0].avg_fidelity
        for r in self.reports[1:]:
            out = np.minimum(out, r.avg_fidelity)
        return out

    def energy(self, level: Level | str) -> Any:
        return self.costs[Level.parse(level)].total_energy


@lru_cache(maxsize=64)
def cached_programs(n: int, code: CodeConfig) -> tuple[QubitProgram, ...]:
    return tuple(build_programs(n, code))


def resolve_operating_point(pc: PhysicalConstants, op: OperatingPoint, options: ModelOptions) -> OperatingPoint:
    if options.g_cnot_mode == "matched":
        return op.with_(g_cnot=matched_g_cnot(pc, op))
    return op


def evaluate(
    n: int,
    code: CodeConfig,
    pc: PhysicalConstants,
    mf: MacroFactors,
    op: OperatingPoint,
    options: ModelOptions = ModelOptions(),
    levels: Sequence[Level | str] = (Level.MICRO, Level.MACRO),
    scenario: BilledScenario | None = None,
    resolve_g: bool = True,
) -> Evaluation:
    """Build, schedule and cost the n-qubit QFT; fidelity of every qubit."""
    if resolve_g:
        op = resolve_operating_point(pc, op, options)
    programs = cached_programs(n, code)
    table = GateTable(pc, mf, op)
    tl = schedule(programs, table, options.schedule)
    reports = [qubit_fidelity(p, code, table, options.include_readout_fidelity) for p in tl.programs]
    costs: dict[Level, CostReport] = {}
    for lv in levels:
        lv = Level.parse(lv)
        costs[lv] = billed(tl, None, scenario) if lv is Level.BILLED else account(tl, level=lv)
    return Evaluation(tl.programs, tl, reports, costs)
