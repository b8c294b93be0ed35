"""Derived studies built on the core model: gate-vs-FLOP ratios, billed
scenario curves, QEC-interval sweeps and the Monte-Carlo verification suite."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .circuit import StepKind
from .classical import KAIROS
from .energy import billed
from .fidelity import compose_channel, logical_suppression
from .gates import GateTable, Role, cnot, zrot
from .mc import Check, McConfig, enumerate_logical, sample_channel, sample_segmented
from .model import evaluate, resolve_operating_point
from .optimizer import OptimizationResult, SearchSpace, code_for, optimize_levels
from .params import BilledScenario, Config, Level, MachineSpec, OperatingPoint, default_config


@dataclass
class GateFlopRatios:
    z_energy: float
    cnot_energy: float
    z_time: float
    cnot_time: float


def gate_flop_ratios(res: OptimizationResult, cfg: Config, machine: MachineSpec = KAIROS,
                     level: Level | str = Level.MACRO) -> GateFlopRatios:
    """Energy and duration of one Z(pi/2) and one CNOT (both qubits) at an
    optimized point, relative to a single FLOP."""
    eps, kap, _, _ = res.best_point
    op = OperatingPoint(res.alpha, kap, eps, cfg.op.g_cnot, Level.MACRO)
    op = resolve_operating_point(cfg.pc, op, cfg.options)
    t = GateTable(cfg.pc, cfg.mf, op)
    z = t.cost(zrot(math.pi / 2), level)
    ct, cc = t.cost(cnot(Role.TARGET), level), t.cost(cnot(Role.CONTROL), level)
    flop_t = 1.0 / machine.rmax
    return GateFlopRatios(
        z_energy=float(z.energy) / machine.energy_per_flop,
        cnot_energy=float(ct.energy + cc.energy) / machine.energy_per_flop,
        z_time=float(z.duration) / flop_t,
        cnot_time=float(ct.duration) / flop_t,
    )


def billed_curves(
    curve: Sequence[tuple[int, OptimizationResult]],
    scenarios: Sequence[BilledScenario],
) -> dict[str, list[tuple[int, float]]]:
    """Billed energy per scenario from optimized runtimes and qubit counts."""
    out = {}
    for sc in scenarios:
        out[sc.name.value] = [(n, sc.power_per_qubit * r.physical_qubits * r.total_time) for n, r in curve]
    return out


def billed_for(n: int, res: OptimizationResult, cfg: Config, scenario: BilledScenario):
    """Same as ``billed_curves`` for one point, through the timeline path."""
    eps, kap, d, nb = res.best_point
    op = OperatingPoint(res.alpha, kap, eps, cfg.op.g_cnot, Level.MACRO)
    ev = evaluate(n, code_for(d, nb), cfg.pc, cfg.mf, op, cfg.options, levels=())
    return billed(ev.timeline, None, scenario)


def nb_sweep(n_range: Sequence[int], threshold: float, d_c: int, n_b_values: Sequence[int],
             resolution: int = 81, level: Level | str = Level.MACRO, cfg: Config | None = None):
    """Optimal energy at fixed distance for each QEC interval."""
    cfg = cfg or default_config()
    rows = []
    for n in n_range:
        row = {"n": n}
        for nb in n_b_values:
            sp = SearchSpace.restricted(d_c, nb, resolution)
            r = optimize_levels(n, threshold, sp, (level,), cfg)[Level.parse(level)]
            row[nb] = r.energy if r.feasible else math.inf
        rows.append(row)
    return rows


def physical_decay_curve(n_range: Sequence[int], cfg: Config | None = None,
                         alpha: float = 3.0, kappa2_ratio: float = 1000.0, eps_hz: float = 1e6):
    """Total fidelity of the unprotected QFT versus qubit count."""
    cfg = cfg or default_config()
    op = OperatingPoint(alpha, kappa2_ratio, 2 * math.pi * eps_hz, cfg.op.g_cnot, Level.MACRO)
    return [(n, float(evaluate(n, code_for(1, None), cfg.pc, cfg.mf, op, cfg.options, levels=()).fidelity_total))
            for n in n_range]


# ---------------------------------------------------------------- verification


def _random_lists(rng: np.random.Generator, count: int):
    for _ in range(count):
        k = int(rng.integers(1, 12))
        yield list(rng.uniform(0, 0.3, size=k))


def verify_suite(suite: str = "all", samples: int = 1_000_000, seed: int = 12345,
                 cfg: Config | None = None) -> list[Check]:
    cfg = cfg or default_config()
    checks: list[Check] = []
    mc = McConfig(samples=samples, seed=seed)
    rng = np.random.default_rng(seed)
    if suite in ("all", "channel"):
        for i, pz in enumerate(_random_lists(rng, 20)):
            _, p = compose_channel(pz)
            p_hat, se = sample_channel(pz, McConfig(samples, seed + i))
            checks.append(Check(f"channel[{i}] ({len(pz)} gates)", float(p), p_hat, se, mc.confidence_sigma))
    if suite in ("all", "code"):
        for d in range(1, 16, 2):
            for p in (Fraction(1, 100), Fraction(1, 10), Fraction(2, 5)):
                exact = enumerate_logical(p, d, exact=True)
                got = logical_suppression(p, d)
                checks.append(Check(f"binomial tail d={d} p={float(p)}", float(exact), float(got),
                                    0.0, mc.confidence_sigma))
        p_hat, se = sample_segmented([[0.1], [0.1]], 3, 1, mc)
        expect = (1 - (1 - 2 * logical_suppression(0.1, 3)) ** 2) / 2
        checks.append(Check("two segments d=3 p=0.1", expect, p_hat, se, mc.confidence_sigma))
    if suite in ("all", "program"):
        for d, nb in ((3, 1), (3, 2), (5, 1)):
            n = 4
            code = code_for(d, nb)
            op = OperatingPoint(3.0, 300.0, 2 * math.pi * 2e6, cfg.op.g_cnot, Level.MACRO)
            ev = evaluate(n, code, cfg.pc, cfg.mf, op, cfg.options, levels=())
            prog = ev.programs[-1]
            rep = ev.reports[-1]
            table = ev.timeline.table
            segs, cur = [], []
            marks = set(prog.segment_marks)
            for k, s in enumerate(prog.steps):
                if s.kind in (StepKind.ROTATION, StepKind.MEASUREMENT):
                    cur.extend(float(table.pz(g)) for g in s.channel)
                elif k in marks and cur:
                    segs.append(cur)
                    cur = []
            if cur:
                segs.append(cur)
            p_hat, se = sample_segmented(segs, d, nb, mc)
            checks.append(Check(f"last qubit n={n} d={d} n_b={nb}", float(rep.p_total), p_hat, se,
                                mc.confidence_sigma))
    if not checks:
        raise ValueError(f"unknown suite {suite!r}")
    return checks
