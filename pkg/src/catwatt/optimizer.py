"""Exhaustive grid search for the minimum-energy QFT under a fidelity floor."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .fitting import FitModel, ScalingFit, fit  # noqa: F401  (re-exported)
from .model import evaluate
from .params import TWO_PI, CodeConfig, Config, Level, OperatingPoint, default_config


@dataclass(frozen=True)
class SearchSpace:
    """Candidate values; ``epsilon_z_grid`` holds angular rates."""

    epsilon_z_grid: tuple[float, ...]
    kappa2_ratio_grid: tuple[float, ...]
    d_c_set: tuple[int, ...]
    n_b_set: tuple[int | None, ...]
    alpha: float = 3.0

    def __post_init__(self):
        for name in ("epsilon_z_grid", "kappa2_ratio_grid", "d_c_set", "n_b_set"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} is empty")
        if any(d % 2 == 0 or d < 1 for d in self.d_c_set):
            raise ValueError("code distances must be odd")

    @classmethod
    def grid(
        cls,
        resolution: int = 81,
        eps_range_hz: tuple[float, float] = (0.5e6, 40.5e6),
        kappa_range: tuple[float, float] = (100.0, 50000.0),
        d_c_set: Iterable[int] = range(5, 26, 2),
        n_b_set: Iterable[int | None] = (1, 2, 3),
        alpha: float = 3.0,
    ) -> "SearchSpace":
        """Linear grid in epsilon_z (given /2pi in Hz), log grid in kappa2/kappa1."""
        eps = tuple(float(TWO_PI * e) for e in np.linspace(*eps_range_hz, resolution))
        kap = tuple(float(k) for k in np.geomspace(*kappa_range, resolution))
        return cls(eps, kap, tuple(d_c_set), tuple(n_b_set), alpha)

    @classmethod
    def restricted(cls, d_c: int = 5, n_b: int = 1, resolution: int = 81, **kw) -> "SearchSpace":
        return cls.grid(resolution, d_c_set=(d_c,), n_b_set=(n_b,), **kw)

    @property
    def size(self) -> int:
        return len(self.epsilon_z_grid) * len(self.kappa2_ratio_grid) * len(self.d_c_set) * len(self.n_b_set)


@dataclass
class OptimizationResult:
    best_point: tuple[float, float, int, int | None]  # (epsilon_z, kappa2_ratio, d_c, n_b)
    energy: float
    last_qubit_fidelity: float
    feasible: bool
    evaluations: int
    level: Level = Level.MACRO
    total_time: float = math.nan
    total_fidelity: float = math.nan
    g_cnot: float = math.nan
    physical_qubits: int = 0
    alpha: float = 3.0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def epsilon_z(self) -> float:
        return self.best_point[0]

    @property
    def kappa2_ratio(self) -> float:
        return self.best_point[1]

    @property
    def d_c(self) -> int:
        return self.best_point[2]

    @property
    def n_b(self) -> int | None:
        return self.best_point[3]


def code_for(d_c: int, n_b: int | None) -> CodeConfig:
    return CodeConfig(d_c, n_b, enabled=d_c > 1) if d_c > 1 else CodeConfig(1, None, False)


def _nb_key(nb: int | None) -> float:
    return math.inf if nb is None else nb


def optimize_levels(
    n: int,
    threshold: float,
    space: SearchSpace,
    levels: Sequence[Level | str] = (Level.MACRO,),
    cfg: Config | None = None,
    verify: bool = True,
) -> dict[Level, OptimizationResult]:
    """Grid search shared across energy levels (durations and fidelities do
    not depend on the level, so one evaluation serves all of them)."""
    if not 2 / 3 < threshold <= 1:
        raise ValueError("threshold must lie in (2/3, 1]")
    cfg = cfg or default_config()
    levels = [Level.parse(lv) for lv in levels]
    if Level.BILLED in levels:
        raise ValueError("billed energy is derived from a macro-optimal schedule, not searched")
    K = np.asarray(space.kappa2_ratio_grid, dtype=float)[:, None]
    E = np.asarray(space.epsilon_z_grid, dtype=float)[None, :]
    shape = (K.shape[0], E.shape[1])
    g_fixed = cfg.op.g_cnot
    op = OperatingPoint(space.alpha, K, E, g_fixed, Level.MACRO)

    cands: dict[Level, list] = {lv: [] for lv in levels}
    best_f = None
    evaluations = 0
    for d in sorted(space.d_c_set):
        for nb in sorted(space.n_b_set, key=_nb_key):
            code = code_for(d, nb)
            ev = evaluate(n, code, cfg.pc, cfg.mf, op, cfg.options, levels)
            evaluations += shape[0] * shape[1]
            F = np.broadcast_to(ev.fidelity_last, shape)
            ok = F >= threshold
            for lv in levels:
                en = np.broadcast_to(ev.energy(lv), shape)
                if ok.any():
                    i = int(np.argmin(np.where(ok, en, np.inf)))
                    r, c = divmod(i, shape[1])
                    key = (float(en[r, c]), d, float(K[r, 0]), float(E[0, c]), _nb_key(nb))
                    cands[lv].append((key, (E[0, c], K[r, 0], d, nb), r, c, ev))
            i = int(np.argmax(F))
            r, c = divmod(i, shape[1])
            fkey = (-float(F[r, c]), d, float(K[r, 0]), float(E[0, c]), _nb_key(nb))
            if best_f is None or fkey < best_f[0]:
                best_f = (fkey, (E[0, c], K[r, 0], d, nb), r, c, ev)

    out: dict[Level, OptimizationResult] = {}
    for lv in levels:
        feasible = bool(cands[lv])
        key, point, r, c, ev = min(cands[lv], key=lambda t: t[0]) if feasible else best_f
        res = OptimizationResult(
            best_point=(float(point[0]), float(point[1]), int(point[2]), point[3]),
            energy=float(np.broadcast_to(ev.energy(lv), shape)[r, c]),
            last_qubit_fidelity=float(np.broadcast_to(ev.fidelity_last, shape)[r, c]),
            feasible=feasible,
            evaluations=evaluations,
            level=lv,
            total_time=float(np.broadcast_to(ev.total_time, shape)[r, c]),
            total_fidelity=float(np.broadcast_to(ev.fidelity_total, shape)[r, c]),
            g_cnot=float(np.broadcast_to(ev.timeline.table.op.g_cnot, shape)[r, c]),
            physical_qubits=ev.costs[lv].physical_qubits,
            alpha=space.alpha,
        )
        if verify and feasible:
            check = evaluate_point(n, res, cfg)
            res.extra["verified_fidelity"] = check
            if check < threshold:
                raise RuntimeError(f"optimum failed re-evaluation: fidelity {check} < {threshold}")
        out[lv] = res
    return out


def evaluate_point(n: int, res: OptimizationResult, cfg: Config) -> float:
    """Last-qubit fidelity recomputed from scratch at a single point."""
    eps, kap, d, nb = res.best_point
    op = OperatingPoint(res.alpha, kap, eps, cfg.op.g_cnot, Level.MACRO)
    ev = evaluate(n, code_for(d, nb), cfg.pc, cfg.mf, op, cfg.options, levels=())
    return float(ev.fidelity_last)


def optimize(
    n: int,
    threshold: float,
    space: SearchSpace,
    level: Level | str = Level.MACRO,
    cfg: Config | None = None,
) -> OptimizationResult:
    return optimize_levels(n, threshold, space, (level,), cfg)[Level.parse(level)]


def _one(args):
    n, threshold, space, levels, cfg = args
    return n, optimize_levels(n, threshold, space, levels, cfg)


def scaling_curves(
    n_range: Sequence[int],
    threshold: float,
    space: SearchSpace,
    levels: Sequence[Level | str] = (Level.MICRO, Level.MACRO),
    cfg: Config | None = None,
    workers: int = 1,
) -> dict[Level, list[tuple[int, OptimizationResult]]]:
    """Independent optimization at every n, for several levels at once."""
    ns = list(n_range)
    if not ns:
        raise ValueError("empty n range")
    if ns != sorted(ns):
        raise ValueError("n range must be ascending")
    cfg = cfg or default_config()
    levels = [Level.parse(lv) for lv in levels]
    jobs = [(n, threshold, space, levels, cfg) for n in ns]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]
    return {lv: [(n, r[lv]) for n, r in results] for lv in levels}


def scaling_curve(
    n_range: Sequence[int],
    threshold: float,
    space: SearchSpace,
    level: Level | str = Level.MACRO,
    cfg: Config | None = None,
    workers: int = 1,
) -> list[tuple[int, OptimizationResult]]:
    return scaling_curves(n_range, threshold, space, (level,), cfg, workers)[Level.parse(level)]


def fit_power_law(curve: Sequence[tuple[int, OptimizationResult]], attr: str = "energy") -> ScalingFit:
    return fit(FitModel.POWER_LAW, [(n, getattr(r, attr)) for n, r in curve])
