"""Least-squares fits of the scaling laws used to summarize sweeps."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares


class FitModel(enum.Enum):
    POWER_LAW = "power_law"  # a n^b + c
    EXP_DECAY = "exp_decay"  # a e^(-b n) + c
    LINEAR = "linear"  # a n + b
    STRETCHED_EXP = "stretched_exp"  # a e^(-b n^c) + d


PARAM_NAMES = {
    FitModel.POWER_LAW: ("a", "b", "c"),
    FitModel.EXP_DECAY: ("a", "b", "c"),
    FitModel.LINEAR: ("a", "b"),
    FitModel.STRETCHED_EXP: ("a", "b", "c", "d"),
}


def _eval(model: FitModel, p: Sequence[float], x: np.ndarray) -> np.ndarray:
    if model is FitModel.POWER_LAW:
        return p[0] * x ** p[1] + p[2]
    if model is FitModel.EXP_DECAY:
        return p[0] * np.exp(-p[1] * x) + p[2]
    if model is FitModel.LINEAR:
        return p[0] * x + p[1]
    return p[0] * np.exp(-p[1] * x ** p[2]) + p[3]


def _basis(model: FitModel, nl: Sequence[float], x: np.ndarray) -> np.ndarray:
    """Columns multiplying the linear parameters for fixed nonlinear ones."""
    if model is FitModel.POWER_LAW:
        f = x ** nl[0]
    elif model is FitModel.EXP_DECAY:
        f = np.exp(-nl[0] * x)
    elif model is FitModel.STRETCHED_EXP:
        f = np.exp(-nl[0] * x ** nl[1])
    else:
        f = x
    return np.column_stack([f, np.ones_like(x)])


def _assemble(model: FitModel, lin: np.ndarray, nl: Sequence[float]) -> list[float]:
    if model is FitModel.LINEAR:
        return [lin[0], lin[1]]
    if model is FitModel.STRETCHED_EXP:
        return [lin[0], nl[0], nl[1], lin[1]]
    return [lin[0], nl[0], lin[1]]


def _coarse_grid(model: FitModel) -> list[tuple[float, ...]]:
    if model is FitModel.POWER_LAW:
        return [(b,) for b in np.geomspace(0.05, 12.0, 120)]
    if model is FitModel.EXP_DECAY:
        return [(b,) for b in np.geomspace(1e-4, 20.0, 120)]
    if model is FitModel.STRETCHED_EXP:
        return list(itertools.product(np.geomspace(1e-4, 20.0, 40), np.geomspace(0.05, 6.0, 40)))
    return [()]


@dataclass
class ScalingFit:
    model: FitModel
    params: dict[str, float]
    residual_norm: float
    start_residual: float
    converged: bool

    def predict(self, x) -> np.ndarray:
        return _eval(self.model, [self.params[k] for k in PARAM_NAMES[self.model]], np.asarray(x, dtype=float))

    def __getitem__(self, key: str) -> float:
        return self.params[key]


def fit(model: FitModel | str, data: Sequence[tuple[float, float]], starts: int = 4) -> ScalingFit:
    """Fit ``model`` to (x, y) pairs.

    Nonlinear exponents are scanned on a coarse log grid with the linear
    coefficients solved exactly at each node; the best few nodes seed a
    damped Gauss-Newton (Levenberg-Marquardt) refinement of all parameters,
    and the best refined fit wins.
    """
    model = FitModel(model) if not isinstance(model, FitModel) else model
    x = np.array([float(a) for a, _ in data])
    y = np.array([float(b) for _, b in data])
    k = len(PARAM_NAMES[model])
    if len(x) < k + 1:
        raise ValueError(f"{model.value} needs at least {k + 1} points")
    if np.ptp(y) == 0:
        raise ValueError("degenerate data: all y values are equal")
    if model in (FitModel.POWER_LAW, FitModel.STRETCHED_EXP) and np.any(x <= 0):
        raise ValueError("x must be positive for this model")

    scale = float(np.max(np.abs(y)))
    ys = y / scale

    def lin_solve(nl):
        A = _basis(model, nl, x)
        with np.errstate(all="ignore"):
            if not np.all(np.isfinite(A)):
                return None, np.inf
            coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        r = A @ coef - ys
        return coef, float(r @ r)

    nodes = []
    for nl in _coarse_grid(model):
        coef, cost = lin_solve(nl)
        if coef is not None and np.isfinite(cost):
            nodes.append((cost, nl, coef))
    if not nodes:
        raise ValueError("no finite starting point for the fit")
    nodes.sort(key=lambda t: t[0])

    def resid(p):
        with np.errstate(all="ignore"):
            return _eval(model, p, x) - ys

    best = None
    for cost0, nl, coef in nodes[: max(1, starts)]:
        p0 = np.array(_assemble(model, coef, nl), dtype=float)
        r0 = float(np.sqrt(cost0))
        if model is FitModel.LINEAR:
            p, ok = p0, True
        else:
            sol = least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
            p = sol.x
            ok = sol.status > 0 and np.all(np.isfinite(p))
            # keep the start if refinement drifted somewhere worse
            if not ok or float(np.linalg.norm(resid(p))) > r0:
                p = p0
        r = float(np.linalg.norm(resid(p)))
        if best is None or r < best[0]:
            best = (r, r0, p, ok)

    r, r0, p, ok = best
    p = list(p)
    # undo the y scaling on the linear parameters
    if model is FitModel.LINEAR:
        p = [p[0] * scale, p[1] * scale]
    elif model is FitModel.STRETCHED_EXP:
        p = [p[0] * scale, p[1], p[2], p[3] * scale]
    else:
        p = [p[0] * scale, p[1], p[2] * scale]
    params = dict(zip(PARAM_NAMES[model], (float(v) for v in p)))
    return ScalingFit(model, params, r * scale, r0 * scale, bool(ok))


def fit_function(model: FitModel) -> Callable:
    return lambda x, *p: _eval(model, p, np.asarray(x, dtype=float))
