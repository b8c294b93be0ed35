"""Classical FFT energy/time baselines and quantum-classical crossovers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import lambertw as _scipy_lambertw

from .params import MachineSpec

ClassicalMachine = MachineSpec

KAIROS = MachineSpec("KAIROS", 1.0 / 73.282e9, 3.05e15)
EL_CAPITAN = MachineSpec("El Capitan", 29685e3 / 1809.00e15, 1.809e18)
MACHINES = {"kairos": KAIROS, "el_capitan": EL_CAPITAN}


def _log2_exact(N: int) -> int:
    if not isinstance(N, (int, np.integer)) or N < 2 or (N & (N - 1)):
        raise ValueError(f"input length must be a power of two >= 2, got {N}")
    return int(N).bit_length() - 1


def fft_flops(N: int) -> int:
    """Radix-2 FFT operation count, 5 N log2 N."""
    return 5 * int(N) * _log2_exact(N)


def classical_energy(machine: MachineSpec, N: int) -> float:
    return machine.energy_per_flop * fft_flops(N)


def classical_time(machine: MachineSpec, N: int) -> float:
    return fft_flops(N) / machine.rmax


# ---------------------------------------------------------------- Lambert W


class Branch(enum.Enum):
    PRINCIPAL = 0
    MINUS_ONE = -1


_INV_E = math.exp(-1.0)


def lambert_w(branch: Branch | int, y: float, rtol: float = 1e-12) -> float:
    """Real Lambert W on branch 0 or -1, polished by Halley iterations until
    |w e^w - y| <= rtol |y|."""
    branch = Branch(branch) if not isinstance(branch, Branch) else branch
    y = float(y)
    if y < -_INV_E:
        if y > -_INV_E * (1 + 1e-12):
            y = -_INV_E
        else:
            raise ValueError(f"W undefined below -1/e (got {y})")
    if branch is Branch.MINUS_ONE and not y < 0:
        raise ValueError("W_-1 is defined on [-1/e, 0)")
    if y == 0.0:
        return 0.0
    if y == -_INV_E:
        return -1.0
    w = float(np.real(_scipy_lambertw(y, branch.value)))
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - y
        if abs(f) <= rtol * abs(y):
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if step == 0.0:
            break
    return w


# ---------------------------------------------------------------- crossover


@dataclass(frozen=True)
class CrossoverResult:
    x_closed_form: float | None
    x_numeric: float | None
    n_crossover: int | None
    branch_used: Branch | None


def _gap(x: float, gamma: float, beta: float, n: float) -> float:
    """log(beta x 2^x) - log(gamma x^n): positive once the exponential wins."""
    return math.log(beta) + math.log(x) + x * math.log(2) - math.log(gamma) - n * math.log(x)


def crossover_numeric(gamma: float, beta: float, n_degree: float, lo: float = 1.0, hi: float = 512.0) -> float:
    """Larger root of beta x 2^x = gamma x^n by bracketing on [lo, hi]."""
    m = n_degree - 1
    left = max(lo, m / math.log(2)) if m > 0 else lo  # the log-gap is convex with minimum here
    g_left, g_hi = _gap(left, gamma, beta, n_degree), _gap(hi, gamma, beta, n_degree)
    scale = abs(math.log(gamma)) + abs(math.log(beta)) + 1.0
    if g_left > 0:
        if g_left <= 1e-13 * scale:  # curves touch at the minimum
            return left
        raise ValueError("curves never cross in the bracket")
    if g_hi < 0:
        raise ValueError("curves never cross in the bracket")
    if g_left == 0:
        return left
    return brentq(_gap, left, hi, args=(gamma, beta, n_degree), xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def crossover_closed_form(gamma: float, beta: float, n_degree: float) -> CrossoverResult:
    """Crossing of beta x 2^x and gamma x^n through the Lambert W function.

    Both real branches are evaluated; the larger positive root (the point
    where the exponential overtakes the polynomial) is returned and checked
    against a bracketing solve.
    """
    if gamma <= 0 or beta <= 0:
        raise ValueError("gamma and beta must be positive")
    if n_degree <= 1:
        raise ValueError("polynomial degree must exceed 1")
    m = n_degree - 1
    ln2 = math.log(2)
    arg = -(ln2 / m) * math.exp(-math.log(gamma / beta) / m)
    roots = []
    for br in (Branch.MINUS_ONE, Branch.PRINCIPAL):
        try:
            w = lambert_w(br, arg)
        except ValueError:
            continue
        x = -m * w / ln2
        if x > 0:
            roots.append((x, br))
    if not roots:
        raise ValueError("curves never cross")
    x_cf, branch = max(roots, key=lambda r: r[0])
    try:
        x_num = crossover_numeric(gamma, beta, n_degree)
    except ValueError:
        x_num = None  # root beyond the bracket
    return CrossoverResult(x_cf, x_num, math.ceil(x_cf), branch)


# ---------------------------------------------------------------- comparison


class Mode(enum.Enum):
    ENERGY = "energy"
    TIME = "time"


@dataclass
class ComparisonRow:
    n: int
    classical: float
    quantum: float

    @property
    def ratio(self) -> float:
        return self.quantum / self.classical


@dataclass
class Comparison:
    machine: MachineSpec
    mode: Mode
    rows: list[ComparisonRow]
    first_advantage: int | None
    bracketed: bool
    fit_crossover: CrossoverResult | None = None


def classical_value(machine: MachineSpec, n: int, mode: Mode) -> float:
    N = 2**n
    return classical_energy(machine, N) if mode is Mode.ENERGY else classical_time(machine, N)


def beta_for(machine: MachineSpec, mode: Mode) -> float:
    """Prefactor of the classical model beta x 2^x in qubit count x."""
    return 5 * machine.energy_per_flop if mode is Mode.ENERGY else 5 / machine.rmax


def compare(
    quantum_curve: Sequence[tuple[int, float]],
    machine: MachineSpec,
    mode: Mode | str,
) -> Comparison:
    """Side by side quantum vs classical at N = 2^n.

    ``first_advantage`` is the smallest n from which the quantum value stays
    strictly below the classical one for the rest of the curve. ``bracketed``
    is false when the curve never shows the classical side winning, in which
    case the crossover may lie below the sampled range.
    """
    mode = Mode(mode) if not isinstance(mode, Mode) else mode
    rows = [ComparisonRow(int(n), classical_value(machine, int(n), mode), float(q)) for n, q in quantum_curve]
    rows.sort(key=lambda r: r.n)
    first = None
    for r in reversed(rows):
        if r.quantum < r.classical:
            first = r.n
        else:
            break
    bracketed = first is not None and first != rows[0].n
    return Comparison(machine, mode, rows, first, bracketed)
