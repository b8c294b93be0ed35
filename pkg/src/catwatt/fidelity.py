"""Phase-flip channel composition, repetition-code suppression and fidelities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.special import bdtrc

from .circuit import QubitProgram, StepKind
from .gates import GateKind, GateTable, readout_fidelity, readout_optimal_time
from .params import CodeConfig

UNDERFLOW = 1e-300


def _check_prob(p, hi=0.5):
    if isinstance(p, Fraction):
        p = float(p)
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(arr > hi) or np.any(np.isnan(arr)):
        raise ValueError(f"probability outside [0, {hi}]")


def compose_channel(pz_list: Sequence[Any]) -> tuple[Any, Any]:
    """Net flip probability of independent phase flips: returns (lambda, p)."""
    lam = 1
    for p in pz_list:
        _check_prob(p)
        if not isinstance(p, Fraction):
            p = np.asarray(p, dtype=float)
        lam = lam * (1 - 2 * p)
    if isinstance(lam, np.ndarray) and lam.ndim == 0:
        lam = float(lam)
    elif isinstance(lam, int):
        lam = 1.0
    return lam, (1 - lam) / 2


def logical_suppression(p, d_c: int):
    """Probability that a majority vote over ``d_c`` flips fails (more than
    (d_c-1)/2 of them flipped). Exact for ``Fraction`` input."""
    if d_c < 1 or d_c % 2 == 0:
        raise ValueError(f"distance must be odd and >= 1, got {d_c}")
    t = (d_c - 1) // 2
    if isinstance(p, Fraction):
        if not 0 <= p <= 1:
            raise ValueError("probability outside [0, 1]")
        return sum(math.comb(d_c, k) * p**k * (1 - p) ** (d_c - k) for k in range(t + 1, d_c + 1))
    _check_prob(p, 1.0)
    p = np.asarray(p, dtype=float)
    if d_c == 1:
        return p if p.ndim else float(p)
    total = bdtrc(t, d_c, p)  # binomial upper tail P(k > t)
    return total if np.ndim(total) else float(total)


def average_fidelity(p_total):
    return 1 - 2 * p_total / 3


@dataclass
class Segment:
    first_step: int
    last_step: int
    p: Any  # uncorrected flip probability of the segment
    p_corrected: Any


@dataclass
class ChannelReport:
    per_gate_pz: list
    lam: Any
    p_total: Any
    avg_fidelity: Any
    segments: list[Segment] = field(default_factory=list)
    underflow: bool = False


PzSource = GateTable | Mapping[GateKind, Any] | Callable[[GateKind], Any]


def _pz_lookup(costs: PzSource) -> Callable[[GateKind], Any]:
    if isinstance(costs, GateTable):
        return costs.pz
    if isinstance(costs, Mapping):
        return costs.__getitem__
    return costs


def qubit_fidelity(
    program: QubitProgram,
    code: CodeConfig | None,
    costs: PzSource,
    include_readout: bool = False,
    cache: dict | None = None,
) -> ChannelReport:
    """Channel of one (logical) qubit.

    Circuit gates (rotations and the measurement) are grouped into segments
    closed by the program's QEC rounds; each segment's flip probability is
    suppressed by the code distance, and segments compose as independent
    channels. Without a code there is a single unsuppressed segment.
    """
    pz_of = _pz_lookup(costs)
    d = program.data_qubits
    if code is not None and code.enabled and d != code.d_c and code.d_c > 1:
        raise ValueError("program was built for a different code distance")
    if cache is None:
        cache = costs.channel_cache if isinstance(costs, GateTable) else {}
    factors = cache
    marks = set(program.segment_marks)

    per_gate: list = []
    segments: list[Segment] = []
    lam_total = 1.0
    seg_lam = 1.0
    seg_start = None
    seg_key: list = []
    last_circuit = None

    def close(end: int):
        nonlocal lam_total, seg_lam, seg_start, seg_key
        key = ("segment", d, tuple(seg_key))
        hit = factors.get(key)
        if hit is None:
            p = (1 - seg_lam) / 2
            if d > 1:
                big_p = logical_suppression(p, d)
                hit = (p, big_p, 1 - 2 * np.asarray(big_p))
            else:
                hit = (p, p, seg_lam)  # keep the product itself; 1 - 2p loses tiny lambdas
            factors[key] = hit
        p, big_p, seg_factor = hit
        segments.append(Segment(seg_start, end, p, big_p))
        lam_total = lam_total * seg_factor
        seg_lam, seg_start, seg_key = 1.0, None, []

    for k, step in enumerate(program.steps):
        if step.kind in (StepKind.ROTATION, StepKind.MEASUREMENT):
            pzs = [pz_of(g) for g in step.channel]
            per_gate.extend(pzs)
            f = factors.get(step.channel)
            if f is None:
                f = 1.0
                for p in pzs:
                    f = f * (1 - 2 * np.asarray(p, dtype=float))
                factors[step.channel] = f
            seg_lam = seg_lam * f
            seg_key.append(step.channel)
            if seg_start is None:
                seg_start = k
            last_circuit = k
        elif k in marks and seg_start is not None:
            close(last_circuit)
    if seg_start is not None:
        close(last_circuit)

    lam = lam_total
    tiny = (np.abs(lam) < UNDERFLOW) & (lam != 0)
    underflow = bool(np.any(tiny))
    if underflow:
        lam = np.where(tiny, 0.0, lam)
    p_total = (1 - np.asarray(lam)) / 2
    fid = average_fidelity(p_total)
    if include_readout:
        pc = costs.pc if isinstance(costs, GateTable) else None
        if pc is None:
            raise ValueError("readout fidelity needs a GateTable with constants")
        fid = fid * float(readout_fidelity(readout_optimal_time(pc), pc))
    if np.ndim(fid) == 0:
        lam, p_total, fid = float(lam), float(p_total), float(fid)
    return ChannelReport(per_gate, lam, p_total, fid, segments, underflow)


def total_fidelity(reports: Sequence[ChannelReport]):
    out = 1.0
    for r in reports:
        out = out * r.avg_fidelity
    return out
