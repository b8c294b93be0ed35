"""Independent checks: Monte-Carlo phase-flip sampling and exhaustive
enumeration of repetition-code error patterns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

BLOCK = 1 << 16  # samples per counter block; fixes the stream layout


@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 0
    confidence_sigma: float = 3.0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Philox is counter based: block b starts at a fixed offset of the stream,
    # so results do not depend on how blocks are distributed over workers.
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)).jumped(block))


def _blocks(samples: int):
    for b in range(math.ceil(samples / BLOCK)):
        yield b, min(BLOCK, samples - b * BLOCK)


def _stderr(p_hat: float, samples: int) -> float:
    return math.sqrt(p_hat * (1 - p_hat) / samples)


def sample_channel(pz_list: Sequence[float], cfg: McConfig) -> tuple[float, float]:
    """Fraction of runs with an odd number of flips."""
    p = np.asarray(pz_list, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    odd = 0
    for b, size in _blocks(cfg.samples):
        rng = _block_rng(cfg.seed, b)
        flips = rng.random((size, p.size)) < p
        odd += int(np.count_nonzero(flips.sum(axis=1) & 1))
    p_hat = odd / cfg.samples
    return p_hat, _stderr(p_hat, cfg.samples)


def enumerate_logical(p: float | Fraction, d: int, exact: bool = False) -> float | Fraction:
    """Majority-vote failure probability by visiting all 2^d flip patterns.

    Each pattern is decoded explicitly (majority of the corrupted copies of an
    encoded bit); failing patterns are accumulated with their exact weight.
    """
    if d < 1 or d % 2 == 0:
        raise ValueError("distance must be odd and >= 1")
    if d > 20:
        raise ValueError("enumeration limited to d <= 20")
    q = Fraction(p)
    if not 0 <= q <= 1:
        raise ValueError("probability outside [0, 1]")
    patterns = np.arange(1 << d, dtype=np.int64)
    bits = (patterns[:, None] >> np.arange(d)) & 1  # copy i flipped?
    decoded = bits.sum(axis=1) * 2 > d  # majority of copies now read the wrong value
    weights_by_count = np.bincount(bits.sum(axis=1)[decoded], minlength=d + 1)
    # weight of a pattern with k flips is q^k (1-q)^(d-k); sum exactly in rationals
    total = Fraction(0)
    for k, count in enumerate(weights_by_count):
        if count:
            total += int(count) * q**k * (1 - q) ** (d - k)
    return total if exact else float(total)


def sample_segmented(
    segments: Sequence[Sequence[float]],
    d: int,
    n_b: int | None,
    cfg: McConfig,
) -> tuple[float, float]:
    """Segmented code channel: each segment's gates hit d replicas
    independently, a majority vote corrects, residual flips accumulate.

    ``segments`` lists per-gate flip probabilities grouped by code segment;
    ``n_b`` is informational (segments are already grouped).
    """
    if d < 1 or d % 2 == 0:
        raise ValueError("distance must be odd and >= 1")
    segs = [np.asarray(s, dtype=float) for s in segments]
    parity = 0
    for b, size in _blocks(cfg.samples):
        rng = _block_rng(cfg.seed, b)
        logical = np.zeros(size, dtype=np.int64)
        for s in segs:
            if s.size == 0:
                continue
            flips = rng.random((size, d, s.size)) < s
            replica_flipped = flips.sum(axis=2) & 1
            logical ^= (replica_flipped.sum(axis=1) * 2 > d).astype(np.int64)
        parity += int(np.count_nonzero(logical))
    p_hat = parity / cfg.samples
    return p_hat, _stderr(p_hat, cfg.samples)


@dataclass
class Check:
    name: str
    analytic: float
    sampled: float
    stderr: float
    sigma: float

    @property
    def passed(self) -> bool:
        if self.stderr == 0:
            return abs(self.sampled - self.analytic) < 1e-12
        return abs(self.sampled - self.analytic) <= self.sigma * self.stderr

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: analytic={self.analytic:.6g} sampled={self.sampled:.6g} +/- {self.stderr:.2g}"
