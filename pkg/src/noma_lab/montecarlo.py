"""Monte Carlo estimators over Rayleigh fading.

Samples are split into fixed chunks of ``chunk_size`` realizations; chunk
``c`` is drawn from stream ``(seed, c)``.  Chunks may be evaluated on any
number of worker threads but are always reduced in chunk order, so every
estimate depends only on ``(seed, samples, chunk_size)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import SeededStream, sample_block
from .model import (ChannelRealization, OutageSpec, Scheme, SystemParams,
                    snr_breakdown)

__all__ = [
    "McConfig",
    "Estimate",
    "OutageSpec",
    "default_workers",
    "estimate_ergodic_sum_rate",
    "estimate_per_symbol_rates",
    "estimate_outage",
    "estimate_outage_detail",
    "estimate_outage_capacity",
    "simulate_snrs",
]

WORKERS_ENV = "NOMA_LAB_WORKERS"
CAPACITY_RTOL = 1e-4
CAPACITY_BATCHES = 20


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self) -> None:
        if int(self.samples) < 1:
            raise ValueError("samples must be >= 1")
        if int(self.chunk_size) < 1:
            raise ValueError("chunk_size must be >= 1")
        SeededStream(self.seed)  # range check

    def chunks(self) -> list[tuple[int, int]]:
        """``(stream_id, count)`` for every chunk in reduction order."""
        n_full, rest = divmod(self.samples, self.chunk_size)
        out = [(c, self.chunk_size) for c in range(n_full)]
        if rest:
            out.append((n_full, rest))
        return out


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    samples: int

    def __float__(self) -> float:
        return self.mean


class _Moments:
    """Running count / mean / sum of squared deviations (pairwise merge)."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self) -> None:
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def merge(self, values: np.ndarray) -> None:
        nb = values.size
        if nb == 0:
            return
        mb = float(values.mean())
        m2b = float(((values - mb) ** 2).sum())
        n = self.n + nb
        delta = mb - self.mean
        self.mean += delta * nb / n
        self.m2 += m2b + delta * delta * self.n * nb / n
        self.n = n

    def estimate(self) -> Estimate:
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return Estimate(self.mean, math.sqrt(var / self.n), self.n)


def _map_chunks(fn: Callable[[ChannelRealization], object], params: SystemParams,
                mc: McConfig, workers: int | None):
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")

    def run(chunk):
        stream_id, count = chunk
        return fn(sample_block(params, SeededStream(mc.seed, stream_id), count))

    chunks = mc.chunks()
    if workers == 1 or len(chunks) == 1:
        return [run(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, chunks))


def _fold(per_chunk: list[tuple[np.ndarray, ...]]) -> list[Estimate]:
    acc = [_Moments() for _ in per_chunk[0]]
    for values in per_chunk:
        for a, v in zip(acc, values):
            a.merge(v)
    return [a.estimate() for a in acc]


def simulate_snrs(scheme: Scheme, params: SystemParams, mc: McConfig,
                  workers: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Effective SNRs ``(s1, s2, s3)`` of every realization, in sample order."""
    scheme = Scheme.parse(scheme)
    parts = _map_chunks(lambda ch: snr_breakdown(scheme, params, ch), params, mc, workers)
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def estimate_per_symbol_rates(scheme: Scheme, params: SystemParams, mc: McConfig,
                              workers: int | None = None) -> tuple[Estimate, Estimate, Estimate]:
    """Ergodic half-rates of ``x1``, ``x2`` and ``xr``."""
    scheme = Scheme.parse(scheme)

    def fn(ch):
        return tuple(0.5 * np.log2(1.0 + s) for s in snr_breakdown(scheme, params, ch))

    return tuple(_fold(_map_chunks(fn, params, mc, workers)))


def estimate_ergodic_sum_rate(scheme: Scheme, params: SystemParams, mc: McConfig,
                              workers: int | None = None) -> Estimate:
    """Ergodic sum rate (bits/s/Hz) with its standard error."""
    scheme = Scheme.parse(scheme)

    def fn(ch):
        s1, s2, s3 = snr_breakdown(scheme, params, ch)
        return (0.5 * np.log2(1.0 + s1) + 0.5 * np.log2(1.0 + s2) + 0.5 * np.log2(1.0 + s3),)

    return _fold(_map_chunks(fn, params, mc, workers))[0]


def _binomial(hits: int, n: int) -> Estimate:
    p = hits / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)


def estimate_outage_detail(scheme: Scheme, params: SystemParams, spec: OutageSpec,
                           mc: McConfig, workers: int | None = None) -> dict[str, Estimate]:
    """System outage plus per-symbol outages ``x1``, ``x2``, ``xr``."""
    scheme = Scheme.parse(scheme)
    w1, w2, wr = spec.w1, spec.w2, spec.wr

    def fn(ch):
        s1, s2, s3 = snr_breakdown(scheme, params, ch)
        o1, o2, o3 = s1 <= w1, s2 <= w2, s3 <= wr
        return (int(np.count_nonzero(o1 | o2 | o3)), int(np.count_nonzero(o1)),
                int(np.count_nonzero(o2)), int(np.count_nonzero(o3)))

    counts = np.zeros(4, dtype=np.int64)
    for c in _map_chunks(fn, params, mc, workers):
        counts += c
    n = mc.samples
    return {key: _binomial(int(k), n) for key, k in zip(("system", "x1", "x2", "xr"), counts)}


def estimate_outage(scheme: Scheme, params: SystemParams, spec: OutageSpec,
                    mc: McConfig, workers: int | None = None) -> Estimate:
    """Fraction of realizations in which any symbol misses its SNR threshold."""
    return estimate_outage_detail(scheme, params, spec, mc, workers)["system"]


def _capacity_threshold(worst: np.ndarray, epsilon: float, lo: float, hi: float) -> float:
    """Largest common threshold ``W`` in ``[lo, hi]`` with outage fraction <= epsilon."""
    ordered = np.sort(worst)
    n = ordered.size

    def outage(w):
        return np.searchsorted(ordered, w, side="right") / n

    if outage(lo) > epsilon:
        return 0.0
    if outage(hi) <= epsilon:
        return hi
    while hi - lo > CAPACITY_RTOL * lo:
        mid = 0.5 * (lo + hi)
        if outage(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return lo


def capacity_bracket(scheme: Scheme, params: SystemParams) -> tuple[float, float]:
    """Search interval for the common threshold.

    Every SNR of ``x1`` stays below ``a1/a2``.  Under single-signal decoding
    the ``x2`` SNR also stays below ``b1/b2``; under MRC the direct-link term
    lets it exceed that ceiling.
    """
    hi = params.sic_ceiling
    if Scheme.parse(scheme) is Scheme.SINGLE:
        hi = min(hi, params.relay_ceiling)
    return 1e-9, hi - 1e-9


def estimate_outage_capacity(scheme: Scheme, params: SystemParams, epsilon: float,
                             mc: McConfig, workers: int | None = None) -> Estimate:
    """Empirical epsilon-outage capacity ``0.5 * log2(1 + W*)``.

    ``W*`` is found by bisection on the common threshold ``w1 = w2 = wr = W``
    (relative tolerance 1e-4).  The standard error comes from batch means over
    contiguous blocks of the sample.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    s1, s2, s3 = simulate_snrs(scheme, params, mc, workers)
    worst = np.minimum(np.minimum(s1, s2), s3)
    lo, hi = capacity_bracket(scheme, params)

    def rate(block):
        return 0.5 * math.log2(1.0 + _capacity_threshold(block, epsilon, lo, hi))

    value = rate(worst)
    n_batches = min(CAPACITY_BATCHES, worst.size)
    if n_batches < 2:
        return Estimate(value, 0.0, worst.size)
    batches = np.array([rate(b) for b in np.array_split(worst, n_batches)])
    se = float(batches.std(ddof=1) / math.sqrt(n_batches))
    return Estimate(value, se, worst.size)
