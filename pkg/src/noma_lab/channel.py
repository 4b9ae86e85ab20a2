"""Reproducible Rayleigh-fading draws.

Uniforms come from the Philox4x64-10 counter-based generator (numpy's
``Philox`` bit generator) keyed by ``(seed, stream_id)``.  Uniform number ``k``
of a stream is lane ``k % 4`` of the Philox4x64-10 output for the 256-bit
counter ``(k // 4 + 1, 0, 0, 0)`` (numpy advances the counter before each
block, so the first block uses counter 1), so
``(seed, stream_id, k) -> u`` is a pure mapping and any worker can regenerate
any slice of any stream.

A raw 64-bit word ``w`` maps to ``u = 1 - (w >> 11) * 2**-53``, which lies in
``(0, 1]``; gains are then ``beta = -alpha * ln(u)``.  Realization ``i`` of a
stream uses uniforms ``5i .. 5i+4`` in the field order su1, su2, su3, ru2, ru3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, SystemParams

__all__ = ["SeededStream", "UNIFORMS_PER_REALIZATION", "uniforms",
           "sample_realization", "sample_block"]

UNIFORMS_PER_REALIZATION = 5
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")


def uniforms(stream: SeededStream, start: int, count: int) -> np.ndarray:
    """Uniforms ``start .. start+count-1`` of ``stream``, each in ``(0, 1]``."""
    if start < 0 or count < 0:
        raise ValueError("start and count must be non-negative")
    block, lane = divmod(start, 4)
    bg = np.random.Philox(key=[int(stream.seed), int(stream.stream_id)],
                          counter=[block & _U64, block >> 64, 0, 0])
    raw = bg.random_raw(lane + count)[lane:]
    return 1.0 - (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample_block(params: SystemParams, stream: SeededStream, count: int,
                 start: int = 0) -> ChannelRealization:
    """Realizations ``start .. start+count-1`` of ``stream`` as a vectorized block."""
    u = uniforms(stream, UNIFORMS_PER_REALIZATION * start,
                 UNIFORMS_PER_REALIZATION * count).reshape(count, UNIFORMS_PER_REALIZATION)
    alphas = np.array([params.alpha_su1, params.alpha_su2, params.alpha_su3,
                       params.alpha_ru2, params.alpha_ru3])
    beta = -alphas * np.log(u)
    # log(1.0) is exactly 0 but can carry a negative sign
    beta = np.abs(beta)
    return ChannelRealization(*(np.ascontiguousarray(beta[:, j]) for j in range(5)))


def sample_realization(params: SystemParams, stream: SeededStream,
                       index: int = 0) -> ChannelRealization:
    """Realization number ``index`` of ``stream`` as plain floats."""
    blk = sample_block(params, stream, 1, start=index)
    return ChannelRealization(*(float(v[0]) for v in
                                (blk.beta_su1, blk.beta_su2, blk.beta_su3,
                                 blk.beta_ru2, blk.beta_ru3)))
