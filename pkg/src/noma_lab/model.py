"""Scenario parameters and instantaneous SNR / sum-rate of the two-phase
cooperative D2D-NOMA link.

Phase 1: the BS broadcasts ``sqrt(a1) x1 + sqrt(a2) x2`` to UE1 (the relay),
UE2 and UE3.  Phase 2: UE1 re-encodes ``sqrt(b1) x2 + sqrt(b2) xr`` towards
UE2 and UE3.  Every formula depends on the transmit power only through the
transmit SNR ``rho``.

All functions accept scalars or equally shaped numpy arrays for the channel
gains, so the Monte Carlo code can evaluate whole blocks at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "Scheme",
    "SystemParams",
    "ChannelRealization",
    "SnrBreakdown",
    "db_to_linear",
    "snr_relay",
    "snr_breakdown",
    "sum_rate",
    "symbol_rates",
    "OutageSpec",
]


class Scheme(enum.Enum):
    SINGLE = "single"
    MRC = "mrc"

    @classmethod
    def parse(cls, text: str | "Scheme") -> "Scheme":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"single": cls.SINGLE, "singlesignal": cls.SINGLE,
                   "single_signal": cls.SINGLE, "mrc": cls.MRC}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown scheme {text!r} (expected 'single' or 'mrc')") from None


def db_to_linear(db: float) -> float:
    return 10.0 ** (float(db) / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Static scenario.

    ``a2`` and ``b2`` are derived as ``1 - a1`` and ``1 - b1``.  The alphas are
    the average powers of the Rayleigh links BS->UE1/2/3 (``su``) and
    relay->UE2/3 (``ru``).
    """

    a1: float
    b1: float
    rho: float
    alpha_su1: float
    alpha_su2: float
    alpha_su3: float
    alpha_ru2: float
    alpha_ru3: float

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        if not 0.5 < self.a1 < 1.0:
            raise ValueError(f"a1 must lie in (0.5, 1) so that a1 > a2, got {self.a1}")
        if not 0.0 < self.b1 < 1.0:
            raise ValueError(f"b1 must lie in (0, 1), got {self.b1}")
        if self.rho <= 0.0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        for name in ("alpha_su1", "alpha_su2", "alpha_su3", "alpha_ru2", "alpha_ru3"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_db(cls, rho_db: float, **kw) -> "SystemParams":
        return cls(rho=db_to_linear(rho_db), **kw)

    @property
    def a2(self) -> float:
        return 1.0 - self.a1

    @property
    def b2(self) -> float:
        return 1.0 - self.b1

    @property
    def rho_db(self) -> float:
        return 10.0 * math.log10(self.rho)

    @property
    def sic_ceiling(self) -> float:
        """Upper bound ``a1/a2`` of every SNR of ``x1``."""
        return self.a1 / self.a2

    @property
    def relay_ceiling(self) -> float:
        """Upper bound ``b1/b2`` of the phase-2 SINR of ``x2``."""
        return self.b1 / self.b2

    @property
    def inv_alpha_su(self) -> float:
        return 1.0 / self.alpha_su1 + 1.0 / self.alpha_su2 + 1.0 / self.alpha_su3

    @property
    def inv_alpha_ru(self) -> float:
        return 1.0 / self.alpha_ru2 + 1.0 / self.alpha_ru3

    def with_rho(self, rho: float) -> "SystemParams":
        return replace(self, rho=rho)


@dataclass(frozen=True)
class ChannelRealization:
    """Squared channel magnitudes ``|h|^2`` for one draw (or a block of draws)."""

    beta_su1: float | np.ndarray
    beta_su2: float | np.ndarray
    beta_su3: float | np.ndarray
    beta_ru2: float | np.ndarray
    beta_ru3: float | np.ndarray

    def __post_init__(self) -> None:
        for f in fields(self):
            v = np.asarray(getattr(self, f.name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValueError(f"{f.name} must be finite and >= 0")

    def scaled(self, c: float) -> "ChannelRealization":
        return ChannelRealization(*(c * np.asarray(getattr(self, f.name)) for f in fields(self)))


class SnrBreakdown(NamedTuple):
    """Effective SNRs of ``x1``, ``x2`` and ``xr`` (each the min over its decoders)."""

    s1: float | np.ndarray
    s2: float | np.ndarray
    s3: float | np.ndarray


def _sic_x1(a1, a2, beta, rho):
    g = beta * rho
    return a1 * g / (a2 * g + 1.0)


def snr_relay(params: SystemParams, ch: ChannelRealization):
    """SNRs of ``x1`` and ``x2`` at the relay UE1 after SIC.

    Returns ``(gamma_x1, gamma_x2)``.
    """
    p = params
    return _sic_x1(p.a1, p.a2, ch.beta_su1, p.rho), p.a2 * ch.beta_su1 * p.rho


def snr_breakdown(scheme: Scheme, params: SystemParams, ch: ChannelRealization) -> SnrBreakdown:
    """Per-symbol effective SNRs for one realization under ``scheme``.

    Under the MRC scheme UE2/UE3 keep their phase-1 copy of ``x2`` and add its
    direct-link SNR ``a2 * beta_su_l * rho`` to the phase-2 SINR.
    """
    scheme = Scheme.parse(scheme)
    p = params
    rho = p.rho
    gx1_relay, gx2_relay = snr_relay(p, ch)
    s1 = np.minimum(gx1_relay, np.minimum(_sic_x1(p.a1, p.a2, ch.beta_su2, rho),
                                          _sic_x1(p.a1, p.a2, ch.beta_su3, rho)))
    x2_u2 = _sic_x1(p.b1, p.b2, ch.beta_ru2, rho)
    x2_u3 = _sic_x1(p.b1, p.b2, ch.beta_ru3, rho)
    if scheme is Scheme.MRC:
        x2_u2 = x2_u2 + p.a2 * ch.beta_su2 * rho
        x2_u3 = x2_u3 + p.a2 * ch.beta_su3 * rho
    s2 = np.minimum(gx2_relay, np.minimum(x2_u2, x2_u3))
    s3 = p.b2 * rho * np.minimum(ch.beta_ru2, ch.beta_ru3)
    if np.ndim(s1) == 0:
        return SnrBreakdown(float(s1), float(s2), float(s3))
    return SnrBreakdown(s1, s2, s3)


def symbol_rates(scheme: Scheme, params: SystemParams, ch: ChannelRealization):
    """The three half-rate terms ``0.5 * log2(1 + s)`` of the sum rate."""
    s = snr_breakdown(scheme, params, ch)
    return tuple(0.5 * np.log2(1.0 + v) for v in s)


def sum_rate(scheme: Scheme, params: SystemParams, ch: ChannelRealization):
    """Instantaneous achievable sum rate in bits/s/Hz (the 1/2 is the two-phase cost)."""
    r1, r2, r3 = symbol_rates(scheme, params, ch)
    total = r1 + r2 + r3
    return float(total) if np.ndim(total) == 0 else total


@dataclass(frozen=True)
class OutageSpec:
    """Target rates of ``x1``, ``x2``, ``xr`` and the SNR thresholds they imply.

    With ``convention="two_phase"`` (default) a target rate ``R`` needs
    ``0.5 * log2(1 + s) > R``, i.e. ``s > 2**(2R) - 1``.  ``convention="plain"``
    uses ``2**R - 1`` instead.
    """

    r_t_x1: float
    r_t_x2: float
    r_t_xr: float
    convention: str = "two_phase"

    CONVENTIONS = ("two_phase", "plain")

    def __post_init__(self) -> None:
        for name in ("r_t_x1", "r_t_x2", "r_t_xr"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive rate, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.convention not in self.CONVENTIONS:
            raise ValueError(f"convention must be one of {self.CONVENTIONS}, got {self.convention!r}")

    @classmethod
    def common(cls, rate: float, convention: str = "two_phase") -> "OutageSpec":
        return cls(rate, rate, rate, convention)

    @classmethod
    def from_thresholds(cls, w1: float, w2: float, wr: float,
                        convention: str = "two_phase") -> "OutageSpec":
        """Build the spec whose SNR thresholds are exactly ``w1, w2, wr``."""
        scale = 0.5 if convention == "two_phase" else 1.0
        return cls(*(scale * math.log2(1.0 + w) for w in (w1, w2, wr)), convention)

    def _threshold(self, rate: float) -> float:
        return 2.0 ** (2.0 * rate if self.convention == "two_phase" else rate) - 1.0

    @property
    def w1(self) -> float:
        return self._threshold(self.r_t_x1)

    @property
    def w2(self) -> float:
        return self._threshold(self.r_t_x2)

    @property
    def wr(self) -> float:
        return self._threshold(self.r_t_xr)
