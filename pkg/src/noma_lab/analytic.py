"""Closed-form and high-SNR evaluators for ergodic rates, outage probability
and outage capacity, plus a quadrature route from a CCDF to an ergodic rate.

All ensemble expressions are evaluated with the average link powers
``alpha``.  Rates are per symbol in bits/s/Hz and already include the 1/2
two-phase factor.

Conventions used below::

    A = (1/alpha_su1 + 1/alpha_su2 + 1/alpha_su3) / rho
    B = (1/alpha_ru2 + 1/alpha_ru3) / (b2 * rho)
    exp_ei(x) = e^x * Ei(-x)
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .model import OutageSpec, SystemParams
from .specialfn import ei, euler_gamma, exp_ei

__all__ = [
    "QuadratureError",
    "ReportKind",
    "MrcVariant",
    "CcdfFn",
    "AnalyticReport",
    "OutageResult",
    "HIGH_SNR_MIN_RHO",
    "EC_SIGN",
    "low_snr_warning",
    "ccdf_s1",
    "ccdf_s2_single",
    "ccdf_s3",
    "ergodic_from_ccdf",
    "ergodic_x1_closed",
    "ergodic_x2_single_approx",
    "ergodic_x2_single_exact",
    "ergodic_xr_closed",
    "ergodic_sum_single",
    "ergodic_sum_single_exact",
    "ergodic_sum_single_ecln",
    "ergodic_x2_mrc_approx",
    "ergodic_sum_mrc",
    "ergodic_sum_mrc_ecln",
    "outage_single_closed",
    "outage_single_product",
    "outage_mrc_closed",
    "outage_threshold_mrc",
    "outage_capacity_mrc",
    "outage_capacity_single_exact",
    "k1_survival",
]

_HALF_OVER_LN2 = 0.5 / math.log(2.0)

# High-SNR approximations are flagged below 20 dB.
HIGH_SNR_MIN_RHO = 100.0

QUAD_ABS_TOL = 1e-9
QUAD_MAX_EVALS = 1_000_000
TAIL_CUTOFF = 1e-14


class QuadratureError(ArithmeticError):
    pass


class ReportKind(enum.Enum):
    EXACT = "exact"
    HIGH_SNR_APPROX = "high_snr_approx"
    EC_LN_APPROX = "ec_ln_approx"


class MrcVariant(enum.Enum):
    """How the x2 rate of the MRC scheme treats the relay constant.

    ``LITERAL`` integrates ``exp(-m * A / a2)`` and drops the constant factor
    ``exp(b1 * (1/alpha_ru2 + 1/alpha_ru3) / (b2 * rho))`` of the high-SNR
    CCDF; ``RETAIN_FACTOR`` keeps it.
    """

    LITERAL = "literal"
    RETAIN_FACTOR = "retain_factor"


# Chosen by the validation sweep (Fig. 2 / Fig. 3 sets): keeping the factor
# tracks the Monte Carlo x2 rate more closely at every tested SNR.
DEFAULT_MRC_VARIANT = MrcVariant.RETAIN_FACTOR


def _pick_ec_sign() -> int:
    """Sign ``s`` for which ``Ei(-x) ~ s * Ec + ln x`` holds best at ``x = 1e-3``."""
    x = 1e-3
    exact = ei(-x).value
    return min((1, -1), key=lambda s: abs(exact - (s * euler_gamma() + math.log(x))))


EC_SIGN = _pick_ec_sign()


def low_snr_warning(params: SystemParams) -> bool:
    return params.rho < HIGH_SNR_MIN_RHO


@dataclass(frozen=True)
class CcdfFn:
    """Complementary CDF ``x -> P(X > x)`` on ``x >= 0``.

    ``support_upper`` is the point beyond which the CCDF is identically zero.
    For infinite support, ``tail_rate`` gives an exponential majorant
    ``P(X > x) <= exp(-tail_rate * x)`` used to truncate integrals.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    support_upper: float = math.inf
    tail_rate: float | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = x < self.support_upper
        if np.any(inside):
            out[inside] = self.fn(x[inside])
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class AnalyticReport:
    x1: float
    x2: float
    xr: float
    sum: float
    kind: ReportKind
    warn_low_snr: bool = False
    variant: str = ""

    @classmethod
    def build(cls, x1, x2, xr, kind, warn=False, variant="") -> "AnalyticReport":
        return cls(x1, x2, xr, x1 + x2 + xr, kind, warn, variant)


@dataclass(frozen=True)
class OutageResult:
    """Clamped probability plus the raw values it was derived from."""

    value: float
    unclamped: float
    literal: float

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# CCDFs and quadrature
# ---------------------------------------------------------------------------

def ccdf_s1(params: SystemParams) -> CcdfFn:
    """CCDF of the effective SNR of ``x1`` (identical for both schemes)."""
    p = params
    k = p.inv_alpha_su

    def fn(s):
        return np.exp(-s / (p.a1 * p.rho - p.a2 * p.rho * s) * k)

    return CcdfFn(fn, support_upper=p.sic_ceiling)


def ccdf_s2_single(params: SystemParams) -> CcdfFn:
    """Exact CCDF of the ``x2`` SNR under single-signal decoding."""
    p = params
    k_ru = p.inv_alpha_ru
    k_su1 = 1.0 / (p.a2 * p.rho * p.alpha_su1)

    def fn(s):
        return np.exp(-s / (p.b1 * p.rho - p.b2 * p.rho * s) * k_ru - s * k_su1)

    return CcdfFn(fn, support_upper=p.relay_ceiling)


def ccdf_s3(params: SystemParams) -> CcdfFn:
    """CCDF of the ``xr`` SNR (identical for both schemes)."""
    rate = params.inv_alpha_ru / (params.b2 * params.rho)
    return CcdfFn(lambda s: np.exp(-rate * s), tail_rate=rate)


def _truncation_point(rate: float) -> float:
    # Tail of int F/(1+x) beyond T is below exp(-rate*T) / (rate * (1 + T)).
    t = 1.0
    while math.exp(-rate * t) / (rate * (1.0 + t)) > TAIL_CUTOFF:
        t *= 2.0
    return t


def _panels(upper: float) -> list[float]:
    edges = [0.0]
    edge = 1e-3
    while edge < upper:
        edges.append(edge)
        edge *= 10.0
    edges.append(upper)
    return edges


def ergodic_from_ccdf(ccdf: CcdfFn) -> float:
    """Half-rate ergodic capacity ``E[0.5 * log2(1 + X)]`` from the CCDF of ``X``.

    Uses ``E[ln(1 + X)] = int_0^inf P(X > x) / (1 + x) dx`` with adaptive
    Gauss-Kronrod quadrature on geometrically growing panels.

    Raises
    ------
    QuadratureError
        If a panel does not reach the tolerance within the evaluation budget.
    """
    upper = ccdf.support_upper
    if math.isinf(upper):
        if ccdf.tail_rate is None or ccdf.tail_rate <= 0:
            raise QuadratureError("infinite support needs a positive tail_rate")
        upper = _truncation_point(ccdf.tail_rate)
    edges = _panels(upper)
    tol = QUAD_ABS_TOL / (len(edges) - 1)

    def integrand(x):
        return ccdf.fn(x) / (1.0 + x)

    total = 0.0
    evals = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                res = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=1e-12,
                                     limit=500, full_output=True)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
        # with full_output, quad reports trouble as a fourth element instead of warning
        if len(res) > 3:
            raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {res[3].splitlines()[0]}")
        val, _err, info = res
        evals += info["neval"]
        if evals > QUAD_MAX_EVALS:
            raise QuadratureError("quadrature evaluation budget exhausted")
        total += val
    return _HALF_OVER_LN2 * total


# ---------------------------------------------------------------------------
# Ergodic rates
# ---------------------------------------------------------------------------

def ergodic_x1_closed(params: SystemParams) -> float:
    """Exact ergodic rate of ``x1``: ``(exp_ei(A/a2) - exp_ei(A)) / (2 ln 2)``."""
    a = params.inv_alpha_su / params.rho
    return _HALF_OVER_LN2 * (exp_ei(a / params.a2) - exp_ei(a))


def ergodic_xr_closed(params: SystemParams) -> float:
    """Exact ergodic rate of ``xr``: ``-exp_ei(B) / (2 ln 2)``."""
    b = params.inv_alpha_ru / (params.b2 * params.rho)
    return -_HALF_OVER_LN2 * exp_ei(b)


def ergodic_x2_single_approx(params: SystemParams) -> float:
    """High-SNR ``x2`` rate of single-signal decoding.

    The relay SINRs are replaced by their ceiling ``b1/b2``, leaving
    ``min(a2 * rho * beta_su1, b1/b2)``.
    """
    p = params
    kappa = 1.0 / (p.a2 * p.rho * p.alpha_su1)
    return _x2_single_term(kappa, kappa * (1.0 + p.b1 / p.b2))


def _x2_single_term(kappa: float, kappa_hi: float) -> float:
    # e^kappa * (Ei(-kappa_hi) - Ei(-kappa)) with kappa_hi > kappa
    upper = math.exp(kappa - kappa_hi) * exp_ei(kappa_hi)
    return _HALF_OVER_LN2 * (upper - exp_ei(kappa))


def ergodic_x2_single_exact(params: SystemParams) -> float:
    """Exact ``x2`` rate of single-signal decoding, by quadrature of its CCDF."""
    return ergodic_from_ccdf(ccdf_s2_single(params))


def ergodic_sum_single(params: SystemParams) -> AnalyticReport:
    """High-SNR ergodic sum rate of single-signal decoding."""
    p = params
    kappa = 1.0 / (p.a2 * p.rho * p.alpha_su1)
    x2 = _x2_single_term(kappa, 1.0 / (p.a2 * p.b2 * p.rho * p.alpha_su1))
    return AnalyticReport.build(ergodic_x1_closed(p), x2, ergodic_xr_closed(p),
                                ReportKind.HIGH_SNR_APPROX, low_snr_warning(p))


def ergodic_sum_single_exact(params: SystemParams) -> AnalyticReport:
    return AnalyticReport.build(ergodic_x1_closed(params), ergodic_x2_single_exact(params),
                                ergodic_xr_closed(params), ReportKind.EXACT)


def _ec_ln(x: float) -> float:
    # small-argument form of Ei(-x)
    return EC_SIGN * euler_gamma() + math.log(x)


def ergodic_sum_single_ecln(params: SystemParams) -> float:
    """Single-signal sum rate with ``Ei(-x) ~ Ec + ln x`` and ``e^x ~ 1 + x``."""
    p = params
    a = p.inv_alpha_su / p.rho
    b = p.inv_alpha_ru / (p.b2 * p.rho)
    kappa = 1.0 / (p.a2 * p.rho * p.alpha_su1)
    ec = EC_SIGN * euler_gamma()
    x1 = (a / p.a2) * (p.a1 * ec + p.a1 * math.log(a) - math.log(p.a2)) - math.log(p.a2)
    x2 = -(1.0 + kappa) * math.log(p.b2)
    xr = -(1.0 + b) * _ec_ln(b)
    return _HALF_OVER_LN2 * (x1 + x2 + xr)


def ergodic_x2_mrc_approx(params: SystemParams,
                          variant: MrcVariant = DEFAULT_MRC_VARIANT) -> float:
    """High-SNR ``x2`` rate of MRC decoding, ``-exp_ei(A/a2) / (2 ln 2)`` (times
    the relay constant for ``RETAIN_FACTOR``)."""
    p = params
    x = p.inv_alpha_su / (p.a2 * p.rho)
    value = -_HALF_OVER_LN2 * exp_ei(x)
    if MrcVariant(variant) is MrcVariant.RETAIN_FACTOR:
        value *= math.exp(p.b1 / (p.b2 * p.rho) * p.inv_alpha_ru)
    return value


def ergodic_sum_mrc(params: SystemParams,
                    variant: MrcVariant = DEFAULT_MRC_VARIANT) -> AnalyticReport:
    """High-SNR ergodic sum rate of MRC decoding."""
    variant = MrcVariant(variant)
    return AnalyticReport.build(ergodic_x1_closed(params),
                                ergodic_x2_mrc_approx(params, variant),
                                ergodic_xr_closed(params), ReportKind.HIGH_SNR_APPROX,
                                low_snr_warning(params), variant.value)


def ergodic_sum_mrc_ecln(params: SystemParams) -> float:
    """MRC sum rate with ``Ei(-x) ~ Ec + ln x`` and ``e^x ~ 1 + x``.

    The three terms add up to
    ``-(A (Ec + ln A) + B (Ec + ln B) + 2 Ec + ln(A B)) / (2 ln 2)``.
    """
    p = params
    a = p.inv_alpha_su / p.rho
    b = p.inv_alpha_ru / (p.b2 * p.rho)
    ec = EC_SIGN * euler_gamma()
    x1 = (a / p.a2) * (p.a1 * ec + p.a1 * math.log(a) - math.log(p.a2)) - math.log(p.a2)
    x2 = -(1.0 + a / p.a2) * _ec_ln(a / p.a2)
    xr = -(1.0 + b) * _ec_ln(b)
    return _HALF_OVER_LN2 * (x1 + x2 + xr)


# ---------------------------------------------------------------------------
# Outage
# ---------------------------------------------------------------------------

def k1_survival(params: SystemParams, w1: float) -> float:
    """``P(S1 > w1)``: every BS link supports ``x1``."""
    p = params
    if w1 >= p.sic_ceiling:
        return 0.0
    return math.exp(-w1 / (p.rho * (p.a1 - p.a2 * w1)) * p.inv_alpha_su)


def outage_single_closed(params: SystemParams, spec: OutageSpec) -> float:
    """Exact outage probability of single-signal decoding.

    ``S1``, ``S2`` and ``S3`` share channel gains, so the success event is
    written per gain: each ``beta`` must clear the largest threshold any of
    the three SNRs puts on it.
    """
    p = params
    w1, w2, wr = spec.w1, spec.w2, spec.wr
    if w1 >= p.sic_ceiling or w2 >= p.relay_ceiling:
        return 1.0
    t1 = w1 / (p.rho * (p.a1 - p.a2 * w1))
    t2 = w2 / (p.rho * (p.b1 - p.b2 * w2))
    tr = wr / (p.b2 * p.rho)
    exponent = (max(t1, w2 / (p.a2 * p.rho)) / p.alpha_su1
                + t1 / p.alpha_su2 + t1 / p.alpha_su3
                + max(t2, tr) * p.inv_alpha_ru)
    return -math.expm1(-exponent)


def outage_single_product(params: SystemParams, spec: OutageSpec) -> float:
    """``1 - P(S1 > w1) P(S2 > w2) P(S3 > wr)`` treating the SNRs as independent."""
    f1 = ccdf_s1(params)(spec.w1)
    f2 = ccdf_s2_single(params)(spec.w2)
    f3 = ccdf_s3(params)(spec.wr)
    return 1.0 - f1 * f2 * f3


def _one_minus_exp(exponent: float) -> float:
    # 1 - exp(-exponent); a very negative exponent (literal form only) gives -inf
    if exponent < -700.0:
        return -math.inf
    return -math.expm1(-exponent)


def outage_mrc_closed(params: SystemParams, spec: OutageSpec,
                      floor: bool = True) -> OutageResult:
    """High-SNR outage probability of MRC decoding.

    The ``x2`` exponent carries ``(w2 - b1/b2)``; with ``floor=True`` it is
    replaced by ``max(w2 - b1/b2, 0)`` so the survival term stays a
    probability.  ``literal`` always holds the unfloored, unclamped value.
    """
    p = params
    w1, w2, wr = spec.w1, spec.w2, spec.wr
    relay = wr / (p.b2 * p.rho) * p.inv_alpha_ru
    direct = (w2 - p.relay_ceiling) / (p.a2 * p.rho) * p.inv_alpha_su
    if w1 < p.sic_ceiling:
        sic = w1 / (p.rho * (p.a1 - p.a2 * w1)) * p.inv_alpha_su
        literal = _one_minus_exp(sic + relay + direct)
    else:
        literal = 1.0
    if w1 >= p.sic_ceiling or w2 >= p.relay_ceiling:
        return OutageResult(1.0, 1.0, literal)
    used = max(direct, 0.0) if floor else direct
    raw = _one_minus_exp(sic + relay + used)
    return OutageResult(min(max(raw, 0.0), 1.0), raw, literal)


def outage_threshold_mrc(params: SystemParams, epsilon: float) -> float:
    """Common SNR threshold met at outage ``epsilon`` (first-order high-SNR form)."""
    p = params
    d = p.inv_alpha_su / (p.a2 * p.rho)
    r = p.inv_alpha_ru / (p.b2 * p.rho)
    return (epsilon + p.relay_ceiling * d) / (r + d)


def outage_capacity_mrc(params: SystemParams, epsilon: float, cap: bool = True) -> float:
    """``0.5 * log2(1 + W)`` at the common threshold ``W`` for outage ``epsilon``.

    ``W`` is floored at 0.  With ``cap=True`` it is also limited to the SIC
    ceiling ``a1/a2``: no realization supports ``x1`` above it, so larger
    thresholds are in outage with probability one.  The uncapped threshold
    grows linearly in ``rho`` and overshoots that ceiling at high SNR.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    w = max(outage_threshold_mrc(params, epsilon), 0.0)
    if cap:
        w = min(w, params.sic_ceiling)
    return 0.5 * math.log2(1.0 + w)


def outage_capacity_single_exact(params: SystemParams, epsilon: float,
                                 rtol: float = 1e-10) -> float:
    """Largest common-threshold rate with exact single-signal outage <= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")

    def outage(w):
        return outage_single_closed(params, OutageSpec.from_thresholds(w, w, w))

    lo = 1e-12
    hi = min(params.sic_ceiling, params.relay_ceiling)
    if outage(lo) > epsilon:
        return 0.0
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if outage(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return 0.5 * math.log2(1.0 + lo)
