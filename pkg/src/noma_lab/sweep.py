"""Parameter sweeps and simulation-versus-analysis validation."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import analytic as an
from .config import ExperimentConfig, Metric, SweepPoint
from .model import Scheme, SystemParams
from .montecarlo import (Estimate, estimate_ergodic_sum_rate, estimate_outage,
                         estimate_outage_capacity, estimate_per_symbol_rates)

__all__ = [
    "CSV_COLUMNS",
    "VALIDATION_COLUMNS",
    "run_sweep",
    "run_validate",
    "ValidationReport",
    "format_csv",
    "read_csv",
]

CSV_COLUMNS = (
    "scheme", "metric", "rho_db", "a1", "b1",
    "alpha_su1", "alpha_su2", "alpha_su3", "alpha_ru2", "alpha_ru3",
    "value", "std_error", "analytic_exact", "analytic_approx", "warn_low_snr", "error",
    "w1", "w2", "wr", "epsilon", "samples", "seed",
)

VALIDATION_COLUMNS = (
    "scheme", "metric", "rho_db", "a1", "b1",
    "alpha_su1", "alpha_su2", "alpha_su3", "alpha_ru2", "alpha_ru3",
    "w1", "w2", "wr", "epsilon",
    "mc_value", "std_error", "analytic_kind", "variant", "analytic_value",
    "abs_gap", "rel_gap", "tolerance", "in_region", "gating", "passed", "winner", "error",
)

# Acceptance tolerances used by ``run_validate``.
Z_EXACT = 3.0
APPROX_RATE_RTOL = 0.05
APPROX_RATE_MIN_DB = 30.0
OUTAGE_MRC_ATOL = 0.02
OUTAGE_MRC_MIN_DB = 25.0
CAPACITY_MRC_RTOL = 0.10
CAPACITY_MRC_MIN_DB = 20.0
CAPACITY_EXACT_ATOL = 0.005


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def _base_row(cfg: ExperimentConfig, pt: SweepPoint, metric: str) -> dict:
    p = pt.params
    row = {
        "scheme": pt.scheme.value,
        "metric": metric,
        "rho_db": float(pt.values["rho_db"]),
        "a1": p.a1, "b1": p.b1,
        "alpha_su1": p.alpha_su1, "alpha_su2": p.alpha_su2, "alpha_su3": p.alpha_su3,
        "alpha_ru2": p.alpha_ru2, "alpha_ru3": p.alpha_ru3,
        "samples": cfg.mc.samples, "seed": cfg.mc.seed,
    }
    spec = pt.outage_spec(cfg.convention) if cfg.metric is Metric.OUTAGE else None
    if spec is not None:
        row.update(w1=spec.w1, w2=spec.w2, wr=spec.wr)
    if cfg.metric is Metric.OUTAGE_CAPACITY:
        row["epsilon"] = float(pt.epsilon)
    return row


def _safe(fn, *args, **kw):
    """Evaluate an analytic expression; return ``(value, error_text)``."""
    try:
        return fn(*args, **kw), ""
    except (ArithmeticError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _analytic_values(cfg: ExperimentConfig, pt: SweepPoint) -> list[tuple[str, object, object, str]]:
    """``(metric_label, exact, approx, error)`` per output row of this point."""
    p = pt.params
    single = pt.scheme is Scheme.SINGLE
    m = cfg.metric
    if m is Metric.ERGODIC_SUM:
        if single:
            exact, e1 = _safe(lambda: an.ergodic_sum_single_exact(p).sum)
            approx, e2 = _safe(lambda: an.ergodic_sum_single(p).sum)
        else:
            exact, e1 = None, ""
            approx, e2 = _safe(lambda: an.ergodic_sum_mrc(p, cfg.mrc_variant).sum)
        return [(m.value, exact, approx, e1 or e2)]
    if m is Metric.PER_SYMBOL_RATES:
        x1, e1 = _safe(an.ergodic_x1_closed, p)
        xr, e3 = _safe(an.ergodic_xr_closed, p)
        if single:
            x2_exact, e2 = _safe(an.ergodic_x2_single_exact, p)
            x2_approx, e2b = _safe(an.ergodic_x2_single_approx, p)
            e2 = e2 or e2b
        else:
            x2_exact = None
            x2_approx, e2 = _safe(an.ergodic_x2_mrc_approx, p, cfg.mrc_variant)
        return [(f"{m.value}:x1", x1, None, e1), (f"{m.value}:x2", x2_exact, x2_approx, e2),
                (f"{m.value}:xr", xr, None, e3)]
    if m is Metric.OUTAGE:
        spec = pt.outage_spec(cfg.convention)
        if single:
            exact, err = _safe(an.outage_single_closed, p, spec)
            return [(m.value, exact, None, err)]
        res, err = _safe(an.outage_mrc_closed, p, spec)
        return [(m.value, None, None if res is None else res.value, err)]
    eps = pt.epsilon
    if single:
        exact, err = _safe(an.outage_capacity_single_exact, p, eps)
        return [(m.value, exact, None, err)]
    approx, err = _safe(an.outage_capacity_mrc, p, eps)
    return [(m.value, None, approx, err)]


def _mc_values(cfg: ExperimentConfig, pt: SweepPoint) -> list[Estimate]:
    p = pt.params
    m = cfg.metric
    if m is Metric.ERGODIC_SUM:
        return [estimate_ergodic_sum_rate(pt.scheme, p, cfg.mc, workers=1)]
    if m is Metric.PER_SYMBOL_RATES:
        return list(estimate_per_symbol_rates(pt.scheme, p, cfg.mc, workers=1))
    if m is Metric.OUTAGE:
        return [estimate_outage(pt.scheme, p, pt.outage_spec(cfg.convention), cfg.mc, workers=1)]
    return [estimate_outage_capacity(pt.scheme, p, pt.epsilon, cfg.mc, workers=1)]


def _sweep_point(cfg: ExperimentConfig, pt: SweepPoint) -> list[dict]:
    rows = []
    low_snr = an.low_snr_warning(pt.params)
    for est, (label, exact, approx, err) in zip(_mc_values(cfg, pt), _analytic_values(cfg, pt)):
        row = _base_row(cfg, pt, label)
        row.update(value=est.mean, std_error=est.std_error, analytic_exact=exact,
                   analytic_approx=approx, error=err or None,
                   warn_low_snr=(low_snr if approx is not None else None))
        rows.append(row)
    return rows


def _map_points(fn, cfg: ExperimentConfig, workers: int):
    pts = cfg.points()
    if workers <= 1:
        return [fn(cfg, pt) for pt in pts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda pt: fn(cfg, pt), pts))


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[dict]:
    """Evaluate every sweep point; rows come back in sweep order.

    Each row carries the Monte Carlo value and standard error, the exact
    and/or high-SNR analytic value where one exists, and a low-SNR flag on
    rows with an approximate value.  Analytic failures land in the ``error``
    column.
    """
    return [row for rows in _map_points(_sweep_point, cfg, workers) for row in rows]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    rows: list[dict]

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r["passed"] is False]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        gated = [r for r in self.rows if r["passed"] is not None]
        return f"{len(gated) - len(self.failures)}/{len(gated)} gated checks passed"


@dataclass
class _Check:
    quantity: str
    kind: str
    variant: str
    fn: object
    rule: str  # "z", "rel", "abs_or_z", "abs_or_se"
    tol: float
    in_region: bool
    gating: bool = True


def _checks(cfg: ExperimentConfig, pt: SweepPoint) -> list[_Check]:
    p: SystemParams = pt.params
    db = float(pt.values["rho_db"])
    single = pt.scheme is Scheme.SINGLE
    m = cfg.metric
    hi_rate = db >= APPROX_RATE_MIN_DB
    chosen = cfg.mrc_variant
    out = []
    if m is Metric.ERGODIC_SUM:
        if single:
            out.append(_Check("sum", "exact", "quadrature",
                              lambda: an.ergodic_sum_single_exact(p).sum, "z", Z_EXACT, True))
            out.append(_Check("sum", "approx", "high_snr",
                              lambda: an.ergodic_sum_single(p).sum, "rel", APPROX_RATE_RTOL, hi_rate))
        else:
            for v in an.MrcVariant:
                out.append(_Check("sum", "approx", v.value,
                                  lambda v=v: an.ergodic_sum_mrc(p, v).sum, "rel",
                                  APPROX_RATE_RTOL, hi_rate, gating=v is chosen))
    elif m is Metric.PER_SYMBOL_RATES:
        out.append(_Check("x1", "exact", "closed", lambda: an.ergodic_x1_closed(p), "z", Z_EXACT, True))
        if single:
            out.append(_Check("x2", "exact", "quadrature",
                              lambda: an.ergodic_x2_single_exact(p), "z", Z_EXACT, True))
            out.append(_Check("x2", "approx", "high_snr",
                              lambda: an.ergodic_x2_single_approx(p), "rel", APPROX_RATE_RTOL, hi_rate))
        else:
            for v in an.MrcVariant:
                out.append(_Check("x2", "approx", v.value,
                                  lambda v=v: an.ergodic_x2_mrc_approx(p, v), "rel",
                                  APPROX_RATE_RTOL, hi_rate, gating=v is chosen))
        out.append(_Check("xr", "exact", "closed", lambda: an.ergodic_xr_closed(p), "z", Z_EXACT, True))
    elif m is Metric.OUTAGE:
        spec = pt.outage_spec(cfg.convention)
        if single:
            out.append(_Check("outage", "exact", "joint",
                              lambda: an.outage_single_closed(p, spec), "z", Z_EXACT, True))
            out.append(_Check("outage", "exact", "marginal_product",
                              lambda: an.outage_single_product(p, spec), "z", Z_EXACT, True,
                              gating=False))
        else:
            region = (db >= OUTAGE_MRC_MIN_DB and spec.w1 < p.sic_ceiling
                      and spec.w2 < p.relay_ceiling)
            out.append(_Check("outage", "approx", "floored",
                              lambda: an.outage_mrc_closed(p, spec).value, "abs_or_z",
                              OUTAGE_MRC_ATOL, region))
            out.append(_Check("outage", "approx", "literal",
                              lambda: an.outage_mrc_closed(p, spec).literal, "abs_or_z",
                              OUTAGE_MRC_ATOL, region, gating=False))
    else:
        eps = pt.epsilon
        if single:
            out.append(_Check("capacity", "exact", "bisection",
                              lambda: an.outage_capacity_single_exact(p, eps), "abs_or_se",
                              CAPACITY_EXACT_ATOL, True))
        else:
            region = db >= CAPACITY_MRC_MIN_DB and p.relay_ceiling < p.sic_ceiling
            out.append(_Check("capacity", "approx", "capped",
                              lambda: an.outage_capacity_mrc(p, eps), "rel",
                              CAPACITY_MRC_RTOL, region))
            out.append(_Check("capacity", "approx", "uncapped",
                              lambda: an.outage_capacity_mrc(p, eps, cap=False), "rel",
                              CAPACITY_MRC_RTOL, region, gating=False))
    return out


def _judge(check: _Check, est: Estimate, value: float, is_probability: bool) -> tuple[float, bool]:
    gap = abs(value - est.mean)
    se = est.std_error
    if is_probability:
        p = min(max(value, 0.0), 1.0)
        se = max(se, math.sqrt(p * (1.0 - p) / est.samples))
    if check.rule == "z":
        tol = check.tol * se + 1e-12
    elif check.rule == "rel":
        tol = check.tol * abs(est.mean)
    elif check.rule == "abs_or_z":
        tol = max(check.tol, Z_EXACT * se)
    else:
        tol = max(check.tol, Z_EXACT * se)
    return tol, gap <= tol


def _validate_point(cfg: ExperimentConfig, pt: SweepPoint) -> list[dict]:
    ests = _mc_values(cfg, pt)
    by_quantity = {"sum": ests[0], "outage": ests[0], "capacity": ests[0]}
    if cfg.metric is Metric.PER_SYMBOL_RATES:
        by_quantity = dict(zip(("x1", "x2", "xr"), ests))
    rows = []
    for check in _checks(cfg, pt):
        est = by_quantity[check.quantity]
        row = _base_row(cfg, pt, f"{cfg.metric.value}:{check.quantity}")
        row.update(mc_value=est.mean, std_error=est.std_error, analytic_kind=check.kind,
                   variant=check.variant, in_region=check.in_region, gating=check.gating,
                   passed=None, winner=None)
        value, err = _safe(check.fn)
        if value is None:
            row["error"] = err
            if check.gating and check.in_region:
                row["passed"] = False
            rows.append(row)
            continue
        tol, ok = _judge(check, est, value, cfg.metric is Metric.OUTAGE)
        gap = abs(value - est.mean)
        row.update(analytic_value=value, abs_gap=gap,
                   rel_gap=gap / abs(est.mean) if est.mean else None, tolerance=tol)
        if check.gating and check.in_region:
            row["passed"] = ok
        rows.append(row)
    # name the closest variant wherever several compete for one quantity
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["metric"], r["analytic_kind"]), []).append(r)
    for grp in groups.values():
        scored = [r for r in grp if r.get("abs_gap") is not None]
        if len(scored) > 1:
            best = min(scored, key=lambda r: r["abs_gap"])
            for r in scored:
                r["winner"] = r is best
    return rows


def run_validate(cfg: ExperimentConfig, workers: int = 1) -> ValidationReport:
    """Compare Monte Carlo estimates with every analytic form at each sweep point.

    Only checks that are gating and inside their validity region decide the
    outcome; the remaining variants are reported for comparison.
    """
    rows = [row for rows in _map_points(_validate_point, cfg, workers) for row in rows]
    return ValidationReport(rows)
