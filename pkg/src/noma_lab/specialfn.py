"""Exponential integral on the negative real axis.

Only ``Ei(x)`` for ``x < 0`` is provided; every rate expression in the
package evaluates it there.  Two evaluation paths are used:

* the power series ``gamma + ln|x| + sum_k x**k / (k * k!)`` for small ``|x|``
* the continued fraction for ``E1(|x|) = -Ei(x)`` (modified Lentz) otherwise
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["EiResult", "ei", "exp_ei", "euler_gamma"]

EULER_GAMMA = 0.5772156649015329

# The series alternates for x < 0; its largest term grows like e^|x| while the
# result decays like e^-|x|, so beyond a few units the cancellation eats the
# double-precision budget.  The continued fraction is already fast at |x| = 1.
SERIES_CUTOFF = 1.0
TOL = 1e-16
MAX_ITER = 10_000

_EPS = 2.220446049250313e-16
_TINY = 1e-300


@dataclass(frozen=True)
class EiResult:
    value: float
    est_abs_error: float

    def __float__(self) -> float:
        return self.value


def euler_gamma() -> float:
    """Euler-Mascheroni constant."""
    return EULER_GAMMA


def _check(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x >= 0.0:
        raise ValueError(f"ei is defined here only for finite x < 0, got {x!r}")
    return x


def _series(x: float) -> EiResult:
    term = 1.0
    total = 0.0
    largest = 0.0
    for k in range(1, MAX_ITER):
        term *= x / k
        contrib = term / k
        total += contrib
        largest = max(largest, abs(contrib))
        if abs(contrib) <= TOL * abs(total):
            break
    else:  # pragma: no cover - unreachable for |x| <= cutoff
        raise ArithmeticError(f"Ei series did not converge at x={x}")
    head = EULER_GAMMA + math.log(-x)
    value = head + total
    err = _EPS * (abs(head) + k * largest) + abs(contrib)
    return EiResult(value, err)


def _scaled_e1(z: float) -> tuple[float, int]:
    """``e^z * E1(z)`` for ``z > 0`` by continued fraction, plus iteration count."""
    # E1(z) = e^-z / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    b = z + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= TOL:
            return h, i
    raise ArithmeticError(f"E1 continued fraction did not converge at z={z}")


def _continued_fraction(x: float) -> EiResult:
    h, n_iter = _scaled_e1(-x)
    value = -h * math.exp(x)
    err = abs(value) * _EPS * (4.0 + 0.1 * math.sqrt(n_iter))
    return EiResult(value, err)


def ei(x: float) -> EiResult:
    """Exponential integral ``Ei(x) = -int_{-x}^inf e^-t / t dt`` for ``x < 0``.

    Parameters
    ----------
    x : float
        Finite negative argument.

    Returns
    -------
    EiResult
        Value (always negative) and a rough bound on its absolute error.

    Raises
    ------
    ValueError
        If ``x`` is not finite or ``x >= 0``.
    """
    x = _check(x)
    if -x <= SERIES_CUTOFF:
        return _series(x)
    return _continued_fraction(x)


def exp_ei(x: float) -> float:
    """``e^x * Ei(-x)`` for ``x > 0``; finite even where ``e^x`` overflows."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"exp_ei needs finite x > 0, got {x!r}")
    if x > SERIES_CUTOFF:
        return -_scaled_e1(x)[0]
    return math.exp(x) * _series(-x).value
