"""Series-based integrals on sigma-lattices.

The integral from the fixed point omega0 out to x is the weighted node
sum

    (x*(1-q) - omega) * sum_{k>=0} q^k * f(sigma^k(x))

and a general interval integral is the difference of two such series.
Convergence is certified with a geometric tail bound: once the running
maximum of recent samples is M, the unsummed remainder is at most
|prefactor| * q^(k+1) * M / (1 - q).  Results carry the bound instead
of raising, so a caller can distinguish "converged under tol" from
"ran out of terms" without exception handling.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .core import DEFAULT_MAX_TERMS, DEFAULT_TOL, HahnParams
from .errors import NonFiniteValue

# Samples must stay below the running maximum for this many consecutive
# terms before the tail bound is trusted; guards against f vanishing at
# the first few nodes by accident.
_TAIL_WINDOW = 5


@dataclass(frozen=True)
class SeriesResult:
    """Outcome of one series evaluation.

    converged means the tail bound dropped to the requested tolerance
    before max_terms; the partial value and bound are reported either way.
    """

    value: float
    terms_used: int
    tail_bound: float
    converged: bool


def _validate_controls(tol: float, max_terms: int) -> None:
    if not (tol > 0.0 and math.isfinite(tol)):
        raise ValueError(f"tol must be positive and finite, got {tol!r}")
    if max_terms < 1:
        raise ValueError(f"max_terms must be at least 1, got {max_terms!r}")


def _indexed_series(
    q: float,
    prefactor: float,
    sample: Callable[[int], float],
    tol: float,
    max_terms: int,
    halt_on: tuple[type[Exception], ...] = (),
) -> SeriesResult:
    """prefactor * sum_k q^k * sample(k), Kahan-compensated.

    sample(k) is called once per index in increasing order.  A zero
    prefactor is an exact empty sum regardless of the samples.  When
    sample raises one of halt_on the orbit is treated as exhausted: the
    partial sum is returned with converged=False (the lattice ran out
    of usable points, same as running out of terms).
    """
    _validate_controls(tol, max_terms)
    if prefactor == 0.0:
        return SeriesResult(0.0, 0, 0.0, True)
    total = 0.0
    comp = 0.0
    weight = 1.0
    scale = abs(prefactor) * q / (1.0 - q)
    recent: deque[float] = deque(maxlen=_TAIL_WINDOW)
    done = 0
    tail = math.inf
    for k in range(max_terms):
        try:
            fx = sample(k)
        except halt_on:
            break
        if not math.isfinite(fx):
            raise NonFiniteValue(f"series term {k} evaluated to {fx!r}")
        term = weight * fx
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        done = k + 1
        recent.append(abs(fx))
        tail = scale * weight * max(recent)
        weight *= q
        if done >= _TAIL_WINDOW and tail <= tol:
            return SeriesResult(prefactor * total, done, tail, True)
    return SeriesResult(prefactor * total, done, tail, False)


def _orbit_series(
    q: float,
    omega: float,
    f: Callable[[float], float],
    x: float,
    tol: float,
    max_terms: int,
) -> SeriesResult:
    """One-sided series for the integral from the fixed point to x."""
    prefactor = x * (1.0 - q) - omega
    nodes: list[float] = [x]

    def sample(k: int) -> float:
        while len(nodes) <= k:
            nodes.append(q * nodes[-1] + omega)
        return f(nodes[k])

    return _indexed_series(q, prefactor, sample, tol, max_terms)


def _combine_two_sided(at_b: SeriesResult, at_a: SeriesResult) -> SeriesResult:
    return SeriesResult(
        value=at_b.value - at_a.value,
        terms_used=max(at_b.terms_used, at_a.terms_used),
        tail_bound=at_b.tail_bound + at_a.tail_bound,
        converged=at_b.converged and at_a.converged,
    )


def integral_from_fixed(
    params: HahnParams,
    f: Callable[[float], float],
    x: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Integral of f over [omega0, x] (signed; x may sit on either side)."""
    if not math.isfinite(x):
        raise ValueError(f"endpoint must be finite, got {x!r}")
    return _orbit_series(params.q, params.omega, f, x, tol, max_terms)


def integral(
    params: HahnParams,
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Integral of f over [a, b] as the difference of the fixed-point series.

    Antisymmetric in the endpoints; both orbit series share tol and
    max_terms and the reported tail bound is the sum of the two."""
    at_b = integral_from_fixed(params, f, b, tol, max_terms)
    at_a = integral_from_fixed(params, f, a, tol, max_terms)
    return _combine_two_sided(at_b, at_a)


def sigma_cell_integral(params: HahnParams, f: Callable[[float], float], t: float) -> float:
    """Exact integral over the single cell [sigma(t), t]:
    -denominator(t) * f(t), the one-node case of the series."""
    if not math.isfinite(t):
        raise ValueError(f"cell anchor must be finite, got {t!r}")
    fx = f(t)
    if not math.isfinite(fx):
        raise NonFiniteValue(f"f({t!r}) evaluated to {fx!r}")
    return (t * (1.0 - params.q) - params.omega) * fx


def jackson_q_integral(
    q: float,
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Pure dilation (omega = 0) integral; the fixed point is 0."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("endpoints must be finite")
    at_b = _orbit_series(q, 0.0, f, b, tol, max_terms)
    at_a = _orbit_series(q, 0.0, f, a, tol, max_terms)
    return _combine_two_sided(at_b, at_a)


def _norlund_one_sided(
    omega: float,
    f: Callable[[float], float],
    x: float,
    tol: float,
    max_terms: int,
) -> SeriesResult:
    """-omega * sum_{k>=0} f(x + k*omega).

    There is no geometric envelope here, so convergence is empirical:
    stop once the last few weighted terms all sit below tol.  The
    reported bound is that recent maximum, not a certificate."""
    _validate_controls(tol, max_terms)
    total = 0.0
    comp = 0.0
    recent: deque[float] = deque(maxlen=3)
    t = x
    for k in range(max_terms):
        fx = f(t)
        if not math.isfinite(fx):
            raise NonFiniteValue(f"series term {k} evaluated to {fx!r}")
        term = -omega * fx
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        recent.append(abs(term))
        t += omega
        if k + 1 >= 3 and max(recent) <= tol:
            return SeriesResult(total, k + 1, max(recent), True)
    return SeriesResult(total, max_terms, max(recent), False)


def norlund_sum(
    omega: float,
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Pure shift (q = 1) integral over [a, b] with step omega > 0."""
    if not (omega > 0.0 and math.isfinite(omega)):
        raise ValueError(f"omega must be positive and finite, got {omega!r}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("endpoints must be finite")
    at_b = _norlund_one_sided(omega, f, b, tol, max_terms)
    at_a = _norlund_one_sided(omega, f, a, tol, max_terms)
    return _combine_two_sided(at_b, at_a)
