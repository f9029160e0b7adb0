"""Difference-quotient operators on the sigma-scale and its limits.

The basic operator is

    D[f](t) = (f(q*t + omega) - f(t)) / ((q - 1)*t + omega),   t != omega0,

extended to the fixed point by the classical derivative f'(omega0)
(estimated numerically for black-box functions).  Iterated operators on
grid data are computed through stencils of consecutive orbit points;
the value of any iterate *at* omega0 is recovered by geometric
extrapolation along an orbit, using that for g continuous at omega0 with
one-sided slope, g(t_n) - g(omega0) shrinks by a factor q per step.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .core import GridFunction, HahnParams, Lattice, LatticePoint, Origin, sigma_pow
from .errors import DegenerateDenominator, InsufficientDepth, NonFiniteValue


def _checked(fx: float, t: float) -> float:
    if not math.isfinite(fx):
        raise NonFiniteValue(f"function returned {fx!r} at t={t!r}")
    return fx


def _classical_derivative(f: Callable[[float], float], t: float) -> float:
    """Numeric f'(t): symmetric quotients at steps h, h/2, h/4 plus one
    Richardson extrapolation of the finest pair; error O(h**4)."""
    h = 1e-4 * max(1.0, abs(t))
    quots = []
    for step in (h, h / 2.0, h / 4.0):
        quots.append((_checked(f(t + step), t + step) - _checked(f(t - step), t - step)) / (2.0 * step))
    return (4.0 * quots[2] - quots[1]) / 3.0


def iterated_quotient(taus: Sequence[float], vals: Sequence[float]) -> float:
    """Top entry of the triangular difference-quotient table.

    ``taus`` must be consecutive sigma-iterates t, sigma(t), ...; entry j
    of every level divides by taus[j+1] - taus[j] because a level-l value
    at taus[j] steps to taus[j+1].  Returns D^m at taus[0] for
    m = len(taus) - 1.
    """
    row = list(vals)
    m = len(row) - 1
    for level in range(m):
        nxt = []
        for j in range(m - level):
            den = taus[j + 1] - taus[j]
            if den == 0.0:
                raise DegenerateDenominator(
                    f"orbit step underflowed to zero near t={taus[j]!r}"
                )
            nxt.append((row[j + 1] - row[j]) / den)
        row = nxt
    return row[0]


def hahn_derivative(params: HahnParams, f, t) -> float:
    """D[f] at t; f may be a callable on reals or a GridFunction.

    For callables, t == omega0 (exact float identity) falls back to the
    classical derivative estimate.  A vanishing denominator anywhere
    else raises DegenerateDenominator.
    """
    return hahn_derivative_n(params, f, 1, t)


def hahn_derivative_n(params: HahnParams, f, r: int, t) -> float:
    """r-fold iterate D^r[f] at t (r = 0 returns the plain value)."""
    if r < 0:
        raise ValueError("order r must be non-negative")
    if isinstance(f, GridFunction):
        if not isinstance(t, LatticePoint):
            raise TypeError("grid functions are differentiated at LatticePoints")
        return _grid_derivative_n(f, r, t)
    if isinstance(t, LatticePoint):
        raise TypeError("a lattice point needs a GridFunction carrying its lattice")
    return _callable_derivative_n(params, f, r, t)


def _callable_derivative_n(params: HahnParams, f: Callable[[float], float], r: int, t: float) -> float:
    if r == 0:
        return _checked(f(t), t)
    if t == params.omega0:
        # D^r at the fixed point is the classical derivative of D^(r-1).
        inner = lambda s: _callable_derivative_n(params, f, r - 1, s)  # noqa: E731
        return _classical_derivative(inner, t)
    taus = [sigma_pow(params, j, t) for j in range(r + 1)]
    vals = [_checked(f(tj), tj) for tj in taus]
    return iterated_quotient(taus, vals)


def _orbit_arrays(y: GridFunction, origin: Origin) -> tuple[list[float], list[float]]:
    lat = y.lattice
    taus = [lat.realize(LatticePoint(origin, n)) for n in range(lat.depth + 1)]
    return taus, list(y.orbit_values(origin))


def _grid_derivative_n(y: GridFunction, r: int, point: LatticePoint) -> float:
    lat = y.lattice
    if r == 0:
        return y.value(point)
    if point.origin is Origin.FIXED or lat.orbit_degenerate(point.origin):
        return grid_derivative_at_fixed(y, r)
    if point.n + r > lat.depth:
        raise InsufficientDepth(
            f"D^{r} at index {point.n} needs depth {point.n + r}, lattice has {lat.depth}"
        )
    taus, vals = _orbit_arrays(y, point.origin)
    sl = slice(point.n, point.n + r + 1)
    return iterated_quotient(taus[sl], vals[sl])


def _orbit_level_values(
    taus: Sequence[float], vals: Sequence[float], level: int
) -> list[float | None]:
    """All level-fold quotients along one orbit; None marks entries whose
    stencil hit a float-merged pair of points near omega0."""
    row: list[float | None] = list(vals)
    for _ in range(level):
        nxt: list[float | None] = []
        for j in range(len(row) - 1):
            den = taus[j + 1] - taus[j]
            if den == 0.0 or row[j] is None or row[j + 1] is None:
                nxt.append(None)
            else:
                nxt.append((row[j + 1] - row[j]) / den)
        row = nxt
    return row


def grid_derivative_at_fixed(y: GridFunction, r: int) -> float:
    """Estimate D^r[y](omega0) from grid data.

    Takes the deepest adjacent pair of D^r values along a non-degenerate
    orbit and removes the leading O(t - omega0) error geometrically:
    with v_n = L + C*(t_n - omega0) and t_{n+1} - omega0 = q*(t_n - omega0),
    L = (v_{n+1} - q*v_n) / (1 - q).
    """
    if r == 0:
        return y.value_at_fixed
    lat = y.lattice
    q = lat.params.q
    for origin in (Origin.A, Origin.B):
        if lat.orbit_degenerate(origin):
            continue
        taus, vals = _orbit_arrays(y, origin)
        level = _orbit_level_values(taus, vals, r)
        for j in range(len(level) - 2, -1, -1):
            if level[j] is not None and level[j + 1] is not None:
                return (level[j + 1] - q * level[j]) / (1.0 - q)
    raise InsufficientDepth(
        f"no orbit offers two adjacent D^{r} values for the omega0 extrapolation"
    )


def norm_r_inf(y: GridFunction, r: int) -> float:
    """sum over i <= r of the sup of |D^i y| over lattice points with room.

    The fixed point contributes only at i = 0; orbit points whose
    stencil ran past the depth or collapsed onto omega0 are skipped.
    """
    if r < 0:
        raise ValueError("order r must be non-negative")
    lat = y.lattice
    if lat.depth < r + 1:
        raise InsufficientDepth(f"norm of order {r} needs depth >= {r + 1}")
    total = 0.0
    per_orbit = {}
    for origin in (Origin.A, Origin.B):
        if not lat.orbit_degenerate(origin):
            per_orbit[origin] = _orbit_arrays(y, origin)
    for i in range(r + 1):
        best = abs(y.value_at_fixed) if i == 0 else None
        for origin, (taus, vals) in per_orbit.items():
            for v in _orbit_level_values(taus, vals, i):
                if v is not None and (best is None or abs(v) > best):
                    best = abs(v)
        if i == 0:
            for origin in (Origin.A, Origin.B):
                if origin not in per_orbit:
                    for v in y.orbit_values(origin):
                        best = max(best, abs(v))
        if best is None:
            raise InsufficientDepth(f"no computable D^{i} values at depth {lat.depth}")
        total += best
    return total


def forward_h_difference(h: float, f: Callable[[float], float], t: float) -> float:
    """Forward difference (f(t + h) - f(t)) / h, the q -> 1 operator."""
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"step h must be finite and positive, got {h!r}")
    return (_checked(f(t + h), t + h) - _checked(f(t), t)) / h


def jackson_q_derivative(q: float, f: Callable[[float], float], t: float) -> float:
    """Classical q-derivative (omega = 0 scale); t = 0 falls back to f'(0)."""
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0, 1), got {q!r}")
    if t == 0.0:
        return _classical_derivative(f, 0.0)
    return (_checked(f(q * t), q * t) - _checked(f(t), t)) / (t * (q - 1.0))
