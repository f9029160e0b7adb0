"""Higher-order variational problems over sigma-lattices.

A problem of order r minimizes

    L[y] = integral over [a, b] of
           L(t, y(sigma^r(t)), D[y o sigma^(r-1)](t), ..., D^r[y](t))

subject to D^i y matching prescribed values at both endpoints for
i < r.  Trajectory slot i is v_i = D^i[y o sigma^(r-i)](t); on the
lattice the composition with sigma^k is an index shift, so slot values
come from difference-quotient tables over consecutive orbit points.

The Euler-Lagrange residual is oriented so that the first-order case
reads D[dL/du1] - dL/du0, matching the classical
d/dt dL/dy' - dL/dy convention; a trajectory is stationary exactly
when the residual vanishes along the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .core import (
    DEFAULT_DEPTH,
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    GridFunction,
    HahnParams,
    Lattice,
    LatticePoint,
    OMEGA0_POINT,
    Origin,
    sigma_pow,
)
from .dsl import Expr, Lagrangian, compile_lagrangian, evaluate, parse
from .errors import DegenerateDenominator, InsufficientDepth, NotAVariation
from .integrals import SeriesResult, _combine_two_sided, _indexed_series
from .operators import _orbit_level_values, grid_derivative_at_fixed, iterated_quotient

# Sampling the integrand past the float resolution of the lattice
# (orbit steps rounded to zero, or a grid candidate's depth) ends the
# series as data, not as an exception.
_ORBIT_EXHAUSTED = (DegenerateDenominator, InsufficientDepth)

# Anything usable as a trajectory candidate: grid data, a plain function
# of t, or an expression (tree or source) in the variable t.
Candidate = Union[GridFunction, Callable[[float], float], Expr, str]


@dataclass(frozen=True)
class Problem:
    """Fixed-endpoint variational problem of order r on [a, b]."""

    params: HahnParams
    r: int
    a: float
    b: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    lagrangian: Lagrangian

    def __post_init__(self) -> None:
        if isinstance(self.lagrangian, (str, Expr)):
            object.__setattr__(self, "lagrangian", compile_lagrangian(self.lagrangian, self.r))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"need finite a < b, got {self.a!r}, {self.b!r}")
        if self.r < 1:
            raise ValueError("order r must be at least 1")
        if self.lagrangian.order != self.r:
            raise ValueError(
                f"lagrangian has {self.lagrangian.order + 1} slots but the order is {self.r}"
            )
        if len(self.alpha) != self.r or len(self.beta) != self.r:
            raise ValueError(f"alpha and beta must each hold r = {self.r} values")
        for v in (*self.alpha, *self.beta):
            if not math.isfinite(v):
                raise ValueError("boundary values must be finite")

    def lattice(self, depth: int = DEFAULT_DEPTH) -> Lattice:
        return Lattice(self.params, self.a, self.b, depth)


def _as_point_fn(y: Candidate) -> Callable[[float], float] | None:
    """Resolve a candidate to a function of t; None when it is grid data."""
    if isinstance(y, GridFunction):
        return None
    if isinstance(y, str):
        y = parse(y)
    if isinstance(y, Expr):
        expr = y
        return lambda t: evaluate(expr, {"t": t})
    if callable(y):
        return y
    raise TypeError(f"not a usable candidate: {y!r}")


def _check_grid_compat(problem: Problem, grid: GridFunction) -> None:
    lat = grid.lattice
    if lat.params != problem.params or lat.a != problem.a or lat.b != problem.b:
        raise ValueError("grid candidate lives on a different lattice than the problem")


def materialize(problem: Problem, y: Candidate, depth: int = DEFAULT_DEPTH) -> GridFunction:
    """Candidate values realized on the problem's lattice at the given depth."""
    if isinstance(y, GridFunction):
        _check_grid_compat(problem, y)
        if y.lattice.depth < depth:
            raise InsufficientDepth(
                f"grid candidate has depth {y.lattice.depth}, need {depth}"
            )
        return y
    fn = _as_point_fn(y)
    return GridFunction.sample(problem.lattice(depth), fn)


class _OrbitView:
    """Lazy realizations and candidate values along one endpoint orbit."""

    def __init__(self, problem: Problem, y: Candidate, origin: Origin):
        if origin is Origin.FIXED:
            raise ValueError("views follow the endpoint orbits only")
        params = problem.params
        self.params = params
        self.origin = origin
        self.seed = problem.a if origin is Origin.A else problem.b
        self.prefactor = self.seed * (1.0 - params.q) - params.omega
        self.degenerate = self.prefactor == 0.0
        self._taus: list[float] = []
        self._vals: list[float] = []
        if isinstance(y, GridFunction):
            _check_grid_compat(problem, y)
            self.limit: int | None = y.lattice.depth
            self._grid_vals = y.orbit_values(origin)
            self._fixed = y.value_at_fixed
            self._fn = None
        else:
            self.limit = None
            self._grid_vals = None
            self._fixed = None
            self._fn = _as_point_fn(y)

    def tau(self, m: int) -> float:
        while len(self._taus) <= m:
            self._taus.append(sigma_pow(self.params, len(self._taus), self.seed))
        return self._taus[m]

    def val(self, m: int) -> float:
        if self._grid_vals is not None:
            if m > self.limit:
                raise InsufficientDepth(
                    f"orbit index {m} exceeds grid depth {self.limit}"
                )
            return self._grid_vals[m]
        while len(self._vals) <= m:
            self._vals.append(self._fn(self.tau(len(self._vals))))
        return self._vals[m]

    def fixed_val(self) -> float:
        if self._fixed is not None or self._grid_vals is not None:
            return self._fixed
        return self._fn(self.params.omega0)


class _CombView:
    """View of y + coeff*eta without materializing the combination."""

    def __init__(self, base: _OrbitView, other: _OrbitView, coeff: float):
        self.params = base.params
        self.origin = base.origin
        self.seed = base.seed
        self.prefactor = base.prefactor
        self.degenerate = base.degenerate
        self._base, self._other, self._coeff = base, other, coeff

    def tau(self, m: int) -> float:
        return self._base.tau(m)

    def val(self, m: int) -> float:
        return self._base.val(m) + self._coeff * self._other.val(m)


def traj_components(taus: Sequence[float], vals: Sequence[float]) -> list[float]:
    """Slot values (v_0..v_r) from one window of r+1 consecutive orbit points.

    v_i is the i-fold quotient of the index-shifted values
    vals[r-i..r]; all quotient denominators are anchored at the window
    base because that is where the shifted composition is evaluated.
    """
    r = len(taus) - 1
    out = [vals[r]]
    for i in range(1, r + 1):
        out.append(iterated_quotient(taus[: i + 1], vals[r - i :]))
    return out


def trajectory(
    problem: Problem, y: Candidate, point: LatticePoint, depth: int = DEFAULT_DEPTH
) -> tuple[float, ...]:
    """(t, v_0, ..., v_r) at a lattice point.

    At omega0 (or on a degenerate orbit) the slot values reduce to
    v_i = q**(i*(r-i)) * D^i[y](omega0), with the iterates estimated by
    orbit extrapolation from grid data."""
    r = problem.r
    if point.origin is not Origin.FIXED:
        view = _OrbitView(problem, y, point.origin)
        if not view.degenerate:
            taus = [view.tau(point.n + j) for j in range(r + 1)]
            vals = [view.val(point.n + j) for j in range(r + 1)]
            return (taus[0], *traj_components(taus, vals))
    grid = materialize(problem, y, depth)
    q = problem.params.q
    w0 = problem.params.omega0
    slots = [q ** (i * (r - i)) * grid_derivative_at_fixed(grid, i) for i in range(r + 1)]
    return (w0, *slots)


# ---------------------------------------------------------------------------
# Functional value and first variation
# ---------------------------------------------------------------------------

def _one_sided_functional(problem: Problem, view, tol: float, max_terms: int) -> SeriesResult:
    if view.prefactor == 0.0:
        return SeriesResult(0.0, 0, 0.0, True)
    r = problem.r
    lagr = problem.lagrangian

    def sample(k: int) -> float:
        taus = [view.tau(k + j) for j in range(r + 1)]
        vals = [view.val(k + j) for j in range(r + 1)]
        return lagr.value(taus[0], traj_components(taus, vals))

    return _indexed_series(
        problem.params.q, view.prefactor, sample, tol, max_terms,
        halt_on=_ORBIT_EXHAUSTED,
    )


def functional_value(
    problem: Problem,
    y: Candidate,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """The objective integral, as the difference of the two one-sided series."""
    at_b = _one_sided_functional(problem, _OrbitView(problem, y, Origin.B), tol, max_terms)
    at_a = _one_sided_functional(problem, _OrbitView(problem, y, Origin.A), tol, max_terms)
    return _combine_two_sided(at_b, at_a)


def _endpoint_derivative(
    problem: Problem, y: Candidate, origin: Origin, i: int, depth: int
) -> float:
    """D^i y at an endpoint; degenerate endpoints fall back to the
    omega0 extrapolation (i >= 1) or the fixed value (i = 0)."""
    view = _OrbitView(problem, y, origin)
    if not view.degenerate:
        taus = [view.tau(j) for j in range(i + 1)]
        vals = [view.val(j) for j in range(i + 1)]
        return iterated_quotient(taus, vals) if i else vals[0]
    if i == 0:
        grid = y if isinstance(y, GridFunction) else None
        return grid.value_at_fixed if grid is not None else _as_point_fn(y)(problem.params.omega0)
    return grid_derivative_at_fixed(materialize(problem, y, depth), i)


@dataclass(frozen=True)
class BoundaryViolation:
    endpoint: str  # "a" or "b"
    index: int  # derivative order i
    actual: float
    target: float
    error: float


def _boundary_violations(
    problem: Problem,
    y: Candidate,
    targets_a: Sequence[float],
    targets_b: Sequence[float],
    tol: float,
    depth: int,
) -> list[BoundaryViolation]:
    out = []
    for endpoint, origin, targets in (("a", Origin.A, targets_a), ("b", Origin.B, targets_b)):
        for i in range(problem.r):
            actual = _endpoint_derivative(problem, y, origin, i, depth)
            err = abs(actual - targets[i])
            if not err <= tol:
                out.append(BoundaryViolation(endpoint, i, actual, targets[i], err))
    return out


def is_admissible(
    problem: Problem, y: Candidate, tol: float = 1e-9, depth: int = DEFAULT_DEPTH
) -> tuple[bool, list[BoundaryViolation]]:
    """Whether all 2r endpoint conditions hold within tol, with the offenders."""
    bad = _boundary_violations(problem, y, problem.alpha, problem.beta, tol, depth)
    return (not bad, bad)


def is_variation(
    problem: Problem, eta: Candidate, tol: float = 1e-9, depth: int = DEFAULT_DEPTH
) -> tuple[bool, list[BoundaryViolation]]:
    """Whether D^i eta vanishes at both endpoints (within tol) for i < r."""
    zeros = (0.0,) * problem.r
    bad = _boundary_violations(problem, eta, zeros, zeros, tol, depth)
    return (not bad, bad)


def first_variation(
    problem: Problem,
    y: Candidate,
    eta: Candidate,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
    variation_tol: float = 1e-8,
) -> SeriesResult:
    """Gateaux derivative of the functional at y along an admissible variation.

    Integrates sum over i of dL/du_i (trajectory of y) times the i-th
    trajectory slot of eta.  Raises NotAVariation unless eta's boundary
    iterates vanish within variation_tol.
    """
    ok, bad = is_variation(problem, eta, variation_tol)
    if not ok:
        worst = max(v.error for v in bad)
        raise NotAVariation(
            f"perturbation does not vanish at the endpoints (worst error {worst:.3e})"
        )
    r = problem.r
    lagr = problem.lagrangian
    parts = []
    for origin in (Origin.B, Origin.A):
        vy = _OrbitView(problem, y, origin)
        ve = _OrbitView(problem, eta, origin)
        if vy.prefactor == 0.0:
            parts.append(SeriesResult(0.0, 0, 0.0, True))
            continue

        def sample(k: int, vy=vy, ve=ve) -> float:
            taus = [vy.tau(k + j) for j in range(r + 1)]
            ys = traj_components(taus, [vy.val(k + j) for j in range(r + 1)])
            es = traj_components(taus, [ve.val(k + j) for j in range(r + 1)])
            t = taus[0]
            return math.fsum(lagr.partial(i, t, ys) * es[i] for i in range(r + 1))

        parts.append(
            _indexed_series(
                problem.params.q, vy.prefactor, sample, tol, max_terms,
                halt_on=_ORBIT_EXHAUSTED,
            )
        )
    return _combine_two_sided(parts[0], parts[1])


def first_variation_fd(
    problem: Problem,
    y: Candidate,
    eta: Candidate,
    eps: float = 1e-5,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Central-difference check value (L[y + eps*eta] - L[y - eps*eta]) / (2*eps)."""
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    shifted = []
    for sign in (1.0, -1.0):
        parts = []
        for origin in (Origin.B, Origin.A):
            vy = _OrbitView(problem, y, origin)
            ve = _OrbitView(problem, eta, origin)
            parts.append(
                _one_sided_functional(
                    problem, _CombView(vy, ve, sign * eps), tol, max_terms
                )
            )
        shifted.append(parts[0].value - parts[1].value)
    return (shifted[0] - shifted[1]) / (2.0 * eps)


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals
# ---------------------------------------------------------------------------

def _coeff(q: float, i: int) -> float:
    """Signed weight of the i-th operator iterate in the residual."""
    return (-1.0) ** (i + 1) * (1.0 / q) ** ((i - 1) * i // 2)


def _residual_from_window(
    q: float, taus: Sequence[float], vals: Sequence[float], lagr: Lagrangian, r: int
) -> float:
    """Residual at the window base; taus/vals cover 2r+1 consecutive points."""
    us = [traj_components(taus[m : m + r + 1], vals[m : m + r + 1]) for m in range(r + 1)]
    total = 0.0
    for i in range(r + 1):
        gs = [lagr.partial(i, taus[m], us[m]) for m in range(i + 1)]
        di = iterated_quotient(taus[: i + 1], gs) if i else gs[0]
        total += _coeff(q, i) * di
    return total


def el_residual(
    problem: Problem, y: Candidate, point: LatticePoint, depth: int = DEFAULT_DEPTH
) -> float:
    """Euler-Lagrange residual at one lattice point.

    Zero along both orbits is the stationarity (necessary) condition;
    for r = 1 the value is exactly D[dL/du1] - dL/du0."""
    r = problem.r
    if point.origin is not Origin.FIXED:
        view = _OrbitView(problem, y, point.origin)
        if not view.degenerate:
            taus = [view.tau(point.n + j) for j in range(2 * r + 1)]
            vals = [view.val(point.n + j) for j in range(2 * r + 1)]
            return _residual_from_window(problem.params.q, taus, vals, problem.lagrangian, r)
    return _residual_at_fixed(problem, y, depth)


def _orbit_partial_values(
    problem: Problem, view: _OrbitView, top: int
) -> tuple[list[float], list[list[float]]]:
    """taus[0..top+r] plus, for each i, dL/du_i along the orbit up to index top."""
    r = problem.r
    lagr = problem.lagrangian
    taus = [view.tau(m) for m in range(top + r + 1)]
    vals = [view.val(m) for m in range(top + r + 1)]
    partials: list[list[float]] = [[] for _ in range(r + 1)]
    for m in range(top + 1):
        us = traj_components(taus[m : m + r + 1], vals[m : m + r + 1])
        for i in range(r + 1):
            partials[i].append(lagr.partial(i, taus[m], us))
    return taus, partials


def _extrapolate_to_fixed(q: float, level: list[float | None]) -> float | None:
    """Geometric limit estimate from the deepest adjacent pair of orbit values."""
    for j in range(len(level) - 2, -1, -1):
        if level[j] is not None and level[j + 1] is not None:
            return (level[j + 1] - q * level[j]) / (1.0 - q)
    return None


def _residual_at_fixed(problem: Problem, y: Candidate, depth: int) -> float:
    """Residual estimate at omega0 by orbit extrapolation of each D^i[g_i]."""
    r = problem.r
    q = problem.params.q
    for origin in (Origin.A, Origin.B):
        view = _OrbitView(problem, y, origin)
        if view.degenerate:
            continue
        top = (view.limit if view.limit is not None else depth) - 2 * r
        if top < 1:
            raise InsufficientDepth(f"need depth > {2 * r} for the omega0 residual")
        taus, partials = _orbit_partial_values(problem, view, top + r)
        total = 0.0
        for i in range(r + 1):
            level = _orbit_level_values(taus[: top + r + 1], partials[i], i)
            est = _extrapolate_to_fixed(q, level[: top + 1])
            if est is None:
                raise InsufficientDepth("orbit too shallow to extrapolate the residual")
            total += _coeff(q, i) * est
        return total
    raise InsufficientDepth("both orbits are degenerate")


@dataclass
class ElReport:
    """Stationarity check over a whole lattice.

    ``residuals`` maps orbit points (and omega0 when included) to
    residual values and ``max_abs_residual`` is the max over everything
    stored; the extrapolated omega0 entry is advisory, so the pass
    verdict judges it at 100x the tolerance."""

    residuals: dict[LatticePoint, float]
    max_abs_residual: float
    boundary_violations: list[BoundaryViolation]
    depth_used: int
    omega0_included: bool
    omega0_residual: float | None
    tol: float
    passed: bool


def el_report(
    problem: Problem,
    y: Candidate,
    depth: int = DEFAULT_DEPTH,
    tol: float = 1e-9,
    include_omega0: bool = False,
) -> ElReport:
    """Residuals at every orbit point with full stencil room, plus the
    boundary check; points whose realizations merged into omega0 in
    float are silently dropped and depth_used records the deepest index
    actually evaluated."""
    r = problem.r
    q = problem.params.q
    if depth < 2 * r + 1:
        raise InsufficientDepth(f"el_report needs depth >= {2 * r + 1}")
    residuals: dict[LatticePoint, float] = {}
    depth_used = 0
    for origin in (Origin.A, Origin.B):
        view = _OrbitView(problem, y, origin)
        if view.degenerate:
            continue
        top_grid = view.limit if view.limit is not None else depth
        top = min(depth, top_grid) - 2 * r
        if top < 0:
            continue
        taus, partials = _orbit_partial_values(problem, view, top + r)
        per_i = [
            _orbit_level_values(taus[: top + r + 1], partials[i], i)[: top + 1]
            for i in range(r + 1)
        ]
        for n in range(top + 1):
            if any(per_i[i][n] is None for i in range(r + 1)):
                break
            residuals[LatticePoint(origin, n)] = math.fsum(
                _coeff(q, i) * per_i[i][n] for i in range(r + 1)
            )
            depth_used = max(depth_used, n)
    orbit_max = max((abs(v) for v in residuals.values()), default=0.0)
    violations = _boundary_violations(problem, y, problem.alpha, problem.beta, tol, depth)
    passed = orbit_max <= tol and not violations
    omega0_res = None
    if include_omega0:
        omega0_res = _residual_at_fixed(problem, y, depth)
        residuals[OMEGA0_POINT] = omega0_res
        passed = passed and abs(omega0_res) <= 100.0 * tol
    max_abs = max((abs(v) for v in residuals.values()), default=0.0)
    return ElReport(
        residuals=residuals,
        max_abs_residual=max_abs,
        boundary_violations=violations,
        depth_used=depth_used,
        omega0_included=include_omega0,
        omega0_residual=omega0_res,
        tol=tol,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# Limit-case residuals (omega -> 0 and q -> 1)
# ---------------------------------------------------------------------------

def _limit_residual(
    problem: Problem,
    y: Candidate,
    point: LatticePoint,
    node: Callable[[float, int], float],
    q_for_coeff: float,
) -> float:
    if point.origin is Origin.FIXED:
        raise ValueError("limit residuals are defined along the endpoint orbits only")
    fn = _as_point_fn(y)
    if fn is None:
        raise TypeError("limit residuals need a candidate evaluable at arbitrary reals")
    r = problem.r
    seed = problem.a if point.origin is Origin.A else problem.b
    taus = [node(seed, point.n + j) for j in range(2 * r + 1)]
    vals = [fn(t) for t in taus]
    return _residual_from_window(q_for_coeff, taus, vals, problem.lagrangian, r)


def q_el_residual(problem: Problem, y: Candidate, point: LatticePoint) -> float:
    """Residual for the omega = 0 (pure dilation) operators on the q-lattice
    {a*q^n} union {b*q^n}; the problem's omega is ignored."""
    q = problem.params.q
    return _limit_residual(problem, y, point, lambda s, m: s * q**m, q)


def h_el_residual(problem: Problem, y: Candidate, point: LatticePoint) -> float:
    """Residual for the q = 1 (pure shift) operators with step h = omega on
    the arithmetic lattice {a + n*h} union {b + n*h}."""
    h = problem.params.omega
    return _limit_residual(problem, y, point, lambda s, m: s + m * h, 1.0)
