"""Parameters, sigma-orbits and grid functions.

The operator scale is the affine map sigma(t) = q*t + omega with
0 < q < 1 and omega > 0.  sigma has the unique fixed point
omega0 = omega/(1-q) and every orbit t, sigma(t), sigma^2(t), ...
converges to omega0 geometrically.  A computational lattice consists of
the two orbits seeded at the endpoints of a working interval plus the
fixed point itself.

Lattice points are identified by the integer pair (origin, n), never by
their float realizations: close to omega0 distinct points realize to
floats that are equal or nearly equal, so float comparison would merge
them incorrectly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .errors import InsufficientDepth

# Package-wide numeric defaults.
DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 10_000
DEFAULT_DEPTH = 64


def q_bracket(k: int, q: float) -> float:
    """The q-integer [k]_q = (1 - q**k)/(1 - q) = 1 + q + ... + q**(k-1)."""
    return (1.0 - q**k) / (1.0 - q)


@dataclass(frozen=True)
class HahnParams:
    """Scale pair (q, omega) for sigma(t) = q*t + omega."""

    q: float
    omega: float

    def __post_init__(self) -> None:
        if not (isinstance(self.q, float) or isinstance(self.q, int)):
            raise TypeError("q must be a real number")
        if not math.isfinite(self.q) or not (0.0 < self.q < 1.0):
            raise ValueError(f"q must be a finite number strictly inside (0, 1), got {self.q!r}")
        if not math.isfinite(self.omega) or not self.omega > 0.0:
            raise ValueError(f"omega must be finite and strictly positive, got {self.omega!r}")

    @property
    def omega0(self) -> float:
        """Fixed point of sigma: omega / (1 - q)."""
        return self.omega / (1.0 - self.q)

    def sigma(self, t: float) -> float:
        return self.q * t + self.omega

    def denominator(self, t: float) -> float:
        """(q - 1)*t + omega, the step sigma(t) - t appearing in difference quotients."""
        return (self.q - 1.0) * t + self.omega


def sigma_pow(params: HahnParams, k: int, t: float) -> float:
    """k-fold iterate of sigma; negative k applies the inverse map.

    sigma^k(t)  = q**k * t + omega*[k]_q          for k >= 0
    sigma^-k(t) = (t - omega*[k]_q) / q**k        for k >= 0
    """
    q, omega = params.q, params.omega
    if k >= 0:
        return q**k * t + omega * q_bracket(k, q)
    m = -k
    return (t - omega * q_bracket(m, q)) / q**m


class Origin(enum.Enum):
    """Which seed a lattice point's orbit starts from."""

    A = "a"
    B = "b"
    FIXED = "omega0"


@dataclass(frozen=True)
class LatticePoint:
    """Integer identity of a lattice point: n-th sigma-iterate of the origin seed."""

    origin: Origin
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("lattice index n must be non-negative")
        if self.origin is Origin.FIXED and self.n != 0:
            raise ValueError("the fixed point has index 0")

    def advanced(self, k: int = 1) -> "LatticePoint":
        """Point k sigma-steps deeper along the same orbit (omega0 is a fixed point)."""
        if self.origin is Origin.FIXED:
            return self
        return LatticePoint(self.origin, self.n + k)


OMEGA0_POINT = LatticePoint(Origin.FIXED, 0)


@dataclass(frozen=True)
class Lattice:
    """Finite two-orbit lattice over a working interval.

    Holds the orbit of ``a`` and the orbit of ``b`` up to ``depth``
    sigma-steps, plus the fixed point omega0.  The working interval is
    the convex hull of {a, b, omega0}; orbits can only leave [a, b] by
    heading toward omega0.
    """

    params: HahnParams
    a: float
    b: float
    depth: int = DEFAULT_DEPTH

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a!r}, b={self.b!r}")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    def seed(self, origin: Origin) -> float:
        if origin is Origin.A:
            return self.a
        if origin is Origin.B:
            return self.b
        return self.params.omega0

    def orbit_degenerate(self, origin: Origin) -> bool:
        """True when the orbit seed coincides with omega0, collapsing the orbit.

        Detected through the exact vanishing of the prefactor
        s*(1-q) - omega rather than a float comparison against omega0.
        """
        if origin is Origin.FIXED:
            return True
        s = self.seed(origin)
        return s * (1.0 - self.params.q) - self.params.omega == 0.0

    def realize(self, point: LatticePoint) -> float:
        """Float coordinate of a lattice point: sigma^n applied to its seed."""
        if point.origin is Origin.FIXED:
            return self.params.omega0
        if point.n > self.depth:
            raise InsufficientDepth(
                f"point index {point.n} exceeds lattice depth {self.depth}"
            )
        return sigma_pow(self.params, point.n, self.seed(point.origin))

    def interval(self) -> tuple[float, float]:
        """Convex hull of {a, b, omega0}."""
        w0 = self.params.omega0
        return min(self.a, self.b, w0), max(self.a, self.b, w0)

    def orbit(self, origin: Origin) -> list[LatticePoint]:
        return [LatticePoint(origin, n) for n in range(self.depth + 1)]

    def points(self) -> Iterator[LatticePoint]:
        """All points: both orbits to full depth, then the fixed point."""
        for origin in (Origin.A, Origin.B):
            for n in range(self.depth + 1):
                yield LatticePoint(origin, n)
        yield OMEGA0_POINT

    def size(self) -> int:
        return 2 * (self.depth + 1) + 1


@dataclass
class GridFunction:
    """Real values attached to every point of a lattice.

    Orbit values are stored as dense per-orbit lists indexed by n; the
    fixed point carries its own value.  Instances are treated as
    immutable once built: derived grids are produced by ``sample``,
    ``axpy`` or ``replace_value``, never by in-place mutation.
    """

    lattice: Lattice
    values_a: list[float]
    values_b: list[float]
    value_at_fixed: float

    def __post_init__(self) -> None:
        want = self.lattice.depth + 1
        if len(self.values_a) != want or len(self.values_b) != want:
            raise ValueError(
                f"need {want} values per orbit, got {len(self.values_a)}/{len(self.values_b)}"
            )
        for v in self.values_a:
            _require_finite(v)
        for v in self.values_b:
            _require_finite(v)
        _require_finite(self.value_at_fixed)

    @classmethod
    def sample(cls, lattice: Lattice, fn: Callable[[float], float]) -> "GridFunction":
        """Attach fn's values at every realized lattice point."""
        va = [fn(lattice.realize(LatticePoint(Origin.A, n))) for n in range(lattice.depth + 1)]
        vb = [fn(lattice.realize(LatticePoint(Origin.B, n))) for n in range(lattice.depth + 1)]
        return cls(lattice, va, vb, fn(lattice.params.omega0))

    def orbit_values(self, origin: Origin) -> list[float]:
        if origin is Origin.A:
            return self.values_a
        if origin is Origin.B:
            return self.values_b
        raise ValueError("the fixed point is not an orbit")

    def value(self, point: LatticePoint) -> float:
        if point.origin is Origin.FIXED:
            return self.value_at_fixed
        if point.n > self.lattice.depth:
            raise InsufficientDepth(
                f"point index {point.n} exceeds lattice depth {self.lattice.depth}"
            )
        return self.orbit_values(point.origin)[point.n]

    def axpy(self, coeff: float, other: "GridFunction") -> "GridFunction":
        """Pointwise self + coeff*other on the shared lattice."""
        if other.lattice != self.lattice:
            raise ValueError("grid functions live on different lattices")
        return GridFunction(
            self.lattice,
            [x + coeff * y for x, y in zip(self.values_a, other.values_a)],
            [x + coeff * y for x, y in zip(self.values_b, other.values_b)],
            self.value_at_fixed + coeff * other.value_at_fixed,
        )

    def replace_value(self, point: LatticePoint, value: float) -> "GridFunction":
        """Copy with one value replaced."""
        _require_finite(value)
        va, vb, vf = list(self.values_a), list(self.values_b), self.value_at_fixed
        if point.origin is Origin.FIXED:
            vf = value
        elif point.origin is Origin.A:
            va[point.n] = value
        else:
            vb[point.n] = value
        return GridFunction(self.lattice, va, vb, vf)


def _require_finite(v: float) -> None:
    if not math.isfinite(v):
        from .errors import NonFiniteValue

        raise NonFiniteValue(f"grid value {v!r} is not finite")
