"""Grid checks of superquadraticity and the sharpened discrete Jensen inequality.

f is superquadratic on [0, inf) when every a admits a constant C_a with

    f(b) >= f(a) + C_a (b - a) + f(|b - a|)    for all b >= 0.

On a finite grid each b > a bounds C_a from above and each b < a from below;
f is consistent on the grid when every anchor's interval is nonempty. A
consistent grid is evidence, not a proof, and reports say so.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np

from hardy_refine.corpus import power_family
from hardy_refine.errors import DegenerateGridError, PreconditionError
from hardy_refine.logging import get_logger

logger = get_logger("superquad")

__all__ = [
    "AnchorInterval",
    "ConvexityResult",
    "DiscreteMeasure",
    "JensenGap",
    "SuperquadWitness",
    "Verdict",
    "Violation",
    "check_superquadratic",
    "convexity_check",
    "jensen_gap",
    "mp_jensen_gap",
    "power_family",
    "random_measure",
]

CANONICAL_GRID = (0.0, 0.1, 0.5, 1.0, 2.0, 10.0)
DEFAULT_TOL = 1e-9
# Pairs closer than this give no usable bound on C_a.
MIN_SEPARATION = 1e-12

Fn = Callable[[Any], Any]


class Verdict(Enum):
    CONSISTENT = "consistent"
    VIOLATED = "violated"


@dataclass(frozen=True)
class AnchorInterval:
    """Feasible [low, high] for C_a; low is -inf / high +inf without bounds."""

    anchor: float
    low: float
    high: float
    # Grid points attaining the binding bounds.
    low_at: float | None = None
    high_at: float | None = None

    def is_empty(self, tol: float) -> bool:
        return self.low > self.high + tol


@dataclass(frozen=True)
class Violation:
    """Anchor a and the pair of grid points whose bounds on C_a cross."""

    a: float
    b: float
    b_below: float
    lower: float
    upper: float


@dataclass(frozen=True)
class SuperquadWitness:
    anchors: tuple[float, ...]
    intervals: tuple[AnchorInterval, ...]
    verdict: Verdict
    violation: Violation | None = None
    tol: float = DEFAULT_TOL

    @property
    def consistent(self) -> bool:
        return self.verdict is Verdict.CONSISTENT

    def describe(self) -> str:
        if self.violation is None:
            return f"consistent on grid ({len(self.anchors)} anchors, tol={self.tol:g})"
        v = self.violation
        return (
            f"violated at (a={v.a!r}, b={v.b!r}): C_a must be >= {v.lower!r} "
            f"(from b={v.b_below!r}) and <= {v.upper!r}"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "description": self.describe(),
            "tol": self.tol,
            "intervals": [
                {"anchor": iv.anchor, "low": iv.low, "high": iv.high, "empty": iv.is_empty(self.tol)}
                for iv in self.intervals
            ],
            "violation": None
            if self.violation is None
            else {
                "a": self.violation.a,
                "b": self.violation.b,
                "b_below": self.violation.b_below,
                "lower": self.violation.lower,
                "upper": self.violation.upper,
            },
        }


def _values(f: Fn, points: np.ndarray) -> np.ndarray:
    return np.asarray(f(points), dtype=float).reshape(points.shape)


def check_superquadratic(f: Fn, grid: Any, tol: float = DEFAULT_TOL) -> SuperquadWitness:
    """Intersect the C_a bounds of every anchor on the grid.

    Raises:
        DegenerateGridError: If the grid has fewer than three distinct points.
        PreconditionError: If the grid has negative or non-finite points.
    """
    points = np.unique(np.asarray(grid, dtype=float))
    if points.size < 3:
        raise DegenerateGridError(f"grid needs at least 3 distinct points, got {points.size}")
    if not np.all(np.isfinite(points)) or points[0] < 0:
        raise PreconditionError("grid points must be finite and nonnegative")

    fx = _values(f, points)
    intervals: list[AnchorInterval] = []
    for i, a in enumerate(points):
        low, high = -math.inf, math.inf
        low_at = high_at = None
        for j, b in enumerate(points):
            delta = b - a
            if abs(delta) < MIN_SEPARATION:
                continue
            f_gap = float(_values(f, np.array([abs(delta)]))[0])
            bound = (fx[j] - fx[i] - f_gap) / delta
            if delta > 0 and bound < high:
                high, high_at = float(bound), float(b)
            elif delta < 0 and bound > low:
                low, low_at = float(bound), float(b)
        intervals.append(AnchorInterval(float(a), low, high, low_at, high_at))

    # First violation in ascending anchor order.
    violation = None
    for iv in intervals:
        if iv.is_empty(tol):
            violation = Violation(iv.anchor, iv.high_at, iv.low_at, iv.low, iv.high)
            break

    verdict = Verdict.CONSISTENT if violation is None else Verdict.VIOLATED
    witness = SuperquadWitness(tuple(float(a) for a in points), tuple(intervals), verdict, violation, tol)
    logger.debug("superquadratic check: %s", witness.describe())
    return witness


# ========== Discrete Jensen ==========


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability weights on finitely many nonnegative points."""

    points: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.points) != len(self.weights) or not self.points:
            raise PreconditionError("measure needs equally many points and weights (at least one)")
        if not all(math.isfinite(x) and x >= 0 for x in self.points):
            raise PreconditionError("measure points must be finite and nonnegative")
        if not all(w > 0 for w in self.weights):
            raise PreconditionError("measure weights must be positive")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-12:
            raise PreconditionError(f"measure weights must sum to 1, got {total!r}")

    @classmethod
    def normalized(cls, points: Any, weights: Any) -> "DiscreteMeasure":
        w = [float(x) for x in weights]
        total = math.fsum(w)
        return cls(tuple(float(x) for x in points), tuple(x / total for x in w))

    def mean(self) -> float:
        return math.fsum(w * x for w, x in zip(self.weights, self.points))

    def expect(self, values: Any) -> float:
        return math.fsum(w * float(v) for w, v in zip(self.weights, values))


@dataclass(frozen=True)
class JensenGap:
    lhs: float
    rhs: float
    gap: float

    def to_dict(self) -> dict[str, float]:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}


def jensen_gap(f: Fn, m: DiscreteMeasure) -> JensenGap:
    """Sharpened Jensen: f(E phi) <= E f(phi) - E f(|phi - E phi|).

    Returns lhs = f(E phi), rhs = E f(phi) - E f(|phi - E phi|), gap = rhs - lhs.
    """
    points = np.asarray(m.points)
    mean = m.mean()
    lhs = float(_values(f, np.array([mean]))[0])
    spread = m.expect(_values(f, np.abs(points - mean)))
    rhs = m.expect(_values(f, points)) - spread
    return JensenGap(lhs, rhs, rhs - lhs)


def mp_jensen_gap(f: Fn, m: DiscreteMeasure) -> JensenGap:
    """Classical Jensen: lhs = f(E phi), rhs = E f(phi)."""
    lhs = float(_values(f, np.array([m.mean()]))[0])
    rhs = m.expect(_values(f, np.asarray(m.points)))
    return JensenGap(lhs, rhs, rhs - lhs)


def random_measure(rng: np.random.Generator, n: int, upper: float = 10.0) -> DiscreteMeasure:
    """Uniform points on [0, upper] with Dirichlet(1, ..., 1) weights."""
    if n < 1:
        raise PreconditionError(f"measure size must be >= 1, got {n}")
    points = rng.uniform(0.0, upper, size=n)
    weights = rng.dirichlet(np.ones(n))
    # Dirichlet draws can underflow to 0 for large n; keep weights positive.
    weights = np.maximum(weights, 1e-300)
    return DiscreteMeasure.normalized(points.tolist(), weights.tolist())


# ========== Convexity diagnostic ==========


@dataclass(frozen=True)
class ConvexityResult:
    convex: bool
    # Smallest second divided difference and the middle point where it occurs.
    worst: float
    worst_at: float


def convexity_check(f: Fn, grid: Any, tol: float = DEFAULT_TOL) -> ConvexityResult:
    """Discrete convexity: second divided differences >= -tol."""
    points = np.unique(np.asarray(grid, dtype=float))
    if points.size < 3:
        raise DegenerateGridError(f"grid needs at least 3 distinct points, got {points.size}")
    y = _values(f, points)
    slopes = np.diff(y) / np.diff(points)
    second = np.diff(slopes) / (points[2:] - points[:-2])
    k = int(np.argmin(second))
    return ConvexityResult(bool(second[k] >= -tol), float(second[k]), float(points[k + 1]))
