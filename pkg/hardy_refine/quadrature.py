"""Adaptive quadrature on the half-line and the nested Hardy integrals.

Every integral is built from one primitive, adaptive Gauss-Kronrod (7/15) on
a finite interval. Improper integrals over (0, inf) are mapped onto (0, 1)
with t = u/(1-u), or truncated to [eps, T] under t = e^s. The running average
H(x) = (1/x) int_0^x f and the refinement corrections are nested on top.

Panels are refined worst-first from a heap keyed by (-error, left endpoint);
totals are formed with math.fsum, so results do not depend on panel order
and identical inputs give bit-identical results.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

import numpy as np

from hardy_refine.errors import (
    KinkNotBracketedError,
    NonFiniteSampleError,
    PreconditionError,
)
from hardy_refine.logging import get_logger

logger = get_logger("quadrature")

Integrand = Callable[[np.ndarray], Any]

# Gauss-Kronrod 7/15 abscissae (descending, last is the center) and weights.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

NODES = np.concatenate([-_XGK[:7], _XGK[7::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:7], _WGK[7::-1]])
GAUSS_WEIGHTS = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

# Uniform samples used to bracket kinks of |.|^p integrands on (0, 1].
KINK_SAMPLES = np.linspace(0.0, 1.0, 33)[1:]
KINK_FALLBACK_PANELS = 8
# The inner variable u maps to t = x u^tau; points are placed where t runs
# from SCALE_LOWER up to x, SCALE_PER_DECADE per decade of t.
SCALE_LOWER = 1e-2
SCALE_PER_DECADE = 4


class Transform(Enum):
    """Mapping of (0, inf) onto a finite integration domain."""

    RATIONAL = "rational"
    LOG_TRUNCATE = "log-truncate"


class Measure(Enum):
    """Outer measure of a half-line integral."""

    DX = "dx"
    DX_OVER_X = "dx/x"


@dataclass(frozen=True)
class QuadConfig:
    """Tolerance policy shared by every integral of one verification."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 2000
    transform: Transform = Transform.RATIONAL
    truncate_lower: float = 1e-6
    truncate_upper: float = 1e6
    # Running averages are tabulated on a log grid starting here.
    average_grid_lower: float = 1e-6

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise PreconditionError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if not self.abs_tol > 0:
            raise PreconditionError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if self.max_panels < 1:
            raise PreconditionError(f"max_panels must be >= 1, got {self.max_panels!r}")
        if not 0 < self.truncate_lower < self.truncate_upper:
            raise PreconditionError(
                "log-truncate needs 0 < lower < upper, got "
                f"[{self.truncate_lower!r}, {self.truncate_upper!r}]"
            )
        if not self.average_grid_lower > 0:
            raise PreconditionError("average_grid_lower must be > 0")

    def tolerance(self, value: float) -> float:
        """Absolute error target for an integral of the given size."""
        return max(self.abs_tol, self.rel_tol * abs(value))

    def inner(self) -> QuadConfig:
        """Config for inner integrals: a tenth of the outer tolerances."""
        return replace(self, rel_tol=self.rel_tol / 10, abs_tol=self.abs_tol / 10)


@dataclass(frozen=True)
class QuadResult:
    """Value and error estimate of one integral evaluation."""

    value: float
    err_estimate: float
    panels_used: int
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "err_estimate": self.err_estimate,
            "panels_used": self.panels_used,
            "converged": self.converged,
        }


ZERO_RESULT = QuadResult(0.0, 0.0, 0, True)


# ========== Finite-interval Gauss-Kronrod ==========


def _sample(f: Integrand, x: np.ndarray, where: str = "integrand") -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    bad = ~np.isfinite(y)
    if np.any(bad):
        index = int(np.flatnonzero(bad)[0])
        raise NonFiniteSampleError(float(x[index]), float(y[index]), where)
    return y


def gauss_kronrod(f: Integrand, a: float, b: float) -> tuple[float, float]:
    """One 15-point Kronrod panel with the QUADPACK error estimate."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = _sample(f, center + half * NODES)

    kronrod = float(np.dot(KRONROD_WEIGHTS, y))
    gauss = float(np.dot(GAUSS_WEIGHTS, y))
    resabs = float(np.dot(KRONROD_WEIGHTS, np.abs(y)))
    resasc = float(np.dot(KRONROD_WEIGHTS, np.abs(y - 0.5 * kronrod)))

    err = abs(kronrod - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50.0 * _EPS):
        err = max(50.0 * _EPS * resabs, err)
    return kronrod * half, abs(half) * err


@dataclass(order=True)
class _Panel:
    key: tuple[float, float]
    left: float = field(compare=False)
    right: float = field(compare=False)
    value: float = field(compare=False)
    err: float = field(compare=False)


def _resolvable(left: float, right: float) -> bool:
    """True when every Kronrod node of [left, right] lies strictly inside it."""
    x = 0.5 * (left + right) + 0.5 * (right - left) * NODES
    return bool(np.all((x > left) & (x < right)))


def _panel(f: Integrand, left: float, right: float) -> _Panel:
    value, err = gauss_kronrod(f, left, right)
    return _Panel((-err, left), left, right, value, err)


def integrate_interval(
    f: Integrand,
    a: float,
    b: float,
    cfg: QuadConfig,
    breakpoints: tuple[float, ...] | list[float] = (),
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of f over [a, b].

    Breakpoints inside (a, b) start as panel edges, so known kinks are never
    straddled. The returned (value, error) pair is the one with the smallest
    error seen during refinement; a tighter tolerance therefore never yields
    a larger error estimate. Budget exhaustion gives ``converged=False``.
    """
    if b == a:
        return ZERO_RESULT
    edges = [a]
    for c in sorted({c for c in breakpoints if a < c < b}):
        if _resolvable(edges[-1], c) and _resolvable(c, b):
            edges.append(c)
    edges.append(b)
    heap = [_panel(f, lo, hi) for lo, hi in zip(edges, edges[1:])]
    heapq.heapify(heap)
    frozen: list[_Panel] = []

    best: tuple[float, float, int] | None = None
    while True:
        panels = heap + frozen
        total = math.fsum(p.value for p in panels)
        err = math.fsum(p.err for p in panels)
        if best is None or err < best[1]:
            best = (total, err, len(panels))
        if err <= cfg.tolerance(total) or len(panels) >= cfg.max_panels or not heap:
            break

        worst = heapq.heappop(heap)
        mid = 0.5 * (worst.left + worst.right)
        # Nodes rounding onto an edge would sample the map's endpoints (t = 0 or inf).
        if not (_resolvable(worst.left, mid) and _resolvable(mid, worst.right)):
            frozen.append(worst)
            continue
        heapq.heappush(heap, _panel(f, worst.left, mid))
        heapq.heappush(heap, _panel(f, mid, worst.right))

    value, err, count = best
    converged = err <= cfg.tolerance(value)
    if not converged:
        logger.debug(
            "integral over [%g, %g] not converged: value=%r err=%r panels=%d",
            a, b, value, err, count,
        )
    return QuadResult(value, err, count, converged)


# ========== Half-line integrals ==========


def integrate_halfline(
    f: Integrand,
    cfg: QuadConfig,
    measure: Measure = Measure.DX,
) -> QuadResult:
    """Integral of f over (0, inf) against dx or dx/x.

    Raises:
        NonFiniteSampleError: If f is NaN or infinite at a node.
    """

    def checked(t: np.ndarray) -> np.ndarray:
        # Errors report t, not the mapped coordinate.
        return _sample(f, t, "f")

    if cfg.transform is Transform.RATIONAL:
        if measure is Measure.DX:

            def mapped(u: np.ndarray) -> np.ndarray:
                w = 1.0 - u
                return checked(u / w) / (w * w)

        else:

            def mapped(u: np.ndarray) -> np.ndarray:
                w = 1.0 - u
                return checked(u / w) / (u * w)

        result = integrate_interval(mapped, 0.0, 1.0, cfg, breakpoints=(0.5,))
    else:
        if measure is Measure.DX:

            def mapped(s: np.ndarray) -> np.ndarray:
                t = np.exp(s)
                return checked(t) * t

        else:

            def mapped(s: np.ndarray) -> np.ndarray:
                return checked(np.exp(s))

        lo, hi = math.log(cfg.truncate_lower), math.log(cfg.truncate_upper)
        result = integrate_interval(mapped, lo, hi, cfg, breakpoints=(0.0,))

    if not result.converged:
        logger.warning(
            "half-line integral did not converge within %d panels (err=%.3g)",
            cfg.max_panels, result.err_estimate,
        )
    return result


def power_integral(
    f: Integrand,
    p: float,
    cfg: QuadConfig,
    measure: Measure = Measure.DX,
) -> QuadResult:
    """The integral of f^p over (0, inf) for nonnegative f."""

    def integrand(t: np.ndarray) -> np.ndarray:
        y = np.asarray(f(t), dtype=float)
        _require_nonnegative(y, t, "f")
        return np.power(y, p)

    return integrate_halfline(integrand, cfg, measure)


def _require_nonnegative(y: np.ndarray, t: np.ndarray, what: str) -> None:
    negative = y < 0
    if np.any(negative):
        index = int(np.flatnonzero(negative)[0]) if np.ndim(negative) else 0
        where = float(np.ravel(t)[index]) if np.ndim(t) else float(t)
        raise PreconditionError(f"{what} must be nonnegative, got {float(np.ravel(y)[index])!r} at t={where!r}")


# ========== Running average ==========


def average_grid(cfg: QuadConfig, upper: float = 1e6, per_decade: int = 8) -> np.ndarray:
    """Log-spaced tabulation grid for the running average, starting at eps."""
    lo = math.log10(cfg.average_grid_lower)
    hi = math.log10(upper)
    count = int(round((hi - lo) * per_decade)) + 1
    return np.logspace(lo, hi, count)


@dataclass(eq=False)
class RunningAverage:
    """Prefix integrals of f on a grid; H(x) = cumulative / x.

    ``at(x)`` extends the table to any x > 0: below the grid by direct
    quadrature of int_0^1 f(x s) ds, inside by adding the panel from the
    nearest grid point, and beyond by a logarithmic substitution.
    """

    grid: np.ndarray
    cumulative: np.ndarray
    source: Integrand | None = None
    cfg: QuadConfig | None = None

    def values(self) -> np.ndarray:
        """H at every grid point."""
        return self.cumulative / self.grid

    def at(self, x: float) -> float:
        if self.source is None or self.cfg is None:
            raise PreconditionError("running average was built without its source")
        if not (math.isfinite(x) and x > 0):
            raise PreconditionError(f"running average is defined for finite x > 0, got {x!r}")
        f, cfg = self.source, self.cfg
        if x <= self.grid[0]:
            return integrate_interval(lambda s: np.asarray(f(x * s)), 0.0, 1.0, cfg).value
        if x > self.grid[-1]:
            top = float(self.grid[-1])

            def tail(s: np.ndarray) -> np.ndarray:
                t = np.exp(s)
                return np.asarray(f(t)) * t

            extra = integrate_interval(tail, math.log(top), math.log(x), cfg).value
            return math.fsum((float(self.cumulative[-1]), extra)) / x
        i = int(np.searchsorted(self.grid, x, side="right")) - 1
        start = float(self.grid[i])
        extra = integrate_interval(f, start, x, cfg).value if x > start else 0.0
        return math.fsum((float(self.cumulative[i]), extra)) / x

    def at_many(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self.at(float(x)) for x in np.ravel(xs)]).reshape(np.shape(xs))


def running_average(f: Integrand, grid: Any, cfg: QuadConfig | None = None) -> RunningAverage:
    """Tabulate prefix integrals of f on a strictly increasing positive grid.

    Raises:
        PreconditionError: If the grid is empty, not positive or not increasing.
        NonFiniteSampleError: If f is not finite at a node.
    """
    cfg = cfg or QuadConfig()
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise PreconditionError("running average needs a nonempty 1-D grid")
    if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise PreconditionError("running average grid must be positive and strictly increasing")

    x0 = float(grid[0])
    pieces = [x0 * integrate_interval(lambda s: np.asarray(f(x0 * s)), 0.0, 1.0, cfg).value]
    for lo, hi in zip(grid[:-1], grid[1:]):
        pieces.append(integrate_interval(f, float(lo), float(hi), cfg).value)

    cumulative = np.array([math.fsum(pieces[: i + 1]) for i in range(len(pieces))])
    if np.any(np.diff(cumulative) < -cfg.tolerance(float(cumulative[-1]))):
        logger.warning("prefix integrals decrease: f is negative somewhere on the grid")
    return RunningAverage(grid, cumulative, f, cfg)


# ========== Hardy integrals ==========


def _check_p(p: float, lowest: float, inclusive: bool) -> None:
    ok = p >= lowest if inclusive else p > lowest
    if not ok:
        relation = ">=" if inclusive else ">"
        raise PreconditionError(f"p must be {relation} {lowest}, got {p!r}")


def hardy_lhs(
    f: Integrand,
    p: float,
    cfg: QuadConfig,
    measure: Measure = Measure.DX,
    average: RunningAverage | None = None,
) -> QuadResult:
    """The integral of H(x)^p, H the running average of f (Hardy's left side)."""
    _check_p(p, 1.0, inclusive=True)
    inner = cfg.inner()
    average = average or running_average(f, average_grid(cfg), inner)

    def integrand(x: np.ndarray) -> np.ndarray:
        h = average.at_many(x)
        _require_nonnegative(h, x, "running average")
        return np.power(h, p)

    result = integrate_halfline(integrand, cfg, measure)
    # H is only known to the inner tolerance; its p-th power inherits p times that.
    err = result.err_estimate + p * inner.rel_tol * abs(result.value)
    return replace(result, err_estimate=err, converged=result.converged)


def weighted_hardy_lhs(g: Integrand, p: float, cfg: QuadConfig) -> QuadResult:
    """The integral of H_g(x)^p dx/x (left side of the weighted lemma)."""
    return hardy_lhs(g, p, cfg, Measure.DX_OVER_X)


# ========== Nested corrections ==========


@dataclass(frozen=True)
class SpectralSampler:
    """Spectral view of a (possibly matrix-valued) function for nested integrals.

    ``branches(t)`` returns eigenvalue branches of shape (n, k) and
    ``weights(t)`` the matching weights |<u_k(t), eta>|^2; for a scalar f these
    are f(t)[:, None] and ones. ``form(t)`` is sum_k w_k lambda_k, the quadratic
    form <F(t) eta, eta>.
    """

    spectrum: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    form: Integrand

    @classmethod
    def scalar(cls, f: Integrand) -> SpectralSampler:
        def spectrum(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            y = np.asarray(f(t), dtype=float).reshape(-1, 1)
            return y, np.ones_like(y)

        return cls(spectrum, f)


class CorrectionKind(Enum):
    """Which nested correction integral to evaluate."""

    # (1/x) int_0^x x^(1/p) t^(-1/p) |x^(-1/p) t^(1/p) f(t) - (p-1)/p H(x)|^p dt, outer dx
    REFINED = "refined"
    # (1/x) int_0^x |g(t) - H(x)|^p dt, outer dx/x
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class _InnerShape:
    """Inner integral in u on (0, 1): scale * sum_k w |sigma(u) lam(x tau(u)) - c h|^p."""

    scale: float
    sigma_power: float
    tau_power: float
    c: float


def _inner_shape(kind: CorrectionKind, p: float) -> _InnerShape:
    if kind is CorrectionKind.REFINED:
        # t = x s, s = u^q removes the s^(-1/p) endpoint singularity.
        q = p / (p - 1.0)
        return _InnerShape(q, 1.0 / (p - 1.0), q, (p - 1.0) / p)
    return _InnerShape(1.0, 0.0, 1.0, 1.0)


def _bisect(fn: Callable[[float], float], lo: float, hi: float, flo: float, fhi: float) -> float:
    if not (math.isfinite(flo) and math.isfinite(fhi)) or (flo < 0) == (fhi < 0):
        raise KinkNotBracketedError(lo, hi, "endpoints do not straddle zero")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fmid = fn(mid)
        if not math.isfinite(fmid):
            raise KinkNotBracketedError(lo, hi, f"non-finite value {fmid!r} at {mid!r}")
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi)


def _scale_points(x: float, tau_power: float) -> np.ndarray:
    """Points u in (0, 1) with x u^tau spread geometrically over [SCALE_LOWER, x).

    For large x a function of t concentrated near t = O(1) occupies only
    u < x^(-1/tau), far below the first Kronrod node of [0, 1].
    """
    if not x > SCALE_LOWER:
        return np.empty(0)
    decades = math.log10(x / SCALE_LOWER)
    t = np.logspace(math.log10(SCALE_LOWER), math.log10(x), int(math.ceil(decades * SCALE_PER_DECADE)) + 1)
    u = np.power(t / x, 1.0 / tau_power)
    return u[(u > 0) & (u < 1)]


def _kink_breakpoints(
    arguments: Callable[[np.ndarray], np.ndarray],
    extra_points: np.ndarray | None = None,
) -> list[float]:
    """Zero crossings on (0, 1] of every column of ``arguments(u)``."""
    grid = KINK_SAMPLES if extra_points is None else np.union1d(KINK_SAMPLES, extra_points)
    values = arguments(grid)
    points: list[float] = []
    for k in range(values.shape[1]):
        column = values[:, k]
        signs = np.sign(column)
        for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
            lo, hi = float(grid[i]), float(grid[i + 1])

            def branch(u: float, k: int = k) -> float:
                return float(arguments(np.array([u]))[0, k])

            try:
                points.append(_bisect(branch, lo, hi, float(column[i]), float(column[i + 1])))
            except KinkNotBracketedError as exc:
                logger.debug("%s; using %d finer panels instead", exc, KINK_FALLBACK_PANELS)
                points.extend(np.linspace(lo, hi, KINK_FALLBACK_PANELS + 1)[1:-1].tolist())
    return sorted(set(points))


def spectral_correction_term(
    sampler: SpectralSampler,
    p: float,
    cfg: QuadConfig,
    kind: CorrectionKind = CorrectionKind.REFINED,
    average: RunningAverage | None = None,
) -> QuadResult:
    """Nested correction integral for a spectral sampler.

    The inner integral at each outer node x is split at the zero crossings of
    the absolute-value arguments (one per eigenvalue branch) and integrated at
    a tenth of the outer tolerance.
    """
    _check_p(p, 1.0, inclusive=False)
    inner = cfg.inner()
    average = average or running_average(sampler.form, average_grid(cfg), inner)
    # The half-line map scales inner values by up to 1/(1-u)^2, so only a
    # relative target is meaningful for them.
    nested = replace(inner, abs_tol=_TINY)
    shape = _inner_shape(kind, p)
    measure = Measure.DX if kind is CorrectionKind.REFINED else Measure.DX_OVER_X
    stats = {"inner_failures": 0}

    def inner_value(x: float) -> float:
        h = average.at(x)
        if h == 0.0 and not np.any(sampler.form(np.array([x]))):
            # f vanishes on (0, x]: the integrand is identically zero.
            return 0.0
        ch = shape.c * h

        def arguments(u: np.ndarray) -> np.ndarray:
            lam, _ = sampler.spectrum(x * np.power(u, shape.tau_power))
            return np.power(u, shape.sigma_power)[:, None] * lam - ch

        def integrand(u: np.ndarray) -> np.ndarray:
            lam, w = sampler.spectrum(x * np.power(u, shape.tau_power))
            diff = np.power(u, shape.sigma_power)[:, None] * lam - ch
            return shape.scale * np.sum(w * np.power(np.abs(diff), p), axis=1)

        scales = _scale_points(x, shape.tau_power)
        # One panel edge per decade of t keeps the t = O(1) region resolved.
        edges = [*_kink_breakpoints(arguments, scales), *scales[::SCALE_PER_DECADE]]
        result = integrate_interval(integrand, 0.0, 1.0, nested, edges)
        if not result.converged:
            stats["inner_failures"] += 1
        return result.value

    def outer(xs: np.ndarray) -> np.ndarray:
        return np.array([inner_value(float(x)) for x in np.ravel(xs)]).reshape(np.shape(xs))

    result = integrate_halfline(outer, cfg, measure)
    err = result.err_estimate + inner.rel_tol * abs(result.value)
    converged = result.converged and stats["inner_failures"] == 0
    if stats["inner_failures"]:
        logger.warning("%d inner integrals did not converge", stats["inner_failures"])
    return QuadResult(result.value, err, result.panels_used, converged)


def correction_term(f: Integrand, p: float, cfg: QuadConfig) -> QuadResult:
    """The refinement correction of the scalar Hardy inequality.

    int_0^inf (1/x) int_0^x x^(1/p) t^(-1/p) |x^(-1/p) t^(1/p) f(t) - ((p-1)/p) H(x)|^p dt dx
    """
    return spectral_correction_term(SpectralSampler.scalar(f), p, cfg, CorrectionKind.REFINED)


def lemma_correction_term(g: Integrand, p: float, cfg: QuadConfig) -> QuadResult:
    """int_0^inf (1/x) int_0^x |g(t) - H_g(x)|^p dt dx/x."""
    return spectral_correction_term(SpectralSampler.scalar(g), p, cfg, CorrectionKind.WEIGHTED)
