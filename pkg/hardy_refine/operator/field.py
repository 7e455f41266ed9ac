"""Grid-sampled matrix fields t -> F(t) and the averaging map.

A field built with ``from_function`` keeps its generating callable and is
evaluated exactly between samples. A field known only through its samples
is piecewise linear in t, constant below the first grid point and zero
above the last one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from hardy_refine.errors import PreconditionError, PSDViolationError
from hardy_refine.logging import get_logger
from hardy_refine.operator.matrices import (
    PSD_TOL,
    HermitianMatrix,
    UnitVector,
    eigh,
    random_psd,
)
from hardy_refine.quadrature import SpectralSampler

logger = get_logger("operator.field")

# Vectorized source: t of shape (n,) -> matrices of shape (n, d, d).
FieldSource = Callable[[np.ndarray], np.ndarray]


def log_grid(lower: float, upper: float, points: int) -> np.ndarray:
    if points < 2 or not 0 < lower < upper:
        raise PreconditionError(f"log grid needs >= 2 points on 0 < lower < upper, got {points} on [{lower}, {upper}]")
    return np.logspace(math.log10(lower), math.log10(upper), points)


@dataclass(frozen=True, eq=False)
class MatrixField:
    grid: np.ndarray
    samples: np.ndarray
    source: FieldSource | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        grid, samples = self.grid, self.samples
        if grid.ndim != 1 or grid.size == 0:
            raise PreconditionError("field grid must be a nonempty 1-D array")
        if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
            raise PreconditionError("field grid must be positive and strictly increasing")
        if samples.ndim != 3 or samples.shape[0] != grid.size or samples.shape[1] != samples.shape[2]:
            raise PreconditionError(
                f"samples must have shape (m, d, d) with m={grid.size}, got {samples.shape}"
            )
        if np.any(np.abs(samples - samples.conj().transpose(0, 2, 1)) > 1e-12 * max(1.0, float(np.abs(samples).max()))):
            raise PreconditionError("field samples must be Hermitian")
        w = eigh(samples)[0]
        norms = np.maximum(np.abs(w[:, 0]), np.abs(w[:, -1]))
        bad = w[:, 0] < -PSD_TOL * norms
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise PSDViolationError(float(w[i, 0]), float(-PSD_TOL * norms[i]), f"field sample at t={grid[i]!r}")

    # ----- construction -----

    @classmethod
    def from_samples(cls, grid: Any, samples: Any) -> MatrixField:
        g = np.array(grid, dtype=float)
        s = np.array(samples, dtype=complex)
        s = 0.5 * (s + s.conj().transpose(0, 2, 1))
        return cls(g, s)

    @classmethod
    def from_function(cls, fn: FieldSource, grid: Any) -> MatrixField:
        """Sample a vectorized matrix function on the grid and keep it for exact evaluation."""
        g = np.array(grid, dtype=float)
        return cls(g, np.asarray(fn(g), dtype=complex), fn)

    @classmethod
    def scalar(cls, f: Callable[[Any], Any], grid: Any, dim: int = 1) -> MatrixField:
        """F(t) = f(t) I."""
        eye = np.eye(dim)

        def source(t: np.ndarray) -> np.ndarray:
            return np.asarray(f(t), dtype=float)[:, None, None] * eye

        return cls.from_function(source, grid)

    @classmethod
    def diagonal(cls, fns: list[Callable[[Any], Any]], grid: Any) -> MatrixField:
        """F(t) = diag(f_1(t), ..., f_d(t))."""

        def source(t: np.ndarray) -> np.ndarray:
            values = np.stack([np.asarray(f(t), dtype=float) for f in fns], axis=-1)
            out = np.zeros(values.shape + (len(fns),))
            idx = np.arange(len(fns))
            out[..., idx, idx] = values
            return out

        return cls.from_function(source, grid)

    # ----- shape -----

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def size(self) -> int:
        return self.grid.size

    def describe(self) -> str:
        kind = "exact" if self.source is not None else "sampled"
        return f"field(dim={self.dim}, points={self.size}, {kind})"

    def coarsened(self) -> MatrixField:
        """Every other sample (last point kept), for the grid-halving audit."""
        idx = np.arange(0, self.size, 2)
        if idx[-1] != self.size - 1:
            idx = np.append(idx, self.size - 1)
        return MatrixField(self.grid[idx], self.samples[idx], self.source)

    # ----- evaluation -----

    def at_many(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        if self.source is not None:
            return np.asarray(self.source(t), dtype=complex)
        grid, samples = self.grid, self.samples
        i = np.clip(np.searchsorted(grid, t, side="right") - 1, 0, max(self.size - 2, 0))
        if self.size == 1:
            out = np.broadcast_to(samples[0], (t.size,) + samples.shape[1:]).copy()
        else:
            lo, hi = grid[i], grid[i + 1]
            theta = np.clip((t - lo) / (hi - lo), 0.0, 1.0)[:, None, None]
            out = (1.0 - theta) * samples[i] + theta * samples[i + 1]
        out[t > grid[-1]] = 0.0
        return out

    def at(self, t: float) -> np.ndarray:
        return self.at_many(np.array([t]))[0]

    def sampler(self, eta: UnitVector, stats: dict[str, float] | None = None) -> SpectralSampler:
        """Spectral view of <F(t) eta, eta> for the nested quadrature.

        Negative eigenvalues from interpolation are clipped at 0; the largest
        clip is recorded in ``stats["psd_clip"]``.
        """
        if eta.dim != self.dim:
            raise PreconditionError(f"vector has dim {eta.dim}, field has dim {self.dim}")
        stats = stats if stats is not None else {}
        stats.setdefault("psd_clip", 0.0)
        v = eta.entries

        def spectrum(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            w, u = eigh(self.at_many(t))
            if w.size and w.min() < 0:
                stats["psd_clip"] = max(stats["psd_clip"], float(-w.min()))
                w = np.maximum(w, 0.0)
            weights = np.abs(np.einsum("nij,i->nj", u.conj(), v)) ** 2
            return w, weights

        def form(t: Any) -> Any:
            arr = np.asarray(t, dtype=float)
            lam, weights = spectrum(arr.reshape(-1))
            out = np.sum(weights * lam, axis=1)
            return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

        return SpectralSampler(spectrum, form)

    # ----- JSON -----

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "grid": [float(t) for t in self.grid],
            "samples": [
                [[float(z.real), float(z.imag)] for z in sample.reshape(-1)] for sample in self.samples
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> MatrixField:
        try:
            dim = int(data["dim"])
            grid = [float(t) for t in data["grid"]]
            samples = [
                np.array([complex(re, im) for re, im in sample]).reshape(dim, dim)
                for sample in data["samples"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise PreconditionError(f"malformed field document: {e}") from None
        return cls.from_samples(grid, samples)


def load_field(path: Path) -> MatrixField:
    with open(path) as f:
        return MatrixField.from_json_dict(json.load(f))


def save_field(field_: MatrixField, path: Path) -> None:
    path.write_text(json.dumps(field_.to_json_dict(), indent=2) + "\n")


def random_field(
    rng: np.random.Generator,
    dim: int,
    grid: Any,
    envelope: Callable[[np.ndarray], np.ndarray] | None = None,
) -> MatrixField:
    """Independent random PSD samples scaled by an envelope (default 1/(1+t))."""
    g = np.asarray(grid, dtype=float)
    scale = 1.0 / (1.0 + g) if envelope is None else np.asarray(envelope(g), dtype=float)
    samples = np.stack([random_psd(rng, dim).data * s for s in scale])
    return MatrixField.from_samples(g, samples)


@dataclass(frozen=True, eq=False)
class AveragingMap:
    """Phi(X) = sum_i w_i X_i, unital because the weights sum to exactly 1."""

    weights: tuple[float, ...]

    @classmethod
    def normalized(cls, weights: Any) -> AveragingMap:
        w = [float(x) for x in weights]
        if not w or any(not (x > 0 and math.isfinite(x)) for x in w):
            raise PreconditionError("averaging weights must be positive and finite")
        total = math.fsum(w)
        w = [x / total for x in w]
        # Push the rounding residue into the largest weight until fsum is exactly 1.
        k = max(range(len(w)), key=w.__getitem__)
        for _ in range(4):
            residue = 1.0 - math.fsum(w)
            if residue == 0.0:
                break
            w[k] += residue
        return cls(tuple(w))

    @classmethod
    def uniform(cls, m: int) -> AveragingMap:
        return cls.normalized([1.0] * m)

    def __len__(self) -> int:
        return len(self.weights)

    def apply(self, matrices: list[HermitianMatrix]) -> HermitianMatrix:
        """Entrywise compensated sum of w_i X_i."""
        if len(matrices) != len(self.weights):
            raise PreconditionError(f"{len(self.weights)} weights for {len(matrices)} matrices")
        stack = np.stack([m.data for m in matrices])
        w = self.weights
        dim = stack.shape[1]
        out = np.empty((dim, dim), dtype=complex)
        for i in range(dim):
            for j in range(dim):
                re = math.fsum(wk * float(x.real) for wk, x in zip(w, stack[:, i, j]))
                im = math.fsum(wk * float(x.imag) for wk, x in zip(w, stack[:, i, j]))
                out[i, j] = complex(re, im)
        return HermitianMatrix.from_array(out)

    def is_unital(self, dim: int = 2) -> bool:
        eye = HermitianMatrix.scalar(1.0, dim)
        return bool(np.array_equal(self.apply([eye] * len(self)).data, eye.data))


# Smooth decaying profiles for random exact fields; each is p-integrable for p > 1.
PROFILES: tuple[Callable[[np.ndarray], np.ndarray], ...] = (
    lambda t: 1.0 / (1.0 + t),
    lambda t: np.exp(-t),
    lambda t: 1.0 / (1.0 + t * t),
    lambda t: 1.0 / (1.0 + t) ** 2,
)


@dataclass(frozen=True)
class _SmoothSource:
    unitary: np.ndarray
    amplitudes: np.ndarray

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        values = np.stack(
            [a * PROFILES[k % len(PROFILES)](t) for k, a in enumerate(self.amplitudes)], axis=-1
        )
        u = self.unitary
        return np.einsum("ij,nj,kj->nik", u, values, u.conj())


def random_smooth_field(rng: np.random.Generator, dim: int, grid: Any) -> MatrixField:
    """Exact field U diag(a_k g_k(t)) U* with a random unitary U and amplitudes in [0.5, 1.5]."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(g)
    # Fix column phases so U is Haar distributed.
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    amplitudes = rng.uniform(0.5, 1.5, size=dim)
    return MatrixField.from_function(_SmoothSource(q, amplitudes), grid)


def expression_field(f: Callable[[Any], Any], a: HermitianMatrix, grid: Any) -> MatrixField:
    """F(t) = f(t) A for a scalar function f and a fixed PSD matrix A."""
    data = a.data

    def source(t: np.ndarray) -> np.ndarray:
        return np.asarray(f(t), dtype=float)[:, None, None] * data

    return MatrixField.from_function(source, grid)
