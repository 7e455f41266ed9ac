"""Hermitian matrices, unit vectors and the eigendecomposition functional calculus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable

import numpy as np

from hardy_refine.errors import EigenFailureError, PreconditionError, PSDViolationError
from hardy_refine.logging import get_logger

logger = get_logger("operator")

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
UNIT_TOL = 1e-12
DEFAULT_SEED = 42


def eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """np.linalg.eigh with failures mapped to EigenFailureError (works on stacks)."""
    try:
        return np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise EigenFailureError(f"Hermitian eigendecomposition failed: {e}") from e


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """A complex Hermitian matrix, stored symmetrized and read-only."""

    data: np.ndarray

    @classmethod
    def from_array(cls, array: Any, psd: bool = False, where: str = "matrix") -> HermitianMatrix:
        """Validate and wrap a square array.

        Raises:
            PreconditionError: If the array is not square or not Hermitian.
            PSDViolationError: If ``psd`` and eigmin < -1e-10 * ||M||.
        """
        m = np.array(array, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise PreconditionError(f"{where} must be a nonempty square matrix, got shape {m.shape}")
        norm = float(np.linalg.norm(m))
        if np.linalg.norm(m - m.conj().T) > HERMITIAN_TOL * max(norm, 1.0):
            raise PreconditionError(f"{where} is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        matrix = cls(m)
        if psd:
            matrix.require_psd(where)
        return matrix

    @classmethod
    def diag(cls, values: Any) -> HermitianMatrix:
        return cls.from_array(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def scalar(cls, c: float, dim: int) -> HermitianMatrix:
        return cls.from_array(c * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors as columns."""
        return eigh(self.data)

    @property
    def eigmin(self) -> float:
        return float(self.spectrum[0][0])

    @property
    def norm(self) -> float:
        """Spectral norm."""
        w = self.spectrum[0]
        return float(max(abs(w[0]), abs(w[-1])))

    def require_psd(self, where: str = "matrix") -> None:
        bound = -PSD_TOL * self.norm
        if self.eigmin < bound:
            raise PSDViolationError(self.eigmin, bound, where)

    def clipped(self) -> tuple[HermitianMatrix, float]:
        """Project onto the PSD cone; returns the matrix and the clip magnitude."""
        w, u = self.spectrum
        clip = float(max(0.0, -w[0]))
        if clip == 0.0:
            return self, 0.0
        return HermitianMatrix.from_array((u * np.maximum(w, 0.0)) @ u.conj().T), clip

    def __add__(self, other: HermitianMatrix) -> HermitianMatrix:
        return HermitianMatrix.from_array(self.data + other.data)

    def __sub__(self, other: HermitianMatrix) -> HermitianMatrix:
        return HermitianMatrix.from_array(self.data - other.data)

    def shifted(self, c: float) -> HermitianMatrix:
        """M - c I."""
        return HermitianMatrix.from_array(self.data - c * np.eye(self.dim))

    def scaled(self, c: float) -> HermitianMatrix:
        return HermitianMatrix.from_array(c * self.data)

    def to_pairs(self) -> list[list[list[float]]]:
        """Row-major [re, im] pairs."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.data]


@dataclass(frozen=True, eq=False)
class UnitVector:
    entries: np.ndarray

    @classmethod
    def from_array(cls, array: Any, normalize: bool = False) -> UnitVector:
        v = np.array(array, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise PreconditionError("unit vector cannot be zero")
        if normalize:
            v = v / norm
        elif abs(norm - 1.0) > UNIT_TOL:
            raise PreconditionError(f"vector norm must be 1 within {UNIT_TOL}, got {norm!r}")
        v.setflags(write=False)
        return cls(v)

    @classmethod
    def basis(cls, dim: int, index: int) -> UnitVector:
        v = np.zeros(dim)
        v[index] = 1.0
        return cls.from_array(v)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def apply_function(m: HermitianMatrix, f: Callable[[Any], Any]) -> HermitianMatrix:
    """f(M) = U f(Lambda) U* through the eigendecomposition.

    Raises:
        EigenFailureError: If the decomposition does not converge.
        DomainError: If f is undefined at an eigenvalue (raised by f).
    """
    w, u = m.spectrum
    fw = np.asarray(f(w), dtype=float).reshape(w.shape)
    return HermitianMatrix.from_array((u * fw) @ u.conj().T)


def abs_matrix(m: HermitianMatrix) -> HermitianMatrix:
    """|M| via absolute eigenvalues."""
    return apply_function(m, np.abs)


def quadratic_form(m: HermitianMatrix | np.ndarray, eta: UnitVector | np.ndarray) -> float:
    """Re <M eta, eta>."""
    data = m.data if isinstance(m, HermitianMatrix) else m
    v = eta.entries if isinstance(eta, UnitVector) else np.asarray(eta)
    return float(np.vdot(v, data @ v).real)


def instance_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator for instance ``index`` of a suite: independent of run order."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, index]))


def random_psd(rng: np.random.Generator, dim: int) -> HermitianMatrix:
    """M*M / ||M*M|| with standard complex Gaussian M; spectrum inside [0, 1]."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    a = g.conj().T @ g
    a = 0.5 * (a + a.conj().T)
    norm = float(np.linalg.norm(a, 2))
    return HermitianMatrix.from_array(a / norm, psd=True, where="random matrix")


def random_unit(rng: np.random.Generator, dim: int) -> UnitVector:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return UnitVector.from_array(v, normalize=True)
