"""Quadratic-form Jensen inequalities for superquadratic functions.

theorem_a_gap and theorem_b_gap share one code path: the single-matrix form
is the averaging form with one sample and weight 1, so the two agree
bit-for-bit in that case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from hardy_refine.errors import HypothesisViolatedError, PreconditionError
from hardy_refine.logging import get_logger
from hardy_refine.operator.field import AveragingMap, MatrixField
from hardy_refine.operator.matrices import (
    PSD_TOL,
    HermitianMatrix,
    UnitVector,
    abs_matrix,
    apply_function,
    quadratic_form,
)
from hardy_refine.superquad import JensenGap

logger = get_logger("operator.jensen")

Fn = Callable[[Any], Any]

NORM_TOL = 1e-10


def _scalar(f: Fn, x: float) -> float:
    return float(np.asarray(f(np.array([x]))).reshape(-1)[0])


def _jensen_terms(
    matrices: list[HermitianMatrix],
    phi: AveragingMap,
    eta: UnitVector,
    f: Fn,
) -> JensenGap:
    for m in matrices:
        if m.dim != eta.dim:
            raise PreconditionError(f"vector has dim {eta.dim}, matrix has dim {m.dim}")
    mean = quadratic_form(phi.apply(matrices), eta)
    lhs = _scalar(f, mean)
    w = phi.weights
    value = math.fsum(wi * quadratic_form(apply_function(m, f), eta) for wi, m in zip(w, matrices))
    spread = math.fsum(
        wi * quadratic_form(apply_function(abs_matrix(m.shifted(mean)), f), eta)
        for wi, m in zip(w, matrices)
    )
    rhs = value - spread
    return JensenGap(lhs, rhs, rhs - lhs)


def theorem_a_gap(a: HermitianMatrix, eta: UnitVector, f: Fn) -> JensenGap:
    """f(<A eta, eta>) <= <f(A) eta, eta> - <f(|A - <A eta, eta> I|) eta, eta>.

    Raises:
        PSDViolationError: If A is not positive semidefinite.
    """
    a.require_psd("A")
    return _jensen_terms([a], AveragingMap.normalized([1.0]), eta, f)


def theorem_b_gap(fld: MatrixField | list[HermitianMatrix], phi: AveragingMap, eta: UnitVector, f: Fn) -> JensenGap:
    """The single-matrix gap pushed through a unital averaging map over the field's samples."""
    if isinstance(fld, MatrixField):
        matrices = [HermitianMatrix.from_array(s) for s in fld.samples]
    else:
        matrices = list(fld)
    if len(matrices) != len(phi):
        raise PreconditionError(f"{len(phi)} weights for {len(matrices)} field samples")
    for i, m in enumerate(matrices):
        m.require_psd(f"sample {i}")
    return _jensen_terms(matrices, phi, eta, f)


def mp_gap(a: HermitianMatrix, eta: UnitVector, g: Fn) -> JensenGap:
    """Convex quadratic-form Jensen: g(<A eta, eta>) <= <g(A) eta, eta>."""
    lhs = _scalar(g, quadratic_form(a, eta))
    rhs = quadratic_form(apply_function(a, g), eta)
    return JensenGap(lhs, rhs, rhs - lhs)


@dataclass(frozen=True)
class ExternalJensenResult:
    lhs: float
    rhs: float
    slack: float
    terms: dict[str, float]
    finding: bool

    def to_dict(self) -> dict[str, Any]:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "terms": self.terms, "finding": self.finding}


def external_jensen_check(
    a: HermitianMatrix,
    b: HermitianMatrix,
    x: Any,
    y: Any,
    f: Fn,
    tol: float = 1e-10,
) -> ExternalJensenResult:
    """Evaluate both sides of the external Jensen inequality.

    lhs = f(<Ax,x> - <By,y>) and rhs is the five-term lower bound; slack =
    lhs - rhs. A negative slack beyond ``tol`` is logged as a finding.

    Raises:
        HypothesisViolatedError: Naming the failed hypothesis.
    """
    xv = np.asarray(x, dtype=complex).reshape(-1)
    yv = np.asarray(y, dtype=complex).reshape(-1)
    if xv.size != a.dim or yv.size != b.dim:
        raise HypothesisViolatedError("dimensions", f"x has {xv.size} entries for A of dim {a.dim}, y has {yv.size} for B of dim {b.dim}")
    for name, m in (("A positive", a), ("B positive", b)):
        if m.eigmin < -PSD_TOL * m.norm:
            raise HypothesisViolatedError(name, f"eigmin = {m.eigmin!r}")

    nx2 = float(np.vdot(xv, xv).real)
    ny2 = float(np.vdot(yv, yv).real)
    if ny2 <= 0:
        raise HypothesisViolatedError("y nonzero", "||y|| = 0")
    if abs(nx2 - ny2 - 1.0) > NORM_TOL:
        raise HypothesisViolatedError("||x||^2 - ||y||^2 = 1", f"got {nx2 - ny2!r}")
    ax = quadratic_form(a, xv)
    by = quadratic_form(b, yv)
    if ax - by < 0:
        raise HypothesisViolatedError("<Ax,x> - <By,y> >= 0", f"got {ax - by!r}")

    lhs = _scalar(f, ax - by)
    d = abs(ax / nx2 - by / ny2)
    terms = {
        "normalized_a": nx2 * _scalar(f, ax / nx2),
        "f_of_b": -quadratic_form(apply_function(b, f), yv),
        "b_spread": quadratic_form(apply_function(abs_matrix(b.shifted(by / ny2)), f), yv),
        "scaled_distance": _scalar(f, ny2 * d),
        "distance": ny2 * _scalar(f, d),
    }
    rhs = math.fsum(terms.values())
    slack = lhs - rhs
    finding = slack < -tol
    if finding:
        logger.warning("external Jensen bound fails: lhs=%r < rhs=%r (slack %.3g)", lhs, rhs, slack)
    return ExternalJensenResult(lhs, rhs, slack, terms, finding)
