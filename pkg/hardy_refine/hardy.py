"""Scalar Hardy inequality reports.

Four forms are assembled from the quadrature primitives:

* classical:  int H^p dx <= (p/(p-1))^p int f^p
* refined:    the classical bound minus (p/(p-1))^(p-2) times the nested
              correction (p >= 2)
* weighted:   int H_g^p dx/x <= int g^p dt/t minus the weighted correction
* difference: (p/(p-1))^p int f^p <= int H^p dx plus (p/(p-1))^(p-1) times
              the correction (1 < p <= 2)

A report never calls a margin inside the error budget a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from hardy_refine.errors import PreconditionError
from hardy_refine.logging import get_logger
from hardy_refine.quadrature import (
    ZERO_RESULT,
    CorrectionKind,
    Measure,
    QuadConfig,
    QuadResult,
    SpectralSampler,
    average_grid,
    hardy_lhs,
    lemma_correction_term,
    power_integral,
    running_average,
    spectral_correction_term,
)

logger = get_logger("hardy")


class Verdict(Enum):
    HOLDS = "Holds"
    HOLDS_WITHIN_ERROR = "HoldsWithinError"
    VIOLATED = "Violated"

    @classmethod
    def from_margin(cls, margin: float, err_budget: float) -> Verdict:
        if margin >= 0:
            return cls.HOLDS
        if margin >= -err_budget:
            return cls.HOLDS_WITHIN_ERROR
        return cls.VIOLATED

    @property
    def ok(self) -> bool:
        return self is not Verdict.VIOLATED


class Form(Enum):
    CLASSICAL = "classical"
    REFINED = "refined"
    WEIGHTED = "weighted"
    DIFFERENCE = "difference"


def hardy_constant(p: float) -> float:
    """(p/(p-1))^p."""
    return (p / (p - 1.0)) ** p


def refined_scale(p: float) -> float:
    """Coefficient of the correction in the refined inequality, (p/(p-1))^(p-2)."""
    return (p / (p - 1.0)) ** (p - 2.0)


def sharp_scale(p: float) -> float:
    """(p/(p-1))^(p-1): the coefficient the substitution chain carries exactly."""
    return (p / (p - 1.0)) ** (p - 1.0)


@dataclass(frozen=True)
class HardyReport:
    """One (f, p) instance of a Hardy-type inequality.

    For the subtractive forms refined_rhs = classical_rhs - scale * correction;
    for the difference form the correction is added instead.
    """

    function: str
    form: Form
    p: float
    lhs: float
    classical_rhs: float
    correction: float
    correction_scale: float
    refined_rhs: float
    classical_margin: float
    refined_margin: float
    err_budget: float
    verdict: Verdict
    converged: bool
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "function": self.function,
            "form": self.form.value,
            "p": self.p,
            "lhs": self.lhs,
            "classical_rhs": self.classical_rhs,
            "correction": self.correction,
            "correction_scale": self.correction_scale,
            "refined_rhs": self.refined_rhs,
            "classical_margin": self.classical_margin,
            "refined_margin": self.refined_margin,
            "err_budget": self.err_budget,
            "verdict": self.verdict.value,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


def build_report(
    function: str,
    form: Form,
    p: float,
    lhs: QuadResult,
    rhs: QuadResult,
    rhs_factor: float,
    correction: QuadResult,
    correction_scale: float,
    extra_err: float = 0.0,
    diagnostics: dict[str, Any] | None = None,
) -> HardyReport:
    """Combine component integrals into a report.

    ``rhs`` is the integral the classical bound is built from (multiplied by
    ``rhs_factor``); ``extra_err`` collects error terms that are not
    quadrature estimates (discretization, PSD clipping).
    """
    diagnostics = dict(diagnostics or {})
    classical_rhs = rhs_factor * rhs.value
    scaled = correction_scale * correction.value

    if form is Form.DIFFERENCE:
        # Roles swap: the constant-weighted integral of f^p is bounded above.
        left = classical_rhs
        classical_rhs = lhs.value
        refined_rhs = classical_rhs + scaled
        lhs_value = left
    else:
        lhs_value = lhs.value
        refined_rhs = classical_rhs - scaled

    err_budget = (
        lhs.err_estimate
        + rhs_factor * rhs.err_estimate
        + correction_scale * correction.err_estimate
        + extra_err
    )
    classical_margin = classical_rhs - lhs_value
    refined_margin = refined_rhs - lhs_value
    verdict = Verdict.from_margin(refined_margin, err_budget)
    converged = lhs.converged and rhs.converged and correction.converged

    diagnostics.update(
        {
            "lhs_integral": lhs.to_dict(),
            "power_integral": rhs.to_dict(),
            "correction_integral": correction.to_dict(),
            "extra_err": extra_err,
        }
    )
    if form is Form.REFINED:
        sharp_rhs = classical_rhs - sharp_scale(p) * correction.value
        diagnostics["sharp_correction_scale"] = sharp_scale(p)
        diagnostics["sharp_refined_rhs"] = sharp_rhs
        diagnostics["sharp_margin"] = sharp_rhs - lhs_value

    report = HardyReport(
        function=function,
        form=form,
        p=p,
        lhs=lhs_value,
        classical_rhs=classical_rhs,
        correction=correction.value,
        correction_scale=correction_scale,
        refined_rhs=refined_rhs,
        classical_margin=classical_margin,
        refined_margin=refined_margin,
        err_budget=err_budget,
        verdict=verdict,
        converged=converged,
        diagnostics=diagnostics,
    )
    if verdict is Verdict.VIOLATED:
        logger.warning(
            "%s Hardy check for %s at p=%g violated: margin %.6g < -%.3g",
            form.value, function, p, refined_margin, err_budget,
        )
    else:
        logger.debug("%s check for %s at p=%g: %s", form.value, function, p, verdict.value)
    return report


def _label(f: Any) -> str:
    describe = getattr(f, "describe", None)
    return describe() if callable(describe) else getattr(f, "__name__", repr(f))


def classical_check(f: Any, p: float, cfg: QuadConfig) -> HardyReport:
    """int H^p <= (p/(p-1))^p int f^p with the correction fields zeroed."""
    if not p > 1:
        raise PreconditionError(f"classical Hardy needs p > 1, got {p!r}")
    lhs = hardy_lhs(f, p, cfg)
    rhs = power_integral(f, p, cfg)
    return build_report(_label(f), Form.CLASSICAL, p, lhs, rhs, hardy_constant(p), ZERO_RESULT, 0.0)


def refined_check(f: Any, p: float, cfg: QuadConfig) -> HardyReport:
    """Refined Hardy: the classical bound minus (p/(p-1))^(p-2) times the correction."""
    if not p >= 2:
        raise PreconditionError(f"refined Hardy needs p >= 2, got {p!r}")
    average = running_average(f, average_grid(cfg), cfg.inner())
    lhs = hardy_lhs(f, p, cfg, average=average)
    rhs = power_integral(f, p, cfg)
    correction = spectral_correction_term(
        SpectralSampler.scalar(f), p, cfg, CorrectionKind.REFINED, average=average
    )
    return build_report(
        _label(f), Form.REFINED, p, lhs, rhs, hardy_constant(p), correction, refined_scale(p)
    )


def lemma_weighted_check(g: Any, p: float, cfg: QuadConfig) -> HardyReport:
    """int H_g^p dx/x <= int g^p dt/t - int (1/x) int_0^x |g - H_g(x)|^p dt dx/x."""
    if not p >= 2:
        raise PreconditionError(f"weighted Hardy needs p >= 2, got {p!r}")
    lhs = hardy_lhs(g, p, cfg, Measure.DX_OVER_X)
    rhs = power_integral(g, p, cfg, Measure.DX_OVER_X)
    correction = lemma_correction_term(g, p, cfg)
    return build_report(_label(g), Form.WEIGHTED, p, lhs, rhs, 1.0, correction, 1.0)


def difference_counterpart_check(f: Any, p: float, cfg: QuadConfig) -> HardyReport:
    """(p/(p-1))^p int f^p <= int H^p + (p/(p-1))^(p-1) correction, for 1 < p <= 2.

    ``lhs`` holds the constant-weighted integral of f^p, ``classical_rhs``
    the integral of H^p and ``refined_rhs`` that plus the scaled correction.
    """
    if not 1 < p <= 2:
        raise PreconditionError(f"difference counterpart needs 1 < p <= 2, got {p!r}")
    average = running_average(f, average_grid(cfg), cfg.inner())
    lhs = hardy_lhs(f, p, cfg, average=average)
    rhs = power_integral(f, p, cfg)
    correction = spectral_correction_term(
        SpectralSampler.scalar(f), p, cfg, CorrectionKind.REFINED, average=average
    )
    return build_report(
        _label(f), Form.DIFFERENCE, p, lhs, rhs, hardy_constant(p), correction, sharp_scale(p)
    )


CHECKS = {
    Form.CLASSICAL: classical_check,
    Form.REFINED: refined_check,
    Form.WEIGHTED: lemma_weighted_check,
    Form.DIFFERENCE: difference_counterpart_check,
}


def run_check(form: Form | str, f: Any, p: float, cfg: QuadConfig) -> HardyReport:
    """Dispatch by form; ``auto`` picks refined for p >= 2 and difference below."""
    if form == "auto":
        form = Form.REFINED if p >= 2 else Form.DIFFERENCE
    return CHECKS[Form(form)](f, p, cfg)
