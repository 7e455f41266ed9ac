"""Tests for the scalar Hardy reports."""

import math

import pytest

from hardy_refine.corpus import DOMINANCE_CORPUS, corpus_function
from hardy_refine.errors import PreconditionError
from hardy_refine.funcdsl import ZERO, from_text
from hardy_refine.hardy import (
    Form,
    Verdict,
    classical_check,
    difference_counterpart_check,
    hardy_constant,
    lemma_weighted_check,
    refined_check,
    refined_scale,
    run_check,
    sharp_scale,
)
from hardy_refine.quadrature import QuadConfig

CFG = QuadConfig()


@pytest.fixture(scope="module")
def recip_report():
    return refined_check(corpus_function("recip"), 2.0, CFG)


def test_constants():
    assert hardy_constant(2.0) == 4.0
    assert refined_scale(2.0) == 1.0
    assert sharp_scale(2.0) == 2.0
    assert hardy_constant(3.0) == pytest.approx(3.375)


def test_verdict_from_margin():
    assert Verdict.from_margin(0.0, 1e-9) is Verdict.HOLDS
    assert Verdict.from_margin(-1e-10, 1e-9) is Verdict.HOLDS_WITHIN_ERROR
    assert Verdict.from_margin(-1e-8, 1e-9) is Verdict.VIOLATED
    assert not Verdict.VIOLATED.ok


def test_worked_example(recip_report):
    r = recip_report
    assert r.lhs == pytest.approx(math.pi**2 / 3, abs=1e-8)
    assert r.classical_rhs == pytest.approx(4.0, abs=1e-9)
    assert r.correction == pytest.approx(2 - math.pi**2 / 6, abs=1e-7)
    assert r.refined_rhs == pytest.approx(2 + math.pi**2 / 6, abs=1e-7)
    assert r.refined_margin == pytest.approx(2 - math.pi**2 / 6, abs=1e-7)
    assert r.verdict is Verdict.HOLDS
    assert r.converged


def test_worked_example_sharp_diagnostics(recip_report):
    # For p = 2 the sharp coefficient turns the inequality into an identity.
    assert abs(recip_report.diagnostics["sharp_margin"]) <= recip_report.err_budget + 1e-9
    assert recip_report.diagnostics["sharp_correction_scale"] == 2.0


@pytest.mark.parametrize("name", ["exp", "texp"])
def test_sharp_identity_at_two_for_exponential_tails(name):
    r = refined_check(corpus_function(name), 2.0, CFG)
    assert abs(r.diagnostics["sharp_margin"]) <= r.err_budget + 1e-9


def test_report_to_dict(recip_report):
    data = recip_report.to_dict()
    assert data["form"] == "refined"
    assert data["verdict"] == "Holds"
    assert list(data)[:3] == ["function", "form", "p"]
    assert data["diagnostics"]["power_integral"]["converged"] is True


def test_classical_exponential():
    r = classical_check(from_text("exp(-t)"), 2.0, CFG)
    assert r.lhs == pytest.approx(2 * math.log(2), rel=1e-9)
    assert r.classical_rhs == pytest.approx(2.0, rel=1e-9)
    assert r.correction == 0.0
    assert r.refined_rhs == r.classical_rhs
    assert r.verdict is Verdict.HOLDS


@pytest.mark.parametrize("check, p", [
    (classical_check, 3.0),
    (refined_check, 2.5),
    (lemma_weighted_check, 2.0),
    (difference_counterpart_check, 1.5),
])
def test_zero_function(check, p):
    r = check(ZERO, p, CFG)
    assert r.lhs == 0.0
    assert r.refined_rhs == 0.0
    assert r.refined_margin == 0.0
    assert r.verdict is Verdict.HOLDS


def test_refined_exponential_tighter_than_classical():
    r = refined_check(corpus_function("exp"), 2.0, CFG)
    assert r.correction == pytest.approx(1 - math.log(2), abs=1e-7)
    assert r.lhs <= r.refined_rhs <= r.classical_rhs
    assert r.verdict.ok


def test_scale_covariance():
    f = corpus_function("exp")
    p = 2.5
    base = refined_check(f, p, CFG)
    scaled = refined_check(f.scaled(3.0), p, CFG)
    factor = 3.0**p
    assert scaled.lhs == pytest.approx(factor * base.lhs, rel=1e-8)
    assert scaled.correction == pytest.approx(factor * base.correction, rel=1e-7)
    assert scaled.refined_rhs == pytest.approx(factor * base.refined_rhs, rel=1e-8)


def test_weighted_lemma_holds():
    for name in ("texp", "rat"):
        r = lemma_weighted_check(corpus_function(name), 2.0, CFG)
        assert r.form is Form.WEIGHTED
        assert r.correction >= 0
        assert r.verdict.ok


def test_difference_form_roles():
    r = difference_counterpart_check(corpus_function("exp"), 1.5, CFG)
    assert r.form is Form.DIFFERENCE
    # lhs is the constant-weighted power integral and the bound adds the correction
    assert r.lhs > r.classical_rhs
    assert r.refined_rhs == pytest.approx(r.classical_rhs + sharp_scale(1.5) * r.correction)
    assert r.verdict.ok


def test_difference_at_two_matches_refined_correction():
    f = corpus_function("recip")
    refined = refined_check(f, 2.0, CFG)
    difference = difference_counterpart_check(f, 2.0, CFG)
    assert difference.correction == refined.correction
    # At p = 2 the difference form is an identity.
    assert difference.verdict.ok
    assert abs(difference.refined_margin) <= difference.err_budget + 1e-9


@pytest.mark.parametrize("check, p", [
    (refined_check, 1.5),
    (lemma_weighted_check, 1.9),
    (difference_counterpart_check, 2.5),
    (classical_check, 1.0),
])
def test_preconditions(check, p):
    with pytest.raises(PreconditionError):
        check(corpus_function("exp"), p, CFG)


def test_run_check_auto_form():
    assert run_check("auto", ZERO, 2.0, CFG).form is Form.REFINED
    assert run_check("auto", ZERO, 1.5, CFG).form is Form.DIFFERENCE
    assert run_check("classical", ZERO, 1.5, CFG).form is Form.CLASSICAL


@pytest.mark.slow
@pytest.mark.parametrize("name", DOMINANCE_CORPUS)
@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_refinement_dominates(name, p):
    r = refined_check(corpus_function(name), p, CFG)
    assert r.verdict.ok
    assert r.correction >= -r.err_budget
    assert r.refined_rhs <= r.classical_rhs + r.err_budget
    assert r.classical_margin >= r.refined_margin - r.err_budget


@pytest.mark.slow
@pytest.mark.parametrize("name", DOMINANCE_CORPUS)
@pytest.mark.parametrize("p", [1.25, 1.5, 2.0])
def test_difference_counterpart_holds(name, p):
    assert difference_counterpart_check(corpus_function(name), p, CFG).verdict.ok
