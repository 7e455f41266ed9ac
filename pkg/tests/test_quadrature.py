"""Tests for the adaptive quadrature and the nested Hardy integrals."""

import math

import mpmath
import numpy as np
import pytest

from hardy_refine.corpus import CORPUS, corpus_function
from hardy_refine.errors import NonFiniteSampleError, PreconditionError
from hardy_refine.funcdsl import ZERO, from_callable, from_text
from hardy_refine.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    Measure,
    QuadConfig,
    Transform,
    average_grid,
    correction_term,
    hardy_lhs,
    integrate_halfline,
    integrate_interval,
    lemma_correction_term,
    power_integral,
    running_average,
    weighted_hardy_lhs,
)

CFG = QuadConfig()


def test_rule_weights():
    assert NODES.shape == (15,)
    assert math.fsum(KRONROD_WEIGHTS) == pytest.approx(2.0, abs=1e-15)
    assert math.fsum(GAUSS_WEIGHTS) == pytest.approx(2.0, abs=1e-15)
    assert np.all(np.diff(NODES) > 0)


def test_polynomial_is_exact_on_one_panel():
    result = integrate_interval(lambda t: t**10, 0.0, 1.0, CFG)
    assert result.value == pytest.approx(1 / 11, rel=1e-14)
    assert result.converged


def test_breakpoint_splits_a_kink():
    result = integrate_interval(lambda t: np.abs(t - 1 / 3), 0.0, 1.0, CFG, breakpoints=[1 / 3])
    assert result.value == pytest.approx(5 / 18, rel=1e-14)
    assert result.panels_used == 2


def test_empty_interval():
    assert integrate_interval(np.exp, 2.0, 2.0, CFG).value == 0.0


@pytest.mark.parametrize("name, quantity", [
    ("recip2", "int_f"),
    ("exp", "int_f"),
    ("texp", "int_f"),
    ("cauchy", "int_f"),
])
def test_halfline_closed_forms(name, quantity):
    result = power_integral(corpus_function(name), 1.0, CFG)
    assert result.converged
    assert result.value == pytest.approx(CORPUS[name].closed_forms[quantity], rel=1e-9)


@pytest.mark.parametrize("name", ["recip", "exp", "texp", "rat", "cauchy", "recip2"])
def test_power_integral_p2_closed_forms(name):
    result = power_integral(corpus_function(name), 2.0, CFG)
    expected = CORPUS[name].closed_forms["int_f2"]
    assert abs(result.value - expected) <= max(1e-9 * expected, result.err_estimate)


def test_mpmath_oracle():
    f = from_text("exp(-t)/(1+t)")
    oracle = float(mpmath.quad(lambda t: mpmath.exp(-t) / (1 + t), [0, 1, mpmath.inf]))
    result = integrate_halfline(f, CFG)
    assert result.value == pytest.approx(oracle, rel=1e-10)


def test_zero_function_gives_exact_zero():
    assert power_integral(ZERO, 2.0, CFG).value == 0.0
    assert hardy_lhs(ZERO, 3.0, CFG).value == 0.0
    assert correction_term(ZERO, 2.5, CFG).value == 0.0
    assert lemma_correction_term(ZERO, 2.0, CFG).value == 0.0


def test_negative_function_is_rejected():
    with pytest.raises(PreconditionError):
        power_integral(from_text("t-1"), 2.0, CFG)


def test_non_finite_sample_raises():
    f = from_callable(lambda t: np.where(t > 1.0, np.nan, 1.0), "nan beyond 1")
    with pytest.raises(NonFiniteSampleError) as exc:
        integrate_halfline(f, CFG)
    assert exc.value.t > 1.0


@pytest.mark.filterwarnings("error::RuntimeWarning")
def test_halfline_nodes_stay_inside_the_domain():
    # (log(1+t)/t)^2 maps to a log singularity at u = 1, which drives the
    # refinement down to machine resolution there.
    seen = []

    def f(t):
        seen.append(np.array(t, copy=True))
        return (np.log1p(t) / t) ** 2

    result = integrate_halfline(f, CFG)
    nodes = np.concatenate(seen)
    assert np.all(np.isfinite(nodes))
    assert np.all(nodes > 0)
    assert result.value == pytest.approx(math.pi**2 / 3, rel=1e-9)


def test_budget_exhaustion_is_reported():
    cfg = QuadConfig(max_panels=2)
    result = integrate_halfline(from_text("sqrt(abs(t-2))*exp(-t)"), cfg)
    assert not result.converged
    assert result.panels_used == 2


@pytest.mark.parametrize("field, value", [
    ("rel_tol", 0.0),
    ("abs_tol", -1.0),
    ("max_panels", 0),
    ("truncate_lower", 0.0),
    ("average_grid_lower", -1.0),
])
def test_invalid_config(field, value):
    with pytest.raises(PreconditionError):
        QuadConfig(**{field: value})


@pytest.mark.parametrize("source", ["exp(-t)", "1/(1+t^2)", "t/(1+t^2)^2", "sqrt(t)*exp(-t)"])
def test_tighter_tolerance_never_increases_error(source):
    f = from_text(source)
    loose = integrate_halfline(f, QuadConfig(rel_tol=1e-8))
    tight = integrate_halfline(f, QuadConfig(rel_tol=5e-9))
    assert tight.err_estimate <= loose.err_estimate


def test_results_are_bit_identical():
    f = corpus_function("rat")
    first = hardy_lhs(f, 2.5, CFG)
    second = hardy_lhs(f, 2.5, CFG)
    assert first == second


@pytest.mark.parametrize("source", ["t*exp(-t)", "t^2*exp(-t)"])
def test_transforms_agree_when_tails_are_negligible(source):
    f = from_text(source)
    rational = integrate_halfline(f, CFG)
    truncated = integrate_halfline(f, QuadConfig(transform=Transform.LOG_TRUNCATE))
    budget = rational.err_estimate + truncated.err_estimate + 1e-12
    assert abs(rational.value - truncated.value) <= budget


def test_dx_over_x_measure():
    # int_0^inf t e^-t dt/t = 1
    result = integrate_halfline(from_text("t*exp(-t)"), CFG, Measure.DX_OVER_X)
    assert result.value == pytest.approx(1.0, rel=1e-9)


# ========== Running average ==========


def test_average_grid_spacing():
    grid = average_grid(CFG)
    assert grid[0] == pytest.approx(1e-6)
    assert grid[-1] == pytest.approx(1e6)
    assert len(grid) == 97


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.7, 5.0, 1e3, 1e7])
def test_running_average_cases(x):
    grid = average_grid(CFG)
    const = running_average(from_text("3"), grid, CFG.inner())
    linear = running_average(from_text("t"), grid, CFG.inner())
    recip = running_average(from_text("1/(t+1)"), grid, CFG.inner())
    assert const.at(x) == pytest.approx(3.0, rel=1e-12)
    assert linear.at(x) == pytest.approx(x / 2, rel=1e-12)
    assert recip.at(x) == pytest.approx(math.log1p(x) / x, rel=1e-11)


def test_running_average_values_on_grid():
    grid = np.array([0.5, 1.0, 2.0, 4.0])
    average = running_average(from_text("exp(-t)"), grid, CFG)
    expected = -np.expm1(-grid) / grid
    assert np.allclose(average.values(), expected, rtol=1e-13, atol=0)


@pytest.mark.parametrize("x", [math.inf, math.nan, 0.0])
def test_running_average_rejects_points_outside_half_line(x):
    average = running_average(corpus_function("exp"), average_grid(CFG), CFG)
    with pytest.raises(PreconditionError):
        average.at(x)


def test_running_average_rejects_bad_grid():
    with pytest.raises(PreconditionError):
        running_average(from_text("t"), [1.0, 0.5], CFG)
    with pytest.raises(PreconditionError):
        running_average(from_text("t"), [0.0, 1.0], CFG)


# ========== Hardy integrals ==========


@pytest.mark.parametrize("name", ["recip", "exp", "cauchy"])
def test_hardy_lhs_closed_forms(name):
    result = hardy_lhs(corpus_function(name), 2.0, CFG)
    assert result.value == pytest.approx(CORPUS[name].closed_forms["lhs_p2"], rel=1e-8)


def test_hardy_lhs_mpmath_oracle():
    def average(x):
        return -mpmath.expm1(-x) / x - mpmath.exp(-x)

    oracle = float(mpmath.quad(lambda x: average(x) ** 2, [0, 1, 10, mpmath.inf]))
    result = hardy_lhs(corpus_function("texp"), 2.0, CFG)
    assert result.value == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("name", ["recip", "exp"])
def test_correction_closed_forms(name):
    result = correction_term(corpus_function(name), 2.0, CFG)
    assert result.converged
    assert result.value == pytest.approx(CORPUS[name].closed_forms["correction_p2"], abs=1e-7)


def test_correction_of_stretched_exponential():
    # f(t) = exp(-t/s) has its mass near t = s, so the outer integral depends on
    # inner integrals far beyond the tabulated average grid.
    s = 1e4
    result = correction_term(from_text("exp(-t/10000)"), 2.0, CFG)
    assert result.value == pytest.approx(s * (1 - math.log(2)), rel=1e-7)


def test_correction_error_estimate_covers_closed_form():
    result = correction_term(corpus_function("exp"), 2.0, CFG)
    assert abs(result.value - (1 - math.log(2))) <= result.err_estimate + 1e-9


def test_correction_is_nonnegative():
    for p in (2.0, 3.0):
        assert correction_term(corpus_function("texp"), p, CFG).value >= 0


def test_weighted_lhs_below_weighted_power_integral():
    g = corpus_function("texp")
    lhs = weighted_hardy_lhs(g, 2.0, CFG)
    # int_0^inf (t e^-t)^2 dt/t = 1/4
    assert 0 < lhs.value < 0.25
    rhs = power_integral(g, 2.0, CFG, Measure.DX_OVER_X)
    assert rhs.value == pytest.approx(0.25, rel=1e-9)
