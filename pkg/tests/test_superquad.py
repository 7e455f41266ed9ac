"""Tests for grid superquadraticity and the discrete sharpened Jensen inequality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_refine.errors import DegenerateGridError, PreconditionError
from hardy_refine.funcdsl import ZERO, from_text
from hardy_refine.operator import instance_rng
from hardy_refine.superquad import (
    CANONICAL_GRID,
    DiscreteMeasure,
    Verdict,
    check_superquadratic,
    convexity_check,
    jensen_gap,
    mp_jensen_gap,
    power_family,
    random_measure,
)


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_plus_powers_consistent_for_p_at_least_two(p):
    assert check_superquadratic(power_family(p, "plus"), CANONICAL_GRID).consistent


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0])
def test_minus_powers_consistent_up_to_two(p):
    assert check_superquadratic(power_family(p, "minus"), CANONICAL_GRID).consistent


@pytest.mark.parametrize("p", [1.2, 1.5])
def test_plus_powers_violated_below_two(p):
    witness = check_superquadratic(power_family(p, "plus"), CANONICAL_GRID)
    assert witness.verdict is Verdict.VIOLATED
    v = witness.violation
    assert v.lower > v.upper
    assert "violated at" in witness.describe()


def test_sqrt_is_violated():
    witness = check_superquadratic(from_text("sqrt(t)"), [0.0, 0.25, 1.0, 4.0])
    assert not witness.consistent
    assert witness.violation.a in (0.0, 0.25, 1.0, 4.0)


def test_cube_on_small_grid():
    witness = check_superquadratic(from_text("t^3"), [0.0, 0.5, 1.0, 2.0, 4.0])
    assert witness.consistent
    assert witness.describe().startswith("consistent on grid")


def test_square_interval_contains_derivative():
    witness = check_superquadratic(from_text("t^2"), [0.0, 1.0, 2.0, 3.0, 5.0])
    for interval in witness.intervals:
        assert interval.low - 1e-12 <= 2 * interval.anchor <= interval.high + 1e-12


def test_zero_function_is_consistent():
    assert check_superquadratic(ZERO, CANONICAL_GRID).consistent


def test_degenerate_grid():
    with pytest.raises(DegenerateGridError):
        check_superquadratic(from_text("t^2"), [1.0, 1.0, 2.0])


def test_negative_grid_point():
    with pytest.raises(PreconditionError):
        check_superquadratic(from_text("t^2"), [-1.0, 1.0, 2.0])


def test_witness_to_dict():
    data = check_superquadratic(power_family(1.5, "plus"), CANONICAL_GRID).to_dict()
    assert data["verdict"] == "violated"
    assert data["violation"]["lower"] > data["violation"]["upper"]
    assert len(data["intervals"]) == len(CANONICAL_GRID)


grid_points = st.lists(st.integers(min_value=1, max_value=1000), min_size=5, max_size=8, unique=True)


@settings(max_examples=60, deadline=None)
@given(points=grid_points, p=st.sampled_from([2.0, 2.5, 3.0, 4.0]))
def test_plus_powers_consistent_on_random_grids(points, p):
    grid = [x / 10 for x in points]
    scale = max(1.0, max(grid) ** p)
    witness = check_superquadratic(power_family(p, "plus"), grid, tol=1e-12 * scale)
    assert witness.consistent, witness.describe()


# ========== Discrete Jensen ==========


def test_square_gap_vanishes():
    for i in range(100):
        m = random_measure(instance_rng(42, i), 2 + i % 7)
        assert abs(jensen_gap(from_text("t^2"), m).gap) <= 1e-12 * max(1.0, m.mean() ** 2)


def test_cube_two_point_gap():
    m = DiscreteMeasure((0.0, 2.0), (0.5, 0.5))
    result = jensen_gap(from_text("t^3"), m)
    assert result.lhs == 1.0
    assert result.rhs == 3.0
    assert result.gap == 2.0


def test_zero_function_gap():
    m = DiscreteMeasure.normalized([1.0, 3.0, 7.0], [1, 2, 3])
    assert jensen_gap(ZERO, m).gap == 0.0


def test_sharpened_gap_below_classical_gap():
    f = from_text("t^3")
    for i in range(20):
        m = random_measure(instance_rng(7, i), 5)
        assert jensen_gap(f, m).gap <= mp_jensen_gap(f, m).gap


@settings(max_examples=50, deadline=None)
@given(
    points=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=8),
    p=st.sampled_from([2.0, 3.0]),
    data=st.data(),
)
def test_superquadratic_powers_have_nonnegative_gap(points, p, data):
    weights = data.draw(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=len(points), max_size=len(points)))
    m = DiscreteMeasure.normalized(points, weights)
    result = jensen_gap(power_family(p, "plus"), m)
    assert result.gap >= -1e-10 * max(1.0, abs(result.rhs))


@pytest.mark.parametrize("points, weights", [
    ((), ()),
    ((1.0,), (0.5, 0.5)),
    ((-1.0, 1.0), (0.5, 0.5)),
    ((1.0, 2.0), (0.0, 1.0)),
    ((1.0, 2.0), (0.4, 0.4)),
])
def test_invalid_measures(points, weights):
    with pytest.raises(PreconditionError):
        DiscreteMeasure(points, weights)


def test_random_measure_is_seeded():
    a = random_measure(instance_rng(3, 1), 6)
    b = random_measure(instance_rng(3, 1), 6)
    assert a == b
    assert a != random_measure(instance_rng(3, 2), 6)


# ========== Convexity diagnostic ==========


def test_convexity_diagnostic():
    assert convexity_check(from_text("t^2"), CANONICAL_GRID).convex
    concave = convexity_check(from_text("sqrt(t)"), CANONICAL_GRID)
    assert not concave.convex
    assert concave.worst < 0
    assert not convexity_check(power_family(1.5, "minus"), CANONICAL_GRID).convex
