from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divcurl_lab.errors import InvalidDelta, InvalidExponent
from divcurl_lab.lorentz import (
    StepFunction,
    WeightedSamples,
    distribution_function,
    equiintegrability_modulus,
    lorentz_norm,
    lorentz_norm_rearrangement,
    rearrangement,
)


def uniform_samples(f, n=10_000, a=0.0, b=1.0):
    t = a + (b - a) * (np.arange(n) + 0.5) / n
    return WeightedSamples(f(t), np.full(n, (b - a) / n)), (b - a) / n


step_inputs = st.lists(
    st.tuples(st.floats(0.0, 50.0), st.floats(1e-3, 2.0)), min_size=1, max_size=30
).map(lambda rows: WeightedSamples([v for v, _ in rows], [w for _, w in rows]))


# --- distribution_function ------------------------------------------------------


def test_two_level_distribution():
    d = distribution_function(WeightedSamples([2, 1], [0.1, 0.4]))
    assert d == StepFunction([0, 1, 2], [0.5, 0.1])
    assert d(0.0) == 0.5 and d(0.999) == 0.5 and d(1.0) == 0.1 and d(2.0) == 0.0


def test_empty_distribution():
    d = distribution_function(WeightedSamples([], []))
    assert d == StepFunction.zero()
    assert d(0.3) == 0.0


def test_identity_distribution_on_grid():
    s, h = uniform_samples(lambda t: t)
    d = distribution_function(s)
    lam = np.linspace(0, 0.999, 2001)
    assert np.max(np.abs(d(lam) - (1 - lam))) <= h


# --- rearrangement -----------------------------------------------------------------


def test_rearrangement_sorts():
    f = rearrangement(WeightedSamples([3, 1, 2, 2], [0.25] * 4))
    assert f == StepFunction([0, 0.25, 0.5, 0.75, 1.0], [3, 2, 2, 1])
    assert np.array_equal(f.canonical().levels, [3, 2, 1])


def test_rearrangement_of_constant():
    f = rearrangement(WeightedSamples([1.5] * 7, [0.3] * 7))
    assert f == StepFunction([0, 2.1], [1.5])


def test_rearrangement_of_abs_sin():
    # |{|sin| > lam}| = 2 pi - 4 arcsin(lam) on (0, 2 pi), so f*(t) = cos(t / 4)
    s, h = uniform_samples(lambda t: np.abs(np.sin(t)), 20_000, 0, 2 * np.pi)
    f = rearrangement(s)
    t = np.linspace(0, 2 * np.pi * 0.999, 3000)
    assert np.max(np.abs(f(t) - np.cos(t / 4))) <= h


@settings(max_examples=60, deadline=None)
@given(s=step_inputs)
def test_equimeasurability_exact(s):
    f = rearrangement(s)
    assert f.is_nonincreasing()
    assert distribution_function(f) == distribution_function(s)
    assert abs(f.breakpoints[-1] - s.total_measure) <= 1e-12 * s.total_measure


# --- lorentz_norm ---------------------------------------------------------------


def test_indicator_norm():
    assert lorentz_norm(WeightedSamples([1.0], [0.25]), 2) == 0.5


@settings(max_examples=80, deadline=None)
@given(measure=st.floats(1e-6, 10.0), p=st.floats(1.0, 6.0))
def test_indicator_norm_bit_exact(measure, p):
    assert lorentz_norm(WeightedSamples([1.0], [measure]), p) == measure ** (1 / p)


def test_two_level_norm():
    value = lorentz_norm(WeightedSamples([2, 1], [0.1, 0.4]), 2)
    assert abs(value - (np.sqrt(0.5) + np.sqrt(0.1))) < 1e-15
    assert abs(value - 1.0233345) < 1e-7


def test_identity_function_norm():
    s, h = uniform_samples(lambda t: t)
    assert abs(lorentz_norm(s, 2) - 2 / 3) <= h


def test_p_one_is_l1():
    s = WeightedSamples([3, 1, 2], [0.2, 0.5, 0.1])
    assert abs(lorentz_norm(s, 1) - 1.3) < 1e-15


def test_invalid_exponent():
    with pytest.raises(InvalidExponent):
        lorentz_norm(WeightedSamples([1], [1]), 0.5)
    with pytest.raises(InvalidExponent):
        lorentz_norm_rearrangement(WeightedSamples([1], [1]), 0.9)


@settings(max_examples=60, deadline=None)
@given(s=step_inputs, p=st.floats(1.0, 5.0))
def test_rearrangement_formula_is_p_times_distribution_formula(s, p):
    # int t^(-1/p') f*(t) dt = p int d(lam)^(1/p) dlam for every step function
    a, b = lorentz_norm(s, p), lorentz_norm_rearrangement(s, p)
    assert abs(b - p * a) <= 1e-10 * max(1.0, b)


@settings(max_examples=60, deadline=None)
@given(s=step_inputs, p=st.floats(1.0, 5.0), c=st.floats(-20, 20))
def test_norm_scaling(s, p, c):
    assert abs(lorentz_norm(s.scaled(c), p) - abs(c) * lorentz_norm(s, p)) <= 1e-12 * max(1.0, abs(c) * lorentz_norm(s, p))


@settings(max_examples=40, deadline=None)
@given(s=step_inputs, p=st.floats(1.0, 5.0))
def test_norm_invariant_under_rearrangement(s, p):
    assert abs(lorentz_norm(rearrangement(s), p) - lorentz_norm(s, p)) <= 1e-12 * max(1.0, lorentz_norm(s, p))


# --- equiintegrability_modulus ----------------------------------------------------


def test_modulus_examples():
    assert abs(equiintegrability_modulus(WeightedSamples([1.0], [1.0]), 0.3, "L1") - 0.3) < 1e-15
    assert abs(equiintegrability_modulus(WeightedSamples([1.0], [0.25]), 0.1, "lorentz", p=2) - np.sqrt(0.1)) < 1e-15


def test_modulus_singular_profile():
    # f(t) = t^(-1/2) on a grid graded toward 0: int_0^delta f = 2 sqrt(delta)
    breaks = np.r_[0.0, np.geomspace(1e-12, 1.0, 4001)]
    mid, w = 0.5 * (breaks[1:] + breaks[:-1]), np.diff(breaks)
    s = WeightedSamples(mid ** -0.5, w)
    for delta in (1e-3, 1e-2, 0.1, 0.5):
        assert abs(equiintegrability_modulus(s, delta) - 2 * np.sqrt(delta)) <= 0.01 * 2 * np.sqrt(delta)


@settings(max_examples=40, deadline=None)
@given(s=step_inputs, p=st.floats(1.0, 4.0), fracs=st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6))
def test_modulus_monotone_and_saturates(s, p, fracs):
    total = s.total_measure
    deltas = sorted(f * total for f in fracs)
    for mode, kw, full in (("L1", {}, lorentz_norm(s, 1)), ("lorentz", {"p": p}, lorentz_norm(s, p))):
        vals = [equiintegrability_modulus(s, d, mode, **kw) for d in deltas]
        assert all(b >= a - 1e-12 * max(1, full) for a, b in zip(vals, vals[1:]))
        assert abs(equiintegrability_modulus(s, total, mode, **kw) - full) <= 1e-12 * max(1, full)


def test_modulus_errors():
    s = WeightedSamples([1.0], [1.0])
    with pytest.raises(InvalidDelta):
        equiintegrability_modulus(s, 0.0)
    with pytest.raises(InvalidDelta):
        equiintegrability_modulus(s, 2.0)
    with pytest.raises(InvalidExponent):
        equiintegrability_modulus(s, 0.5, "lorentz")
