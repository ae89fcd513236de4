from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as beta_fn
from scipy.stats import special_ortho_group

from divcurl_lab.errors import (
    DomainViolation,
    EmptyGrid,
    InvalidCapRadius,
    InvalidOrder,
    UnsupportedDimension,
)
from divcurl_lab.geometry import (
    Domain,
    ScalarField,
    VectorField,
    annulus_integral,
    cap_area,
    cap_area_quadrature,
    polar_graded_sphere_quadrature,
    radial_grid,
    sphere_integral,
    sphere_quadrature,
)


def scalar(N, func, domain=None):
    return ScalarField(N, func, domain=domain)


ONE = {N: scalar(N, lambda p: np.ones(len(p))) for N in (2, 3)}


# --- sphere_quadrature -----------------------------------------------------


@pytest.mark.parametrize("N, order, total", [(2, 64, 2 * np.pi), (3, 16, 4 * np.pi)])
def test_weights_sum_to_sphere_measure(N, order, total):
    q = sphere_quadrature(N, order)
    assert abs(q.weights.sum() - total) < 1e-12
    assert np.all(q.weights > 0)
    assert np.max(np.abs(np.linalg.norm(q.nodes, axis=1) - 1)) < 1e-14


def test_second_moment_s2():
    q = sphere_quadrature(3, 16)
    assert abs(q.weights @ q.nodes[:, 2] ** 2 - 4 * np.pi / 3) < 1e-10


def _monomial_sphere_integral(a):
    # int_{S^2} x^a y^b z^c = 2 prod Gamma((a_i+1)/2) / Gamma((|a|+3)/2), zero if any odd
    from math import gamma

    if any(k % 2 for k in a):
        return 0.0
    return 2 * np.prod([gamma((k + 1) / 2) for k in a]) / gamma((sum(a) + 3) / 2)


@pytest.mark.parametrize("order", [4, 8, 12])
def test_exact_below_order_s2(order):
    q = sphere_quadrature(3, order)
    for a in [(i, j, k) for i in range(order) for j in range(order) for k in range(order) if i + j + k < order]:
        approx = q.weights @ np.prod(q.nodes ** np.array(a), axis=1)
        assert abs(approx - _monomial_sphere_integral(a)) < 1e-10, a


def test_exact_below_order_circle():
    q = sphere_quadrature(2, 10)
    for deg in range(10):
        for i in range(deg + 1):
            vals = q.nodes[:, 0] ** i * q.nodes[:, 1] ** (deg - i)
            t = np.linspace(0, 2 * np.pi, 20001)
            ref = np.trapezoid(np.cos(t) ** i * np.sin(t) ** (deg - i), t)
            assert abs(q.weights @ vals - ref) < 1e-8


def test_polar_graded_rule_integrates_polynomials():
    q = polar_graded_sphere_quadrature()
    assert abs(q.weights.sum() - 4 * np.pi) < 1e-12
    assert abs(q.weights @ q.nodes[:, 2] ** 2 - 4 * np.pi / 3) < 1e-10


def test_quadrature_errors():
    with pytest.raises(UnsupportedDimension):
        sphere_quadrature(4, 8)
    with pytest.raises(InvalidOrder):
        sphere_quadrature(3, 1)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_rotation_invariance(seed):
    Q = special_ortho_group.rvs(3, random_state=seed)
    f = scalar(3, lambda p: np.exp(p[:, 0]) * (1 + p[:, 1] * p[:, 2]))
    g = scalar(3, lambda p: f(p @ Q.T))
    q1, q2 = sphere_quadrature(3, 16), sphere_quadrature(3, 32)
    assert abs(sphere_integral(g, np.zeros(3), 1.0, q2) - sphere_integral(f, np.zeros(3), 1.0, q2)) < 1e-10
    assert abs(sphere_integral(f, np.zeros(3), 1.0, q1.rotated(Q)) - sphere_integral(f, np.zeros(3), 1.0, q2)) < 1e-10


# --- sphere_integral / annulus_integral -------------------------------------


def test_sphere_integral_examples():
    q3, q2 = sphere_quadrature(3, 16), sphere_quadrature(2, 64)
    assert abs(sphere_integral(ONE[3], np.zeros(3), 0.37, q3) - 4 * np.pi) < 1e-12
    x0 = np.array([0.3, -0.2])
    f = scalar(2, lambda p: np.sum((p - x0) ** 2, axis=1))
    assert abs(sphere_integral(f, x0, 2.0, q2) - 8 * np.pi) < 1e-12
    x0 = np.array([0.1, 0.2, 0.3])
    g = scalar(3, lambda p: (1 - np.linalg.norm(p - x0, axis=1)) ** 4)
    assert abs(sphere_integral(g, x0, 0.5, q3) - np.pi / 4) < 1e-12


def test_sphere_integral_domain_violation():
    f = scalar(3, lambda p: np.ones(len(p)), domain=Domain.cylinder(3))
    with pytest.raises(DomainViolation):
        sphere_integral(f, np.array([0, 0, 0.5]), 0.6, sphere_quadrature(3, 8))


def test_annulus_integral_examples():
    q3, q2 = sphere_quadrature(3, 16), sphere_quadrature(2, 64)
    assert abs(annulus_integral(ONE[3], np.zeros(3), 0.0, 1.0, quad=q3) - 4 * np.pi / 3) < 1e-10
    assert abs(annulus_integral(ONE[2], np.zeros(2), 1.0, 2.0, quad=q2) - 3 * np.pi) < 1e-10
    f = scalar(2, lambda p: (1 - np.linalg.norm(p, axis=1)) ** 8)
    # 2 pi int_0^1 r (1-r)^8 dr = 2 pi B(2, 9)
    assert abs(2 * np.pi * beta_fn(2, 9) - 2 * np.pi / 90) < 1e-15
    assert abs(annulus_integral(f, np.zeros(2), 0.0, 1.0, quad=q2) - 2 * np.pi / 90) < 1e-12


@settings(max_examples=25, deadline=None)
@given(split=st.floats(0.3, 1.7))
def test_annulus_additive(split):
    q = sphere_quadrature(3, 12)
    f = scalar(3, lambda p: np.cos(p[:, 0]) + p[:, 1] ** 2 * p[:, 2])
    R0, R = 0.25, 2.0
    Rm = R0 + (R - R0) * split / 2
    whole = annulus_integral(f, np.zeros(3), R0, R, radial_grid(R0, R, 16), q)
    parts = annulus_integral(f, np.zeros(3), R0, Rm, radial_grid(R0, Rm, 16), q) + annulus_integral(
        f, np.zeros(3), Rm, R, radial_grid(Rm, R, 16), q
    )
    assert abs(whole - parts) < 1e-12


def test_annulus_grid_mismatch():
    with pytest.raises(EmptyGrid):
        annulus_integral(ONE[3], np.zeros(3), 0.0, 1.0, radial_grid(0.0, 0.5), sphere_quadrature(3, 8))
    with pytest.raises(EmptyGrid):
        radial_grid(1.0, 1.0)


def test_radial_grid_covers_interval():
    for grading in ("uniform", "geometric"):
        for toward in ("lo", "hi"):
            g = radial_grid(0.2, 1.3, panels=20, grading=grading, toward=toward)
            assert g.r_lo == 0.2 and g.r_hi == 1.3
            assert np.all(np.diff(g.breaks) > 0)
            assert abs(g.weights.sum() - 1.1) < 1e-14
            assert np.all((g.nodes > 0.2) & (g.nodes < 1.3))
    g = radial_grid(0.0, 1.0, panels=10, grading="geometric")
    assert abs(g.lengths[0] - 0.5**9) < 1e-15


# --- cap_area -----------------------------------------------------------------


def test_cap_area_examples():
    assert abs(cap_area(2, 2) - 2 * np.pi) < 1e-15
    assert abs(cap_area(2, 3) - 4 * np.pi) < 1e-15
    assert abs(cap_area(1, 3) - np.pi) < 1e-12
    with pytest.raises(InvalidCapRadius):
        cap_area(0, 3)
    with pytest.raises(InvalidCapRadius):
        cap_area(2.1, 2)


@pytest.mark.parametrize("N, order", [(2, 4096), (3, 128)])
@pytest.mark.parametrize("h", [0.25, 0.5, 1.0, 1.5])
def test_cap_area_matches_indicator_quadrature(N, order, h):
    q = sphere_quadrature(N, order)
    approx = cap_area_quadrature(h, q)
    # compare through the chord radius of the equivalent cap
    if N == 2:
        h_eq = 2 * np.sin(approx / 4)
    else:
        h_eq = np.sqrt(approx / np.pi)
    assert abs(h_eq - h) <= 2 * q.equator_spacing


# --- fields -----------------------------------------------------------------


def test_fd_gradient_matches_analytic():
    f = ScalarField(3, lambda p: np.sin(p[:, 0]) * p[:, 1] ** 2 + p[:, 2] ** 3,
                    lambda p: np.column_stack([np.cos(p[:, 0]) * p[:, 1] ** 2, 2 * np.sin(p[:, 0]) * p[:, 1], 3 * p[:, 2] ** 2]))
    x = np.random.default_rng(1).uniform(-1, 1, (50, 3))
    assert np.max(np.abs(f.fd_grad(x) - f.grad(x))) < 1e-9
    assert np.max(np.abs(f.fd_grad(x, scheme="central") - f.grad(x))) < 1e-6


def test_divergence_and_curl_of_known_fields():
    rot = VectorField(3, lambda p: np.column_stack([-p[:, 1], p[:, 0], np.zeros(len(p))]))
    grad = VectorField(3, lambda p: np.column_stack([2 * p[:, 0], 2 * p[:, 1], 2 * p[:, 2]]))
    x = np.random.default_rng(2).uniform(-1, 1, (40, 3))
    assert np.max(np.abs(rot.divergence_fd(x))) < 1e-9
    assert np.max(np.abs(grad.curl_fd(x))) < 1e-9
    assert np.allclose(grad.divergence_fd(x), 6.0)
    assert np.allclose(rot.curl_fd(x)[:, 0], -2.0)


def test_single_point_evaluation():
    f = ScalarField(2, lambda p: p[:, 0] + 2 * p[:, 1])
    assert f(np.array([1.0, 1.0])) == 3.0
    assert f(np.ones((4, 2))).shape == (4,)


def test_cylinder_domain_sampling():
    d = Domain.cylinder(3)
    pts = d.sample_interior(500, seed=3, margin=0.01, axis_margin=0.05)
    assert pts.shape == (500, 3)
    assert np.all(d.contains(pts, 0.01))
    assert np.all(np.linalg.norm(pts[:, :2], axis=1) > 0.05)
    assert np.array_equal(pts, d.sample_interior(500, seed=3, margin=0.01, axis_margin=0.05))
