"""Cofactors, the divergence-form (distributional) determinant and its
consistency with the pointwise determinant.

Only the first row of the divergence form is used for pairings:
``<Det Du, psi> = -int u^1 sum_j cof(Du)_{1j} d_j psi dx``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimension
from .geometry import VectorField, default_step, polar_graded_sphere_quadrature, radial_grid, sphere_quadrature
from .lorentz import equiintegrability_modulus
from .pairing import QuadratureContext, RadialTestFunction, _support_check, ball_quadrature


def cofactor(J):
    """Matrix of signed minors of ``J`` (shape ``(..., N, N)``, ``N`` in {2, 3}).

    Satisfies ``cof(J)^T J = det(J) I``.
    """
    J = np.asarray(J, dtype=float)
    N = J.shape[-1]
    if J.shape[-2] != N or N not in (2, 3):
        raise UnsupportedDimension(f"cofactors implemented for 2x2 and 3x3 matrices, got {J.shape[-2:]}")
    if N == 2:
        C = np.empty_like(J)
        C[..., 0, 0] = J[..., 1, 1]
        C[..., 0, 1] = -J[..., 1, 0]
        C[..., 1, 0] = -J[..., 0, 1]
        C[..., 1, 1] = J[..., 0, 0]
        return C
    r0, r1, r2 = J[..., 0, :], J[..., 1, :], J[..., 2, :]
    return np.stack([np.cross(r1, r2), np.cross(r2, r0), np.cross(r0, r1)], axis=-2)


def cofactor_field(u):
    """``x -> cof(Du(x))`` as a function on point arrays."""
    return lambda pts: cofactor(u.jacobian(pts))


def default_ball_context(psi, domain_axis=False):
    """Ball rule matched to a radial test function.

    ``domain_axis`` switches to a sphere rule graded toward ``+-e_N`` for
    integrands concentrating on the vertical axis through the centre.
    """
    N = psi.dim
    if domain_axis and N == 3:
        quad = polar_graded_sphere_quadrature(order=8, azimuths=16, panels=30)
    else:
        quad = sphere_quadrature(N, 32 if N == 3 else 128)
    return ball_quadrature(psi.x0, psi.R, radial_grid(0.0, psi.R, panels=16, order=16), quad)


def distributional_det_pairing(u, psi, ctx=None):
    """``-int u^1 sum_j cof(Du)_{1j} d_j psi dx``."""
    ctx = default_ball_context(psi) if ctx is None else ctx
    _support_check(psi, ctx)
    pts = ctx.points
    row = cofactor(u.jacobian(pts))[:, 0, :]
    u1 = u(pts)[:, 0]
    return -ctx.integrate(u1 * np.einsum("ij,ij->i", row, psi.grad(pts)))


def pointwise_det_pairing(u, psi, ctx=None):
    """``int det(Du) psi dx``."""
    ctx = default_ball_context(psi) if ctx is None else ctx
    _support_check(psi, ctx)
    pts = ctx.points
    return ctx.integrate(np.linalg.det(u.jacobian(pts)) * psi(pts))


@dataclass(frozen=True)
class DetConsistencyReport:
    distributional: tuple
    pointwise: tuple
    tol: float

    @property
    def differences(self):
        return tuple(abs(a - b) for a, b in zip(self.distributional, self.pointwise))

    @property
    def relative(self):
        return tuple(d / max(abs(b), 1e-300) for d, b in zip(self.differences, self.pointwise))

    @property
    def max_difference(self):
        return max(self.differences)

    @property
    def max_relative(self):
        return max(self.relative)

    @property
    def consistent(self):
        return self.max_relative <= self.tol


def det_consistency(u, family, tol=1e-6, contexts=None):
    """Compare both pairings over a family of radial test functions (relative tolerance)."""
    contexts = [None] * len(family) if contexts is None else contexts
    d = tuple(distributional_det_pairing(u, psi, c) for psi, c in zip(family, contexts))
    p = tuple(pointwise_det_pairing(u, psi, c) for psi, c in zip(family, contexts))
    return DetConsistencyReport(d, p, tol)


def piola_residual(u, pts, h=None):
    """Max over ``pts`` of the finite-difference divergence of row 1 of ``cof(Du)``.

    ``h`` may be a scalar or a per-point array (e.g. graded with the distance
    to a singular set).
    """
    row = VectorField(u.dim, lambda p: cofactor(u.jacobian(p))[:, 0, :], domain=u.domain)
    h = default_step(u.domain) if h is None else h
    return float(np.max(np.abs(row.divergence_fd(pts, h))))


def axis_graded_step(pts, base=1e-5, floor=1e-8):
    """Step ``base * min(1, dist to axis / 2)`` so stencils never cross the axis."""
    r = np.linalg.norm(np.asarray(pts)[:, :-1], axis=1)
    return np.maximum(base * np.minimum(1.0, r / 2), floor)


def oscillating_perturbation(u, n):
    """``u + (sin(n x_2) / n, 0, ..., 0)``: ``Du_n`` stays bounded, so ``|grad u_n^1|`` is equi-integrable."""
    N = u.dim

    def f(p):
        out = np.array(u(p), dtype=float, copy=True)
        out[:, 0] += np.sin(n * p[:, 1]) / n
        return out

    def jac(p):
        J = np.array(u.jacobian(p), dtype=float, copy=True)
        J[:, 0, 1] += np.cos(n * p[:, 1])
        return J

    return VectorField(N, f, jac, domain=u.domain, name=f"{u.name}+osc{n}")


def first_row_lorentz_modulus(u, ctx, delta):
    """Lorentz ``L^{N-1,1}`` modulus of ``|grad u^1|`` at measure ``delta``."""
    g = np.linalg.norm(u.jacobian(ctx.points)[:, 0, :], axis=1)
    return equiintegrability_modulus(ctx.samples(g), delta, "lorentz", p=u.dim - 1)


def polynomial_maps(N):
    """Smooth polynomial maps with analytic Jacobians used as consistency fixtures."""
    if N == 2:
        table = [
            ("x1+x2^2, x2", lambda p: np.column_stack([p[:, 0] + p[:, 1] ** 2, p[:, 1]]),
             lambda p: _stack2([1, 2 * p[:, 1]], [0, 1], len(p))),
            ("x1^2-x2, x1*x2", lambda p: np.column_stack([p[:, 0] ** 2 - p[:, 1], p[:, 0] * p[:, 1]]),
             lambda p: _stack2([2 * p[:, 0], -1], [p[:, 1], p[:, 0]], len(p))),
        ]
        return [VectorField(2, f, j, name=nm) for nm, f, j in table]
    table = [
        ("x1+x2^2, x2, x3", lambda p: np.column_stack([p[:, 0] + p[:, 1] ** 2, p[:, 1], p[:, 2]]),
         lambda p: _stack3([1, 2 * p[:, 1], 0], [0, 1, 0], [0, 0, 1], len(p))),
        ("x1*x3, x2+x1^2, x3^2+x2", lambda p: np.column_stack([p[:, 0] * p[:, 2], p[:, 1] + p[:, 0] ** 2, p[:, 2] ** 2 + p[:, 1]]),
         lambda p: _stack3([p[:, 2], 0, p[:, 0]], [2 * p[:, 0], 1, 0], [0, 1, 2 * p[:, 2]], len(p))),
        ("x1^3+x2, x2*x3+x1, x3-x1*x2", lambda p: np.column_stack([p[:, 0] ** 3 + p[:, 1], p[:, 1] * p[:, 2] + p[:, 0], p[:, 2] - p[:, 0] * p[:, 1]]),
         lambda p: _stack3([3 * p[:, 0] ** 2, 1, 0], [1, p[:, 2], p[:, 1]], [-p[:, 1], -p[:, 0], 1], len(p))),
    ]
    return [VectorField(3, f, j, name=nm) for nm, f, j in table]


def _row(entries, m):
    return np.column_stack([np.broadcast_to(np.asarray(e, dtype=float), (m,)) for e in entries])


def _stack2(a, b, m):
    return np.stack([_row(a, m), _row(b, m)], axis=1)


def _stack3(a, b, c, m):
    return np.stack([_row(a, m), _row(b, m), _row(c, m)], axis=1)


def linear_map(A):
    A = np.asarray(A, dtype=float)
    N = A.shape[0]
    return VectorField(N, lambda p: p @ A.T, lambda p: np.broadcast_to(A, (len(p), N, N)), name="linear")


def jump_map(N, c=0.0):
    """Identity plus a unit jump of the first component across ``x_1 = c`` (negative control).

    ``Du`` is the identity off the jump, so the pointwise pairing misses the
    interface term carried by the distributional one.
    """
    def f(p):
        out = np.array(p, dtype=float, copy=True)
        out[:, 0] += (p[:, 0] > c).astype(float)
        return out

    return VectorField(N, f, lambda p: np.broadcast_to(np.eye(N), (len(p), N, N)), name="jump")


__all__ = [
    "QuadratureContext",
    "RadialTestFunction",
    "axis_graded_step",
    "cofactor",
    "cofactor_field",
    "default_ball_context",
    "det_consistency",
    "distributional_det_pairing",
    "first_row_lorentz_modulus",
    "jump_map",
    "linear_map",
    "oscillating_perturbation",
    "piola_residual",
    "pointwise_det_pairing",
    "polynomial_maps",
]
