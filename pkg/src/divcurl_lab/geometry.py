"""Domains, fields and quadrature on spheres, annuli, balls and cylinders.

Everything here works in dimension ``N`` in {2, 3}.  Points are passed as
arrays of shape ``(m, N)``; a single point of shape ``(N,)`` is accepted
and the result is squeezed accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DomainViolation,
    EmptyGrid,
    InvalidCapRadius,
    InvalidOrder,
    MissingGradient,
    UnsupportedDimension,
)

SUPPORTED_DIMS = (2, 3)

# relative step used for finite-difference residuals
FD_RELATIVE_STEP = 1e-5


def check_dim(N):
    if N not in SUPPORTED_DIMS:
        raise UnsupportedDimension(f"dimension {N} not in {SUPPORTED_DIMS}")
    return int(N)


def as_points(x, dim):
    """Return ``(points, single)`` with ``points`` of shape (m, dim)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[-1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {x.shape}")
    return pts.reshape(-1, dim), single


def sphere_measure(N):
    """|S_{N-1}|: 2 for the 0-sphere, 2*pi for the circle, 4*pi for S_2."""
    return {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[N]


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Domain:
    """Ball, annulus, or the cylinder ``B'_1 x (0, 1)``.

    The cylinder is written in coordinates ``(x', x_N)`` with ``|x'| < 1``
    and ``0 < x_N < 1``.
    """

    kind: str
    dim: int
    center: Optional[tuple] = None
    R0: float = 0.0
    R: float = 1.0

    def __post_init__(self):
        check_dim(self.dim)
        if self.kind not in ("ball", "annulus", "cylinder"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "ball" and not self.R > 0:
            raise ValueError("ball radius must be positive")
        if self.kind == "annulus" and not 0 < self.R0 < self.R:
            raise ValueError("annulus needs 0 < R0 < R")

    @classmethod
    def ball(cls, center, radius):
        center = tuple(float(c) for c in center)
        return cls("ball", len(center), center, 0.0, float(radius))

    @classmethod
    def annulus(cls, center, R0, R):
        center = tuple(float(c) for c in center)
        return cls("annulus", len(center), center, float(R0), float(R))

    @classmethod
    def cylinder(cls, dim):
        return cls("cylinder", dim)

    @property
    def diameter(self):
        if self.kind == "cylinder":
            return float(np.hypot(2.0, 1.0))
        return 2.0 * self.R

    def contains(self, x, margin=0.0):
        """Boolean mask of points at distance > ``margin`` inside the domain."""
        pts, _ = as_points(x, self.dim)
        if self.kind == "cylinder":
            rad = np.linalg.norm(pts[:, :-1], axis=1)
            xN = pts[:, -1]
            return (rad < 1.0 - margin) & (xN > margin) & (xN < 1.0 - margin)
        dist = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        inside = dist < self.R - margin
        if self.kind == "annulus":
            inside &= dist > self.R0 + margin
        return inside

    def sample_interior(self, count, seed=0, margin=0.0, axis_margin=0.0):
        """Uniform samples by rejection; ``axis_margin`` keeps ``|x'|`` away from 0."""
        rng = np.random.default_rng(seed)
        if self.kind == "cylinder":
            lo = np.r_[-np.ones(self.dim - 1), 0.0]
            hi = np.ones(self.dim)
        else:
            c = np.asarray(self.center)
            lo, hi = c - self.R, c + self.R
        out = []
        have = 0
        while have < count:
            cand = rng.uniform(lo, hi, size=(4 * count, self.dim))
            keep = self.contains(cand, margin)
            if self.kind == "cylinder" and axis_margin > 0:
                keep &= np.linalg.norm(cand[:, :-1], axis=1) > axis_margin
            cand = cand[keep]
            out.append(cand)
            have += len(cand)
        return np.concatenate(out)[:count]


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """Scalar evaluator ``x -> f(x)`` with an optional analytic gradient.

    ``singular`` optionally maps points to a boolean mask of points where the
    evaluator is not defined (e.g. the cylinder axis for fields using the
    direction ``x'/|x'|``).
    """

    dim: int
    func: Callable
    grad_func: Optional[Callable] = None
    domain: Optional[Domain] = None
    singular: Optional[Callable] = None
    name: str = ""

    def __call__(self, x):
        pts, single = as_points(x, self.dim)
        vals = np.asarray(self.func(pts), dtype=float).reshape(len(pts))
        return vals[0] if single else vals

    @property
    def has_gradient(self):
        return self.grad_func is not None

    def grad(self, x):
        if self.grad_func is None:
            raise MissingGradient(f"field {self.name or '<anonymous>'} has no analytic gradient")
        pts, single = as_points(x, self.dim)
        g = np.asarray(self.grad_func(pts), dtype=float).reshape(len(pts), self.dim)
        return g[0] if single else g

    def fd_grad(self, x, h=None, scheme="richardson"):
        pts, single = as_points(x, self.dim)
        h = default_step(self.domain) if h is None else h

        def stencil(step):
            g = np.empty_like(pts)
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = step
                g[:, j] = (self(pts + e) - self(pts - e)) / (2 * step)
            return g

        g = stencil(h)
        if scheme == "richardson":
            g = (4 * stencil(h / 2) - g) / 3
        return g[0] if single else g

    def gradient(self, x, allow_fd=False):
        """Analytic gradient, or central differences when ``allow_fd``."""
        if self.grad_func is not None:
            return self.grad(x)
        if allow_fd:
            return self.fd_grad(x)
        return self.grad(x)


@dataclass(frozen=True)
class VectorField:
    """Vector evaluator ``x -> F(x)`` with ``components`` entries.

    ``components == dim`` is the usual vector field or map; the Jacobian has
    shape ``(components, dim)``.  Divergence and curl residuals use
    Richardson-extrapolated central differences with step ``h``.
    """

    dim: int
    func: Callable
    jac_func: Optional[Callable] = None
    components: Optional[int] = None
    domain: Optional[Domain] = None
    singular: Optional[Callable] = None
    name: str = ""

    @property
    def ncomp(self):
        return self.dim if self.components is None else self.components

    def __call__(self, x):
        pts, single = as_points(x, self.dim)
        vals = np.asarray(self.func(pts), dtype=float).reshape(len(pts), self.ncomp)
        return vals[0] if single else vals

    @property
    def has_gradient(self):
        return self.jac_func is not None

    def jacobian(self, x):
        if self.jac_func is None:
            raise MissingGradient(f"field {self.name or '<anonymous>'} has no analytic Jacobian")
        pts, single = as_points(x, self.dim)
        J = np.asarray(self.jac_func(pts), dtype=float).reshape(len(pts), self.ncomp, self.dim)
        return J[0] if single else J

    def fd_jacobian(self, x, h=None, scheme="richardson"):
        """Central-difference Jacobian with step ``h`` (per point if an array).

        ``scheme="richardson"`` combines steps ``h`` and ``h/2`` to cancel the
        ``h^2`` term; ``"central"`` is the plain second-order stencil.
        """
        pts, single = as_points(x, self.dim)
        h = default_step(self.domain) if h is None else h
        h = np.broadcast_to(np.asarray(h, dtype=float), (len(pts),))[:, None]

        def stencil(step):
            J = np.empty((len(pts), self.ncomp, self.dim))
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = 1.0
                J[:, :, j] = (self(pts + step * e) - self(pts - step * e)) / (2 * step)
            return J

        J = stencil(h)
        if scheme == "richardson":
            J = (4 * stencil(h / 2) - J) / 3
        elif scheme != "central":
            raise ValueError(f"unknown finite-difference scheme {scheme!r}")
        return J[0] if single else J

    def gradient_matrix(self, x, allow_fd=False):
        if self.jac_func is not None:
            return self.jacobian(x)
        if allow_fd:
            return self.fd_jacobian(x)
        return self.jacobian(x)

    def divergence_fd(self, x, h=None, scheme="richardson"):
        J = self.fd_jacobian(x, h, scheme)
        return np.trace(J, axis1=-2, axis2=-1)

    def curl_fd(self, x, h=None, scheme="richardson"):
        """Antisymmetric part ``dF_i/dx_j - dF_j/dx_i``, flattened (i < j)."""
        J = self.fd_jacobian(x, h, scheme)
        iu = np.triu_indices(self.dim, 1)
        A = J - np.swapaxes(J, -1, -2)
        return A[..., iu[0], iu[1]]

    def dot(self, other):
        """Pointwise scalar product with another field, as a ScalarField."""
        return ScalarField(
            self.dim,
            lambda p: np.einsum("ij,ij->i", self(p), other(p)),
            domain=self.domain,
            singular=self.singular,
        )

    def component(self, k):
        grad = None
        if self.jac_func is not None:
            grad = lambda p: self.jacobian(p)[:, k, :]  # noqa: E731
        return ScalarField(self.dim, lambda p: self(p)[:, k], grad, self.domain, self.singular)


def default_step(domain):
    diam = 1.0 if domain is None else domain.diameter
    return FD_RELATIVE_STEP * diam


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereQuad:
    """Nodes ``y_j`` on the unit sphere ``S_{N-1}`` with positive weights."""

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    order: int = 0

    def __len__(self):
        return len(self.weights)

    def rotated(self, Q):
        return SphereQuad(self.dim, self.nodes @ np.asarray(Q).T, self.weights, self.order)

    @property
    def equator_spacing(self):
        """Largest angular gap between neighbouring nodes along the equator."""
        if self.dim == 2:
            return 2 * np.pi / len(self)
        return 2 * np.pi / (2 * self.order)


def sphere_quadrature(N, order):
    """Product quadrature on ``S_{N-1}``.

    For ``N = 2`` this is ``order`` equally spaced angles with equal weights.
    For ``N = 3`` it is Gauss-Legendre in ``cos(theta)`` with ``order``
    points times ``2*order`` uniform azimuths.  Spherical polynomials of
    total degree below ``order`` are integrated exactly.
    """
    N = check_dim(N)
    if int(order) != order or order < 2:
        raise InvalidOrder(f"order must be an integer >= 2, got {order}")
    order = int(order)
    if N == 2:
        t = 2 * np.pi * np.arange(order) / order
        nodes = np.column_stack([np.cos(t), np.sin(t)])
        weights = np.full(order, 2 * np.pi / order)
        return SphereQuad(2, nodes, weights, order)
    z, wz = np.polynomial.legendre.leggauss(order)
    naz = 2 * order
    phi = 2 * np.pi * np.arange(naz) / naz
    return _product_sphere(z, wz, phi, order)


def polar_graded_sphere_quadrature(order=8, azimuths=16, panels=24, ratio=0.5):
    """Quadrature on ``S_2`` resolving features concentrated at the poles ``+-e_3``.

    Composite Gauss-Legendre in the polar angle on panels that shrink
    geometrically toward both poles, times ``azimuths`` uniform angles.
    Used where fields concentrate on the ``x_3`` axis through the centre.
    """
    if order < 2 or azimuths < 2 or panels < 1:
        raise InvalidOrder("order, azimuths >= 2 and panels >= 1 required")
    half = np.pi / 2 * ratio ** np.arange(panels)[::-1]
    breaks = np.concatenate([[0.0], half, np.pi - half[::-1][1:], [np.pi]])
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    theta = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w).ravel() * np.sin(theta)
    phi = 2 * np.pi * np.arange(azimuths) / azimuths
    return _product_sphere(np.cos(theta), wt, phi, order)


def _product_sphere(z, wz, phi, order):
    s = np.sqrt(np.clip(1 - z**2, 0, None))
    Z, P = np.meshgrid(z, phi, indexing="ij")
    S, _ = np.meshgrid(s, phi, indexing="ij")
    nodes = np.column_stack([(S * np.cos(P)).ravel(), (S * np.sin(P)).ravel(), Z.ravel()])
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.outer(wz, np.full(len(phi), 2 * np.pi / len(phi))).ravel()
    return SphereQuad(3, nodes, weights, order)


@dataclass(frozen=True)
class RadialGrid:
    """Gauss panels covering ``[r_lo, r_hi]``.

    ``breaks`` are the panel endpoints; ``nodes``/``weights`` have shape
    ``(panels, order)``.
    """

    breaks: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    grading: str = "uniform"

    @classmethod
    def from_breaks(cls, breaks, order=16, grading="custom"):
        breaks = np.asarray(breaks, dtype=float)
        if breaks.ndim != 1 or len(breaks) < 2:
            raise EmptyGrid("radial grid needs at least one panel")
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("panel breaks must be strictly increasing")
        x, w = np.polynomial.legendre.leggauss(order)
        a, b = breaks[:-1, None], breaks[1:, None]
        nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
        weights = 0.5 * (b - a) * w
        return cls(breaks, nodes, weights, grading)

    @property
    def r_lo(self):
        return float(self.breaks[0])

    @property
    def r_hi(self):
        return float(self.breaks[-1])

    @property
    def panels(self):
        return np.column_stack([self.breaks[:-1], self.breaks[1:]])

    @property
    def midpoints(self):
        return 0.5 * (self.breaks[:-1] + self.breaks[1:])

    @property
    def lengths(self):
        return np.diff(self.breaks)

    def __len__(self):
        return len(self.breaks) - 1


def radial_grid(r_lo, r_hi, panels=32, order=16, grading="uniform", ratio=0.5, toward="lo"):
    """Radial panels on ``[r_lo, r_hi]``, uniform or geometric toward one end.

    Geometric grading uses panel widths shrinking by ``ratio`` toward the
    chosen endpoint; the innermost panel reaches the endpoint exactly.
    """
    if not r_hi > r_lo:
        raise EmptyGrid(f"empty radial interval [{r_lo}, {r_hi}]")
    if panels < 1:
        raise EmptyGrid("need at least one panel")
    if grading == "uniform":
        breaks = np.linspace(r_lo, r_hi, panels + 1)
    elif grading == "geometric":
        L = r_hi - r_lo
        d = L * ratio ** np.arange(panels)[::-1]
        d = np.concatenate([[0.0], d])
        breaks = r_lo + d if toward == "lo" else r_hi - d[::-1]
        breaks[0], breaks[-1] = r_lo, r_hi
    else:
        raise ValueError(f"unknown grading {grading!r}")
    return RadialGrid.from_breaks(breaks, order, grading)


def _evaluate(f, pts):
    return np.asarray(f(pts), dtype=float).reshape(len(pts))


def _check_inside(f, pts):
    dom = getattr(f, "domain", None)
    if dom is not None and not np.all(dom.contains(pts)):
        raise DomainViolation(f"quadrature points leave the {dom.kind} domain")


def sphere_integral(f, x0, r, quad):
    """``sum_j w_j f(x0 + r y_j)``; the factor ``r^(N-1)`` is not applied."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (quad.dim,):
        raise ValueError("centre dimension does not match the quadrature")
    pts = x0 + r * quad.nodes
    _check_inside(f, pts)
    return float(quad.weights @ _evaluate(f, pts))


def annulus_radial_values(f, x0, grid, quad):
    """Sphere integrals at every radial Gauss node, shape (panels, order)."""
    x0 = np.asarray(x0, dtype=float)
    out = np.empty(grid.nodes.shape)
    for i, rs in enumerate(grid.nodes):
        pts = (x0 + rs[:, None, None] * quad.nodes[None]).reshape(-1, quad.dim)
        _check_inside(f, pts)
        vals = _evaluate(f, pts).reshape(len(rs), len(quad))
        out[i] = vals @ quad.weights
    return out


def annulus_integral(f, x0, R0, R, grid=None, quad=None):
    """Integral of ``f`` over ``C(R0, R)`` (a ball when ``R0 = 0``).

    Composes radial Gauss panels with the sphere rule and the ``r^(N-1)``
    Jacobian.  ``grid`` must span exactly ``[R0, R]``.
    """
    if quad is None:
        raise ValueError("a SphereQuad is required")
    if grid is None:
        grid = radial_grid(R0, R, panels=16, order=16)
    if len(grid) == 0:
        raise EmptyGrid("radial grid has no panels")
    if not (np.isclose(grid.r_lo, R0, atol=1e-14) and np.isclose(grid.r_hi, R, atol=1e-14)):
        raise EmptyGrid(f"grid spans [{grid.r_lo}, {grid.r_hi}], expected [{R0}, {R}]")
    vals = annulus_radial_values(f, x0, grid, quad)
    jac = grid.nodes ** (quad.dim - 1)
    return float(np.sum(grid.weights * jac * vals))


def cap_area(h, N):
    """Surface measure of ``B(e_1, h)`` intersected with ``S_{N-1}`` (chord metric)."""
    N = check_dim(N)
    if not 0 < h <= 2:
        raise InvalidCapRadius(f"cap radius must lie in (0, 2], got {h}")
    if N == 2:
        return 4.0 * np.arcsin(h / 2.0)
    return np.pi * h**2


def cap_area_quadrature(h, quad, center=None):
    """Indicator-quadrature estimate of the cap area (independent check of cap_area)."""
    if center is None:
        center = np.eye(quad.dim)[0]
    inside = np.linalg.norm(quad.nodes - center, axis=1) < h
    return float(quad.weights[inside].sum())
