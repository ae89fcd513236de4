"""Duality pairings against test functions, limit extrapolation, concentration
coefficients and radial flux profiles.

Weak convergence is checked the definitional way: integrate ``f_n psi`` for a
family of Lipschitz test functions and extrapolate each sequence in ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFamily, DomainViolation, InsufficientData, SupportViolation
from .geometry import (
    Domain,
    annulus_radial_values,
    check_dim,
    radial_grid,
    sphere_quadrature,
)
from .lorentz import WeightedSamples, equiintegrability_modulus

DEFAULT_LADDER = (8, 16, 32, 64, 128, 256, 512)


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


def bump(t, R=1.0):
    """``(1 - t^2/R^2)^2`` on ``[0, R]``, zero beyond."""
    s = np.clip(1 - (np.asarray(t, dtype=float) / R) ** 2, 0, None)
    return s**2


def dbump(t, R=1.0):
    t = np.asarray(t, dtype=float)
    s = np.clip(1 - (t / R) ** 2, 0, None)
    return -4 * t / R**2 * s


@dataclass(frozen=True)
class RadialTestFunction:
    """``psi(x) = phi(|x - x0|)`` with ``supp phi`` in ``[0, R]``.

    ``derivative_support`` optionally lists closed intervals containing
    ``supp phi'`` (the restricted class used when ``u`` is only controlled on
    selected radii).
    """

    x0: tuple
    R: float
    phi: Callable = None
    dphi: Callable = None
    derivative_support: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(c) for c in self.x0))
        if self.phi is None:
            R = self.R
            object.__setattr__(self, "phi", lambda t: bump(t, R))
            object.__setattr__(self, "dphi", lambda t: dbump(t, R))
        if abs(float(np.ravel(self.phi(np.array([self.R])))[0])) > 1e-12:
            raise SupportViolation("phi must vanish at r = R")

    @property
    def dim(self):
        return len(self.x0)

    def __call__(self, x):
        d = np.linalg.norm(np.asarray(x) - np.asarray(self.x0), axis=-1)
        return np.where(d < self.R, self.phi(d), 0.0)

    def grad(self, x):
        diff = np.asarray(x) - np.asarray(self.x0)
        d = np.linalg.norm(diff, axis=-1)
        safe = np.where(d > 0, d, 1.0)
        dp = np.where(d < self.R, self.dphi(d), 0.0)
        return (dp / safe)[..., None] * diff * (d > 0)[..., None]


@dataclass(frozen=True)
class CylinderTestFunction:
    """``psi(x) = chi(|x'|) g(x_N)`` with ``chi(1) = 0``."""

    N: int
    chi: Callable
    dchi: Callable
    g: Callable
    dg: Callable
    label: str = ""

    def __post_init__(self):
        check_dim(self.N)
        if abs(float(np.ravel(self.chi(np.array([1.0])))[0])) > 1e-12:
            raise SupportViolation("chi must vanish at |x'| = 1")

    def __call__(self, x):
        x = np.asarray(x)
        r = np.linalg.norm(x[..., :-1], axis=-1)
        return self.chi(r) * self.g(x[..., -1])

    def grad(self, x):
        x = np.asarray(x)
        xp = x[..., :-1]
        r = np.linalg.norm(xp, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        out = np.empty(x.shape)
        out[..., :-1] = (self.dchi(r) * self.g(x[..., -1]) / safe)[..., None] * xp
        out[..., -1] = self.chi(r) * self.dg(x[..., -1])
        return out

    @property
    def chi0(self):
        return float(self.chi(np.array([0.0]))[0])

    @property
    def g_integral(self):
        z, w = np.polynomial.legendre.leggauss(32)
        return float(0.5 * w @ self.g(0.5 * (z + 1)))


def default_cylinder_family(N):
    """Polynomial test functions: ``chi = (1 - t^2)^2`` with ``g = 1`` and ``g = x_N``,
    plus ``chi = (1 - t^2)^3`` with ``g = 1 + x_N^2``."""
    one = lambda z: np.ones_like(np.asarray(z, dtype=float))  # noqa: E731
    zero = lambda z: np.zeros_like(np.asarray(z, dtype=float))  # noqa: E731
    chi3 = lambda t: np.clip(1 - np.asarray(t) ** 2, 0, None) ** 3  # noqa: E731
    dchi3 = lambda t: -6 * np.asarray(t) * np.clip(1 - np.asarray(t) ** 2, 0, None) ** 2  # noqa: E731
    return [
        CylinderTestFunction(N, bump, dbump, one, zero, "bump*1"),
        CylinderTestFunction(N, bump, dbump, lambda z: np.asarray(z, dtype=float), one, "bump*xN"),
        CylinderTestFunction(N, chi3, dchi3, lambda z: 1 + np.asarray(z) ** 2,
                             lambda z: 2 * np.asarray(z), "bump3*(1+xN^2)"),
    ]


# ---------------------------------------------------------------------------
# Quadrature contexts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureContext:
    """Points and positive weights of a composed volume rule."""

    kind: str
    dim: int
    points: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    def integrate(self, values):
        return float(self.weights @ np.asarray(values, dtype=float))

    def samples(self, values):
        """``|values|`` as weighted samples on the cells of this rule."""
        return WeightedSamples(values, self.weights)


def concentration_grid(panels=40, order=24):
    """Radial panels on ``[0, 1]`` graded geometrically toward the axis."""
    return radial_grid(0.0, 1.0, panels=panels, order=order, grading="geometric", ratio=0.5)


def cylinder_quadrature(N, radial=None, circle_order=32, axial_order=16):
    """Rule on ``B'_1 x (0, 1)``: polar in ``x'`` times Gauss-Legendre in ``x_N``.

    For ``N = 2`` the "circle" is the two-point sphere ``{-1, +1}``.  Radial
    Gauss nodes are interior, so no point lies on the axis.
    """
    N = check_dim(N)
    radial = concentration_grid() if radial is None else radial
    r = radial.nodes.ravel()
    wr = radial.weights.ravel()
    if N == 2:
        dirs = np.array([[-1.0], [1.0]])
        wd = np.ones(2)
    else:
        sq = sphere_quadrature(2, circle_order)
        dirs, wd = sq.nodes, sq.weights
    z, wz = np.polynomial.legendre.leggauss(axial_order)
    z, wz = 0.5 * (z + 1), 0.5 * wz
    xp = (r[:, None, None] * dirs[None, :, :])  # (nr, nd, N-1)
    nr, nd = len(r), len(dirs)
    pts = np.empty((nr, nd, len(z), N))
    pts[..., :-1] = xp[:, :, None, :]
    pts[..., -1] = z[None, None, :]
    w = (wr * r ** (N - 2))[:, None, None] * wd[None, :, None] * wz[None, None, :]
    return QuadratureContext(
        "cylinder", N, pts.reshape(-1, N), w.ravel(),
        {"radial_panels": len(radial), "radial_order": radial.nodes.shape[1],
         "circle_order": circle_order if N == 3 else 2, "axial_order": axial_order},
    )


def ball_quadrature(x0, R, radial=None, quad=None):
    """Rule on ``B(x0, R)``: radial Gauss panels times a sphere rule."""
    x0 = np.asarray(x0, dtype=float)
    N = check_dim(len(x0))
    radial = radial_grid(0.0, R, panels=16, order=16) if radial is None else radial
    quad = sphere_quadrature(N, 32) if quad is None else quad
    r = radial.nodes.ravel()
    w = (radial.weights.ravel() * r ** (N - 1))[:, None] * quad.weights[None, :]
    pts = x0 + r[:, None, None] * quad.nodes[None]
    return QuadratureContext("ball", N, pts.reshape(-1, N), w.ravel(),
                             {"x0": x0.tolist(), "R": R, "radial_panels": len(radial),
                              "sphere_nodes": len(quad)})


def _support_check(psi, ctx):
    if isinstance(psi, RadialTestFunction):
        if ctx.kind == "ball":
            c = np.asarray(ctx.meta["x0"])
            if np.linalg.norm(c - np.asarray(psi.x0)) + psi.R > ctx.meta["R"] * (1 + 1e-12):
                raise SupportViolation("test function support leaves the integration ball")
        elif ctx.kind == "cylinder":
            x0 = np.asarray(psi.x0)
            if np.linalg.norm(x0[:-1]) + psi.R > 1 or x0[-1] - psi.R < 0 or x0[-1] + psi.R > 1:
                raise SupportViolation("test function support leaves the cylinder")
    elif isinstance(psi, CylinderTestFunction) and ctx.kind != "cylinder":
        raise SupportViolation("cylinder test functions need a cylinder rule")


def pair(f, psi, ctx):
    """``int f psi dx`` with the composed rule ``ctx``."""
    _support_check(psi, ctx)
    vals = np.asarray(f(ctx.points), dtype=float)
    return ctx.integrate(vals * psi(ctx.points))


# ---------------------------------------------------------------------------
# Tables and extrapolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairingTable:
    indices: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=float)
        val = np.asarray(self.values, dtype=float)
        if idx.shape != val.shape:
            raise ValueError("indices and values must have the same length")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def __len__(self):
        return len(self.indices)

    def rows(self):
        return [{"n": int(n) if float(n).is_integer() else float(n), "value": float(v)}
                for n, v in zip(self.indices, self.values)]


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    rate: float
    residual: float


def build_table(f_of_n, psi, ctx, ladder=DEFAULT_LADDER, meta=None):
    """Pair ``f_of_n(n)`` with ``psi`` for every ``n`` in the ladder."""
    vals = [pair(f_of_n(n), psi, ctx) for n in ladder]
    m = dict(ctx.meta)
    m.update(meta or {})
    return PairingTable(np.asarray(ladder), np.asarray(vals), m)


def _fit(n, v, beta):
    A = np.column_stack([np.ones_like(n), n ** (-beta)])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    res = v - A @ coef
    return coef, float(np.sqrt(np.mean(res**2)))


def limit_extrapolate(table, max_rate=4.0):
    """Fit ``v_n = v_inf + c n^(-beta)`` by least squares on the last half.

    ``beta`` is found by a bounded 1-D search on ``(0, max_rate]``; for each
    trial ``beta`` the pair ``(v_inf, c)`` is linear least squares.  A
    constant table returns rate 0 and residual 0.
    """
    if len(table) < 4:
        raise InsufficientData(f"need at least 4 table entries, got {len(table)}")
    m = len(table)
    k = max(3, (m + 1) // 2)
    n = table.indices[-k:]
    v = table.values[-k:]
    scale = max(np.max(np.abs(v)), 1e-300)
    if np.ptp(v) <= 1e-14 * scale:
        return LimitEstimate(float(v[-1]), 0.0, 0.0)
    obj = lambda b: _fit(n, v, b)[1]  # noqa: E731
    grid = np.linspace(0.05, max_rate, 80)
    b0 = grid[int(np.argmin([obj(b) for b in grid]))]
    lo, hi = max(1e-3, b0 - 0.1), min(max_rate, b0 + 0.1)
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    beta = float(res.x) if res.fun <= obj(b0) else float(b0)
    coef, resid = _fit(n, v, beta)
    return LimitEstimate(float(coef[0]), beta, resid)


# ---------------------------------------------------------------------------
# Concentration on the axis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcentrationResult:
    coefficient: float
    spread: float
    per_member: tuple
    estimates: tuple
    pointwise_null: bool
    detected: bool


def concentration_coefficient(tables, family, pointwise_null=True, spread_tol=0.05):
    """Coefficient ``c`` in ``f_n -> c (delta_{x'=0} x 1)`` from one table per test function.

    Each member gives ``c_psi = lim <f_n, psi> / (chi(0) int_0^1 g)``.  The
    concentration counts as detected when the members agree to
    ``spread_tol`` (relative spread) and the integrand tends to zero away
    from the axis.
    """
    if len(family) < 2 or len(tables) != len(family):
        raise DegenerateFamily("need at least two test functions with one table each")
    ests, cs = [], []
    for tab, psi in zip(tables, family):
        denom = psi.chi0 * psi.g_integral
        if abs(denom) <= 1e-12:
            raise DegenerateFamily(f"test function {psi.label} has chi(0) * int g = 0")
        e = limit_extrapolate(tab)
        ests.append(e)
        cs.append(e.value / denom)
    cs = np.asarray(cs)
    mean = float(cs.mean())
    spread = float(np.ptp(cs))
    rel = spread / abs(mean) if mean != 0 else np.inf
    return ConcentrationResult(mean, spread, tuple(cs.tolist()), tuple(ests), bool(pointwise_null),
                               bool(rel < spread_tol and pointwise_null))


def offaxis_sup(f, N, r_cut, samples=2000, seed=0):
    """Max of ``|f|`` over a seeded cloud in the cylinder restricted to ``|x'| >= r_cut``."""
    pts = Domain.cylinder(N).sample_interior(samples, seed=seed, axis_margin=r_cut)
    return float(np.max(np.abs(f(pts))))


# ---------------------------------------------------------------------------
# Radial flux
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialFluxProfile:
    """``h(r) = int_{dB(x0, r)} f . nu ds`` at the radial Gauss nodes."""

    radii: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def samples(self):
        return WeightedSamples(self.values, self.weights)

    def l1_norm(self):
        return float(self.weights @ np.abs(self.values))

    def modulus(self, delta):
        return equiintegrability_modulus(self.samples(), delta, "L1")


def radial_flux_profile(f, x0, R, grid=None, quad=None, domain=None):
    """Flux of the vector field ``f`` through the spheres ``dB(x0, r)``, ``0 < r < R``."""
    x0 = np.asarray(x0, dtype=float)
    N = check_dim(len(x0))
    grid = radial_grid(0.0, R, panels=16, order=16) if grid is None else grid
    quad = sphere_quadrature(N, 64) if quad is None else quad
    dom = domain if domain is not None else getattr(f, "domain", None)
    if dom is not None:
        far = x0 + grid.r_hi * quad.nodes
        if not np.all(dom.contains(far)):
            raise DomainViolation("ball B(x0, R) is not inside the field's domain")
    normal = lambda pts: np.einsum("ij,ij->i", f(pts), (pts - x0) / np.linalg.norm(pts - x0, axis=1)[:, None])  # noqa: E731
    vals = annulus_radial_values(normal, x0, grid, quad)
    radii = grid.nodes
    h = radii ** (N - 1) * vals
    return RadialFluxProfile(radii.ravel(), h.ravel(), grid.weights.ravel())


# ---------------------------------------------------------------------------
# Weak-null check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakNullReport:
    tables: dict
    limits: dict
    norms: dict
    tol: float

    @property
    def max_limit(self):
        return max(abs(e.value) for e in self.limits.values())

    @property
    def passed(self):
        return self.max_limit <= self.tol


def weak_null_check(fields_of_n, family, ctx, ladder=DEFAULT_LADDER, tol=1e-3, norm_exponent=None):
    """Pair every component of ``fields_of_n(n)`` with every test function.

    ``fields_of_n(n)`` returns a mapping ``name -> callable`` where each
    callable gives an array of shape (m,) or (m, k) on points.  All
    extrapolated limits must lie within ``tol`` of zero.  With
    ``norm_exponent`` the ``L^s`` norms of each field are tabulated as well.
    """
    tables, limits = {}, {}
    norms = {}
    cache = {n: fields_of_n(n) for n in ladder}
    names = list(cache[ladder[0]].keys())
    for name in names:
        evaluated = {n: np.asarray(cache[n][name](ctx.points), dtype=float) for n in ladder}
        k = 1 if evaluated[ladder[0]].ndim == 1 else evaluated[ladder[0]].shape[1]
        for comp in range(k):
            for psi in family:
                w = psi(ctx.points) * ctx.weights
                vals = []
                for n in ladder:
                    v = evaluated[n] if k == 1 else evaluated[n][:, comp]
                    vals.append(float(w @ v))
                key = f"{name}[{comp}]|{getattr(psi, 'label', '')}"
                tab = PairingTable(np.asarray(ladder), np.asarray(vals))
                tables[key] = tab
                limits[key] = limit_extrapolate(tab)
        if norm_exponent is not None:
            s = norm_exponent
            mags = {n: (np.abs(evaluated[n]) if k == 1 else np.linalg.norm(evaluated[n], axis=1)) for n in ladder}
            norms[name] = [float((ctx.weights @ mags[n] ** s) ** (1 / s)) for n in ladder]
    return WeakNullReport(tables, limits, norms, tol)
