"""Annulus selection: good radii, sphere traces and cap-maximal profiles.

Every radial quantity is resolved on the panels of a ``RadialGrid`` and
evaluated at panel midpoints, so selected sets are finite unions of closed
intervals and all measure bounds are exact sums over panels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation, ExponentOutOfRange, InconsistentGrid, InvalidCapRadius, InvalidConfig
from .geometry import (
    ScalarField,
    VectorField,
    annulus_integral,
    radial_grid,
)
from .lorentz import StepFunction, WeightedSamples, lorentz_norm

NORM_KINDS = ("Lq", "Lorentz")
TRACE_TARGETS = ("Ls", "C0", "X_1_N_minus_1")


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint closed intervals, sorted."""

    intervals: tuple = ()

    @classmethod
    def from_panels(cls, panels, mask):
        """Merge the panels ``[a_i, b_i]`` selected by ``mask`` into maximal intervals."""
        out = []
        for (a, b), keep in zip(np.asarray(panels), np.asarray(mask, dtype=bool)):
            if not keep:
                continue
            if out and out[-1][1] == a:
                out[-1] = (out[-1][0], float(b))
            else:
                out.append((float(a), float(b)))
        return cls(tuple(out))

    @property
    def measure(self):
        return float(sum(b - a for a, b in self.intervals))

    @property
    def empty(self):
        return len(self.intervals) == 0

    def contains(self, r):
        r = np.asarray(r, dtype=float)
        hit = np.zeros(r.shape, dtype=bool)
        for a, b in self.intervals:
            hit |= (r >= a) & (r <= b)
        return hit

    def issubset(self, other):
        return all(any(c <= a and b <= d for c, d in other.intervals) for a, b in self.intervals)


@dataclass(frozen=True)
class SelectionConfig:
    """Threshold ``lam`` and base set ``U`` of radii.

    ``q`` is the integrability exponent of the gradients; ``norm_kind`` is
    ``"Lq"`` (sphere integral of ``|Du_n|^q + |Du|^q``) or ``"Lorentz"``
    (sphere ``L^{N-1,1}`` norm of ``|Du_n| + |Du|``).
    """

    q: float
    lam: float
    U: tuple
    norm_kind: str = "Lq"

    def __post_init__(self):
        if not self.q >= 1:
            raise InvalidConfig("q", f"must be >= 1, got {self.q}")
        if not self.lam > 0:
            raise InvalidConfig("lam", f"must be positive, got {self.lam}")
        if self.norm_kind not in NORM_KINDS:
            raise InvalidConfig("norm_kind", f"must be one of {NORM_KINDS}")
        U = tuple((float(a), float(b)) for a, b in self.U)
        if not U or any(not a < b for a, b in U):
            raise InvalidConfig("U", "must be a non-empty union of intervals [a, b] with a < b")
        object.__setattr__(self, "U", U)

    @property
    def base(self):
        return IntervalSet(self.U)


@dataclass(frozen=True)
class SelectionResult:
    """Good radii ``U_n`` together with the certified measure bound."""

    U_n: IntervalSet
    measure_removed: float
    bound_rhs: float
    profile: StepFunction
    lam: float
    radii: np.ndarray
    chain: dict = field(default_factory=dict)

    @property
    def certified(self):
        return self.measure_removed <= self.bound_rhs


@dataclass(frozen=True)
class CapMaximalProfile:
    """Per-radius maximum over candidate centres of the cap mass of ``Lambda``.

    Candidate centres are the sphere quadrature nodes, so ``T_values`` is a
    lower bound for the supremum over the whole sphere.
    """

    h_k: float
    radii: np.ndarray
    breaks: np.ndarray
    T_values: np.ndarray
    argmax: np.ndarray
    norm_kind: str
    dim: int = 3

    def step(self):
        return StepFunction(self.breaks, self.T_values)


# ---------------------------------------------------------------------------
# Gradients on spheres
# ---------------------------------------------------------------------------


def _gradient(u, pts):
    if isinstance(u, ScalarField):
        return u.gradient(pts, allow_fd=True)[:, None, :]
    if isinstance(u, VectorField):
        return u.gradient_matrix(pts, allow_fd=True)
    raise TypeError("expected a ScalarField or VectorField")


def _values(u, pts):
    v = np.asarray(u(pts), dtype=float)
    return v[:, None] if v.ndim == 1 else v


def _check_domain(u, pts):
    dom = getattr(u, "domain", None)
    if dom is not None and not np.all(dom.contains(pts)):
        raise DomainViolation(f"sphere points leave the {dom.kind} domain of {u.name or 'field'}")


def _sphere_points(x0, r, quad):
    return np.asarray(x0, dtype=float) + r * quad.nodes


def gradient_density(u_n, u, q, pts):
    """``|Du_n|^q + |Du|^q`` (Frobenius norms) at ``pts``."""
    a = np.linalg.norm(_gradient(u_n, pts).reshape(len(pts), -1), axis=1)
    b = np.linalg.norm(_gradient(u, pts).reshape(len(pts), -1), axis=1)
    return a**q + b**q


def gradient_sphere_profile(u_n, u, cfg, x0, grid, quad):
    """Step profile of the sphere gradient norms, one value per radial panel.

    For ``norm_kind = "Lq"`` the value is ``int_S |Du_n(ry)|^q + |Du(ry)|^q ds``;
    for ``"Lorentz"`` it is the ``L^{N-1,1}(S)`` norm of ``|Du_n| + |Du|``.
    Both use the panel midpoint radius.
    """
    N = quad.dim
    vals = np.empty(len(grid))
    for i, r in enumerate(grid.midpoints):
        pts = _sphere_points(x0, r, quad)
        _check_domain(u_n, pts)
        _check_domain(u, pts)
        if cfg.norm_kind == "Lq":
            vals[i] = quad.weights @ gradient_density(u_n, u, cfg.q, pts)
        else:
            dens = gradient_density(u_n, u, 1.0, pts)
            vals[i] = lorentz_norm(WeightedSamples(dens, quad.weights), N - 1)
    return StepFunction(grid.breaks, vals)


# ---------------------------------------------------------------------------
# Good radii
# ---------------------------------------------------------------------------


def _panels_in(grid_breaks, U):
    panels = np.column_stack([grid_breaks[:-1], grid_breaks[1:]])
    inside = np.zeros(len(panels), dtype=bool)
    for a, b in U.intervals:
        inside |= (panels[:, 0] >= a - 1e-14) & (panels[:, 1] <= b + 1e-14)
    covered = panels[inside, 1] - panels[inside, 0]
    if abs(covered.sum() - U.measure) > 1e-12 * max(1.0, U.measure):
        raise InconsistentGrid("profile panels do not tile the base set U")
    return panels, inside


def select_good_radii(profile, cfg, density=None, x0=None, quad=None, R0=None, grid=None):
    """``U_n = {r in U : profile(r) <= lam}`` with a certified measure bound.

    The right side ``int_{|x - x0| in U} Lambda_n dx / (lam R0^{N-1})`` is
    computed by Gauss quadrature of ``density`` (``x -> Lambda_n(x)``) when
    given; otherwise from the profile itself,
    ``int_U r^{N-1} profile(r) dr / (lam R0^{N-1})`` with ``N`` taken from
    ``quad`` (default 3).  The inequality chain
    ``lam |U \\ U_n| <= int_{U \\ U_n} profile <= R0^{1-N} int r^{N-1} profile``
    is recorded in ``chain``.
    """
    U = cfg.base
    panels, inside = _panels_in(profile.breakpoints, U)
    vals = profile.levels
    good = inside & (vals <= cfg.lam)
    bad = inside & ~good
    U_n = IntervalSet.from_panels(panels, good)
    lengths = panels[:, 1] - panels[:, 0]
    removed = float(lengths[bad].sum())
    N = quad.dim if quad is not None else 3
    R0 = U.intervals[0][0] if R0 is None else R0
    mids = panels[:, 0] + 0.5 * lengths
    profile_rhs = float(np.sum((mids ** (N - 1) * vals * lengths)[inside])) / (cfg.lam * R0 ** (N - 1))
    if density is not None:
        if quad is None or x0 is None:
            raise ValueError("density bound needs x0 and quad")
        total = 0.0
        for a, b in U.intervals:
            g = grid
            if g is None or not (np.isclose(g.r_lo, a) and np.isclose(g.r_hi, b)):
                g = radial_grid(a, b, panels=max(8, int(np.ceil(32 * (b - a)))), order=16)
            total += annulus_integral(density, x0, a, b, g, quad)
        rhs = total / (cfg.lam * R0 ** (N - 1))
    else:
        rhs = profile_rhs
    chain = {
        "lam_times_removed": cfg.lam * removed,
        "profile_over_removed": float(np.sum((vals * lengths)[bad])),
        "weighted_profile_over_U": profile_rhs * cfg.lam,
        "rhs_times_lam": rhs * cfg.lam,
    }
    if removed > rhs * (1 + 1e-12) + 1e-15:
        raise AssertionError(f"measure bound violated: removed {removed} > bound {rhs}")
    return SelectionResult(U_n, removed, rhs, profile, cfg.lam, mids[good], chain)


# ---------------------------------------------------------------------------
# Sphere traces
# ---------------------------------------------------------------------------


def critical_trace_exponent(q, N):
    """``q*_{N-1} = (1/q - 1/(N-1))^{-1}`` for ``q < N - 1``; infinity otherwise."""
    if q < N - 1:
        return 1.0 / (1.0 / q - 1.0 / (N - 1))
    return np.inf


def _check_target(target, s, cfg, N):
    if target not in TRACE_TARGETS:
        raise InvalidConfig("target_norm", f"must be one of {TRACE_TARGETS}")
    lorentz = cfg.norm_kind == "Lorentz"
    if target == "Ls":
        if s is None or not s >= 1:
            raise ExponentOutOfRange(f"trace exponent s must be >= 1, got {s}")
        qs = critical_trace_exponent(cfg.q, N)
        if not lorentz and not s < qs:
            raise ExponentOutOfRange(f"s = {s} must be below q*_(N-1) = {qs} for q = {cfg.q}, N = {N}")
    elif target == "C0":
        if not (cfg.q > N - 1 or lorentz):
            raise ExponentOutOfRange(f"C0 traces need q > {N - 1} or Lorentz control, got q = {cfg.q}")


def trace_norm(diff, tang, weights, target, s, N):
    """Norm of one sphere trace given values ``diff`` (m, M) and tangential gradients (m, M, N)."""
    mag = np.linalg.norm(diff, axis=1)
    if target == "Ls":
        return float((weights @ mag**s) ** (1.0 / s))
    if target == "C0":
        return float(mag.max())
    gmag = np.linalg.norm(tang.reshape(len(tang), -1), axis=1)
    base = float((weights @ mag ** (N - 1)) ** (1.0 / (N - 1)))
    return base + lorentz_norm(WeightedSamples(gmag, weights), N - 1)


def trace_convergence_sup(u_n, u, result, target_norm, x0, quad, s=None, cfg=None):
    """``sup_{r in U_n} ||(v_n - v)(r, .)||_X`` over the selected panel midpoints.

    ``v(r, y) = u(x0 + r y)``.  ``X`` is ``L^s`` on the sphere, ``C^0`` (max
    over nodes) or ``W^{1,N-1}`` with Lorentz-norm gradient; tangential
    gradients are ``(I - y y^T) Du(x0 + r y) r``.  An empty ``U_n`` gives 0.
    """
    N = quad.dim
    if cfg is not None:
        _check_target(target_norm, s, cfg, N)
    elif target_norm == "Ls" and (s is None or s < 1):
        raise ExponentOutOfRange(f"trace exponent s must be >= 1, got {s}")
    if len(result.radii) == 0:
        return 0.0
    y = quad.nodes
    P = np.eye(N)[None] - y[:, :, None] * y[:, None, :]
    best = 0.0
    for r in result.radii:
        pts = _sphere_points(x0, r, quad)
        diff = _values(u_n, pts) - _values(u, pts)
        tang = None
        if target_norm == "X_1_N_minus_1":
            D = _gradient(u_n, pts) - _gradient(u, pts)
            tang = r * np.einsum("mij,mkj->mki", P, D)
        best = max(best, trace_norm(diff, tang, quad.weights, target_norm, s, N))
    return best


# ---------------------------------------------------------------------------
# Caps
# ---------------------------------------------------------------------------


def cap_membership(quad, h):
    """Boolean matrix: node ``i`` lies in the open cap ``B(y_j, h)``."""
    y = quad.nodes
    # |y_i - y_j|^2 = 2 - 2 y_i . y_j on the unit sphere
    return 2.0 - 2.0 * (y @ y.T) < h * h


def cap_maximal_profile(density, h_k, x0, grid, quad, norm_kind="Lq"):
    """``T(r) = max_z int_{B(z, h_k) cap S} Lambda(x0 + r y) ds(y)`` per radial panel.

    ``z`` ranges over the quadrature nodes.  With ``norm_kind="Lorentz"`` the
    cap mass is replaced by the ``L^{N-1,1}`` norm of ``Lambda`` on the cap.
    """
    if not 0 < h_k <= 2:
        raise InvalidCapRadius(f"cap radius must lie in (0, 2], got {h_k}")
    if norm_kind not in NORM_KINDS:
        raise InvalidConfig("norm_kind", f"must be one of {NORM_KINDS}")
    N = quad.dim
    M = cap_membership(quad, h_k)
    T = np.empty(len(grid))
    arg = np.empty(len(grid), dtype=int)
    for i, r in enumerate(grid.midpoints):
        lam = np.abs(np.asarray(density(_sphere_points(x0, r, quad)), dtype=float))
        if norm_kind == "Lq":
            masses = M.T.astype(float) @ (quad.weights * lam)
        else:
            masses = np.array([
                lorentz_norm(WeightedSamples(lam[M[:, j]], quad.weights[M[:, j]]), N - 1) if M[:, j].any() else 0.0
                for j in range(len(quad))
            ])
        arg[i] = int(np.argmax(masses))
        T[i] = float(masses[arg[i]])
    return CapMaximalProfile(float(h_k), grid.midpoints.copy(), grid.breaks.copy(), T, arg, norm_kind, N)


@dataclass(frozen=True)
class ExceptionalSet:
    intervals: IntervalSet
    measure: float
    bound: float
    bound_lorentz: float
    threshold: float


def exceptional_set(T, eps, k, R0, R):
    """Super-level set ``{r : T(r) > eps / 2^k}`` with its two reference bounds.

    ``bound = eps / (2^k R0^{N-1})`` applies to cap masses and
    ``bound_lorentz = (R - R0)^{(N-2)/(N-1)} / R0 * eps / 2^k`` to Lorentz
    cap norms.  Neither is asserted here: they hold only when ``h_k`` was
    chosen from an equi-integrability modulus upstream.
    """
    if not eps > 0:
        raise InvalidConfig("eps", f"must be positive, got {eps}")
    N = T.dim
    thr = eps / 2.0**k
    panels = np.column_stack([T.breaks[:-1], T.breaks[1:]])
    lo, hi = max(R0, T.breaks[0]), min(R, T.breaks[-1])
    inside = (panels[:, 0] >= lo - 1e-14) & (panels[:, 1] <= hi + 1e-14)
    E = IntervalSet.from_panels(panels, inside & (T.T_values > thr))
    bound = thr / R0 ** (N - 1)
    bound_lorentz = (R - R0) ** ((N - 2) / (N - 1)) / R0 * thr
    return ExceptionalSet(E, E.measure, bound, bound_lorentz, thr)
