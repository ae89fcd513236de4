"""Explicit sequences: the div-curl counterexample pair, its potential, the
concentrating Jacobian map, and exact Beta-integral asymptotics.

All fields live on the cylinder ``B'_1 x (0, 1)`` written as ``(x', x_N)``
with ``r = |x'|``.  The profile ``a_n(r) = (1 - r)^n`` is extended by zero
for ``r >= 1`` so the formulas can also be evaluated on balls that stick out
of the cylinder; the extension is ``C^{n-1}``.  On the axis ``r = 0`` the
direction ``x'/r`` is undefined and evaluators use 0 there (the axis is a
null set for every integral computed in this package).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, lgamma, exp, log

import numpy as np

from .errors import InvalidExponentPair
from .geometry import Domain, ScalarField, VectorField, check_dim


def critical_q(N, p):
    """``q`` with ``1/p + 1/q = 1 + 1/(N-1)``."""
    return 1.0 / (1.0 + 1.0 / (N - 1) - 1.0 / p)


def _split(pts):
    xp = pts[:, :-1]
    r = np.linalg.norm(xp, axis=1)
    safe = np.where(r > 0, r, 1.0)
    direction = np.where((r > 0)[:, None], xp / safe[:, None], 0.0)
    return xp, r, direction, pts[:, -1]


def _axis(pts):
    return np.linalg.norm(pts[:, :-1], axis=1) == 0


def profile(n, r, k=0):
    """``k``-th derivative of ``a_n(r) = (1 - r)^n``, zero for ``r >= 1``."""
    s = np.clip(1.0 - np.asarray(r, dtype=float), 0.0, None)
    if k > n:
        return np.zeros_like(s)
    coef = 1.0
    for j in range(k):
        coef *= -(n - j)
    return coef * s ** (n - k)


@dataclass(frozen=True)
class CounterexamplePair:
    """``sigma_n = n^{(N-1)/p} a_n e_N`` and ``eta_n = grad(potential)``.

    ``eta_n`` carries the factor ``n^{(N-1)/q - 1}`` which makes it bounded in
    ``L^q``; for the critical ``q`` this is ``n^{(N-1)/p'}``.
    """

    N: int
    p: float
    q: float
    n: int
    sigma: VectorField
    eta: VectorField
    potential: ScalarField
    product: ScalarField
    sigma_scale: float
    eta_scale: float

    @property
    def critical(self):
        return bool(np.isclose(1 / self.p + 1 / self.q, 1 + 1 / (self.N - 1)))


def counterexample_fields(N, p, n, q=None):
    """Build the counterexample pair for dimension ``N``, exponent ``p``, index ``n``.

    ``q`` defaults to the critical exponent.  A smaller ``1/q`` places the
    pair in the strict regime ``1/p + 1/q < 1 + 1/(N-1)``.
    """
    N = check_dim(N)
    if not 1 <= p <= N - 1:
        raise InvalidExponentPair(f"p must lie in [1, {N - 1}] for N = {N}, got {p}")
    if n < 1:
        raise InvalidExponentPair(f"sequence index must be >= 1, got {n}")
    qc = critical_q(N, p)
    if q is None:
        q = qc
    if q < 1 or 1 / p + 1 / q > 1 + 1 / (N - 1) + 1e-12:
        raise InvalidExponentPair(f"(p, q) = ({p}, {q}) violates 1/p + 1/q <= 1 + 1/(N-1)")
    s_sig = float(n) ** ((N - 1) / p)
    s_eta = float(n) ** ((N - 1) / q - 1)
    dom = Domain.cylinder(N)
    eN = np.eye(N)[-1]

    def sigma(pts):
        _, r, _, _ = _split(pts)
        return s_sig * profile(n, r)[:, None] * eN

    def sigma_jac(pts):
        _, r, d, _ = _split(pts)
        J = np.zeros((len(pts), N, N))
        J[:, -1, :-1] = s_sig * profile(n, r, 1)[:, None] * d
        return J

    def phi(pts):
        _, r, _, xN = _split(pts)
        return s_eta * profile(n, r) * xN

    def eta(pts):
        _, r, d, xN = _split(pts)
        out = np.empty((len(pts), N))
        out[:, :-1] = s_eta * (profile(n, r, 1) * xN)[:, None] * d
        out[:, -1] = s_eta * profile(n, r)
        return out

    def eta_jac(pts):
        _, r, d, xN = _split(pts)
        a1, a2 = profile(n, r, 1), profile(n, r, 2)
        safe = np.where(r > 0, r, np.inf)
        m = N - 1
        dd = d[:, :, None] * d[:, None, :]
        H = np.zeros((len(pts), N, N))
        H[:, :m, :m] = s_eta * xN[:, None, None] * (
            a2[:, None, None] * dd + (a1 / safe)[:, None, None] * (np.eye(m) - dd)
        )
        H[:, :m, -1] = s_eta * a1[:, None] * d
        H[:, -1, :m] = s_eta * a1[:, None] * d
        return H

    def product(pts):
        _, r, _, _ = _split(pts)
        return s_sig * s_eta * profile(n, r) ** 2

    sig_f = VectorField(N, sigma, sigma_jac, domain=dom, name=f"sigma_{n}")
    eta_f = VectorField(N, eta, eta_jac, domain=dom, singular=_axis, name=f"eta_{n}")
    pot = ScalarField(N, phi, eta, domain=dom, name=f"potential_{n}")
    prod = ScalarField(N, product, domain=dom, name=f"sigma_{n}.eta_{n}")
    return CounterexamplePair(N, float(p), float(q), int(n), sig_f, eta_f, pot, prod, s_sig, s_eta)


@dataclass(frozen=True)
class StructureReport:
    max_div: float
    max_curl: float
    tol: float
    count: int
    seed: int
    step: float

    @property
    def passed(self):
        return self.max_div <= self.tol and self.max_curl <= self.tol


def structure_cloud(N, count=1000, seed=0, step=None, axis_margin=1e-2):
    dom = Domain.cylinder(N)
    step = 1e-5 * dom.diameter if step is None else step
    return dom.sample_interior(count, seed=seed, margin=2 * step, axis_margin=axis_margin), step


def verify_structure(pair, tol=1e-6, count=1000, seed=0, step=None, sigma=None, eta=None):
    """Finite-difference ``div sigma`` and ``curl eta`` on a seeded interior cloud.

    ``sigma``/``eta`` override the pair's fields (used for negative controls).
    """
    sigma = pair.sigma if sigma is None else sigma
    eta = pair.eta if eta is None else eta
    pts, h = structure_cloud(pair.N, count, seed, step)
    div = np.abs(sigma.divergence_fd(pts, h))
    curl = np.abs(eta.curl_fd(pts, h))
    return StructureReport(float(div.max()), float(curl.max()), tol, count, seed, h)


def add_fields(a, b):
    """Pointwise sum of two vector fields (Jacobians summed when both exist)."""
    jac = None
    if a.has_gradient and b.has_gradient:
        jac = lambda p: a.jacobian(p) + b.jacobian(p)  # noqa: E731
    return VectorField(a.dim, lambda p: a(p) + b(p), jac, domain=a.domain, name=f"{a.name}+{b.name}")


# ---------------------------------------------------------------------------
# Beta-integral asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaAsymptotic:
    """``n^{k+1} int_0^1 r^k (1-r)^{n alpha} dr`` and its limit ``k!/alpha^{k+1}``."""

    k: int
    alpha: float
    n: float

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise ValueError("k must be a non-negative integer")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.n >= 1:
            raise ValueError("n must be >= 1")

    @property
    def limit(self):
        return factorial(self.k) / self.alpha ** (self.k + 1)


def beta_asymptotic_value(b):
    """Exact ``n^{k+1} k! / prod_{j=1}^{k+1} (n alpha + j)``, i.e. ``n^{k+1} B(k+1, n alpha + 1)``."""
    x = b.n * b.alpha
    if b.k < 20:
        prod = 1.0
        for j in range(1, b.k + 2):
            prod *= b.n / (x + j)
        return factorial(b.k) * prod
    return exp((b.k + 1) * log(b.n) + lgamma(b.k + 1) + lgamma(x + 1) - lgamma(x + b.k + 2))


# ---------------------------------------------------------------------------
# Concentrating Jacobian map
# ---------------------------------------------------------------------------


def jacobian_example_fields(N, n):
    """``u_n(x) = (1 - r)^n (n x', x_N)`` with its analytic Jacobian."""
    N = check_dim(N)
    m = N - 1
    dom = Domain.cylinder(N)

    def u(pts):
        xp, r, _, xN = _split(pts)
        a = profile(n, r)
        return np.column_stack([n * a[:, None] * xp, a * xN])

    def jac(pts):
        xp, r, d, xN = _split(pts)
        a, a1 = profile(n, r), profile(n, r, 1)
        J = np.zeros((len(pts), N, N))
        # d/dx' of n a(r) x' = n a I + n a'(r) x' (x'/r)^T
        J[:, :m, :m] = n * (a[:, None, None] * np.eye(m) + (a1 * r)[:, None, None] * d[:, :, None] * d[:, None, :])
        J[:, -1, :m] = (a1 * xN)[:, None] * d
        J[:, -1, -1] = a
        return J

    return VectorField(N, u, jac, domain=dom, singular=_axis, name=f"u_{n}")


def jacobian_example_det(N, n, r):
    """Determinant of ``D u_n`` as a function of ``r``.

    ``n^{N-1}(1-r)^{nN} - n^N r (1-r)^{nN-1}``, derived from the block
    triangular Jacobian.
    """
    r = np.asarray(r, dtype=float)
    s = np.clip(1 - r, 0, None)
    return n ** (N - 1) * s ** (n * N) - n**N * r * s ** (n * N - 1)


def jacobian_example_det_printed(N, n, r):
    """The printed variant with a second factor ``r`` on the last term (does not match)."""
    r = np.asarray(r, dtype=float)
    s = np.clip(1 - r, 0, None)
    return n ** (N - 1) * s ** (n * N) - n**N * r * s ** (n * N - 1) * r


def radial_sup_closed_form(n):
    """``max_r n r (1-r)^n = (n/(n+1))^{n+1}``, attained at ``r = 1/(n+1)``."""
    return (n / (n + 1.0)) ** (n + 1)


def jacobian_example_sup_norm(n, samples=None):
    """Sup of ``|u_n'| = n r (1 - r)^n`` over ``r`` by bounded 1-D maximisation.

    The last component ``(1-r)^n x_N`` has sup 1 (approached on the axis at
    the top face); the tabulated quantity is the sup of the first ``N-1``
    components, which tends to ``1/e``.
    """
    from scipy.optimize import minimize_scalar

    f = lambda r: -n * r * (1 - r) ** n  # noqa: E731
    res = minimize_scalar(f, bounds=(0.0, min(1.0, 10.0 / (n + 1))), method="bounded",
                          options={"xatol": 1e-14})
    val = -res.fun
    if samples:
        rr = np.linspace(0, 1, samples)
        val = max(val, float(np.max(n * rr * (1 - rr) ** n)))
    return float(val), float(res.x)
