"""One-dimensional homogenization bench with exact two-point solutions.

For ``-(a u')' = f`` on ``(0, 1)`` with ``u(0) = u(1) = 0`` the flux is
``a u' = c - F`` with ``F(x) = int_0^x f``, and ``c`` is fixed by
``int_0^1 u' = 0``.  Coefficients are piecewise constant, so every integral
is a per-interval Gauss rule that is exact for polynomial loads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonCoercive
from .pairing import PairingTable, limit_extrapolate

GAUSS_ORDER = 8


@dataclass(frozen=True)
class LaminateCoefficient:
    """``n`` periodic cells on ``(0, 1)``, each split into phases ``(fraction, value)``.

    A phase value may be a number or a callable of ``n``; this is how
    families such as the stiff inclusion (value ``n`` on fraction ``1/n``)
    are written.  ``alpha`` is the coercivity constant to enforce.
    """

    n: int
    phases: tuple
    alpha: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one period")
        ph = tuple((float(_resolve(t, self.n)), float(_resolve(v, self.n))) for t, v in self.phases)
        if any(t <= 0 for t, _ in ph):
            raise ValueError("phase fractions must be positive")
        if not np.isclose(sum(t for t, _ in ph), 1.0, rtol=0, atol=1e-12):
            raise ValueError("phase fractions must sum to 1")
        object.__setattr__(self, "phases", ph)
        floor = max(self.alpha, 0.0)
        low = min(v for _, v in ph)
        if not low > 0 or low < floor:
            raise NonCoercive(f"coefficient value {low} below coercivity constant {max(floor, 0.0)}")

    @classmethod
    def constant(cls, value, n=1):
        return cls(n, ((1.0, value),), label=f"const {value}")

    @property
    def values(self):
        return np.array([v for _, v in self.phases])

    @property
    def fractions(self):
        return np.array([t for t, _ in self.phases])

    @property
    def breakpoints(self):
        cell = np.r_[0.0, np.cumsum(self.fractions)[:-1]]
        starts = (np.arange(self.n)[:, None] + cell[None, :]).ravel() / self.n
        return np.r_[starts, 1.0]

    @property
    def levels(self):
        return np.tile(self.values, self.n)

    @property
    def sup(self):
        return float(self.values.max())

    @property
    def min(self):
        return float(self.values.min())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1, 0, len(self.levels) - 1)
        return self.levels[idx]

    def lp_norm(self, rho):
        """``||a||_{L^rho(0,1)}`` from the phase fractions (independent of ``n``)."""
        return float((self.fractions @ self.values**rho) ** (1.0 / rho))


def _resolve(v, n):
    return v(n) if callable(v) else v


def two_phase_laminate(n, values=(1.0, 4.0), fractions=(0.5, 0.5)):
    return LaminateCoefficient(n, tuple(zip(fractions, values)), alpha=min(values), label=f"laminate {values}")


def stiff_inclusion(n):
    """Value 1 on a fraction ``1 - 1/n`` of each cell and ``n`` on the rest."""
    if n < 2:
        return LaminateCoefficient.constant(1.0, n)
    return LaminateCoefficient(n, ((1 - 1 / n, 1.0), (1 / n, float(n))), alpha=1.0, label="stiff inclusion")


def effective_coefficient(a):
    """Harmonic mean over one cell, ``(sum theta_i / a_i)^{-1}``."""
    if not a.min > 0:
        raise NonCoercive("harmonic mean needs a positive coefficient")
    return float(1.0 / (a.fractions @ (1.0 / a.values)))


def stiff_inclusion_effective(n):
    """Closed form ``(1 - 1/n + 1/n^2)^{-1}``."""
    return 1.0 / (1 - 1 / n + 1 / n**2)


# ---------------------------------------------------------------------------
# Exact solver
# ---------------------------------------------------------------------------


def _unit_load(x):
    return np.ones_like(x)


@dataclass(frozen=True)
class TwoPointSolution:
    """Exact solution data on the coefficient breakpoints.

    ``F_b`` and ``u_b`` hold ``F`` and ``u`` at the breakpoints; values
    inside an interval are completed by one Gauss rule.
    """

    a: LaminateCoefficient
    f: Callable
    c: float
    breaks: np.ndarray
    levels: np.ndarray
    F_b: np.ndarray
    u_b: np.ndarray
    energy: float
    load_work: float
    grad_l2_sq: float
    bc_residual: float

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.levels) - 1)
        return x, i

    def F(self, x):
        x, i = self._locate(x)
        b = self.breaks[i]
        return self.F_b[i] + _partial(self.f, b, x, lambda s: np.ones_like(s))

    def flux(self, x):
        return self.c - self.F(x)

    def du(self, x):
        x, i = self._locate(x)
        return self.flux(x) / self.levels[i]

    def u(self, x):
        x, i = self._locate(x)
        b = self.breaks[i]
        # int_b^x (c - F) = c (x - b) - (x - b) F(b) - int_b^x (x - s) f(s) ds
        G = (x - b) * self.F_b[i] + _partial(self.f, b, x, lambda s, x=x: x[..., None] - s)
        return self.u_b[i] + (self.c * (x - b) - G) / self.levels[i]

    @property
    def energy_identity_error(self):
        return abs(self.energy - self.load_work)

    @property
    def coercivity_margin(self):
        """``int a |u'|^2 - alpha int |u'|^2`` (non-negative when coercive)."""
        return self.energy - self.a.alpha * self.grad_l2_sq


def _gauss(order=GAUSS_ORDER):
    z, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (z + 1), 0.5 * w


def _partial(f, b, x, kernel, order=GAUSS_ORDER):
    """``int_b^x kernel(s) f(s) ds`` elementwise, one Gauss rule per pair."""
    t, w = _gauss(order)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    L = x - b
    s = b[..., None] + L[..., None] * t
    return L * np.sum(w * kernel(s) * f(s), axis=-1)


def solve_two_point(a, f=None, order=GAUSS_ORDER):
    """Exact solution of ``-(a u')' = f``, ``u(0) = u(1) = 0``.

    Per interval ``[b_i, b_{i+1}]`` with coefficient ``a_i``:
    ``F`` advances by ``int f``, ``u`` by ``(c L - int_b^{b+L} F) / a_i`` and
    the constant ``c = (int F/a) / (int 1/a)``.  Gauss rules of ``order``
    points are exact for polynomial loads of degree up to ``order - 3``.
    """
    if not a.min > 0 or a.min < a.alpha:
        raise NonCoercive(f"coefficient minimum {a.min} below coercivity constant {a.alpha}")
    f = _unit_load if f is None else f
    br = a.breakpoints
    lv = a.levels
    lo, hi = br[:-1], br[1:]
    L = hi - lo
    dF = _partial(f, lo, hi, lambda s: np.ones_like(s), order)
    F_b = np.r_[0.0, np.cumsum(dF)]
    # int_lo^hi F = L F(lo) + int_lo^hi (hi - s) f(s) ds
    intF = L * F_b[:-1] + _partial(f, lo, hi, lambda s: hi[:, None] - s, order)
    inv = np.sum(L / lv)
    c = float(np.sum(intF / lv) / inv)
    du_int = (c * L - intF) / lv
    u_b = np.r_[0.0, np.cumsum(du_int)]
    # energy int (c - F)^2 / a and load work int f u, both by Gauss on each interval
    t, w = _gauss(order)
    s = lo[:, None] + L[:, None] * t
    Fs = F_b[:-1, None] + _partial(f, lo[:, None] * np.ones_like(s), s, lambda z: np.ones_like(z), order)
    flux = c - Fs
    energy = float(np.sum(L[:, None] * w * flux**2 / lv[:, None]))
    grad_sq = float(np.sum(L[:, None] * w * (flux / lv[:, None]) ** 2))
    G = (s - lo[:, None]) * F_b[:-1, None] + _partial(f, lo[:, None] * np.ones_like(s), s,
                                                      lambda z, s=s: s[..., None] - z, order)
    us = u_b[:-1, None] + (c * (s - lo[:, None]) - G) / lv[:, None]
    work = float(np.sum(L[:, None] * w * f(s) * us))
    return TwoPointSolution(a, f, c, br, lv, F_b, u_b, energy, work, grad_sq, float(abs(u_b[-1])))


def per_cell_assembly(a):
    """Closed-form solution for ``f = 1``: returns ``(c, u at breakpoints)``.

    With ``F(x) = x`` every interval integral is explicit, giving an
    independent check of ``solve_two_point``.
    """
    br, lv = a.breakpoints, a.levels
    lo, hi = br[:-1], br[1:]
    intF = 0.5 * (hi**2 - lo**2)
    c = np.sum(intF / lv) / np.sum((hi - lo) / lv)
    u_b = np.r_[0.0, np.cumsum((c * (hi - lo) - intF) / lv)]
    return float(c), u_b


# ---------------------------------------------------------------------------
# Convergence checks
# ---------------------------------------------------------------------------


def default_test_functions():
    """``x``, ``x^2 (1 - x)`` and ``exp(-x)``.

    None is symmetric about ``1/2``, so the pairings with the antisymmetric
    flux ``1/2 - x`` of the unit load do not vanish.
    """
    return [
        ("x", lambda x: x),
        ("x^2(1-x)", lambda x: x**2 * (1 - x)),
        ("exp(-x)", lambda x: np.exp(-x)),
    ]


def _pair_piecewise(sol, g, psi, order=GAUSS_ORDER):
    """``int g(x) psi(x) dx`` over the solution's intervals, ``g`` evaluated by the solution."""
    t, w = _gauss(order)
    lo, hi = sol.breaks[:-1], sol.breaks[1:]
    s = lo[:, None] + (hi - lo)[:, None] * t
    return float(np.sum((hi - lo)[:, None] * w * g(s) * psi(s)))


@dataclass(frozen=True)
class HLimitReport:
    """Pairing tables along a ladder against the homogenized solution."""

    a_star: float
    ladder: tuple
    flux: dict
    energy: dict
    flux_reference: dict
    energy_reference: dict
    l2_error: tuple
    grad_l2_error: tuple
    total_energy: tuple
    total_energy_reference: float
    energy_identity: tuple
    coercivity: tuple
    sup_coefficient: tuple
    alpha: float

    def relative_errors(self, which="flux", index=-1):
        tabs = self.flux if which == "flux" else self.energy
        refs = self.flux_reference if which == "flux" else self.energy_reference
        return {k: abs(v[index] - refs[k]) / abs(refs[k]) for k, v in tabs.items()}

    def max_relative_error(self, which="flux", index=-1):
        return max(self.relative_errors(which, index).values())

    def limits(self, which="flux"):
        tabs = self.flux if which == "flux" else self.energy
        return {k: limit_extrapolate(PairingTable(np.asarray(self.ladder), np.asarray(v))) for k, v in tabs.items()}

    @property
    def max_energy_identity_error(self):
        return max(self.energy_identity)

    @property
    def min_coercivity_margin(self):
        return min(self.coercivity)


def flux_convergence_test(family, ladder, a_star, f=None, tests=None):
    """Solve along ``ladder`` and pair fluxes and energy densities with test functions.

    ``family(n)`` returns a ``LaminateCoefficient``; ``a_star`` is the limit
    effective coefficient.  The reference solution is the exact solution with
    the constant coefficient ``a_star``.
    """
    f = _unit_load if f is None else f
    tests = default_test_functions() if tests is None else tests
    ref = solve_two_point(LaminateCoefficient.constant(a_star), f)
    flux_ref = {nm: _pair_piecewise(ref, ref.flux, psi) for nm, psi in tests}
    en_ref = {nm: _pair_piecewise(ref, lambda x: ref.flux(x) * ref.du(x), psi) for nm, psi in tests}
    flux = {nm: [] for nm, _ in tests}
    energy = {nm: [] for nm, _ in tests}
    l2, gl2, tot, ident, coer, sups = [], [], [], [], [], []
    t, w = _gauss()
    alpha = np.inf
    for n in ladder:
        a = family(n)
        alpha = min(alpha, a.alpha)
        sol = solve_two_point(a, f)
        for nm, psi in tests:
            flux[nm].append(_pair_piecewise(sol, sol.flux, psi))
            energy[nm].append(_pair_piecewise(sol, lambda x: sol.flux(x) * sol.du(x), psi))
        lo, hi = sol.breaks[:-1], sol.breaks[1:]
        s = (lo[:, None] + (hi - lo)[:, None] * t).ravel()
        ws = ((hi - lo)[:, None] * w).ravel()
        l2.append(float(np.sqrt(ws @ (sol.u(s) - ref.u(s)) ** 2)))
        gl2.append(float(np.sqrt(ws @ (sol.du(s) - ref.du(s)) ** 2)))
        tot.append(sol.energy)
        ident.append(sol.energy_identity_error / max(abs(sol.energy), 1e-300))
        coer.append(sol.coercivity_margin)
        sups.append(a.sup)
    return HLimitReport(
        a_star, tuple(ladder), flux, energy, flux_ref, en_ref, tuple(l2), tuple(gl2), tuple(tot),
        ref.energy, tuple(ident), tuple(coer), tuple(sups), float(alpha),
    )


@dataclass(frozen=True)
class BoundTrack:
    ladder: tuple
    norms: tuple
    rho: float
    log_slope: float
    bounded: bool


def coefficient_bound_track(family, ladder, rho, slope_tol=0.05):
    """``||a_n||_{L^rho}`` along the ladder with a bounded/unbounded verdict.

    The verdict compares the log-log slope over the last half of the ladder
    with ``slope_tol``.
    """
    if not rho >= 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    norms = np.array([family(n).lp_norm(rho) for n in ladder])
    k = max(2, len(ladder) // 2)
    x = np.log(np.asarray(ladder[-k:], dtype=float))
    y = np.log(norms[-k:])
    slope = float(np.polyfit(x, y, 1)[0])
    return BoundTrack(tuple(ladder), tuple(norms.tolist()), float(rho), slope, slope < slope_tol)
