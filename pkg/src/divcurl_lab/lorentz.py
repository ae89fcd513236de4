"""Distribution functions, rearrangements and Lorentz ``L^{p,1}`` norms.

A function is represented by weighted samples: a value per cell and the
measure of the cell.  All norms are exact finite sums over the levels of
the resulting step functions, so no quadrature error enters here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDelta, InvalidExponent


@dataclass(frozen=True)
class WeightedSamples:
    """Absolute values ``|f|`` on cells of measure ``weights``."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.abs(np.asarray(self.values, dtype=float)).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if v.shape != w.shape:
            raise ValueError("values and weights must have the same length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def total_measure(self):
        return float(self.weights.sum())

    def __len__(self):
        return len(self.values)

    def scaled(self, c):
        return WeightedSamples(abs(c) * self.values, self.weights)

    def restricted(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return WeightedSamples(self.values[mask], self.weights[mask])


@dataclass(frozen=True)
class StepFunction:
    """Piecewise constant: ``levels[i]`` on ``[breakpoints[i], breakpoints[i+1])``, 0 elsewhere."""

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).ravel()
        lv = np.asarray(self.levels, dtype=float).ravel()
        if len(b) == 0 and len(lv) == 0:
            b = np.zeros(0)
        elif len(b) != len(lv) + 1:
            raise ValueError("need len(breakpoints) == len(levels) + 1")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def zero(cls):
        return cls(np.zeros(0), np.zeros(0))

    def __len__(self):
        return len(self.levels)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if len(self.levels) == 0:
            return np.zeros_like(t)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.levels))
        return np.where(inside, self.levels[np.clip(idx, 0, len(self.levels) - 1)], 0.0)

    @property
    def lengths(self):
        return np.diff(self.breakpoints)

    def integral(self):
        return float(np.sum(self.levels * self.lengths))

    def canonical(self):
        """Merge equal neighbouring levels and drop zero pieces at either end."""
        if len(self.levels) == 0:
            return self
        keep = np.r_[True, self.levels[1:] != self.levels[:-1]]
        b = np.r_[self.breakpoints[:-1][keep], self.breakpoints[-1]]
        lv = self.levels[keep]
        nz = np.nonzero(lv)[0]
        if len(nz) == 0:
            return StepFunction.zero()
        lo, hi = nz[0], nz[-1]
        return StepFunction(b[lo : hi + 2], lv[lo : hi + 1])

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return np.array_equal(a.breakpoints, b.breakpoints) and np.array_equal(a.levels, b.levels)

    __hash__ = None

    def is_nonincreasing(self):
        return bool(np.all(np.diff(self.levels) <= 0))

    def to_samples(self):
        """Cells of the step function as weighted samples."""
        return WeightedSamples(self.levels, self.lengths)


def _levels(s):
    """Distinct nonzero values in decreasing order with cumulative measures.

    For a non-increasing StepFunction the cumulative measures are read off its
    breakpoints directly, which keeps round-trips through the rearrangement
    bit-exact.
    """
    if isinstance(s, StepFunction):
        c = s.canonical()
        if len(c) and c.breakpoints[0] == 0.0 and c.is_nonincreasing() and np.all(c.levels > 0):
            return c.levels.copy(), c.breakpoints[1:].copy()
        s = s.to_samples()
    if len(s) == 0:
        return np.zeros(0), np.zeros(0)
    order = np.argsort(-s.values, kind="stable")
    v, w = s.values[order], s.weights[order]
    starts = np.r_[0, np.nonzero(np.diff(v))[0] + 1]
    u = v[starts]
    cum = np.cumsum(np.add.reduceat(w, starts))
    pos = u > 0
    return u[pos], cum[pos]


def distribution_function(s):
    """``lambda -> |{|f| > lambda}|`` as an exact step function on ``[0, max|f|)``."""
    u, c = _levels(s)
    if len(u) == 0:
        return StepFunction.zero()
    # on [u_{k+1}, u_k) the level is c_k; u_{K+1} = 0
    breaks = np.r_[0.0, u[::-1]]
    return StepFunction(breaks, c[::-1])


def rearrangement(s):
    """Non-increasing rearrangement ``f*`` on ``[0, total_measure)``."""
    if isinstance(s, StepFunction):
        s = s.to_samples()
    u, c = _levels(s)
    total = s.total_measure if len(s) else 0.0
    breaks = np.r_[0.0, c]
    levels = u
    if len(c) and total > c[-1]:
        breaks = np.r_[breaks, total]
        levels = np.r_[levels, 0.0]
    elif len(c) == 0 and total > 0:
        return StepFunction(np.array([0.0, total]), np.array([0.0]))
    if len(levels) == 0:
        return StepFunction.zero()
    return StepFunction(breaks, levels)


def _root(c, a):
    """``c**a`` elementwise with libm ``pow``, so single levels reproduce ``|E|**a`` bit for bit."""
    return np.fromiter((math.pow(x, a) for x in c), dtype=float, count=len(c))


def _check_p(p):
    if not p >= 1:
        raise InvalidExponent(f"Lorentz exponent must be >= 1, got {p}")


def lorentz_norm(s, p):
    """``int_0^inf d(lambda)^(1/p) dlambda`` summed exactly over the levels.

    With this normalisation the indicator of a set ``E`` has norm
    ``|E|^(1/p)``.  ``p = 1`` gives the ``L^1`` norm.
    """
    _check_p(p)
    u, c = _levels(s)
    if len(u) == 0:
        return 0.0
    du = u - np.r_[u[1:], 0.0]
    return float(np.sum(du * _root(c, 1.0 / p)))


def lorentz_norm_rearrangement(s, p):
    """``int_0^inf t^(-1/p') f*(t) dt`` integrated exactly against the step ``f*``.

    Equals ``p * lorentz_norm(s, p)`` for every step function.
    """
    _check_p(p)
    u, c = _levels(s)
    if len(u) == 0:
        return 0.0
    a = 1.0 / p
    cp = _root(c, a)
    return float(np.sum(u * (cp - np.r_[0.0, cp[:-1]])) / a)


def equiintegrability_modulus(s, delta, mode="L1", p=None):
    """Largest norm of ``f`` over sets of measure at most ``delta``.

    The supremum is attained on a super-level set of measure ``delta``, so
    ``mode="L1"`` returns ``int_0^delta f*`` and ``mode="lorentz"`` returns
    ``int_0^inf min(d(lambda), delta)^(1/p) dlambda``.
    """
    if isinstance(s, StepFunction):
        total = s.to_samples().total_measure if len(s) else 0.0
    else:
        total = s.total_measure
    if not (delta > 0 and delta <= total * (1 + 1e-12)):
        raise InvalidDelta(f"delta must lie in (0, {total}], got {delta}")
    u, c = _levels(s)
    if len(u) == 0:
        return 0.0
    if mode == "L1":
        lo = np.minimum(np.r_[0.0, c[:-1]], delta)
        hi = np.minimum(c, delta)
        return float(np.sum(u * (hi - lo)))
    if mode == "lorentz":
        if p is None:
            raise InvalidExponent("mode 'lorentz' needs an exponent p")
        _check_p(p)
        du = u - np.r_[u[1:], 0.0]
        return float(np.sum(du * _root(np.minimum(c, delta), 1.0 / p)))
    raise ValueError(f"unknown mode {mode!r}")
