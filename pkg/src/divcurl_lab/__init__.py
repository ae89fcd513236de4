"""Numerical laboratory for div-curl compactness, concentration and
homogenization with non equi-bounded coefficients.

Modules: ``geometry`` (domains, fields, sphere/annulus quadrature),
``lorentz`` (rearrangements and ``L^{p,1}`` norms), ``sequences`` (explicit
counterexample sequences), ``pairing`` (weak limits by test-function
pairings), ``selection`` (good radii and cap profiles), ``jacobian``
(distributional determinant), ``homog1d`` (exact 1-D homogenization) and
``experiments``/``cli`` (named experiments and reports).
"""

from .errors import LabError

__version__ = "0.1.0"

__all__ = ["LabError", "__version__"]
