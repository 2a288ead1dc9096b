"""Stokes wave coefficients of the linearized water-waves operator.

The two coefficient functions ``p`` and ``a`` and the wave speed ``c`` are
kept to second order in the amplitude.  Higher-order terms are not known in
closed form here, so every quantity built from these objects carries an
O(eps**3) model error relative to the exact Stokes wave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError

#: Largest amplitude accepted by :func:`stokes_coefficients`.
EPS_MAX = 0.1


@dataclass(frozen=True)
class TrigPolynomial:
    """Real 2*pi-periodic trigonometric polynomial.

    ``value(x) = constant + sum_j cos_coeffs[j-1] cos(j x) + sin_coeffs[j-1] sin(j x)``
    """

    constant: float = 0.0
    cos_coeffs: tuple[float, ...] = field(default_factory=tuple)
    sin_coeffs: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(s) for s in self.sin_coeffs))

    @property
    def degree(self) -> int:
        """Highest harmonic with a nonzero coefficient (0 for constants)."""
        deg = 0
        for coeffs in (self.cos_coeffs, self.sin_coeffs):
            for j, c in enumerate(coeffs, start=1):
                if c != 0.0:
                    deg = max(deg, j)
        return deg

    @property
    def is_even(self) -> bool:
        return all(s == 0.0 for s in self.sin_coeffs)

    def fourier_coefficients(self) -> dict[int, complex]:
        """Map ``k -> c_k`` with ``value(x) = sum_k c_k exp(i k x)``."""
        out = {0: complex(self.constant)}
        deg = max(len(self.cos_coeffs), len(self.sin_coeffs))
        for j in range(1, deg + 1):
            cj = self.cos_coeffs[j - 1] if j <= len(self.cos_coeffs) else 0.0
            sj = self.sin_coeffs[j - 1] if j <= len(self.sin_coeffs) else 0.0
            # cos = (e+ + e-)/2, sin = (e+ - e-)/(2i)
            out[j] = 0.5 * cj - 0.5j * sj
            out[-j] = 0.5 * cj + 0.5j * sj
        return out

    def __call__(self, x):
        return eval_trig(self, x)


def eval_trig(poly: TrigPolynomial, x):
    """Evaluate ``poly`` at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    val = np.full(x.shape, poly.constant)
    for j, c in enumerate(poly.cos_coeffs, start=1):
        val = val + c * np.cos(j * x)
    for j, s in enumerate(poly.sin_coeffs, start=1):
        val = val + s * np.sin(j * x)
    if val.ndim == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class StokesCoefficients:
    """Second-order coefficients of the linearization at a Stokes wave (g = 1)."""

    eps: float
    p: TrigPolynomial
    a: TrigPolynomial
    c: float


def _trimmed(coeffs: Sequence[float]) -> tuple[float, ...]:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    return tuple(coeffs)


def stokes_coefficients(eps: float) -> StokesCoefficients:
    """Return ``p``, ``a`` and ``c`` at amplitude ``eps``.

    p(x) = -2 eps cos x + eps^2 (3/2 - 2 cos 2x)
    a(x) = -2 eps cos x + eps^2 (2 - 2 cos 2x)
    c    = 1 + eps^2 / 2

    The O(eps^3) remainder is dropped, not estimated.

    Raises
    ------
    DomainError
        If ``|eps| > EPS_MAX``.
    """
    eps = float(eps)
    if not math.isfinite(eps) or abs(eps) > EPS_MAX:
        raise DomainError(f"amplitude eps={eps!r} outside the admissible range |eps| <= {EPS_MAX}")
    e2 = eps * eps
    p = TrigPolynomial(1.5 * e2, _trimmed([-2.0 * eps, -2.0 * e2]))
    a = TrigPolynomial(2.0 * e2, _trimmed([-2.0 * eps, -2.0 * e2]))
    return StokesCoefficients(eps=eps, p=p, a=a, c=1.0 + 0.5 * e2)
