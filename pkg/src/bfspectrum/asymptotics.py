"""Leading-order eigenvalue formulas, the instability boundary and figure-8 traces.

A *pipeline* is any callable ``pipeline(mu, eps) -> BlockDecomposition``;
:class:`Pipeline` is the standard one (dense operator -> projector ->
4x4 reduction -> block decoupling).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import blochop, blockdiag, katoreduce
from .blockdiag import BlockDecomposition
from .errors import DomainError, WindowError

EPS_WINDOW = 0.05


# -- closed forms -----------------------------------------------------------


def lambda1_leading(mu: float, eps: float):
    """``i mu/2 +- (mu/8) sqrt(8 eps^2 - mu^2)`` (principal root)."""
    mu, eps = float(mu), float(eps)
    r = (mu / 8.0) * np.sqrt(complex(8.0 * eps * eps - mu * mu))
    c = 0.5j * mu
    return c + r, c - r


def lambda0_leading(mu: float, eps: float = 0.0):
    """``+- i sqrt(mu) + i mu``; independent of ``eps`` at this order."""
    s = 1j * np.sqrt(float(mu))
    return s + 1j * mu, -s + 1j * mu


def mu_critical_leading(eps: float) -> float:
    """``2 sqrt(2) eps``."""
    return 2.0 * np.sqrt(2.0) * float(eps)


# -- pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class Pipeline:
    """Full reduction at fixed numerical settings.

    ``radius=None`` selects the automatic contour of
    :meth:`katoreduce.ContourSpec.auto`.
    """

    N: int = 32
    radius: Optional[float] = None
    nodes: int = 64

    def reduce(self, mu: float, eps: float) -> katoreduce.Reduction:
        return katoreduce.reduce_point(mu, eps, N=self.N, radius=self.radius, nodes=self.nodes)

    def decompose(self, mu: float, eps: float):
        red = self.reduce(mu, eps)
        return red, blockdiag.block_decompose(red.blocks, red.params.mu)

    def __call__(self, mu: float, eps: float) -> BlockDecomposition:
        return self.decompose(mu, eps)[1]


DEFAULT_PIPELINE = Pipeline()


def instability_indicator(dec: BlockDecomposition) -> float:
    """``U2[0,1] * U2[1,0]``: positive in the unstable regime, negative when stable."""
    return float((dec.U2[0, 1] * dec.U2[1, 0]).real)


# -- stability boundary -----------------------------------------------------


@dataclass(frozen=True)
class StabilityBoundary:
    eps: float
    mu_critical: float
    ratio_to_asymptotic: float
    evaluations: int = 0

    def __post_init__(self):
        if not self.mu_critical > 0:
            raise ValueError("mu_critical must be positive")


def critical_mu(eps: float, pipeline: Callable = DEFAULT_PIPELINE, xtol: Optional[float] = None) -> StabilityBoundary:
    """Root of the instability indicator in ``[sqrt(2) eps, 4 sqrt(2) eps]``.

    Bracketed root finding (Brent) to ``xtol``; the default is far tighter
    than the ``1e-6 eps`` required, so that the two ``lambda1`` eigenvalues
    at the returned root coincide to about ``1e-8``.

    Raises
    ------
    DomainError
        If ``eps`` is outside ``(0, 0.05]``.
    WindowError
        If the indicator does not change sign on the bracket.
    """
    eps = float(eps)
    if not 0.0 < eps <= EPS_WINDOW:
        raise DomainError(f"critical_mu needs 0 < eps <= {EPS_WINDOW}, got {eps}")
    xtol = 1e-13 * max(eps, 1e-2) if xtol is None else xtol
    calls = [0]

    def f(mu):
        calls[0] += 1
        return instability_indicator(pipeline(mu, eps))

    lo, hi = np.sqrt(2.0) * eps, 4.0 * np.sqrt(2.0) * eps
    flo = f(lo)
    # the top of the bracket may leave the window where a contour separates the cluster
    for _ in range(8):
        try:
            fhi = f(hi)
            break
        except DomainError:
            hi = 0.5 * (hi + mu_critical_leading(eps))
    else:
        raise WindowError(f"no usable upper bracket for eps={eps}")
    if not (flo > 0 > fhi):
        raise WindowError(f"instability indicator has no sign change on [{lo:.4g}, {hi:.4g}] "
                          f"(values {flo:.3e}, {fhi:.3e})")
    root = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return StabilityBoundary(eps, root, root / mu_critical_leading(eps), calls[0])


# -- classification ---------------------------------------------------------


class Stability(str, enum.Enum):
    UNSTABLE = "unstable"
    STABLE = "stable"
    BOUNDARY = "boundary"


def classify_stability(mu: float, eps: float, pipeline: Callable = DEFAULT_PIPELINE) -> Stability:
    """Sign of the instability indicator with tolerance ``1e-14 max(eps^4, mu^4)``."""
    val = instability_indicator(pipeline(mu, eps))
    tol = 1e-14 * max(eps ** 4, mu ** 4)
    if val > tol:
        return Stability.UNSTABLE
    if val < -tol:
        return Stability.STABLE
    return Stability.BOUNDARY


# -- figure 8 ---------------------------------------------------------------


class Source(str, enum.Enum):
    REDUCED = "reduced"
    ASYMPTOTIC = "asymptotic"
    DIRECT = "direct"


@dataclass(frozen=True)
class Figure8Point:
    mu: float
    lambda_plus: complex
    lambda_minus: complex
    source: Source = Source.REDUCED

    def conjugate_branch(self) -> "Figure8Point":
        """The point at ``-mu``: eigenvalues are complex conjugated."""
        return Figure8Point(-self.mu, np.conj(self.lambda_plus), np.conj(self.lambda_minus), self.source)


@dataclass
class Figure8Trace:
    """Reduced figure-8 points for ``mu`` in ``[0, mu_c]`` followed by the ``mu < 0`` mirror."""

    eps: float
    points: list
    boundary: StabilityBoundary
    max_real: float = field(init=False)
    mu_at_max: float = field(init=False)
    collision_imag: float = field(init=False)

    def __post_init__(self):
        pos = [p for p in self.points if p.mu >= 0 and p.source == Source.REDUCED]
        re = np.array([p.lambda_plus.real for p in pos])
        k = int(np.argmax(np.abs(re)))
        self.max_real = float(abs(re[k]))
        self.mu_at_max = pos[k].mu
        last = max(pos, key=lambda p: p.mu)
        self.collision_imag = float(0.5 * (last.lambda_plus.imag + last.lambda_minus.imag))

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def branch(self, sign: int = 1, source: Source = Source.REDUCED) -> list:
        """Points with ``mu >= 0`` (``sign > 0``) or ``mu < 0`` from one source."""
        return [p for p in self.points if p.source == source and (p.mu >= 0 if sign > 0 else p.mu < 0)]


def trace_figure8(eps: float, grid_size: int = 64, pipeline: Callable = DEFAULT_PIPELINE,
                  boundary: Optional[StabilityBoundary] = None, asymptotic: bool = False) -> Figure8Trace:
    """``lambda1`` pair over ``mu`` in ``[0, mu_c(eps)]`` plus its mirror at ``-mu``.

    ``asymptotic=True`` adds leading-order points on the same grid.
    """
    if grid_size < 16:
        raise DomainError(f"grid_size must be >= 16, got {grid_size}")
    boundary = boundary or critical_mu(eps, pipeline)
    mus = np.linspace(0.0, boundary.mu_critical, grid_size)
    pts = []
    for mu in mus:
        lp, lm = pipeline(float(mu), eps).lambda1
        pts.append(Figure8Point(float(mu), complex(lp), complex(lm), Source.REDUCED))
    if asymptotic:
        for mu in mus:
            lp, lm = lambda1_leading(mu, eps)
            pts.append(Figure8Point(float(mu), complex(lp), complex(lm), Source.ASYMPTOTIC))
    mirror = [p.conjugate_branch() for p in pts if p.mu > 0]
    return Figure8Trace(eps, pts + mirror, boundary)


# -- per-point evaluation ----------------------------------------------------


SWEEP_COLUMNS = (
    "mu", "re_l1p", "im_l1p", "re_l1m", "im_l1m", "re_l0p", "im_l0p", "re_l0m", "im_l0m",
    "re_l1p_asym", "im_l1p_asym", "dev_l1p", "dev_direct_max",
)


def evaluate_point(mu: float, eps: float, pipeline: Pipeline = DEFAULT_PIPELINE) -> dict:
    """One sweep row: reduced eigenvalues, leading-order ``lambda1+`` and deviations.

    ``dev_direct_max`` compares the four reduced eigenvalues with the four
    eigenvalues of the dense truncated operator nearest the contour centre
    (the origin for a fixed-radius contour, ``i mu`` for the automatic one).
    """
    red, dec = pipeline.decompose(mu, eps)
    l1p, l1m = dec.lambda1
    l0p, l0m = dec.lambda0
    a1p, _ = lambda1_leading(mu, eps)
    dense = blochop.nearest_eigs(blochop.direct_eigs(red.L), 4, red.contour.center)
    dev_direct = blochop.multiset_distance(dec.eigenvalues, dense)
    return {
        "mu": float(mu),
        "re_l1p": l1p.real, "im_l1p": l1p.imag,
        "re_l1m": l1m.real, "im_l1m": l1m.imag,
        "re_l0p": l0p.real, "im_l0p": l0p.imag,
        "re_l0m": l0m.real, "im_l0m": l0m.imag,
        "re_l1p_asym": a1p.real, "im_l1p_asym": a1p.imag,
        "dev_l1p": float(abs(l1p - a1p)),
        "dev_direct_max": dev_direct,
    }
