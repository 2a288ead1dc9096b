"""Dense Fourier truncations of the Bloch-Floquet water-waves operators.

A two-component field ``(eta, psi)`` is stored as one complex vector of
length ``2(2N+1)``: the Fourier modes ``-N..N`` of ``eta`` followed by the
modes ``-N..N`` of ``psi`` (component-major, mode-minor).  With the
normalized inner product ``(f, g) = sum_k f_k conj(g_k)`` the exponentials
are orthonormal, so matrix adjoints are plain conjugate transposes.

The shifted operator is ``Lsh = J B`` with ``B`` self-adjoint; the full
Floquet operator is ``Lsh + i mu Id``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericalError
from .wavecoeff import StokesCoefficients, TrigPolynomial

SELF_ADJOINT_TOL = 1e-12

ROLES = ("L_full", "L_shifted", "B", "projector", "transformer", "involution-linear-part")


@dataclass(frozen=True)
class FourierTruncation:
    """Keep Fourier modes ``-N..N`` of each scalar component."""

    N: int = 32

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise DomainError(f"Fourier truncation needs an integer N >= 4, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def size(self) -> int:
        """Number of modes per component."""
        return 2 * self.N + 1

    @property
    def dim(self) -> int:
        """Length of a two-component field vector."""
        return 2 * self.size

    def index(self, k: int, component: int = 0) -> int:
        if abs(k) > self.N:
            raise DomainError(f"mode {k} not retained by truncation N={self.N}")
        return component * self.size + k + self.N


@dataclass(frozen=True)
class BlochParams:
    """Floquet exponent ``mu`` (|mu| < 1/2) and amplitude ``eps``."""

    mu: float
    eps: float

    def __post_init__(self):
        mu = float(self.mu)
        if not np.isfinite(mu) or abs(mu) >= 0.5:
            raise DomainError(f"Floquet exponent mu={self.mu!r} outside |mu| < 1/2")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "eps", float(self.eps))


@dataclass
class OperatorMatrix:
    """Dense matrix acting on truncated two-component Fourier fields."""

    entries: np.ndarray
    role: str
    trunc: FourierTruncation
    params: Optional[BlochParams] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown operator role {self.role!r}")
        n = self.trunc.dim
        if self.entries.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {self.entries.shape}")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other


# -- field vectors ----------------------------------------------------------


def field_from_functions(trunc: FourierTruncation, eta: Callable, psi: Callable, ngrid: Optional[int] = None) -> np.ndarray:
    """Fourier coefficients of the field ``(eta(x), psi(x))``.

    Exact for trigonometric polynomials of degree <= N; otherwise the
    coefficients are aliased on a grid of ``ngrid`` points.
    """
    ngrid = ngrid or 4 * trunc.N + 4
    x = 2.0 * np.pi * np.arange(ngrid) / ngrid
    out = np.empty(trunc.dim, dtype=complex)
    for comp, fn in enumerate((eta, psi)):
        vals = np.broadcast_to(np.asarray(fn(x), dtype=complex), x.shape)
        c = np.fft.fft(vals) / ngrid
        out[comp * trunc.size:(comp + 1) * trunc.size] = c[trunc.modes % ngrid]
    return out


def field_values(trunc: FourierTruncation, v: np.ndarray, x) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate both components of the field ``v`` at the points ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phases = np.exp(1j * np.outer(x, trunc.modes))
    n = trunc.size
    return phases @ v[:n], phases @ v[n:]


def inner(f: np.ndarray, g: np.ndarray) -> complex:
    """``(f, g) = sum f_k conj(g_k)``, linear in the first slot."""
    return complex(np.vdot(g, f))


def apply_involution(v: np.ndarray, trunc: FourierTruncation) -> np.ndarray:
    """Anti-linear involution ``(eta, psi)(x) -> (conj eta(-x), -conj psi(-x))``.

    On Fourier coefficients this is ``(eta_k, psi_k) -> (conj eta_k, -conj psi_k)``.
    """
    out = np.conj(v).copy()
    out[trunc.size:] *= -1.0
    return out


def involution_linear_part(trunc: FourierTruncation) -> OperatorMatrix:
    """``R = diag(I, -I)``; the involution is ``R`` composed with conjugation."""
    d = np.concatenate([np.ones(trunc.size), -np.ones(trunc.size)])
    return OperatorMatrix(np.diag(d).astype(complex), "involution-linear-part", trunc)


def symplectic_J(trunc: FourierTruncation) -> np.ndarray:
    """The block matrix ``[[0, I], [-I, 0]]``."""
    n = trunc.size
    J = np.zeros((trunc.dim, trunc.dim))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


# -- scalar building blocks -------------------------------------------------


def toeplitz_from_trig(poly: TrigPolynomial, trunc: FourierTruncation) -> np.ndarray:
    """Matrix of multiplication by ``poly`` on modes ``-N..N``.

    ``M[k, k-j] = c_j`` where ``c_j`` are the exponential Fourier
    coefficients of ``poly``; products pushed outside ``[-N, N]`` are dropped.
    """
    if poly.degree > trunc.N:
        raise DomainError(f"polynomial harmonic {poly.degree} exceeds truncation N={trunc.N}")
    n = trunc.size
    M = np.zeros((n, n), dtype=complex)
    for j, cj in poly.fourier_coefficients().items():
        if cj == 0:
            continue
        M += cj * np.eye(n, k=-j)
    return M


def sgn_symbol(k):
    """Sign symbol with ``sgn(0) = 0``."""
    return np.sign(np.asarray(k)).astype(float)


def multiplier_absDmu(mu: float, trunc: FourierTruncation, analytic: bool = False) -> np.ndarray:
    """Diagonal matrix of ``|D + mu| = |D| + mu sgn(D) + |mu| Pi_0``.

    With ``analytic=True`` the zero-mode entry is ``mu`` instead of ``|mu|``,
    i.e. the operator is continued linearly from ``mu > 0``; that family is
    smooth through ``mu = 0`` and is what derivatives in ``mu`` refer to.
    """
    mu = float(mu)
    if abs(mu) >= 0.5:
        raise DomainError(f"|D+mu| decomposition requires |mu| < 1/2, got mu={mu}")
    k = trunc.modes
    d = np.abs(k) + mu * sgn_symbol(k)
    d[k == 0] = mu if analytic else abs(mu)
    return np.diag(d)


def unperturbed_eigenvalue(k: int, sigma: int, mu: float) -> complex:
    """``i (k + mu - sigma sqrt|k + mu|)`` for ``sigma = +1`` or ``-1``."""
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    return 1j * (k + mu - sigma * np.sqrt(abs(k + mu)))


# -- operator assembly ------------------------------------------------------


def assemble_L_shifted(params: BlochParams, coeffs: StokesCoefficients, trunc: FourierTruncation, analytic: bool = False):
    """Assemble ``(Lsh, B)`` with ``Lsh = J B`` and ``B`` self-adjoint.

    ``B = [[1 + a, -((1+p) d_x + i mu p)], [d_x (1+p) + i mu p, |D+mu|]]``

    Returns two :class:`OperatorMatrix` objects with roles ``L_shifted`` and ``B``.
    """
    n = trunc.size
    mu = params.mu
    I = np.eye(n)
    Tp = toeplitz_from_trig(coeffs.p, trunc)
    Ta = toeplitz_from_trig(coeffs.a, trunc)
    Dx = np.diag(1j * trunc.modes)
    T1p = I + Tp

    B = np.empty((trunc.dim, trunc.dim), dtype=complex)
    B[:n, :n] = I + Ta
    B[n:, :n] = Dx @ T1p + 1j * mu * Tp
    B[:n, n:] = -(T1p @ Dx + 1j * mu * Tp)
    B[n:, n:] = multiplier_absDmu(mu, trunc, analytic=analytic)

    resid = np.linalg.norm(B - B.conj().T)
    if resid > SELF_ADJOINT_TOL:
        raise NumericalError(f"assembled B is not self-adjoint (residual {resid:.3e})")

    L = symplectic_J(trunc) @ B
    return (OperatorMatrix(L, "L_shifted", trunc, params), OperatorMatrix(B, "B", trunc, params))


def assemble(mu: float, eps: float, N: int = 32, analytic: bool = False):
    """Convenience wrapper: ``(Lsh, B)`` at ``(mu, eps)`` with ``N`` modes."""
    from .wavecoeff import stokes_coefficients

    params = BlochParams(mu, eps)
    return assemble_L_shifted(params, stokes_coefficients(eps), FourierTruncation(N), analytic=analytic)


def full_operator(L: OperatorMatrix) -> OperatorMatrix:
    """Floquet operator ``Lsh + i mu Id``."""
    if L.role == "L_full":
        return L
    if L.role != "L_shifted" or L.params is None:
        raise ValueError("full_operator needs an L_shifted operator with parameters")
    A = L.entries + 1j * L.params.mu * np.eye(L.trunc.dim)
    return OperatorMatrix(A, "L_full", L.trunc, L.params)


def involution_check(L: OperatorMatrix, trunc: Optional[FourierTruncation] = None) -> float:
    """Frobenius residual of ``L rho + rho L`` on the standard basis.

    Since ``rho = R conj``, ``(L rho + rho L) e_j`` is column ``j`` of
    ``L R + R conj(L)``.
    """
    trunc = trunc or L.trunc
    A = L.entries if isinstance(L, OperatorMatrix) else np.asarray(L)
    d = np.concatenate([np.ones(trunc.size), -np.ones(trunc.size)])
    resid = A * d[None, :] + d[:, None] * np.conj(A)
    return float(np.linalg.norm(resid))


# -- dense eigensolves ------------------------------------------------------


def direct_eigs(L) -> np.ndarray:
    """All eigenvalues of ``L`` by a dense non-Hermitian solve."""
    A = L.entries if isinstance(L, OperatorMatrix) else np.asarray(L)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("direct_eigs needs a square matrix")
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"dense eigensolve failed on {A.shape[0]}x{A.shape[0]} matrix "
            f"(norm {np.linalg.norm(A):.3e}, finite={np.isfinite(A).all()}): {exc}"
        ) from exc
    return w


def nearest_eigs(eigs, m: int, center: complex = 0.0) -> np.ndarray:
    """The ``m`` entries of ``eigs`` closest to ``center``, sorted by imaginary part."""
    eigs = np.asarray(eigs)
    idx = np.argsort(np.abs(eigs - center), kind="stable")[:m]
    sel = eigs[idx]
    return sel[np.lexsort((sel.real, sel.imag))]


def multiset_distance(a, b) -> float:
    """Largest gap under the optimal one-to-one matching of two eigenvalue lists."""
    from scipy.optimize import linear_sum_assignment

    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    if a.size != b.size:
        raise ValueError(f"cannot match {a.size} values against {b.size}")
    if a.size == 0:
        return 0.0
    C = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(C)
    return float(C[i, j].max())
