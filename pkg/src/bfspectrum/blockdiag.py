"""Symplectic, reversibility-preserving block diagonalization of the 4x4 matrix.

Starting from ``L4 = J4 B4`` the coupling between the ``(v1+, v1-)`` and
``(v0+, v0-)`` planes is removed in three stages:

1. a shear ``Y`` that kills the ``F11`` entry,
2. conjugation by ``exp(S)`` with ``S`` solving a Sylvester equation,
3. repetition of stage 2 until the off-diagonal blocks vanish numerically.

The surviving 2x2 blocks, shifted by ``i mu``, carry the Benjamin-Feir pair
(``U2``) and the sideband pair (``S2``).

Entry conventions for the 2x2 blocks of ``B4 = [[E, F], [F^*, G]]``::

    E = [[E11, i E12], [-i E12, E22]]      F = [[F11, i F12], [i F21, F22]]
    G = [[G11, i G12], [-i G12, G22]]

with all ``E_ij, F_ij, G_ij`` real.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ConvergenceError, DomainError, NumericalError, StructureError, WindowError
from .katoreduce import J4, ReducedBlocks

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])

# linear part of the involution in the reduced basis (v1+, v1-, v0+, v0-)
R4 = np.diag([1.0, -1.0, 1.0, -1.0])


# -- structure diagnostics --------------------------------------------------


def hamiltonian_residual(L: np.ndarray) -> float:
    """``|B - B^*|`` for ``B = J4^{-1} L``; zero iff ``L`` is Hamiltonian."""
    B = -J4 @ L
    return float(np.linalg.norm(B - B.conj().T))


def reversibility_residual(M: np.ndarray, preserving: bool = True) -> float:
    """Residual of ``rho M = M rho`` (``preserving``) or ``rho M = -M rho`` (reversible)."""
    s = 1.0 if preserving else -1.0
    return float(np.linalg.norm(R4 @ np.conj(M) - s * M @ R4))


def symplectic_residual(M: np.ndarray) -> float:
    """``|M^* J4 M - J4|``."""
    return float(np.linalg.norm(M.conj().T @ J4 @ M - J4))


def blocks_of(L: np.ndarray) -> ReducedBlocks:
    """Self-adjoint form ``B = -J4 L`` of a Hamiltonian 4x4 matrix."""
    return ReducedBlocks(-J4 @ L)


def offdiag_norm(L: np.ndarray) -> float:
    return float(np.hypot(np.linalg.norm(L[:2, 2:]), np.linalg.norm(L[2:, :2])))


def _entries(blocks: ReducedBlocks) -> dict:
    E, F, G = blocks.E, blocks.F, blocks.G
    return {
        "E11": E[0, 0].real, "E12": E[0, 1].imag, "E22": E[1, 1].real,
        "F11": F[0, 0].real, "F12": F[0, 1].imag, "F21": F[1, 0].imag, "F22": F[1, 1].real,
        "G11": G[0, 0].real, "G12": G[0, 1].imag, "G22": G[1, 1].real,
    }


# -- step 1 -----------------------------------------------------------------


def step1_remove_F11(blocks: ReducedBlocks):
    """Shear away ``F11``.

    Returns ``(blocks1, Y)`` with ``B1 = Y^* B Y`` and ``L1 = Y^{-1} L Y``,
    where ``Y = I + m [[0, -P], [Q, 0]]``, ``m = -F11 / G11`` (so ``m = Y[2, 0]``).
    """
    G11 = blocks.G[0, 0].real
    if abs(G11) < 0.5:
        raise WindowError(f"G11 = {G11:.3e} below 1/2: outside the perturbative window")
    m = -blocks.F[0, 0].real / G11
    Q = np.diag([1.0, 0.0])
    P = np.diag([0.0, 1.0])
    Y = np.eye(4) + m * np.block([[np.zeros((2, 2)), -P], [Q, np.zeros((2, 2))]])
    B1 = Y.conj().T @ blocks.B4 @ Y
    # exact zero: the closed form makes F11 + m G11 vanish identically
    B1[0, 2] = B1[2, 0] = 0.0
    return ReducedBlocks(B1, blocks.params), Y


def step1_closed_form(blocks: ReducedBlocks):
    """``(E1, F1, G1)`` from the explicit entry formulas of the shear step."""
    q = _entries(blocks)
    m = -q["F11"] / q["G11"]
    E1 = blocks.E + np.array([[2 * m * q["F11"] + m * m * q["G11"], -1j * m * q["F21"]],
                              [1j * m * q["F21"], 0.0]])
    G1 = blocks.G + np.array([[0.0, 1j * m * q["F21"]],
                              [-1j * m * q["F21"], -2 * m * q["F22"] + m * m * q["E22"]]])
    F1 = np.array([[0.0, 1j * (q["F12"] + m * q["G12"] - m * q["E12"] + m * m * q["F21"])],
                   [1j * q["F21"], q["F22"] - m * q["E22"]]])
    return E1, F1, G1


# -- the structured 4x4 linear system ----------------------------------------


def sylvester_matrix(a, b, c, d, e) -> np.ndarray:
    """The real 4x4 matrix ``[[a, b, c, 0], [d, a, 0, -c], [e, 0, a, -b], [0, -e, -d, a]]``."""
    return np.array([[a, b, c, 0.0],
                     [d, a, 0.0, -c],
                     [e, 0.0, a, -b],
                     [0.0, -e, -d, a]], dtype=float)


def structured_inverse_4x4(a, b, c, d, e):
    """Closed-form determinant and inverse of :func:`sylvester_matrix`.

    Returns
    -------
    det : float
        ``a^4 - 2 a^2 (b d + c e) + (b d - c e)^2``
    inverse : ndarray, shape (4, 4)
    """
    a, b, c, d, e = (float(v) for v in (a, b, c, d, e))
    bd, ce, a2 = b * d, c * e, a * a
    det = a2 * a2 - 2.0 * a2 * (bd + ce) + (bd - ce) ** 2
    if not np.isfinite(det) or abs(det) < 1e-300:
        raise NumericalError(f"structured 4x4 matrix is singular (det = {det:.3e})")
    diag = a * (a2 - bd - ce)
    adj = np.array([
        [diag, b * (-a2 + bd - ce), -c * (a2 + bd - ce), -2.0 * a * b * c],
        [d * (-a2 + bd - ce), diag, 2.0 * a * c * d, -c * (-a2 - bd + ce)],
        [-e * (a2 + bd - ce), 2.0 * a * b * e, diag, b * (a2 - bd + ce)],
        [-2.0 * a * d * e, -e * (-a2 - bd + ce), d * (a2 - bd + ce), diag],
    ])
    return det, adj / det


# -- step 2 -----------------------------------------------------------------


@dataclass
class SylvesterSolution:
    """``X = [[x11, i x12], [i x21, x22]]`` solving ``D1 X - X D0 = -J2 F``."""

    X: np.ndarray
    detA: float
    residual: float
    coefficients: tuple = field(default=())

    @property
    def x(self) -> np.ndarray:
        """Real unknowns ``(x11, x12, x21, x22)``."""
        X = self.X
        return np.array([X[0, 0].real, X[0, 1].imag, X[1, 0].imag, X[1, 1].real])


def sylvester_residual(blocks: ReducedBlocks, X: np.ndarray) -> float:
    D1 = J2 @ blocks.E
    D0 = J2 @ blocks.G
    return float(np.linalg.norm(D1 @ X - X @ D0 + J2 @ blocks.F))


def solve_sylvester(blocks: ReducedBlocks, mu: float, zero_tol: float = 1e-13,
                    check_window: bool = True) -> SylvesterSolution:
    """Solve the homological equation ``D1 X - X D0 = -J2 F`` for reversible ``X``.

    ``D1 = J2 E`` and ``D0 = J2 G``.  The equation reduces to the real
    system ``A x = f`` with ``A = sylvester_matrix(G12 - E12, G11, E22, G22, E11)``
    and ``f = (-F21, F22, -F11, F12)``.

    Raises
    ------
    DomainError
        At ``mu = 0`` with a non-negligible coupling (the equation is degenerate).
    WindowError
        If ``det A < mu^2 / 2``.
    """
    q = _entries(blocks)
    fnorm = float(np.linalg.norm(blocks.F))
    if mu == 0.0 or fnorm <= zero_tol:
        if fnorm > zero_tol:
            raise DomainError(f"Sylvester equation degenerate at mu = 0 with |F| = {fnorm:.2e}")
        X = np.zeros((2, 2), dtype=complex)
        return SylvesterSolution(X, 0.0, sylvester_residual(blocks, X))
    coeffs = (q["G12"] - q["E12"], q["G11"], q["E22"], q["G22"], q["E11"])
    det, Ainv = structured_inverse_4x4(*coeffs)
    if check_window and det < 0.5 * mu * mu:
        raise WindowError(f"Sylvester determinant {det:.3e} below mu^2/2 = {0.5 * mu * mu:.3e}")
    f = np.array([-q["F21"], q["F22"], -q["F11"], q["F12"]])
    x11, x12, x21, x22 = Ainv @ f
    X = np.array([[x11, 1j * x12], [1j * x21, x22]])
    return SylvesterSolution(X, det, sylvester_residual(blocks, X), coeffs)


def generator(X: np.ndarray) -> np.ndarray:
    """Hamiltonian generator ``S = J4 [[0, Sigma], [Sigma^*, 0]]`` with ``Sigma = J2 X``."""
    Sig = J2 @ X
    Z = np.zeros((2, 2))
    return J4 @ np.block([[Z, Sig], [Sig.conj().T, Z]])


def step2_conjugate(L1: np.ndarray, X, tol_in: float = 1e-9, tol_out: float = 1e-11):
    """``L2 = exp(S) L1 exp(-S)``; returns ``(L2, exp(S))``."""
    Xm = X.X if isinstance(X, SylvesterSolution) else np.asarray(X)
    L1 = np.asarray(L1, dtype=complex)
    h, r = hamiltonian_residual(L1), reversibility_residual(L1, preserving=False)
    if h > tol_in or r > tol_in:
        raise StructureError(f"input not Hamiltonian/reversible (residuals {h:.2e}, {r:.2e})")
    if not np.any(Xm):
        return L1.copy(), np.eye(4)
    S = generator(Xm)
    T = expm(S)
    Tinv = expm(-S)
    sres = symplectic_residual(T)
    rres = reversibility_residual(T, preserving=True)
    if sres > tol_out or rres > tol_out:
        raise StructureError(f"exp(S) not symplectic/reversibility-preserving ({sres:.2e}, {rres:.2e})")
    return T @ L1 @ Tinv, T


# -- step 3 and assembly -----------------------------------------------------


@dataclass
class BlockDecomposition:
    """Final blocks ``U2`` (Benjamin-Feir pair) and ``S2`` (sideband pair), ``i mu`` included.

    ``conjugator @ L4 @ inv(conjugator)`` is block diagonal up to ``offdiag_residual``.
    """

    U2: np.ndarray
    S2: np.ndarray
    conjugator: np.ndarray
    offdiag_residual: float
    iterations: int = 0
    history: list = field(default_factory=list)
    mu: float = 0.0

    @property
    def lambda1(self):
        return eigs_2x2(self.U2)

    @property
    def lambda0(self):
        return eigs_2x2(self.S2)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([*self.lambda1, *self.lambda0])


def full_decouple(L2: np.ndarray, mu: float, tol: float = 1e-12, max_iter: int = 50,
                  zero_tol: float = 1e-13) -> BlockDecomposition:
    """Iterate Sylvester decoupling until the off-diagonal blocks are below ``tol``.

    At ``mu = 0`` the homological equation is degenerate; no iteration is
    attempted and whatever coupling remains is reported in ``offdiag_residual``.
    """
    L = np.asarray(L2, dtype=complex).copy()
    C = np.eye(4, dtype=complex)
    history = [offdiag_norm(L)]
    it = 0
    while history[-1] > tol and mu != 0.0:
        if it >= max_iter:
            raise ConvergenceError(
                f"block decoupling did not reach {tol:.0e} in {max_iter} iterations "
                f"(last residual {history[-1]:.3e})", history)
        sol = solve_sylvester(blocks_of(L), mu, zero_tol=zero_tol, check_window=False)
        if not np.any(sol.X):
            break
        L, T = step2_conjugate(L, sol)
        C = T @ C
        it += 1
        history.append(offdiag_norm(L))
        if len(history) > 3 and history[-1] >= history[-2] >= history[-3]:
            raise ConvergenceError(f"block decoupling stalled at residual {history[-1]:.3e}", history)
    shift = 1j * mu * np.eye(2)
    return BlockDecomposition(L[:2, :2] + shift, L[2:, 2:] + shift, C, history[-1], it, history, mu)


def block_decompose(blocks: ReducedBlocks, mu: float, tol: float = 1e-12, max_iter: int = 50) -> BlockDecomposition:
    """All three stages on a reduced matrix; the conjugator maps ``L4`` to the block form."""
    b1, Y = step1_remove_F11(blocks)
    if mu == 0.0:
        L2, T = b1.L4, np.eye(4)
    else:
        L2, T = step2_conjugate(b1.L4, solve_sylvester(b1, mu))
    dec = full_decouple(L2, mu, tol, max_iter)
    dec.conjugator = dec.conjugator @ T @ np.linalg.inv(Y)
    return dec


def eigs_2x2(M: np.ndarray, tol: float = 1e-8):
    """``M11 +- sqrt(M12 M21)`` for a 2x2 matrix with equal diagonal entries.

    The first value has nonnegative real part when the product is positive,
    and the larger imaginary part when it is negative.
    """
    M = np.asarray(M, dtype=complex)
    if abs(M[0, 0] - M[1, 1]) > tol:
        raise DomainError(f"eigs_2x2 needs equal diagonal entries, got {M[0, 0]} and {M[1, 1]}")
    prod = M[0, 1] * M[1, 0]
    if abs(prod.imag) <= 1e-10 * abs(prod) + 1e-300:
        prod = complex(prod.real)
    r = np.sqrt(prod)
    d = 0.5 * (M[0, 0] + M[1, 1])
    return d + r, d - r
