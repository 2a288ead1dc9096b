"""Spectral projector, Kato transformation operator and the 4x4 reduction.

The four eigenvalues of the Floquet operator near the origin are isolated
by a Riesz projector computed with the trapezoidal rule on a circle.  A
Kato transformation operator carries the unperturbed kernel basis onto the
perturbed spectral subspace, and the operator ``B`` is compressed onto the
resulting symplectic, reversible basis.

Index map of the reduced matrices (0-based)::

    0 -> v1+,  1 -> v1-,  2 -> v0+,  3 -> v0-
    B4[i, j] = (B v_j, v_i)      (column = argument, row = pairing vector)
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import blochop
from .blochop import BlochParams, FourierTruncation, OperatorMatrix
from .errors import ContourError, DomainError, NumericalError, StructureError
from .wavecoeff import StokesCoefficients, stokes_coefficients

SPECTRAL_GAP = 2.0 - np.sqrt(2.0)

J4 = np.array([[0.0, 1.0, 0.0, 0.0],
               [-1.0, 0.0, 0.0, 0.0],
               [0.0, 0.0, 0.0, 1.0],
               [0.0, 0.0, -1.0, 0.0]])

# sign sigma of each basis vector under the involution
BASIS_SIGNS = (1, -1, 1, -1)
BASIS_LABELS = ("v1+", "v1-", "v0+", "v0-")


# -- contour ----------------------------------------------------------------


@dataclass(frozen=True)
class ContourSpec:
    """Circle ``|lambda - center| = radius`` sampled at ``nodes`` equispaced points."""

    center: complex = 0j
    radius: float = 0.35
    nodes: int = 64

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"contour radius must be positive, got {self.radius!r}")
        if self.radius >= SPECTRAL_GAP:
            raise DomainError(
                f"contour radius {self.radius:.4f} reaches the outer spectrum "
                f"(needs radius < 2 - sqrt(2) = {SPECTRAL_GAP:.4f})"
            )
        if int(self.nodes) != self.nodes or self.nodes < 4 or self.nodes % 2:
            # even node counts keep the node set symmetric under lambda -> -conj(lambda)
            raise DomainError(f"contour nodes must be an even integer >= 4, got {self.nodes!r}")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "nodes", int(self.nodes))

    @property
    def points(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center + self.radius * np.exp(1j * theta)

    @staticmethod
    def heuristic_lower_bound(mu: float, eps: float) -> float:
        """Crude radius ``2(sqrt|mu| + eps)`` above which a circle at 0 holds the target cluster."""
        return 2.0 * (np.sqrt(abs(mu)) + abs(eps))

    @classmethod
    def auto(cls, mu: float, eps: float, nodes: int = 64, target: float = 1e-14,
             max_nodes: int = 1024) -> "ContourSpec":
        """Circle centred at ``i mu`` with radius balancing inner and outer quadrature error.

        The trapezoidal error decays like ``(rho_in / r)**M`` for the enclosed
        eigenvalues and ``(r / rho_out)**M`` for the excluded ones; ``r`` is the
        geometric mean of the two distances estimated from the flat-wave spectrum,
        padded by ``eps`` on either side.  ``nodes`` is a minimum: it is raised
        until the predicted error is below ``target``.
        """
        mu, eps = float(mu), abs(float(eps))
        m = abs(mu)
        rho_in = max(np.sqrt(m) + eps, 0.1)
        # nearest excluded flat-wave eigenvalues sit at modes +-2, relative to i mu
        rho_out = min(2.0 - np.sqrt(2.0 + m), 2.0 - np.sqrt(2.0 - m)) - eps
        if rho_out <= rho_in:
            raise DomainError(f"no spectral gap for an automatic contour at mu={mu}, eps={eps}")
        r = min(np.sqrt(rho_in * rho_out), 0.999 * SPECTRAL_GAP)
        q = max(rho_in / r, r / rho_out)
        need = int(np.ceil(np.log(target) / np.log(q))) if q < 1 else max_nodes + 1
        if need > max_nodes:
            raise DomainError(f"spectral gap too narrow at mu={mu}, eps={eps}: "
                              f"more than {max_nodes} contour nodes required")
        nodes = max(int(nodes), need + need % 2)
        return cls(center=1j * mu, radius=r, nodes=nodes)


def _as_full(L: OperatorMatrix) -> OperatorMatrix:
    return blochop.full_operator(L) if L.role == "L_shifted" else L


def riesz_projector(L: OperatorMatrix, contour: Optional[ContourSpec] = None, check: bool = True,
                    tol_idem: float = 1e-10, tol_comm: float = 1e-9, tol_trace: float = 1e-8) -> OperatorMatrix:
    """Spectral projector onto the eigenvalues of ``L`` inside ``contour``.

    ``P = -(1/2 pi i) \\oint (L - lambda)^{-1} d lambda`` by the trapezoidal rule,
    one dense solve per node.  ``L_shifted`` inputs are promoted to the full
    operator first.

    Raises
    ------
    ContourError
        If a resolvent solve is singular, or (``check=True``) if the
        idempotency, commutation or trace certificate fails.
    """
    L = _as_full(L)
    if contour is None:
        p = L.params
        contour = ContourSpec.auto(p.mu, p.eps) if p is not None else ContourSpec()
    A = L.entries
    n = A.shape[0]
    I = np.eye(n)
    P = np.zeros((n, n), dtype=complex)
    scale = max(np.linalg.norm(A, 2), 1.0)
    for lam in contour.points:
        M = A - lam * I
        try:
            R = np.linalg.solve(M, I)
        except np.linalg.LinAlgError as exc:
            raise ContourError(f"resolvent singular at contour node {lam:.6g}: eigenvalue on contour") from exc
        res = np.linalg.norm(M @ R - I)
        if not np.isfinite(res) or res > 1e6 * np.finfo(float).eps * scale * np.linalg.norm(R):
            raise ContourError(f"resolvent ill-conditioned at contour node {lam:.6g} (residual {res:.3e})")
        P -= (lam - contour.center) * R
    P /= contour.nodes
    out = OperatorMatrix(P, "projector", L.trunc, L.params)
    if check:
        cert = projector_certificate(out, L)
        bad = []
        if cert["idempotency"] > tol_idem:
            bad.append(f"|P^2-P|={cert['idempotency']:.2e}")
        if cert["commutator"] > tol_comm:
            bad.append(f"|PL-LP|={cert['commutator']:.2e}")
        if cert["trace_error"] > tol_trace:
            bad.append(f"|tr P-4|={cert['trace_error']:.2e}")
        if bad:
            raise ContourError(
                f"projector certificate failed ({', '.join(bad)}) for contour center={contour.center:.4g}, "
                f"radius={contour.radius:.4g}, nodes={contour.nodes}; adjust the radius or add nodes"
            )
    return out


def projector_certificate(P: OperatorMatrix, L: OperatorMatrix, rank: int = 4) -> dict:
    """Residuals certifying ``P`` as the rank-4 Hamiltonian, reversible projector of ``L``."""
    A = _as_full(L).entries
    Pm = P.entries
    J = blochop.symplectic_J(P.trunc)
    d = np.concatenate([np.ones(P.trunc.size), -np.ones(P.trunc.size)])
    # rho P - P rho on the standard basis: R conj(P) - P R
    rev = d[:, None] * np.conj(Pm) - Pm * d[None, :]
    return {
        "idempotency": float(np.linalg.norm(Pm @ Pm - Pm)),
        "commutator": float(np.linalg.norm(Pm @ A - A @ Pm)),
        "trace_error": float(abs(np.trace(Pm) - rank)),
        "skew_hamiltonian": float(np.linalg.norm(J @ Pm - Pm.conj().T @ J)),
        "reversibility": float(np.linalg.norm(rev)),
    }


@functools.lru_cache(maxsize=16)
def _P00_cached(N: int, radius: float, nodes: int) -> np.ndarray:
    trunc = FourierTruncation(N)
    L, _ = blochop.assemble_L_shifted(BlochParams(0.0, 0.0), stokes_coefficients(0.0), trunc)
    P = riesz_projector(L, ContourSpec(0j, radius, nodes))
    P.entries.setflags(write=False)
    return P.entries


def projector_at_origin(trunc: FourierTruncation, contour: Optional[ContourSpec] = None) -> OperatorMatrix:
    """``P00`` by the same quadrature, centred at 0 with the given radius and node count (cached)."""
    contour = contour or ContourSpec.auto(0.0, 0.0)
    P = _P00_cached(trunc.N, contour.radius, contour.nodes)
    return OperatorMatrix(P, "projector", trunc, BlochParams(0.0, 0.0))


# -- transformation operator ------------------------------------------------


def _inv_sqrt_series(R: np.ndarray, tol: float = 1e-15, max_terms: int = 500) -> np.ndarray:
    """``(I - R)^{-1/2} = sum_k binom(2k, k) 4^{-k} R^k`` for ``|R| < 1``."""
    n = R.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    c = 1.0
    for k in range(1, max_terms + 1):
        c_next = c * (2 * k - 1) / (2 * k)
        term = term @ R
        inc = (c_next) * term
        out += inc
        c = c_next
        if np.linalg.norm(inc) < tol:
            return out
    raise NumericalError(f"inverse square-root series did not converge in {max_terms} terms")


def transformation_operator(P: OperatorMatrix, P00: OperatorMatrix):
    """Kato's pair ``(U, U^{-1})`` with ``U P00 U^{-1} = P``.

    ``U = (I - R)^{-1/2} [P P00 + (I - P)(I - P00)]``, ``R = (P - P00)^2``.
    """
    A, A0 = P.entries, P00.entries
    n = A.shape[0]
    I = np.eye(n)
    gap = np.linalg.norm(A - A0, 2)
    if gap >= 1.0:
        raise DomainError(f"|P - P00| = {gap:.3f} >= 1: parameters outside the perturbative window")
    R = (A - A0) @ (A - A0)
    S = _inv_sqrt_series(R)
    U = S @ (A @ A0 + (I - A) @ (I - A0))
    Uinv = (A0 @ A + (I - A0) @ (I - A)) @ S
    return (OperatorMatrix(U, "transformer", P.trunc, P.params),
            OperatorMatrix(Uinv, "transformer", P.trunc, P.params))


# -- bases ------------------------------------------------------------------


def unperturbed_basis(trunc: FourierTruncation) -> tuple:
    """Flat-wave kernel vectors ``(f1+, f1-, f0+, f0-)``."""
    ff = blochop.field_from_functions
    return (
        ff(trunc, np.cos, np.sin),
        ff(trunc, lambda x: -np.sin(x), np.cos),
        ff(trunc, lambda x: np.ones_like(x), lambda x: np.zeros_like(x)),
        ff(trunc, lambda x: np.zeros_like(x), lambda x: np.ones_like(x)),
    )


def mode_minus_one_vectors(trunc: FourierTruncation) -> tuple:
    """``f-1+ = (cos x, -sin x)`` and ``f-1- = (sin x, cos x)``, excluded from the kernel."""
    ff = blochop.field_from_functions
    return (ff(trunc, np.cos, lambda x: -np.sin(x)), ff(trunc, np.sin, np.cos))


@dataclass
class SymplecticBasis4:
    """Ordered quadruple ``(v1+, v1-, v0+, v0-)`` with its structure residuals."""

    vectors: tuple
    trunc: FourierTruncation
    gram_residual: float = field(default=np.nan)
    reversibility_residual: float = field(default=np.nan)
    params: Optional[BlochParams] = None

    def __post_init__(self):
        self.vectors = tuple(np.asarray(v, dtype=complex) for v in self.vectors)
        if len(self.vectors) != 4:
            raise ValueError("a symplectic basis has exactly four vectors")
        self.gram_residual = float(np.linalg.norm(self.gram() - J4))
        self.reversibility_residual = max(
            float(np.linalg.norm(blochop.apply_involution(v, self.trunc) - s * v))
            for v, s in zip(self.vectors, BASIS_SIGNS)
        )

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the basis vectors."""
        return np.column_stack(self.vectors)

    def gram(self) -> np.ndarray:
        """``gram[i, j] = (J v_j, v_i)``; equals ``J4`` for a symplectic basis."""
        V = self.matrix
        J = blochop.symplectic_J(self.trunc)
        return V.conj().T @ J @ V

    def __getitem__(self, i):
        return self.vectors[i]


def _structure_check(basis: SymplecticBasis4, tol: float, what: str) -> SymplecticBasis4:
    if basis.gram_residual > tol or basis.reversibility_residual > tol:
        raise StructureError(
            f"{what} basis lost structure: symplectic residual {basis.gram_residual:.2e}, "
            f"reversibility residual {basis.reversibility_residual:.2e} (tolerance {tol:.0e})"
        )
    return basis


def basis_F(U: OperatorMatrix, trunc: Optional[FourierTruncation] = None, tol: float = 1e-8) -> SymplecticBasis4:
    """Transport the flat-wave kernel basis by ``U``."""
    trunc = trunc or U.trunc
    vecs = tuple(U.entries @ f for f in unperturbed_basis(trunc))
    return _structure_check(SymplecticBasis4(vecs, trunc, params=U.params), tol, "F")


def normalization_n(F: SymplecticBasis4) -> complex:
    """``n = (f1-, f0-) / |f0-|^2``."""
    f0m = F[3]
    nrm2 = np.vdot(f0m, f0m).real
    if nrm2 <= 0:
        raise DomainError("f0- vanishes; cannot normalize")
    return blochop.inner(F[1], f0m) / nrm2


def basis_G(F: SymplecticBasis4, tol_real: float = 1e-10, tol: float = 1e-8) -> SymplecticBasis4:
    """Shear ``F`` so that ``g1-`` loses its ``f0-`` component.

    ``g1+ = f1+``, ``g1- = f1- - n f0-``, ``g0+ = f0+ + n f1+``, ``g0- = f0-``.
    """
    n = normalization_n(F)
    if abs(n.imag) > tol_real:
        raise StructureError(f"normalization n = {n:.3e} is not real: reversibility violated")
    n = n.real
    f1p, f1m, f0p, f0m = F.vectors
    G = SymplecticBasis4((f1p, f1m - n * f0m, f0p + n * f1p, f0m), F.trunc, params=F.params)
    return _structure_check(G, tol, "G")


def parity_residual(v: np.ndarray, trunc: FourierTruncation, sigma: int) -> float:
    """Deviation of ``v`` from the parity class ``sigma``.

    ``sigma = +1``: ``(even + i odd, odd + i even)``, i.e. real ``eta`` and
    imaginary ``psi`` Fourier coefficients; ``sigma = -1``: ``(odd + i even,
    even + i odd)``, i.e. imaginary ``eta`` and real ``psi`` coefficients.
    """
    n = trunc.size
    eta, psi = v[:n], v[n:]
    if sigma == 1:
        return float(max(np.abs(eta.imag).max(), np.abs(psi.real).max()))
    if sigma == -1:
        return float(max(np.abs(eta.real).max(), np.abs(psi.imag).max()))
    raise ValueError("sigma must be +1 or -1")


# -- reduced matrices -------------------------------------------------------


def parity_pattern_residual(B4: np.ndarray) -> float:
    """Largest imaginary part on ``i+j`` even and real part on ``i+j`` odd entries."""
    i, j = np.indices(B4.shape)
    even = (i + j) % 2 == 0
    return float(max(np.max(np.abs(B4.imag[even])), np.max(np.abs(B4.real[~even]))))


@dataclass
class ReducedBlocks:
    """Self-adjoint ``B4`` and ``L4 = J4 B4`` with the 2x2 split ``[[E, F], [F^*, G]]``."""

    B4: np.ndarray
    params: Optional[BlochParams] = None

    def __post_init__(self):
        self.B4 = np.asarray(self.B4, dtype=complex)
        if self.B4.shape != (4, 4):
            raise ValueError("B4 must be 4x4")

    @property
    def L4(self) -> np.ndarray:
        return J4 @ self.B4

    @property
    def E(self) -> np.ndarray:
        return self.B4[:2, :2]

    @property
    def F(self) -> np.ndarray:
        return self.B4[:2, 2:]

    @property
    def G(self) -> np.ndarray:
        return self.B4[2:, 2:]

    @property
    def hermitian_residual(self) -> float:
        return float(np.linalg.norm(self.B4 - self.B4.conj().T))

    @property
    def parity_residual(self) -> float:
        return parity_pattern_residual(self.B4)

    @classmethod
    def from_blocks(cls, E, F, G, params=None) -> "ReducedBlocks":
        F = np.asarray(F)
        return cls(np.block([[E, F], [F.conj().T, G]]), params)


def reduce_to_4x4(G: SymplecticBasis4, B: OperatorMatrix, tol: float = 1e-9) -> ReducedBlocks:
    """Compress ``B`` onto ``G``: ``B4[i, j] = (B g_j, g_i)``."""
    V = G.matrix
    B4 = V.conj().T @ B.entries @ V
    out = ReducedBlocks(B4, B.params)
    if out.parity_residual > tol:
        raise StructureError(f"reduced matrix breaks the real/imaginary parity pattern by {out.parity_residual:.2e}")
    return out


def split_B_operators(params: BlochParams, coeffs: StokesCoefficients, trunc: FourierTruncation, analytic: bool = False):
    """``(B_eps, B_flat, B_sharp)`` with ``B = B_eps + B_flat + B_sharp``.

    ``B_eps`` is ``B`` at ``mu = 0``; ``B_flat = diag(0, mu sgn(D) + |mu| Pi_0)``;
    ``B_sharp = mu [[0, -i p], [i p, 0]]``.
    """
    n = trunc.size
    mu = params.mu
    _, Beps = blochop.assemble_L_shifted(BlochParams(0.0, params.eps), coeffs, trunc)
    Bflat = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    Bflat[n:, n:] = blochop.multiplier_absDmu(mu, trunc, analytic) - np.diag(np.abs(trunc.modes))
    Tp = blochop.toeplitz_from_trig(coeffs.p, trunc)
    Bsharp = np.zeros_like(Bflat)
    Bsharp[:n, n:] = -1j * mu * Tp
    Bsharp[n:, :n] = 1j * mu * Tp
    return Beps.entries, Bflat, Bsharp


def split_B_contributions(params: BlochParams, coeffs: StokesCoefficients, trunc: FourierTruncation,
                          G: SymplecticBasis4, analytic: bool = False, tol: float = 1e-12):
    """4x4 compressions ``(Beps4, Bflat4, Bsharp4)`` of the three pieces of ``B`` onto ``G``."""
    parts = split_B_operators(params, coeffs, trunc, analytic)
    _, B = blochop.assemble_L_shifted(params, coeffs, trunc, analytic)
    mismatch = np.linalg.norm(sum(parts) - B.entries)
    if mismatch > tol:
        raise NumericalError(f"B split does not add up: mismatch {mismatch:.2e}")
    V = G.matrix
    return tuple(V.conj().T @ X @ V for X in parts)


# -- pipeline ---------------------------------------------------------------


@dataclass
class Reduction:
    """Everything produced while reducing one ``(mu, eps)`` point."""

    params: BlochParams
    trunc: FourierTruncation
    contour: ContourSpec
    L: OperatorMatrix
    B: OperatorMatrix
    P: OperatorMatrix
    U: OperatorMatrix
    Uinv: OperatorMatrix
    F: SymplecticBasis4
    G: SymplecticBasis4
    blocks: ReducedBlocks
    certificate: dict

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the full operator on the reduced subspace (``L4 + i mu``)."""
        return np.linalg.eigvals(self.blocks.L4) + 1j * self.params.mu


def reduce_point(mu: float, eps: float, N: int = 32, contour: Optional[ContourSpec] = None,
                 radius: Optional[float] = None, nodes: int = 64, analytic: bool = False) -> Reduction:
    """Run projector -> transformation operator -> bases -> 4x4 matrix at ``(mu, eps)``.

    With neither ``contour`` nor ``radius`` given, :meth:`ContourSpec.auto` is used;
    a bare ``radius`` means a circle of that radius centred at 0.
    """
    params = BlochParams(mu, eps)
    trunc = FourierTruncation(N)
    coeffs = stokes_coefficients(eps)
    if contour is None:
        contour = ContourSpec(0j, radius, nodes) if radius is not None else ContourSpec.auto(mu, eps, nodes)
    Lsh, B = blochop.assemble_L_shifted(params, coeffs, trunc, analytic)
    L = blochop.full_operator(Lsh)
    P = riesz_projector(L, contour)
    P00 = projector_at_origin(trunc, ContourSpec(0j, contour.radius, contour.nodes)
                              if radius is not None else ContourSpec.auto(0.0, 0.0, contour.nodes))
    U, Uinv = transformation_operator(P, P00)
    F = basis_F(U, trunc)
    G = basis_G(F)
    blocks = reduce_to_4x4(G, B)
    return Reduction(params, trunc, contour, L, B, P, U, Uinv, F, G, blocks, projector_certificate(P, L))
