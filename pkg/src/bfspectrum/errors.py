"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`DomainError` -> 2,
:class:`NumericalError` (and subclasses) -> 3.
"""


class BFSpectrumError(Exception):
    """Base class for all package errors."""


class DomainError(BFSpectrumError, ValueError):
    """An input lies outside the admissible parameter window."""


class WindowError(DomainError):
    """The perturbative (mu, eps) window was left during the reduction."""


class NumericalError(BFSpectrumError, RuntimeError):
    """A numerical kernel failed or produced an uncertified result."""


class ContourError(NumericalError):
    """The contour quadrature did not produce a valid spectral projector."""


class StructureError(NumericalError):
    """A Hamiltonian, symplectic or reversibility certificate was lost."""


class ConvergenceError(NumericalError):
    """An iteration did not converge.

    ``history`` holds the residual sequence that was observed.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
