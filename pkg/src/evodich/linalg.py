"""Dense complex linear-algebra kernel.

All routines accept anything ``numpy.asarray`` understands and compute in
complex128. Operator norms are spectral (2-) norms throughout.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, SingularResolventError

__all__ = [
    "as_matrix",
    "eigenvalues",
    "matrix_exponential",
    "min_singular_value",
    "opnorm",
    "resolvent",
    "resolvent_norm",
    "hausdorff_distance",
]

#: absolute distance below which ``z`` is considered to be an eigenvalue
EIG_TOL = 1e-9


def as_matrix(M, square=True) -> np.ndarray:
    """Return ``M`` as a finite 2-d complex array.

    Raises :class:`DimensionError` for non-2-d (or, with ``square``,
    non-square) input and :class:`DomainError` for NaN/Inf entries.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"expected a 2-d matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    return M


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a square matrix, repeated by algebraic multiplicity."""
    return scipy.linalg.eigvals(as_matrix(M))


def matrix_exponential(M) -> np.ndarray:
    """``exp(M)`` by scaling and squaring with a Pade approximant.

    A stack of matrices (shape ``(..., n, n)``) is exponentiated elementwise.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim == 2:
        M = as_matrix(M)
    elif M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionError(f"expected (..., n, n), got shape {M.shape}")
    if not np.any(M):
        return np.broadcast_to(np.eye(M.shape[-1], dtype=complex), M.shape).copy()
    return scipy.linalg.expm(M)


def min_singular_value(M) -> float:
    """Smallest singular value of a (possibly rectangular) matrix."""
    M = as_matrix(M, square=False)
    return float(scipy.linalg.svdvals(M)[-1])


def opnorm(M) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _check_off_spectrum(A, z, tol):
    lam = eigenvalues(A)
    i = int(np.argmin(np.abs(lam - z)))
    if abs(lam[i] - z) <= tol:
        raise SingularResolventError(
            f"z = {z} lies within {tol:g} of the eigenvalue {lam[i]}", eigenvalue=lam[i]
        )
    return lam


def resolvent(A, z, tol=EIG_TOL) -> np.ndarray:
    """``(z I - A)^{-1}``; raises if ``z`` is within ``tol`` of the spectrum."""
    A = as_matrix(A)
    _check_off_spectrum(A, z, tol)
    n = A.shape[0]
    return scipy.linalg.solve(z * np.eye(n) - A, np.eye(n, dtype=complex))


def resolvent_norm(A, z, tol=EIG_TOL) -> float:
    """Spectral norm of ``(z I - A)^{-1}``, computed as ``1 / sigma_min(zI - A)``."""
    A = as_matrix(A)
    lam = _check_off_spectrum(A, z, tol)
    smin = min_singular_value(z * np.eye(A.shape[0]) - A)
    if smin == 0.0:
        i = int(np.argmin(np.abs(lam - z)))
        raise SingularResolventError(f"zI - A is singular at z = {z}", eigenvalue=lam[i])
    return 1.0 / smin


def hausdorff_distance(S1, S2) -> float:
    """Symmetric Hausdorff distance between two finite sets of complex numbers.

    Multiplicity is irrelevant: the inputs are treated as point sets.
    """
    a = np.ravel(np.asarray(S1, dtype=complex))
    b = np.ravel(np.asarray(S2, dtype=complex))
    if a.size == 0 or b.size == 0:
        raise DomainError("Hausdorff distance of an empty set is undefined")
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
