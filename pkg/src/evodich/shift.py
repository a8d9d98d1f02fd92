"""Truncated weighted shift operators ``T = D_a S`` on a window of ``Z``.

``T`` acts on sequences ``(v_n)_{n=-N..N}`` by ``(T v)_n = a_n v_{n-1}``. With
``boundary="periodic"`` the wrap ``(T v)_{-N} = a_{-N} v_N`` closes the cycle
(block circulant structure); with ``boundary="zero"`` the wrap is dropped
(block Toeplitz style truncation).

Block index ``n`` lives at array row ``n + N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, UnsupportedPolicyError
from .evolution import EvolutionFamily, monodromy_blocks
from .linalg import hausdorff_distance

__all__ = [
    "HYPERBOLIC_THRESHOLD",
    "WeightedShiftOperator",
    "CircleScan",
    "assemble",
    "shift_matrix",
    "circle_margin",
    "spectrum",
    "rotation_invariance_defect",
    "base_point_consistency",
]

#: circle margin above which a truncation is declared hyperbolic
HYPERBOLIC_THRESHOLD = 0.05

BOUNDARIES = ("periodic", "zero")


@dataclass(frozen=True, eq=False)
class WeightedShiftOperator:
    """Blocks ``a_n`` (shape ``(2N+1, d, d)``) with a boundary policy."""

    blocks: np.ndarray
    boundary: str = "periodic"
    base_point: float = 0.0
    spacing: float = 1.0

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim == 1:
            b = b[:, None, None]
        if b.ndim != 3 or b.shape[1] != b.shape[2]:
            raise DimensionError(f"blocks must have shape (2N+1, d, d), got {b.shape}")
        if b.shape[0] % 2 != 1:
            raise DimensionError("need an odd number of blocks (indices -N..N)")
        if self.boundary not in BOUNDARIES:
            raise DomainError(f"boundary must be one of {BOUNDARIES}")
        b.flags.writeable = False
        object.__setattr__(self, "blocks", b)

    @classmethod
    def from_family(cls, fam: EvolutionFamily, x0=0.0, N=32, boundary="periodic", spacing=1.0):
        return cls(monodromy_blocks(fam, x0, N, spacing), boundary=boundary,
                   base_point=float(x0), spacing=float(spacing))

    @classmethod
    def constant(cls, a, N, boundary="periodic"):
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        return cls(np.broadcast_to(a, (2 * N + 1,) + a.shape).copy(), boundary=boundary)

    @property
    def window(self):
        return (self.blocks.shape[0] - 1) // 2

    @property
    def d(self):
        return self.blocks.shape[1]

    @property
    def size(self):
        return self.blocks.shape[0] * self.d

    def block(self, n):
        return self.blocks[n + self.window]


def shift_matrix(op: WeightedShiftOperator) -> np.ndarray:
    """Dense matrix of ``T = D_a S``."""
    K, d = op.blocks.shape[0], op.d
    T = np.zeros((K * d, K * d), complex)
    for i in range(1, K):
        T[i * d:(i + 1) * d, (i - 1) * d:i * d] = op.blocks[i]
    if op.boundary == "periodic":
        T[0:d, (K - 1) * d:] = op.blocks[0]
    return T


def assemble(op: WeightedShiftOperator, lam) -> np.ndarray:
    """``lam I - T``: ``lam`` on the diagonal, ``-a_n`` at block ``(n, n-1)``."""
    M = -shift_matrix(op)
    M[np.diag_indices_from(M)] += lam
    return M


@dataclass(frozen=True, eq=False)
class CircleScan:
    """``sigma_min(lam I - T)`` sampled at ``lam_j = exp(2 pi i j / n)``."""

    points: np.ndarray
    sigma_min: np.ndarray

    @property
    def margin(self):
        return float(self.sigma_min.min())

    @property
    def argmin(self):
        return complex(self.points[int(np.argmin(self.sigma_min))])

    @property
    def samples(self):
        return list(zip(self.points, self.sigma_min))

    def hyperbolic(self, threshold=HYPERBOLIC_THRESHOLD):
        return self.margin > threshold


def circle_margin(op: WeightedShiftOperator, n_samples=256) -> CircleScan:
    """Smallest singular value of ``lam I - T`` over uniform points of the unit circle."""
    if n_samples < 8:
        raise DomainError("need at least 8 circle samples")
    T = shift_matrix(op)
    pts = np.exp(2j * np.pi * np.arange(n_samples) / n_samples)
    eye = np.eye(T.shape[0])
    smin = np.array([scipy.linalg.svdvals(lam * eye - T, check_finite=False)[-1] for lam in pts])
    return CircleScan(pts, smin)


def spectrum(op: WeightedShiftOperator) -> np.ndarray:
    """Eigenvalues of the truncated ``T``."""
    return scipy.linalg.eigvals(shift_matrix(op))


def rotation_invariance_defect(op: WeightedShiftOperator, j) -> float:
    """Hausdorff distance between ``sigma(T)`` and ``exp(i xi) sigma(T)``,
    ``xi = 2 pi j / (2N+1)``.

    Only periodic truncations carry the discrete rotation symmetry.
    """
    if op.boundary != "periodic":
        raise UnsupportedPolicyError("rotation invariance needs the periodic boundary")
    if j % (2 * op.window + 1) == 0:
        return 0.0
    sig = spectrum(op)
    xi = 2 * np.pi * j / (2 * op.window + 1)
    return hausdorff_distance(np.exp(1j * xi) * sig, sig)


def base_point_consistency(fam: EvolutionFamily, x_list, N, n_samples=256,
                           boundary="periodic", spacing=1.0) -> float:
    """Largest pairwise difference of circle margins over base points ``x_list``."""
    margins = [circle_margin(WeightedShiftOperator.from_family(fam, x, N, boundary, spacing),
                             n_samples).margin for x in x_list]
    return float(max(margins) - min(margins)) if margins else math.nan
