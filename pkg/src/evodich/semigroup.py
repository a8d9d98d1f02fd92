"""Matrix-level checks for ``t -> exp(tA)``.

Spectral mapping ``sigma(exp(tA)) = exp(t sigma(A))``, spectral versus growth
bound, imaginary-axis resolvent scans, and a report cross-checking the
equivalent characterizations of ``1 in rho(exp(2 pi A))``:

* ``i Z`` is in the resolvent set of ``A`` (equivalently ``0 in rho(B)`` for
  the periodic evolution generator ``B = -d/dx + A``, whose spectrum is
  ``sigma(A) + i Z``), and
* ``sup_k ||(A - ik)^{-1}|| < infinity``.

On the real line the analogous statement is that ``exp(tA)`` has no spectrum
on the unit circle iff ``A`` has no purely imaginary eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import SingularPointError
from .linalg import (
    EIG_TOL,
    as_matrix,
    eigenvalues,
    hausdorff_distance,
    matrix_exponential,
    opnorm,
    resolvent_norm,
)

__all__ = [
    "spectral_map_check",
    "spectral_bound",
    "growth_bound",
    "growth_bound_fit",
    "ResolventScan",
    "imaginary_resolvent_scan",
    "SemigroupMargin",
    "semigroup_hyperbolicity",
    "EquivalenceReport",
    "equivalence_report",
]

TWO_PI = 2.0 * math.pi

#: distance of an eigenvalue of exp(2 pi A) from 1 below which 1 is in the spectrum
MONODROMY_TOL = TWO_PI * EIG_TOL


def spectral_map_check(A, t) -> float:
    """Hausdorff distance between ``sigma(exp(tA))`` and ``exp(t sigma(A))``."""
    if not t > 0:
        raise ValueError("t must be positive")
    A = as_matrix(A)
    lhs = eigenvalues(matrix_exponential(t * A))
    rhs = np.exp(t * eigenvalues(A))
    return hausdorff_distance(lhs, rhs)


def spectral_bound(A) -> float:
    """``s(A) = max Re sigma(A)``."""
    return float(np.max(eigenvalues(A).real))


def growth_bound(A, t=1.0) -> float:
    """``omega(A) = log r(exp(tA)) / t``, exact for matrices."""
    A = as_matrix(A)
    r = float(np.max(np.abs(eigenvalues(matrix_exponential(t * A)))))
    return math.log(r) / t if r > 0 else -math.inf


def growth_bound_fit(A, times=(10.0, 20.0, 40.0)) -> float:
    """Least-squares slope of ``log||exp(tA)||`` over ``times``.

    Needs no eigenvalues, at the price of transient error ``O(1/t)``.
    """
    A = as_matrix(A)
    t = np.asarray(times, dtype=float)
    y = np.array([math.log(opnorm(matrix_exponential(ti * A))) for ti in t])
    return float(np.polyfit(t, y, 1)[0])


@dataclass(frozen=True)
class ResolventScan:
    """``||(A - ik)^{-1}||`` for ``|k| <= k_max`` plus the tail bound ``1/(k_max + 1 - ||A||)``."""

    entries: list
    k_max: int
    tail_bound: float
    supremum: float

    @property
    def argmax(self):
        return max(self.entries, key=lambda e: e[1])[0]


def imaginary_resolvent_scan(A, k_max) -> ResolventScan:
    """Scan ``k -> ||(A - ik)^{-1}||`` over ``-k_max..k_max``.

    For ``|k| > ||A||``, ``||(A - ik)^{-1}|| <= 1 / (|k| - ||A||)``, so once
    ``k_max >= ||A||`` the unscanned tail is bounded by
    ``1 / (k_max + 1 - ||A||)``; otherwise the tail bound is infinite.
    """
    A = as_matrix(A)
    lam = eigenvalues(A)
    entries = []
    for k in range(-int(k_max), int(k_max) + 1):
        i = int(np.argmin(np.abs(lam - 1j * k)))
        if abs(lam[i] - 1j * k) <= EIG_TOL:
            raise SingularPointError(f"i*{k} is an eigenvalue of A", k=k, eigenvalue=lam[i])
        entries.append((k, resolvent_norm(A, 1j * k)))
    nrm = opnorm(A)
    tail = 1.0 / (k_max + 1 - nrm) if k_max >= nrm else math.inf
    sup = max(max(v for _, v in entries), tail)
    return ResolventScan(entries, int(k_max), tail, sup)


@dataclass(frozen=True)
class SemigroupMargin:
    """``min_mu ||mu| - 1|`` over ``mu in sigma(exp(tA))`` and the minimizing ``mu``."""

    margin: float
    eigenvalue: complex

    def __float__(self):
        return self.margin


def semigroup_hyperbolicity(A, t=1.0) -> SemigroupMargin:
    """Distance of ``|sigma(exp(tA))|`` from 1."""
    if not t > 0:
        raise ValueError("t must be positive")
    mu = eigenvalues(matrix_exponential(t * as_matrix(A)))
    gap = np.abs(np.abs(mu) - 1.0)
    i = int(np.argmin(gap))
    return SemigroupMargin(float(gap[i]), complex(mu[i]))


@dataclass(frozen=True)
class EquivalenceReport:
    spectral_bound: float
    growth_bound: float
    growth_bound_fit: float
    one_in_rho_monodromy: bool
    monodromy_margin: float
    iZ_in_rho: bool
    nearest_k: int
    nearest_k_distance: float
    resolvent_sup: float
    resolvent_k_max: int
    hyperbolic: bool
    hyperbolic_margin: float
    imaginary_axis_distance: float
    verdicts: dict = field(default_factory=dict)
    inconsistencies: list = field(default_factory=list)

    @property
    def consistent(self):
        return not self.inconsistencies

    def as_dict(self):
        return asdict(self)


def equivalence_report(A, k_max=32) -> EquivalenceReport:
    """Evaluate every characterization and flag disagreements.

    Checks (each a key of ``verdicts``, ``True`` meaning consistent):

    ``spectral_mapping``
        ``s(A) = omega(A)`` within ``1e-9`` (scaled by ``max(1, |s|)``).
    ``periodic``
        ``1 in rho(exp(2 pi A))`` iff ``i Z`` is in ``rho(A)``.
    ``gearhart``
        ``1 in rho(exp(2 pi A))`` iff ``i Z in rho(A)`` and the resolvent
        supremum is finite.
    ``real_line``
        ``sigma(exp(A))`` misses the unit circle iff no eigenvalue of ``A``
        is purely imaginary.

    The scan range is raised to ``ceil(||A||)`` if needed so the tail bound
    is valid.
    """
    A = as_matrix(A)
    lam = eigenvalues(A)
    s = float(np.max(lam.real))
    w = growth_bound(A)
    w_fit = growth_bound_fit(A)

    mu = eigenvalues(matrix_exponential(TWO_PI * A))
    mono_margin = float(np.min(np.abs(mu - 1.0)))
    one_in_rho = mono_margin > MONODROMY_TOL

    k_near = np.round(lam.imag).astype(int)
    dist = np.abs(lam - 1j * k_near)
    j = int(np.argmin(dist))
    nearest_k, nearest_dist = int(k_near[j]), float(dist[j])
    iz_in_rho = nearest_dist > EIG_TOL

    k_scan = max(int(k_max), math.ceil(opnorm(A)))
    if iz_in_rho:
        sup = imaginary_resolvent_scan(A, k_scan).supremum
    else:
        sup = math.inf

    hyp = semigroup_hyperbolicity(A, 1.0)
    axis_dist = float(np.min(np.abs(lam.real)))
    hyperbolic = hyp.margin > EIG_TOL

    verdicts = {
        "spectral_mapping": abs(s - w) <= 1e-9 * max(1.0, abs(s)),
        "periodic": one_in_rho == iz_in_rho,
        "gearhart": one_in_rho == (iz_in_rho and math.isfinite(sup)),
        "real_line": hyperbolic == (axis_dist > EIG_TOL),
    }
    return EquivalenceReport(
        spectral_bound=s, growth_bound=w, growth_bound_fit=w_fit,
        one_in_rho_monodromy=bool(one_in_rho), monodromy_margin=mono_margin,
        iZ_in_rho=bool(iz_in_rho), nearest_k=nearest_k, nearest_k_distance=nearest_dist,
        resolvent_sup=float(sup), resolvent_k_max=k_scan,
        hyperbolic=bool(hyperbolic), hyperbolic_margin=hyp.margin,
        imaginary_axis_distance=axis_dist,
        verdicts=verdicts, inconsistencies=[k for k, ok in verdicts.items() if not ok])
