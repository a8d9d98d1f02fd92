"""Riesz projections of truncated weighted shifts and dichotomy certificates.

For a hyperbolic truncation ``T`` the projection onto the spectral part inside
the unit disk is

    P = (2 pi i)^{-1} \\oint_{|lam|=1} (lam - T)^{-1} dlam,

evaluated with the trapezoid rule on uniform circle nodes. Its diagonal blocks
``P(n)`` are the pointwise dichotomy projectors; the off-diagonal blocks must
vanish (the projection acts by multiplication). From ``P(n)`` and the blocks
``a_n`` we fit the dichotomy constants, split ``(I - T)^{-1}`` into two
Neumann series, and solve ``g(n) - a_n g(n-1) = f(n)`` with the dichotomy
Green kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    CertificateRefusedError,
    DivergenceError,
    DomainError,
    NonMultiplicativeProjectionError,
    NotHyperbolicError,
)
from .evolution import EvolutionFamily
from .linalg import min_singular_value, opnorm
from .shift import HYPERBOLIC_THRESHOLD, WeightedShiftOperator, circle_margin, shift_matrix

__all__ = [
    "RieszProjection",
    "PointwiseProjections",
    "DichotomyCertificate",
    "GreenKernel",
    "contour_projection",
    "extract_pointwise",
    "verify_dichotomy",
    "neumann_inverse",
    "green_solve",
    "difference_residual",
]


@dataclass(frozen=True, eq=False)
class RieszProjection:
    matrix: np.ndarray
    idempotency_residual: float
    commutation_residual: float
    margin: float = math.nan
    quad_nodes: int = 0

    @property
    def rank(self):
        return int(round(np.trace(self.matrix).real))


def contour_projection(op: WeightedShiftOperator, quad_nodes=256, n_samples=256,
                       threshold=HYPERBOLIC_THRESHOLD) -> RieszProjection:
    """Riesz projection of ``T`` for the spectrum inside the unit disk.

    Refuses (:class:`NotHyperbolicError`) unless the circle margin exceeds
    ``threshold``.
    """
    if quad_nodes < 4:
        raise DomainError("need at least 4 quadrature nodes")
    scan = circle_margin(op, n_samples)
    if not scan.margin > threshold:
        raise NotHyperbolicError(
            f"circle margin {scan.margin:.3g} <= {threshold:g} at lambda = {scan.argmin:.4g}",
            margin=scan.margin, argmin=scan.argmin)
    T = shift_matrix(op)
    n = T.shape[0]
    eye = np.eye(n)
    P = np.zeros((n, n), complex)
    # dlam = i lam dtheta, so P = mean_j lam_j (lam_j - T)^{-1}; fixed summation order
    for j in range(quad_nodes):
        lam = np.exp(2j * np.pi * j / quad_nodes)
        P += lam * scipy.linalg.solve(lam * eye - T, eye, check_finite=False)
    P /= quad_nodes
    return RieszProjection(P, opnorm(P @ P - P), opnorm(P @ T - T @ P),
                           margin=scan.margin, quad_nodes=quad_nodes)


def _snap_projector(P, iters=60):
    # Newton-Schulz style iteration X <- 3X^2 - 2X^3 sends eigenvalues near 0/1 to 0/1
    X = P
    for _ in range(iters):
        X2 = X @ X
        Xn = 3 * X2 - 2 * X2 @ X
        if opnorm(Xn - X) <= 1e-15 * max(1.0, opnorm(X)):
            return Xn
        X = Xn
    return X


@dataclass(frozen=True, eq=False)
class PointwiseProjections:
    """Diagonal blocks ``P(n)``, ``n = -N..N`` (row ``n + N``)."""

    P: np.ndarray
    offdiagonal_residual: float
    idempotency_residual: float

    @property
    def window(self):
        return (self.P.shape[0] - 1) // 2

    @property
    def d(self):
        return self.P.shape[1]

    def __getitem__(self, n):
        return self.P[n + self.window]

    @property
    def rank_profile(self):
        return [int(round(np.trace(p).real)) for p in self.P]

    @property
    def central_indices(self):
        return range(-(self.window // 2), self.window // 2 + 1)


def extract_pointwise(proj, d, tol=1e-6, central=True) -> PointwiseProjections:
    """Split a projection into ``d x d`` diagonal blocks ``P(n)``.

    The off-diagonal residual is the largest spectral norm of an off-diagonal
    block in a row ``|n| <= N/2`` (all rows with ``central=False``). Each
    ``P(n)`` is snapped to an exact idempotent afterwards.
    """
    P = proj.matrix if isinstance(proj, RieszProjection) else np.asarray(proj, complex)
    size = P.shape[0]
    if size % d or (size // d) % 2 != 1:
        raise DomainError(f"matrix of size {size} is not (2N+1) blocks of size {d}")
    K = size // d
    N = (K - 1) // 2
    B = P.reshape(K, d, K, d).transpose(0, 2, 1, 3)
    rows = range(N - N // 2, N + N // 2 + 1) if central else range(K)
    off = 0.0
    for i in rows:
        others = np.delete(B[i], i, axis=0)
        if len(others):
            off = max(off, float(np.max(np.linalg.norm(others, 2, axis=(1, 2)))))
    if off > tol:
        raise NonMultiplicativeProjectionError(
            f"off-diagonal block norm {off:.3g} exceeds {tol:g}", residual=off)
    diag = np.stack([B[i, i] for i in range(K)])
    idem = max(opnorm(p @ p - p) for p in diag)
    snapped = np.stack([_snap_projector(p) for p in diag])
    return PointwiseProjections(snapped, off, idem)


def _range_basis(P, tol=1e-8):
    # orthonormal basis of range(P) for an idempotent P
    if P.size == 0:
        return P
    U, s, _ = np.linalg.svd(P)
    r = int(np.sum(s > tol * max(1.0, s[0] if len(s) else 1.0)))
    return U[:, :r]


@dataclass(frozen=True)
class DichotomyCertificate:
    """Constants ``(M, lambda)`` with ``||U v|| <= M e^{-lambda t}||v||`` on ranges
    and ``||U v|| >= M^{-1} e^{lambda t}||v||`` on kernels, plus residuals."""

    M: float
    rate: float
    intertwining_residual: float
    stable_decay_residual: float
    unstable_growth_residual: float
    rank_profile: list
    kernel_invertibility: float
    stable_rate: float = math.nan
    unstable_rate: float = math.nan
    propagator_mismatch: float = math.nan
    fit_samples: list = field(default_factory=list, repr=False)

    @property
    def lambda_(self):
        return self.rate


def verify_dichotomy(proj: PointwiseProjections, op: WeightedShiftOperator,
                     fam: EvolutionFamily | None = None, max_lag=None) -> DichotomyCertificate:
    """Check the dichotomy conditions on the central half of the window.

    * intertwining ``P(n) a_n = a_n P(n-1)``;
    * decay/growth: least-squares slopes of ``log||U(n, m) v||`` against
      ``n - m`` for ``1 <= n - m <= N/2`` and orthonormal basis vectors ``v``
      of ``Im P(m)`` / ``Ker P(m)``, with ``M`` inflated to dominate all
      samples;
    * ``a_n`` maps ``Ker P(n-1)`` onto ``Ker P(n)`` (smallest singular value of
      the restriction, recorded as ``kernel_invertibility``).

    ``U(n, m)`` is the block product ``a_n ... a_{m+1}``. When ``fam`` is
    given the longest product is compared with ``fam.propagate`` and the
    relative gap is recorded as ``propagator_mismatch``.
    """
    N = proj.window
    if op.window != N or op.d != proj.d:
        raise DomainError("projections and operator have different shapes")
    half = N // 2
    lag = half if max_lag is None else int(max_lag)
    if lag < 1:
        raise DomainError("window too small for a decay fit")
    central = range(-half, half + 1)

    inter = 0.0
    kern = math.inf
    for n in central:
        a, Pn, Pm = op.block(n), proj[n], proj[n - 1] if n > -N else proj[N]
        inter = max(inter, opnorm(Pn @ a - a @ Pm))
        Km = _range_basis(np.eye(proj.d) - Pm)
        Kn = _range_basis(np.eye(proj.d) - Pn)
        if Km.shape[1] != Kn.shape[1]:
            kern = 0.0
        elif Km.shape[1]:
            kern = min(kern, min_singular_value(Kn.conj().T @ a @ Km))

    eye = np.eye(proj.d)
    stable, unstable = [], []
    for m in central:
        # orbits are re-projected every step: exact under intertwining, and it stops
        # rounding noise in the growing directions from swamping decaying orbits
        Ws = _range_basis(proj[m])
        Wu = _range_basis(eye - proj[m])
        for n in range(m + 1, min(m + lag, N) + 1):
            a = op.block(n)
            Ws = proj[n] @ (a @ Ws)
            Wu = (eye - proj[n]) @ (a @ Wu)
            tau = n - m
            stable += [(tau, math.log(x)) for x in np.linalg.norm(Ws, axis=0)]
            unstable += [(tau, math.log(x)) for x in np.linalg.norm(Wu, axis=0)]

    def fit(data):
        if not data:
            return math.nan, 0.0
        t, y = np.array(data).T
        X = np.column_stack([np.ones_like(t), t])
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        return float(coef[1]), float(np.sqrt(np.mean((X @ coef - y) ** 2)))

    s_slope, s_res = fit(stable)
    u_slope, u_res = fit(unstable)
    rates = [r for r in (-s_slope, u_slope) if not math.isnan(r)]
    rate = min(rates)
    if not rate > 0:
        raise CertificateRefusedError(f"fitted dichotomy rate {rate:.3g} is not positive",
                                      rate=rate)
    logM = 0.0
    for tau, y in stable:
        logM = max(logM, y + rate * tau)
    for tau, y in unstable:
        logM = max(logM, rate * tau - y)

    mismatch = math.nan
    if fam is not None:
        m0, n0 = -half, min(-half + lag, N)
        U = np.eye(proj.d, dtype=complex)
        for n in range(m0 + 1, n0 + 1):
            U = op.block(n) @ U
        h, x0 = op.spacing, op.base_point
        Uf = fam.propagate(x0 + m0 * h, x0 + n0 * h)
        mismatch = opnorm(U - Uf) / max(opnorm(Uf), 1e-300)

    return DichotomyCertificate(
        M=math.exp(logM), rate=rate, intertwining_residual=inter,
        stable_decay_residual=s_res, unstable_growth_residual=u_res,
        rank_profile=proj.rank_profile, kernel_invertibility=float(kern),
        stable_rate=-s_slope, unstable_rate=u_slope, propagator_mismatch=mismatch,
        fit_samples=[("stable",) + s for s in stable] + [("unstable",) + s for s in unstable])


def _series(X, start, tol, max_terms, burn_in, what):
    total = start.copy()
    term = start
    history = [opnorm(term)]
    for k in range(1, max_terms + 1):
        term = X @ term
        nrm = opnorm(term)
        total += term
        history.append(nrm)
        if nrm < tol:
            return total, k
        if k >= burn_in and nrm >= history[k - burn_in]:
            raise DivergenceError(
                f"{what} Neumann series is not contracting: term {k} has norm {nrm:.3g}")
    raise DivergenceError(f"{what} Neumann series did not reach {tol:g} in {max_terms} terms")


def neumann_inverse(op: WeightedShiftOperator, P, tol=1e-14, max_terms=20000, burn_in=50):
    """``(I - T)^{-1}`` as ``sum_{k>=0} T_P^k - sum_{k>=1} (T_Q^{-1})^k``.

    ``T_P = P T P`` acts on ``Im P``, ``T_Q = Q T Q`` on ``Im Q`` with
    ``Q = I - P``. Each series stops once a term has norm below ``tol``
    (relative to the leading term). Raises :class:`DivergenceError` when term
    norms stop decreasing after ``burn_in`` terms.
    """
    T = shift_matrix(op)
    Pm = P.matrix if isinstance(P, RieszProjection) else np.asarray(P, complex)
    n = T.shape[0]
    Q = np.eye(n) - Pm
    out = np.zeros((n, n), complex)
    if opnorm(Pm) > 0:
        scale = opnorm(Pm)
        stable, _ = _series(Pm @ T @ Pm, Pm, tol * scale, max_terms, burn_in, "stable")
        out += stable
    if opnorm(Q) > 0:
        # inverse of T on Im Q, extended by zero on Im P
        S = Q @ T @ Q + Pm
        try:
            TQinv = Q @ np.linalg.solve(S, Q)
        except np.linalg.LinAlgError as exc:
            raise DivergenceError("T is not invertible on the unstable subspace") from exc
        first = TQinv
        scale = opnorm(first)
        unstable, _ = _series(TQinv, first, tol * scale, max_terms, burn_in, "unstable")
        out -= unstable
    return out


@dataclass(frozen=True, eq=False)
class GreenKernel:
    """Blocks ``a_n`` and projectors ``P(n)`` of a certified dichotomy."""

    blocks: np.ndarray
    projections: np.ndarray
    hyperbolic: bool = True

    @classmethod
    def from_certificate(cls, op, proj, certificate):
        ok = certificate is not None and certificate.rate > 0
        return cls(op.blocks, proj.P, hyperbolic=ok)

    @property
    def window(self):
        return (self.blocks.shape[0] - 1) // 2


def green_solve(kernel: GreenKernel, f) -> np.ndarray:
    """Bounded solution of ``g(n) - a_n g(n-1) = f(n)`` with ``f`` supported on the window.

    ``g(n) = sum_{m<=n} U(n,m) P(m) f(m) - sum_{m>n} U(n,m) Q(m) f(m)``, with
    ``U(n,m)`` for ``n < m`` the inverse of ``a`` restricted to the kernels.
    Both sums are evaluated by recursion. ``f`` has shape ``(2N+1, d)``.
    """
    if not kernel.hyperbolic:
        raise NotHyperbolicError("green_solve needs a certified hyperbolic kernel")
    a, P = kernel.blocks, kernel.projections
    K, d = a.shape[0], a.shape[1]
    f = np.asarray(f, dtype=complex).reshape(K, d)
    eye = np.eye(d)
    stable = np.zeros((K, d), complex)
    acc = np.zeros(d, complex)
    for i in range(K):
        acc = P[i] @ f[i] + (a[i] @ acc if i else 0)
        stable[i] = acc
    unstable = np.zeros((K, d), complex)
    acc = np.zeros(d, complex)
    for i in range(K - 2, -1, -1):
        Qi, Qn = eye - P[i], eye - P[i + 1]
        Ki, Kn = _range_basis(Qi), _range_basis(Qn)
        if Ki.shape[1] == 0:
            acc = np.zeros(d, complex)
        else:
            C = Kn.conj().T @ a[i + 1] @ Ki
            acc = Ki @ np.linalg.solve(C, Kn.conj().T @ (acc - Qn @ f[i + 1]))
        unstable[i] = acc
    return stable + unstable


def difference_residual(blocks, g, f) -> float:
    """``max_n |g(n) - a_n g(n-1) - f(n)|`` over ``n = -N+1..N``, relative to ``max|f|``."""
    a = np.asarray(blocks)
    r = g[1:] - np.einsum("nij,nj->ni", a[1:], g[:-1]) - f[1:]
    scale = max(float(np.max(np.linalg.norm(f, axis=1))), 1e-300)
    return float(np.max(np.linalg.norm(r, axis=1))) / scale
