"""Approximate-kernel witnesses and resolvent identities on ``[0, 2 pi]``.

Functions here live on the uniform periodic grid ``x_j = 2 pi j / M``,
``j = 0..M-1``. The generator of the periodic evolution semigroup acts as
``B f = -f' + A f``. For the cut-off witness

    g(x) = (1 - alpha(x)) exp((2 pi + x) A) v + alpha(x) exp(x A) v

one has ``B g = alpha'(x) exp(x A) (exp(2 pi A) v - v)`` exactly, so both
``g`` and ``B g`` are evaluated in closed form and only the norms are
discretized.

Norm selectors are strings: ``"C"`` (max over nodes) or ``"L<p>"`` such as
``"L1"``, ``"L2"``, ``"L2.5"`` (rectangle rule).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import DomainError, PreconditionError, SingularMonodromyError, SingularResolventError
from .linalg import EIG_TOL, as_matrix, eigenvalues, matrix_exponential, opnorm

__all__ = [
    "TWO_PI",
    "GridFunction",
    "bump",
    "bump_derivative",
    "BUMP_SLOPE_MAX",
    "grid_norm",
    "near_fixed_vector",
    "build_witness",
    "generator_on_witness",
    "witness_quotient",
    "WitnessQuotient",
    "gearhart_ratio",
    "resolvent_fourier",
]

TWO_PI = 2.0 * math.pi
_LO, _HI = TWO_PI / 3.0, 2.0 * TWO_PI / 3.0

#: max |alpha'|: quintic smoothstep peak slope 15/8 times the chain factor 3/(2 pi)
BUMP_SLOPE_MAX = 15.0 / 8.0 * 3.0 / TWO_PI


def bump(x):
    """Quintic smoothstep rising from 0 on ``[0, 2pi/3]`` to 1 on ``[4pi/3, 2pi]``."""
    u = np.clip((np.asarray(x, dtype=float) - _LO) / (_HI - _LO), 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u**2)


def bump_derivative(x):
    """Exact derivative of :func:`bump`."""
    u = np.clip((np.asarray(x, dtype=float) - _LO) / (_HI - _LO), 0.0, 1.0)
    return 30.0 * u**2 * (1.0 - u) ** 2 / (_HI - _LO)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a ``2 pi``-periodic ``C^d``-valued function.

    ``values[j]`` is the value at ``x_j = 2 pi j / M``; ``f(2 pi) = f(0)`` is
    implicit.
    """

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DomainError("grid values must have shape (M, d)")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")
        self.values.flags.writeable = False

    @property
    def grid_size(self):
        return self.values.shape[0]

    @property
    def nodes(self):
        return TWO_PI * np.arange(self.grid_size) / self.grid_size

    def norm(self, which="L2"):
        return grid_norm(self.values, which)


def _parse_norm(which):
    if which == "C":
        return math.inf
    m = re.fullmatch(r"L(\d+(?:\.\d*)?)", str(which))
    if not m or float(m.group(1)) < 1:
        raise DomainError(f"norm selector must be 'C' or 'L<p>' with p >= 1, got {which!r}")
    return float(m.group(1))


def grid_norm(values, which="L2") -> float:
    """``(2 pi / M sum_j |f_j|^p)^(1/p)`` for ``L<p>``; ``max_j |f_j|`` for ``C``."""
    p = _parse_norm(which)
    pointwise = np.linalg.norm(np.asarray(values), axis=-1)
    if p == math.inf:
        return float(pointwise.max())
    M = pointwise.shape[0]
    return float((TWO_PI / M * np.sum(pointwise**p)) ** (1.0 / p))


def _grid(M):
    if M < 2:
        raise DomainError("grid_size must be at least 2")
    return TWO_PI * np.arange(M) / M


def _vector(v, d):
    v = np.asarray(v, dtype=complex).ravel()
    if v.shape != (d,):
        raise DomainError(f"vector must have length {d}")
    return v


def build_witness(A, v, m, grid_size=1024) -> GridFunction:
    """Sample the cut-off witness ``g`` for a near-fixed vector ``v`` of ``exp(2 pi A)``."""
    if m < 2:
        raise DomainError("m must be at least 2")
    A = as_matrix(A)
    v = _vector(v, A.shape[0])
    x = _grid(grid_size)
    E = matrix_exponential(x[:, None, None] * A)
    Ev = E @ v
    monodromy_v = matrix_exponential(TWO_PI * A) @ v
    al = bump(x)[:, None]
    # exp((2 pi + x) A) v = exp(x A) exp(2 pi A) v
    g = (1 - al) * (E @ monodromy_v) + al * Ev
    return GridFunction(g)


def generator_on_witness(A, v, grid_size=1024) -> GridFunction:
    """``B g`` from the closed form ``alpha'(x) exp(x A) (exp(2 pi A) v - v)``."""
    A = as_matrix(A)
    v = _vector(v, A.shape[0])
    x = _grid(grid_size)
    w = matrix_exponential(TWO_PI * A) @ v - v
    E = matrix_exponential(x[:, None, None] * A)
    return GridFunction(bump_derivative(x)[:, None] * (E @ w))


def _max_exp_norm(A, M):
    # b = max_{x in [0, 2pi]} ||exp(xA)||: grid scan including 2 pi, then local refinement
    x = TWO_PI * np.arange(M + 1) / M
    norms = np.linalg.norm(matrix_exponential(x[:, None, None] * A), 2, axis=(1, 2))
    j = int(np.argmax(norms))
    lo, hi = x[max(j - 1, 0)], x[min(j + 1, M)]
    res = scipy.optimize.minimize_scalar(
        lambda t: -opnorm(matrix_exponential(t * A)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12})
    return max(float(norms[j]), -float(res.fun))


def near_fixed_vector(A, m, fraction=0.5):
    """Unit vector ``v`` with ``||v - exp(2 pi A) v|| = fraction / m`` when possible.

    Starts from the eigenvector of ``exp(2 pi A)`` whose eigenvalue is nearest
    1 and tilts it toward the dominant right singular vector of
    ``exp(2 pi A) - I`` until the residual hits the target. If the target is
    unreachable from above (residual stays below it), the eigenvector itself is
    returned. Raises :class:`PreconditionError` if no eigenvalue is close
    enough to 1 for any admissible vector.
    """
    A = as_matrix(A)
    d = A.shape[0]
    K = matrix_exponential(TWO_PI * A) - np.eye(d)
    lam, V = np.linalg.eig(K + np.eye(d))
    i = int(np.argmin(np.abs(lam - 1)))
    u = V[:, i] / np.linalg.norm(V[:, i])
    target = fraction / m

    def resid(eps):
        w = u + eps * tilt
        return np.linalg.norm(K @ (w / np.linalg.norm(w)))

    r0 = np.linalg.norm(K @ u)
    if r0 >= 1.0 / m:
        raise PreconditionError(
            f"no near-fixed vector: ||v - exp(2 pi A) v|| >= {r0:.3g} >= 1/m", value=r0)
    if r0 >= target:
        return u
    _, _, Vh = np.linalg.svd(K)
    tilt = Vh[0].conj()
    tilt = tilt - (u.conj() @ tilt) * u
    if np.linalg.norm(tilt) < 1e-14:
        return u
    tilt /= np.linalg.norm(tilt)
    hi = 1.0
    while resid(hi) < target and hi < 1e12:
        hi *= 4.0
    if resid(hi) < target:
        return u
    eps = scipy.optimize.brentq(lambda e: resid(e) - target, 0.0, hi, xtol=1e-15, rtol=1e-14)
    w = u + eps * tilt
    return w / np.linalg.norm(w)


@dataclass(frozen=True)
class WitnessQuotient:
    """``ratio = ||B g|| / ||g||`` together with the a-priori bound."""

    ratio: float
    bound: float
    grid_size: int
    a: float
    b: float
    residual: float

    def __iter__(self):
        return iter((self.ratio, self.bound))

    @property
    def holds(self):
        return self.ratio <= self.bound * (1 + 1e-6)


def witness_quotient(A, v, m, norm="L2", grid_size=1024, rtol=1e-4, max_grid=1 << 16):
    """Ratio ``||B g|| / ||g||`` and the bound it must obey.

    Bounds: ``3^(1/p) a b^2 / (m - 1)`` for ``L<p>`` and ``a b / (m - 1)`` for
    ``C``, with ``a = max|alpha'|`` and ``b = max ||exp(xA)||`` on ``[0, 2 pi]``.
    The grid is doubled from ``grid_size`` until the ratio changes by less than
    ``rtol`` relative.

    Unpacks as ``(ratio, bound)``.
    """
    A = as_matrix(A)
    if m < 2:
        raise DomainError("m must be at least 2")
    p = _parse_norm(norm)
    v = _vector(v, A.shape[0])
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise PreconditionError("witness vector must have unit norm", value=np.linalg.norm(v))
    resid = float(np.linalg.norm(v - matrix_exponential(TWO_PI * A) @ v))
    if not resid < 1.0 / m:
        raise PreconditionError(
            f"||v - exp(2 pi A) v|| = {resid:.6g} is not below 1/m = {1.0 / m:.6g}", value=resid)

    def ratio_at(M):
        num = generator_on_witness(A, v, M).norm(norm)
        den = build_witness(A, v, m, M).norm(norm)
        return num / den

    M = int(grid_size)
    r = ratio_at(M)
    while M < max_grid:
        r2 = ratio_at(2 * M)
        M *= 2
        done = abs(r2 - r) <= rtol * abs(r2)
        r = r2
        if done:
            break
    a = BUMP_SLOPE_MAX
    b = _max_exp_norm(A, M)
    if p == math.inf:
        bound = a * b / (m - 1)
    else:
        bound = 3.0 ** (1.0 / p) * a * b**2 / (m - 1)
    return WitnessQuotient(ratio=r, bound=bound, grid_size=M, a=a, b=b, residual=resid)


_NORM_PAIRS = {("C", "L1"), ("L1", "C")}


def _check_pair(norm_pair):
    num, den = norm_pair
    pn, pd = _parse_norm(num), _parse_norm(den)
    if (num, den) in _NORM_PAIRS or (pn == pd and pn != math.inf):
        return num, den
    raise DomainError(f"unsupported norm pair {norm_pair!r}; use (Lp, Lp), (C, L1) or (L1, C)")


def gearhart_ratio(A, v, norm_pair=("L2", "L2"), grid_size=1024) -> float:
    """``||sum_k (A - ik)^{-1} e^{ikx} v_k|| / ||sum_k e^{ikx} v_k||`` on the grid.

    ``v`` maps integer frequencies ``k`` to vectors ``v_k``. The numerator
    norm is ``norm_pair[0]``, the denominator norm ``norm_pair[1]``.
    """
    A = as_matrix(A)
    d = A.shape[0]
    num_norm, den_norm = _check_pair(norm_pair)
    if not v:
        raise DomainError("need at least one term")
    ks = sorted(int(k) for k in v)
    if grid_size <= 2 * max(abs(k) for k in ks):
        raise DomainError("grid_size must exceed twice the largest frequency")
    lam = eigenvalues(A)
    x = _grid(grid_size)
    f = np.zeros((grid_size, d), complex)
    g = np.zeros((grid_size, d), complex)
    for k in ks:
        near = lam[np.argmin(np.abs(lam - 1j * k))]
        if abs(near - 1j * k) <= EIG_TOL:
            raise SingularResolventError(f"i*{k} is an eigenvalue of A", eigenvalue=near)
        vk = _vector(v[k], d)
        phase = np.exp(1j * k * x)[:, None]
        f += phase * np.linalg.solve(A - 1j * k * np.eye(d), vk)
        g += phase * vk
    return grid_norm(f, num_norm) / grid_norm(g, den_norm)


def resolvent_fourier(A, k, quad_nodes=2048) -> np.ndarray:
    """``(A - ik)^{-1}`` as the ``k``-th Fourier coefficient
    ``int_0^{2pi} e^{-iks} (exp(2 pi A) - I)^{-1} exp(sA) ds``.

    Composite Simpson rule on ``quad_nodes`` (even) subintervals.
    """
    A = as_matrix(A)
    d = A.shape[0]
    n = int(quad_nodes)
    if n < 2 or n % 2:
        raise DomainError("quad_nodes must be a positive even integer")
    mono = matrix_exponential(TWO_PI * A)
    mu = eigenvalues(mono)
    i = int(np.argmin(np.abs(mu - 1)))
    if abs(mu[i] - 1) <= 1e-10 * max(1.0, opnorm(mono)):
        raise SingularMonodromyError("1 is an eigenvalue of exp(2 pi A)", eigenvalue=mu[i])
    s = TWO_PI * np.arange(n + 1) / n
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= (TWO_PI / n) / 3.0
    E = matrix_exponential(s[:, None, None] * A)
    integral = np.einsum("j,jab->ab", w * np.exp(-1j * k * s), E)
    return np.linalg.solve(mono - np.eye(d), integral)
