"""Propagators ``U(x, s)`` of linear systems ``v' = A(x) v``.

A :class:`CoefficientFunction` declares the coefficient ``x -> A(x)``; an
:class:`EvolutionFamily` turns it into transfer matrices, choosing the most
exact route per kind:

* ``constant``            -- ``expm((x - s) A)``
* ``piecewise-constant``  -- ordered product of segment exponentials
* ``sampled-periodic``    -- fixed-step classical RK4 on the linearly
  interpolated samples, with steps aligned to the sample knots and the step
  count per knot interval rounded up to a power of two (nested refinement)
* ``scalar-closed-form``  -- ``exp(F(x) - F(s))`` with ``F`` an exact
  antiderivative from a fixed catalog
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, OrderingError
from .linalg import as_matrix, matrix_exponential, opnorm

__all__ = [
    "CLOSED_FORM_CATALOG",
    "CoefficientFunction",
    "EvolutionFamily",
    "GrowthBound",
    "propagate",
    "monodromy_blocks",
    "cocycle_defect",
    "fit_growth_bound",
]

KINDS = ("constant", "piecewise-constant", "sampled-periodic", "scalar-closed-form")


def _sin(c):
    return np.sin, lambda t: -np.cos(t)


def _cos(c):
    return np.cos, np.sin


def _shifted_sin(c):
    return (lambda t: -1.0 + np.sin(t)), (lambda t: -t - np.cos(t))


def _const(c):
    return (lambda t: c + 0.0 * t), (lambda t: c * t)


# name -> factory(c) returning (a(t), antiderivative F(t)), plus period
CLOSED_FORM_CATALOG = {
    "sin": (_sin, 2 * math.pi),
    "cos": (_cos, 2 * math.pi),
    "-1+sin": (_shifted_sin, 2 * math.pi),
    "const": (_const, None),
}

_ALIASES = {"−1+sin": "-1+sin", "const c": "const"}


@dataclass(frozen=True, eq=False)
class CoefficientFunction:
    """Declarative coefficient schedule ``x -> A(x)``.

    Use the ``constant``/``piecewise``/``sampled``/``scalar`` constructors
    rather than the raw fields.
    """

    kind: str
    dim: int
    matrices: np.ndarray = field(repr=False)
    breakpoints: np.ndarray | None = None
    period: float | None = None
    periodic: bool = False
    name: str | None = None
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown coefficient kind {self.kind!r}")
        if self.dim < 1:
            raise DomainError("dim must be positive")
        mats = self.matrices
        if mats.ndim != 3 or mats.shape[1:] != (self.dim, self.dim):
            raise DimensionError(f"matrices must be (k, {self.dim}, {self.dim}), got {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise DomainError("coefficient matrices have non-finite entries")
        mats.flags.writeable = False

    @classmethod
    def constant(cls, A):
        A = as_matrix(A)
        return cls("constant", A.shape[0], A[None].copy(), period=None, periodic=True)

    @classmethod
    def piecewise(cls, breakpoints, matrices, periodic=False):
        """``matrices[i]`` acts on ``[breakpoints[i], breakpoints[i+1])``.

        Outside the breakpoints the first/last matrix is extended, or, with
        ``periodic``, the schedule repeats with period ``b[-1] - b[0]``.
        """
        b = np.asarray(breakpoints, dtype=float)
        mats = np.asarray(matrices, dtype=complex)
        if mats.ndim == 2:
            mats = mats[:, :, None]
        if b.ndim != 1 or len(b) != len(mats) + 1:
            raise DimensionError("need len(breakpoints) == len(matrices) + 1")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        period = float(b[-1] - b[0]) if periodic else None
        return cls("piecewise-constant", mats.shape[1], mats.copy(), breakpoints=b,
                   period=period, periodic=periodic)

    @classmethod
    def sampled(cls, period, samples, t0=0.0):
        """Uniform samples ``A(t0 + j T / n)``, ``j = 0..n-1``, of a ``T``-periodic
        coefficient; linear interpolation in between."""
        mats = np.asarray(samples, dtype=complex)
        if mats.ndim == 1:
            mats = mats[:, None, None]
        if period <= 0:
            raise DomainError("period must be positive")
        if mats.shape[0] < 4:
            raise DomainError("sampled-periodic coefficients need at least 4 samples")
        n = mats.shape[0]
        b = float(t0) + float(period) * np.arange(n + 1) / n
        return cls("sampled-periodic", mats.shape[1], mats.copy(), breakpoints=b,
                   period=float(period), periodic=True)

    @classmethod
    def scalar(cls, name, value=0.0):
        name = _ALIASES.get(name, name)
        if name not in CLOSED_FORM_CATALOG:
            raise DomainError(
                f"unknown closed form {name!r}; catalog: {sorted(CLOSED_FORM_CATALOG)}")
        period = CLOSED_FORM_CATALOG[name][1]
        return cls("scalar-closed-form", 1, np.zeros((1, 1, 1), complex), period=period,
                   periodic=period is not None or name == "const", name=name,
                   value=float(value))

    def _closed_form(self):
        factory, _ = CLOSED_FORM_CATALOG[self.name]
        return factory(self.value)

    def antiderivative(self, t):
        """Exact antiderivative ``F`` of a closed-form scalar coefficient."""
        if self.kind != "scalar-closed-form":
            raise DomainError("antiderivative is only defined for closed forms")
        return self._closed_form()[1](t)

    def _wrap(self, t):
        b = self.breakpoints
        if self.periodic:
            return b[0] + (t - b[0]) % (b[-1] - b[0])
        return t

    def __call__(self, t) -> np.ndarray:
        """Evaluate ``A(t)`` as a ``dim x dim`` complex matrix."""
        t = float(t)
        if self.kind == "constant":
            return np.array(self.matrices[0])
        if self.kind == "scalar-closed-form":
            return np.array([[complex(self._closed_form()[0](t))]])
        b = self.breakpoints
        tw = self._wrap(t)
        if self.kind == "piecewise-constant":
            i = int(np.clip(np.searchsorted(b, tw, side="right") - 1, 0, len(self.matrices) - 1))
            return np.array(self.matrices[i])
        n = len(self.matrices)
        u = (tw - b[0]) / (b[-1] - b[0]) * n
        j = int(math.floor(u)) % n
        w = u - math.floor(u)
        return (1 - w) * self.matrices[j] + w * self.matrices[(j + 1) % n]

    def knots(self, s, x):
        """Breakpoints of the schedule strictly inside ``(s, x)``."""
        if self.breakpoints is None:
            return np.empty(0)
        b = self.breakpoints
        if not self.periodic:
            return b[(b > s) & (b < x)]
        T = b[-1] - b[0]
        base = b[:-1] - b[0]
        k0 = math.floor((s - b[0]) / T)
        k1 = math.floor((x - b[0]) / T)
        pts = (b[0] + T * np.arange(k0, k1 + 1)[:, None] + base[None, :]).ravel()
        return pts[(pts > s) & (pts < x)]


@dataclass(frozen=True)
class GrowthBound:
    """``||U(x, s)|| <= C exp(beta (x - s))`` on a fitting window."""

    C: float
    beta: float

    def __call__(self, tau):
        return self.C * np.exp(self.beta * np.asarray(tau, dtype=float))


class EvolutionFamily:
    """Propagator of ``v' = A(x) v`` with memoized node-to-node transfers.

    Parameters
    ----------
    coeff : CoefficientFunction
    step : float
        Maximum RK4 step for integrated kinds (ignored by exact kinds).
    """

    def __init__(self, coeff: CoefficientFunction, step: float = 1e-2):
        if not step > 0:
            raise DomainError("integration step must be positive")
        self.coeff = coeff
        self.step = float(step)
        self._cache: dict[tuple[float, float], np.ndarray] = {}
        self._lock = threading.Lock()
        self._eye = np.eye(coeff.dim, dtype=complex)
        self._eye.flags.writeable = False

    @property
    def dim(self):
        return self.coeff.dim

    def __repr__(self):
        return f"EvolutionFamily(kind={self.coeff.kind!r}, dim={self.dim}, step={self.step:g})"

    def propagate(self, s, x) -> np.ndarray:
        """``U(x, s)`` for ``x >= s`` (read-only array, memoized on ``(s, x)``)."""
        s, x = float(s), float(x)
        if x < s:
            raise OrderingError(f"propagate needs x >= s, got s={s}, x={x}")
        if x == s:
            return self._eye
        key = (s, x)
        U = self._cache.get(key)
        if U is not None:
            return U
        # computed outside the lock; recomputation is idempotent
        U = self._compute(s, x)
        U.flags.writeable = False
        with self._lock:
            return self._cache.setdefault(key, U)

    def _compute(self, s, x):
        c = self.coeff
        if c.kind == "constant":
            return matrix_exponential((x - s) * c.matrices[0])
        if c.kind == "scalar-closed-form":
            F = c.antiderivative
            return np.array([[np.exp(complex(F(x) - F(s)))]])
        pts = np.concatenate(([s], c.knots(s, x), [x]))
        U = np.array(self._eye)
        for a, b in zip(pts[:-1], pts[1:]):
            if c.kind == "piecewise-constant":
                Aseg = c(0.5 * (a + b))
                U = matrix_exponential((b - a) * Aseg) @ U
            else:
                U = self._rk4_segment(a, b) @ U
        return U

    def _rk4_segment(self, a, b):
        # A is affine on [a, b]; interpolate from the endpoint values
        c = self.coeff
        mid = 0.5 * (a + b)
        A0 = c(mid) - 0.5 * (b - a) * self._slope(a, b)
        dA = self._slope(a, b)
        # power-of-two step counts: halving ``step`` exactly halves every substep
        n = 1 << max(0, math.ceil(math.log2((b - a) / self.step) - 1e-12))
        h = (b - a) / n
        U = np.array(self._eye)
        for i in range(n):
            t = i * h
            Ak1 = A0 + t * dA
            Ak2 = A0 + (t + 0.5 * h) * dA
            Ak4 = A0 + (t + h) * dA
            k1 = Ak1 @ U
            k2 = Ak2 @ (U + 0.5 * h * k1)
            k3 = Ak2 @ (U + 0.5 * h * k2)
            k4 = Ak4 @ (U + h * k3)
            U = U + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return U

    def _slope(self, a, b):
        c = self.coeff
        n = len(c.matrices)
        T = c.breakpoints[-1] - c.breakpoints[0]
        u = (c._wrap(0.5 * (a + b)) - c.breakpoints[0]) / T * n
        j = int(math.floor(u)) % n
        return (c.matrices[(j + 1) % n] - c.matrices[j]) * (n / T)


def propagate(fam: EvolutionFamily, s, x) -> np.ndarray:
    """``U(x, s)``; see :meth:`EvolutionFamily.propagate`."""
    return fam.propagate(s, x)


def monodromy_blocks(fam: EvolutionFamily, x0, N, spacing=1.0) -> np.ndarray:
    """Transfer blocks ``a_n = U(x0 + n h, x0 + (n-1) h)`` for ``n = -N..N``.

    Returns an array of shape ``(2N+1, d, d)``; row ``n + N`` holds ``a_n``.
    """
    if N < 0:
        raise DomainError("window N must be non-negative")
    h = float(spacing)
    if not h > 0:
        raise DomainError("block spacing must be positive")
    nodes = [float(x0) + n * h for n in range(-N - 1, N + 1)]
    return np.stack([fam.propagate(nodes[i], nodes[i + 1]) for i in range(2 * N + 1)])


def cocycle_defect(fam: EvolutionFamily, x, r, s) -> float:
    """``||U(x, s) - U(x, r) U(r, s)||`` for ``x >= r >= s``."""
    if not x >= r >= s:
        raise OrderingError(f"cocycle needs x >= r >= s, got ({x}, {r}, {s})")
    return opnorm(fam.propagate(s, x) - fam.propagate(r, x) @ fam.propagate(s, r))


def fit_growth_bound(fam: EvolutionFamily, x0, span, samples=41) -> GrowthBound:
    """Fit ``log||U(x,s)|| ~ log C + beta (x - s)`` over node pairs on
    ``[x0, x0 + span]``, then inflate ``C`` so the bound dominates every sample.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    t = float(x0) + float(span) * np.arange(samples) / (samples - 1)
    steps = [fam.propagate(t[i], t[i + 1]) for i in range(samples - 1)]
    taus, logs = [0.0], [0.0]
    for i in range(samples - 1):
        U = np.eye(fam.dim, dtype=complex)
        for j in range(i + 1, samples):
            U = steps[j - 1] @ U
            nrm = opnorm(U)
            taus.append(t[j] - t[i])
            logs.append(math.log(nrm) if nrm > 0 else -np.inf)
    taus, logs = np.array(taus), np.array(logs)
    ok = np.isfinite(logs)
    X = np.column_stack([np.ones(ok.sum()), taus[ok]])
    (logC, beta), *_ = np.linalg.lstsq(X, logs[ok], rcond=None)
    # float noise in log(1) must not push C below 1 or beta off zero
    beta = 0.0 if abs(beta) < 1e-13 else float(beta)
    C = max(1.0, math.exp(float(np.max(logs[ok] - beta * taus[ok]))))
    return GrowthBound(C=C, beta=beta)
