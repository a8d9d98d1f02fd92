"""Acceptance battery.

Each criterion is a function returning ``(passed, detail)``; :func:`run_all`
times them and is what ``evodich selftest`` and ``tests/test_acceptance.py``
execute.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .battery import (
    DEFAULT_SEED,
    gearhart_battery,
    hyperbolic_families,
    random_complex_matrix,
    random_stable_matrix,
)
from .errors import NotHyperbolicError, SingularPointError
from .evolution import CoefficientFunction, EvolutionFamily
from .linalg import eigenvalues, matrix_exponential
from .riesz import (
    GreenKernel,
    contour_projection,
    difference_residual,
    extract_pointwise,
    green_solve,
    neumann_inverse,
    verify_dichotomy,
)
from .semigroup import equivalence_report, imaginary_resolvent_scan, spectral_map_check
from .shift import WeightedShiftOperator, circle_margin, rotation_invariance_defect, shift_matrix
from .witness import near_fixed_vector, resolvent_fourier, witness_quotient

__all__ = ["CRITERIA", "CriterionResult", "run_all", "format_table"]


def spectral_mapping():
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 7))
        A = random_complex_matrix(rng, d)
        for t in (0.5, 1.0, 2 * math.pi):
            scale = float(np.max(np.abs(eigenvalues(matrix_exponential(t * A)))))
            worst = max(worst, spectral_map_check(A, t) / scale)
    return worst <= 1e-8, f"max distance / spectral scale = {worst:.2e} (<= 1e-8)"


def constant_dichotomy():
    fam = EvolutionFamily(CoefficientFunction.constant(np.diag([-1.0, 1.0])))
    op = WeightedShiftOperator.from_family(fam, 0.0, 32)
    R = contour_projection(op, quad_nodes=256, n_samples=256)
    pp = extract_pointwise(R, 2)
    cert = verify_dichotomy(pp, op, fam)
    target = 1 - math.exp(-1)
    p_err = max(np.linalg.norm(pp[n] - np.diag([1.0, 0.0]), 2) for n in pp.central_indices)
    ok = (abs(R.margin - target) <= 0.02 * target and p_err <= 1e-6
          and 0.95 <= cert.rate <= 1.05 and cert.M <= 1.1
          and cert.intertwining_residual <= 1e-8)
    return ok, (f"margin {R.margin:.4f} vs {target:.4f}, |P(n)-diag(1,0)| {p_err:.1e}, "
                f"lambda {cert.rate:.4f}, M {cert.M:.4f}, "
                f"intertwining {cert.intertwining_residual:.1e}")


def non_hyperbolic_detection():
    fam = EvolutionFamily(CoefficientFunction.scalar("sin"))
    margins = [circle_margin(WeightedShiftOperator.from_family(fam, 0.0, N)).margin
               for N in (16, 32, 64)]
    decreasing = margins[0] > margins[1] > margins[2]
    try:
        contour_projection(WeightedShiftOperator.from_family(fam, 0.0, 64))
        refused = False
    except NotHyperbolicError:
        refused = True
    ok = margins[2] < 0.1 and decreasing and refused
    return ok, (f"margins N=16,32,64: {', '.join(f'{m:.4f}' for m in margins)}; "
                f"contour refused: {refused}")


def periodic_scalar_dichotomy():
    fam = EvolutionFamily(CoefficientFunction.scalar("-1+sin"))
    N = 32
    op = WeightedShiftOperator.from_family(fam, 0.0, N)
    R = contour_projection(op)
    pp = extract_pointwise(R, 1)
    cert = verify_dichotomy(pp, op, fam)
    rng = np.random.default_rng(DEFAULT_SEED)
    f = rng.standard_normal((2 * N + 1, 1))
    g = green_solve(GreenKernel.from_certificate(op, pp, cert), f)
    resid = difference_residual(op.blocks, g, f)
    # forward sum with the closed-form propagator exp(-(n - m) + cos m - cos n)
    n = np.arange(-N, N + 1)
    G = np.where(n[:, None] >= n[None, :],
                 np.exp(-(n[:, None] - n[None, :]) + np.cos(n[None, :]) - np.cos(n[:, None])), 0.0)
    oracle = G @ f[:, 0]
    agree = float(np.max(np.abs(g[:, 0] - oracle)) / np.max(np.abs(oracle)))
    ok = R.margin > 0.05 and abs(cert.rate - 1) <= 0.05 and resid <= 1e-8 and agree <= 1e-8
    return ok, (f"margin {R.margin:.4f}, lambda {cert.rate:.4f}, residual {resid:.1e}, "
                f"oracle gap {agree:.1e}")


def witness_bounds():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    ratios = {}
    ok = True
    parts = []
    for norm in ("C", "L2"):
        for m in (10, 100, 1000):
            v = near_fixed_vector(A, m)
            q = witness_quotient(A, v, m, norm)
            ratios[norm, m] = q.ratio
            ok &= q.ratio <= q.bound * (1 + 1e-6)
        ok &= ratios[norm, 10] > ratios[norm, 100] > ratios[norm, 1000]
        parts.append(f"{norm}: " + ", ".join(f"{ratios[norm, m]:.2e}" for m in (10, 100, 1000)))
    return bool(ok), "ratios m=10,100,1000 -> " + "; ".join(parts) + " (all <= bound)"


def gearhart_equivalence():
    flags = 0
    for _, A in gearhart_battery():
        flags += len(equivalence_report(A).inconsistencies)
    rep = equivalence_report(np.diag([2j, -1.0]))
    try:
        imaginary_resolvent_scan(np.diag([2j, -1.0]), 8)
        k_err = None
    except SingularPointError as exc:
        k_err = exc.k
    ok = flags == 0 and rep.nearest_k == 2 and not rep.iZ_in_rho and k_err == 2
    return ok, f"inconsistency flags {flags}; diag(2i,-1) singular at k = {k_err}"


def neumann_vs_direct():
    worst, used = 0.0, 0
    for _, fam in hyperbolic_families():
        op = WeightedShiftOperator.from_family(fam, 0.0, 32)
        R = contour_projection(op)
        if not R.margin > 0.3:
            continue
        used += 1
        T = shift_matrix(op)
        direct = np.linalg.inv(np.eye(T.shape[0]) - T)
        series = neumann_inverse(op, R, tol=1e-14)
        worst = max(worst, np.linalg.norm(series - direct, 2) / np.linalg.norm(direct, 2))
    return used > 0 and worst <= 1e-8, f"{used} systems, max relative error {worst:.1e}"


def fourier_resolvent():
    rng = np.random.default_rng(DEFAULT_SEED + 1)
    worst, min_gain = 0.0, math.inf
    for _ in range(10):
        A = random_stable_matrix(rng, 4)
        for k in range(-3, 4):
            direct = np.linalg.inv(A - 1j * k * np.eye(4))
            e_fine = np.linalg.norm(resolvent_fourier(A, k, 2048) - direct, 2)
            e_coarse = np.linalg.norm(resolvent_fourier(A, k, 1024) - direct, 2)
            worst = max(worst, e_fine)
            min_gain = min(min_gain, e_coarse / e_fine)
    return worst <= 1e-6 and min_gain >= 2, (
        f"max error {worst:.1e} at 2048 nodes; min error ratio 1024/2048 = {min_gain:.2f}")


def rotation_invariance():
    worst = 0.0
    N = 16
    for c in (0.5, 2.0, 0.9 * np.exp(0.3j), -1.7):
        op = WeightedShiftOperator.constant(c, N)
        for j in range(2 * N + 1):
            worst = max(worst, rotation_invariance_defect(op, j))
    return worst <= 1e-8, f"max defect {worst:.1e} over all admissible rotations"


def multiplication_form():
    worst_off, worst_change = 0.0, 0.0
    for _, fam in hyperbolic_families():
        pp = {}
        for N in (32, 64):
            op = WeightedShiftOperator.from_family(fam, 0.0, N)
            pp[N] = extract_pointwise(contour_projection(op), op.d)
        worst_off = max(worst_off, pp[32].offdiagonal_residual)
        worst_change = max(worst_change, max(
            np.linalg.norm(pp[32][n] - pp[64][n], 2) for n in pp[32].central_indices))
    ok = worst_off <= 1e-6 and worst_change <= 1e-6
    return ok, f"max off-diagonal {worst_off:.1e}, max central change on doubling {worst_change:.1e}"


CRITERIA = [
    ("spectral mapping", spectral_mapping),
    ("constant hyperbolic dichotomy", constant_dichotomy),
    ("non-hyperbolic detection", non_hyperbolic_detection),
    ("hyperbolic periodic scalar", periodic_scalar_dichotomy),
    ("witness bounds", witness_bounds),
    ("gearhart equivalence", gearhart_equivalence),
    ("neumann vs direct", neumann_vs_direct),
    ("fourier resolvent", fourier_resolvent),
    ("rotation invariance", rotation_invariance),
    ("multiplication-operator form", multiplication_form),
]


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.index:2d}. {self.name}: {self.detail} ({self.seconds:.1f} s)"


def run_one(index):
    name, fn = CRITERIA[index - 1]
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failed criterion, reported as such
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(index, name, bool(passed), detail, time.perf_counter() - t0)


def run_all():
    return [run_one(i) for i in range(1, len(CRITERIA) + 1)]


def format_table(results):
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
