import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evodich.battery import hyperbolic_families
from evodich.errors import (
    CertificateRefusedError,
    DivergenceError,
    NonMultiplicativeProjectionError,
    NotHyperbolicError,
)
from evodich.evolution import CoefficientFunction, EvolutionFamily
from evodich.riesz import (
    GreenKernel,
    PointwiseProjections,
    contour_projection,
    difference_residual,
    extract_pointwise,
    green_solve,
    neumann_inverse,
    verify_dichotomy,
)
from evodich.shift import WeightedShiftOperator, shift_matrix

DIAG = np.diag([math.exp(-1), math.e])


@pytest.fixture(scope="module")
def diag_system():
    fam = EvolutionFamily(CoefficientFunction.constant(np.diag([-1.0, 1.0])))
    op = WeightedShiftOperator.from_family(fam, 0.0, 32)
    R = contour_projection(op)
    pp = extract_pointwise(R, 2)
    return fam, op, R, pp, verify_dichotomy(pp, op, fam)


@pytest.fixture(scope="module")
def scalar_system():
    fam = EvolutionFamily(CoefficientFunction.scalar("-1+sin"))
    op = WeightedShiftOperator.from_family(fam, 0.0, 32)
    R = contour_projection(op)
    pp = extract_pointwise(R, 1)
    return fam, op, R, pp, verify_dichotomy(pp, op, fam)


def spectral_projector_oracle(T):
    lam, V = np.linalg.eig(T)
    return V @ np.diag((np.abs(lam) < 1).astype(float)) @ np.linalg.inv(V)


def test_projection_inside_and_outside():
    inside = contour_projection(WeightedShiftOperator.constant(0.5, 8))
    assert np.allclose(inside.matrix, np.eye(17), atol=1e-10)
    outside = contour_projection(WeightedShiftOperator.constant(2.0, 8))
    assert np.allclose(outside.matrix, 0, atol=1e-10)


def test_projection_for_diagonal_blocks():
    R = contour_projection(WeightedShiftOperator.constant(DIAG, 16))
    oracle = np.kron(np.eye(33), np.diag([1.0, 0.0]))
    assert np.max(np.abs(R.matrix - oracle)) <= 1e-8


def test_projection_matches_eigenprojection(scalar_system):
    _, op, R, _, _ = scalar_system
    assert np.linalg.norm(R.matrix - spectral_projector_oracle(shift_matrix(op)), 2) <= 1e-7


def test_contour_refuses_non_hyperbolic():
    with pytest.raises(NotHyperbolicError) as info:
        contour_projection(WeightedShiftOperator.constant(1.0, 8))
    assert info.value.margin <= 1e-10
    assert abs(abs(info.value.argmin) - 1) <= 1e-12


def test_trapezoid_error_squares_on_doubling():
    op = WeightedShiftOperator.constant(0.9, 4)
    err = {q: np.linalg.norm(contour_projection(op, quad_nodes=q).matrix - np.eye(9), 2)
           for q in (16, 32)}
    # error ~ 0.9^q / (1 - 0.9^q), so err(32) ~ err(16)^2 up to a modest factor
    assert err[32] <= 2 * err[16] ** 2
    assert err[32] >= 0.25 * err[16] ** 2


def test_pointwise_examples(diag_system, scalar_system):
    _, _, _, pp, _ = diag_system
    for n in range(-32, 33):
        assert np.allclose(pp[n], np.diag([1.0, 0.0]), atol=1e-8)
    assert pp.offdiagonal_residual <= 1e-8
    _, _, _, sp, _ = scalar_system
    assert sp.rank_profile == [1] * 65
    assert np.allclose(sp.P, 1.0, atol=1e-8)


def test_block_diagonal_input_passes_through():
    P = np.kron(np.eye(5), np.diag([1.0, 0.0]))
    pp = extract_pointwise(P, 2)
    assert pp.offdiagonal_residual == 0
    assert np.array_equal(pp[0], np.diag([1.0, 0.0]))


def test_non_multiplicative_projection_rejected():
    P = np.ones((5, 5)) / 5  # rank-one projector with dense off-diagonal part
    with pytest.raises(NonMultiplicativeProjectionError) as info:
        extract_pointwise(P, 1)
    assert info.value.residual == pytest.approx(0.2)


def test_certificate_constant_case(diag_system):
    _, _, _, _, cert = diag_system
    assert 1 <= cert.M <= 1.1
    assert cert.lambda_ == pytest.approx(1, rel=0.05)
    assert cert.intertwining_residual <= 1e-8
    assert cert.kernel_invertibility > 1e-8
    assert cert.propagator_mismatch <= 1e-12


def test_certificate_periodic_scalar(scalar_system):
    _, _, _, _, cert = scalar_system
    assert cert.rate == pytest.approx(1, rel=0.05)
    assert cert.M <= math.e**2
    assert math.isinf(cert.kernel_invertibility)  # empty unstable subspace


def test_certificate_refused_without_decay():
    op = WeightedShiftOperator.constant(np.eye(2), 8)
    pp = PointwiseProjections(np.broadcast_to(np.eye(2), (17, 2, 2)).copy(), 0.0, 0.0)
    with pytest.raises(CertificateRefusedError):
        verify_dichotomy(pp, op)


def test_ranks_are_complementary(diag_system):
    _, op, R, pp, _ = diag_system
    Q = np.eye(op.size) - R.matrix
    assert R.rank + int(round(np.trace(Q).real)) == op.size
    assert sum(pp.rank_profile) == R.rank


@pytest.mark.parametrize("name,fam", hyperbolic_families(), ids=lambda x: x if isinstance(x, str) else "")
def test_projection_invariants_for_battery(name, fam):
    op = WeightedShiftOperator.from_family(fam, 0.0, 32)
    R = contour_projection(op)
    assert R.idempotency_residual <= 1e-8
    assert R.commutation_residual <= 1e-8
    assert np.linalg.norm(R.matrix - spectral_projector_oracle(shift_matrix(op)), 2) <= 1e-7
    half = extract_pointwise(contour_projection(WeightedShiftOperator.from_family(fam, 0.0, 16)),
                             op.d, tol=1.0)
    full = extract_pointwise(R, op.d, tol=1.0)
    assert full.offdiagonal_residual <= 2 * max(half.offdiagonal_residual, 1e-12)


def test_neumann_stable_blocks():
    op = WeightedShiftOperator.constant(0.5, 8)
    direct = np.linalg.inv(np.eye(17) - shift_matrix(op))
    series = neumann_inverse(op, contour_projection(op))
    assert np.linalg.norm(series - direct, 2) <= 1e-10 * np.linalg.norm(direct, 2)


def test_neumann_unstable_blocks():
    op = WeightedShiftOperator.constant(2.0, 8)
    direct = np.linalg.inv(np.eye(17) - shift_matrix(op))
    series = neumann_inverse(op, contour_projection(op))
    assert np.linalg.norm(series - direct, 2) <= 1e-10 * np.linalg.norm(direct, 2)


def test_neumann_mixed_blocks(diag_system):
    _, op, R, _, _ = diag_system
    direct = np.linalg.inv(np.eye(op.size) - shift_matrix(op))
    assert np.linalg.norm(neumann_inverse(op, R) - direct, 2) <= 1e-10 * np.linalg.norm(direct, 2)


def test_neumann_diverges_without_hyperbolicity():
    op = WeightedShiftOperator.constant(1.0, 4)
    with pytest.raises(DivergenceError):
        neumann_inverse(op, np.eye(9), max_terms=500)


def test_green_zero_forcing(diag_system):
    _, op, _, pp, cert = diag_system
    g = green_solve(GreenKernel.from_certificate(op, pp, cert), np.zeros((65, 2)))
    assert np.all(g == 0)


def test_green_delta_in_stable_direction(diag_system):
    _, op, _, pp, cert = diag_system
    f = np.zeros((65, 2))
    f[32] = [1.0, 0.0]
    g = green_solve(GreenKernel.from_certificate(op, pp, cert), f)
    n = np.arange(-32, 33)
    oracle = np.where(n >= 0, np.exp(-np.maximum(n, 0)), 0.0)
    assert np.allclose(g[:, 0], oracle, atol=1e-12)
    assert np.allclose(g[:, 1], 0, atol=1e-12)


def test_green_delta_in_unstable_direction(diag_system):
    _, op, _, pp, cert = diag_system
    f = np.zeros((65, 2))
    f[32] = [0.0, 1.0]
    g = green_solve(GreenKernel.from_certificate(op, pp, cert), f)
    n = np.arange(-32, 33)
    oracle = np.where(n <= -1, -np.exp(np.minimum(n, 0)), 0.0)
    assert np.allclose(g[:, 1], oracle, atol=1e-12)
    assert np.allclose(g[:, 0], 0, atol=1e-12)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_green_is_linear_and_solves(seed):
    fam = EvolutionFamily(CoefficientFunction.constant(np.array([[-1.0, 0.5], [0.0, 0.8]])))
    op = WeightedShiftOperator.from_family(fam, 0.0, 12)
    pp = extract_pointwise(contour_projection(op), 2)
    kernel = GreenKernel.from_certificate(op, pp, verify_dichotomy(pp, op))
    rng = np.random.default_rng(seed)
    f1, f2 = rng.standard_normal((2, 25, 2))
    g1, g2, g12 = (green_solve(kernel, f) for f in (f1, f2, f1 + f2))
    assert np.max(np.abs(g12 - g1 - g2)) <= 1e-10 * max(1.0, np.max(np.abs(g12)))
    assert difference_residual(op.blocks, g1, f1) <= 1e-8


def test_green_refuses_unhyperbolic_kernel():
    op = WeightedShiftOperator.constant(1.0, 3)
    kernel = GreenKernel(op.blocks, np.ones((7, 1, 1)), hyperbolic=False)
    with pytest.raises(NotHyperbolicError):
        green_solve(kernel, np.ones((7, 1)))
