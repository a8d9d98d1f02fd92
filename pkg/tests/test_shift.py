import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evodich.errors import DimensionError, UnsupportedPolicyError
from evodich.evolution import CoefficientFunction, EvolutionFamily
from evodich.linalg import hausdorff_distance
from evodich.shift import (
    WeightedShiftOperator,
    assemble,
    base_point_consistency,
    circle_margin,
    rotation_invariance_defect,
    shift_matrix,
    spectrum,
)


def test_assemble_zero_boundary():
    op = WeightedShiftOperator(np.array([2.0, 3.0, 4.0]), boundary="zero")
    assert np.array_equal(assemble(op, 1).real, [[1, 0, 0], [-3, 1, 0], [0, -4, 1]])


def test_assemble_periodic_wrap():
    op = WeightedShiftOperator(np.array([2.0, 3.0, 4.0]))
    assert np.array_equal(assemble(op, 1).real, [[1, 0, -2], [-3, 1, 0], [0, -4, 1]])


def test_identity_blocks_make_circulant_singular():
    op = WeightedShiftOperator.constant(np.eye(1), 4)
    M = assemble(op, 1)
    assert np.allclose(M @ np.ones(9), 0)
    assert circle_margin(op, 64).margin <= 1e-10


def test_bad_shapes():
    with pytest.raises(DimensionError):
        WeightedShiftOperator(np.ones((4, 1, 1)))
    with pytest.raises(DimensionError):
        WeightedShiftOperator(np.ones((3, 2, 3)))


def test_block_indexing_matches_rows():
    op = WeightedShiftOperator(np.arange(5.0))
    assert op.window == 2 and op.block(-2)[0, 0] == 0 and op.block(2)[0, 0] == 4


@given(arrays(np.float64, (5, 2, 2), elements=st.floats(-3, 3)),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.sampled_from(["periodic", "zero"]))
def test_assemble_is_affine_in_lambda(blocks, lam, boundary):
    op = WeightedShiftOperator(blocks, boundary=boundary)
    diff = assemble(op, lam) - assemble(op, 0)
    assert np.array_equal(diff, lam * np.eye(op.size))


def test_margin_of_scaled_identity_blocks():
    # spectrum 2 * roots of unity, at distance exactly 1 from the circle
    assert circle_margin(WeightedShiftOperator.constant(2.0, 16)).margin == pytest.approx(1, abs=1e-6)


def test_margin_of_diagonal_dichotomy_blocks():
    op = WeightedShiftOperator.constant(np.diag([math.exp(-1), math.e]), 16)
    assert circle_margin(op).margin == pytest.approx(1 - math.exp(-1), rel=0.02)


@given(arrays(np.float64, (9, 1, 1), elements=st.floats(0.2, 3)), st.integers(3, 6))
def test_finer_scan_never_raises_the_minimum(blocks, log_n):
    op = WeightedShiftOperator(blocks)
    n = 2**log_n
    coarse, fine = circle_margin(op, n).margin, circle_margin(op, 2 * n).margin
    assert fine <= coarse + 1e-14
    lip = math.pi / n * float(np.max(np.abs(blocks))) + 1
    assert coarse - fine <= lip


def test_scan_rejects_too_few_samples():
    with pytest.raises(ValueError):
        circle_margin(WeightedShiftOperator.constant(2.0, 2), 4)


def test_circulant_spectrum():
    N, c = 5, 0.7 * np.exp(0.4j)
    roots = c * np.exp(2j * np.pi * np.arange(2 * N + 1) / (2 * N + 1))
    assert hausdorff_distance(spectrum(WeightedShiftOperator.constant(c, N)), roots) <= 1e-12
    zero = spectrum(WeightedShiftOperator.constant(np.zeros((2, 2)), 3))
    assert zero.shape == (14,) and np.all(zero == 0)


def test_cyclic_spectrum_is_roots_of_the_product():
    # periodic T with scalar blocks: T^(2N+1) = prod(a) * I
    a = np.array([0.5, 2.0, 1.5, 0.3, 1.1])
    sig = spectrum(WeightedShiftOperator(a))
    assert np.allclose(sig**5, np.prod(a), atol=1e-12)


@pytest.mark.parametrize("c", [0.5, 2.0, 0.9 * np.exp(0.3j)])
def test_rotation_invariance_constant_blocks(c):
    op = WeightedShiftOperator.constant(c, 8)
    assert rotation_invariance_defect(op, 0) == 0
    for j in range(1, 17):
        assert rotation_invariance_defect(op, j) <= 1e-8


@given(arrays(np.float64, 7, elements=st.floats(0.3, 3)), st.integers(1, 6))
def test_rotation_invariance_varying_scalar_blocks(a, j):
    assert rotation_invariance_defect(WeightedShiftOperator(a), j) <= 1e-8


def test_rotation_needs_wrap():
    with pytest.raises(UnsupportedPolicyError):
        rotation_invariance_defect(WeightedShiftOperator.constant(2.0, 3, boundary="zero"), 1)


def test_shift_matrix_acts_as_weighted_shift(rng):
    op = WeightedShiftOperator(rng.standard_normal((7, 2, 2)))
    v = rng.standard_normal((7, 2))
    Tv = (shift_matrix(op) @ v.ravel()).reshape(7, 2)
    for i in range(7):
        assert np.allclose(Tv[i], op.blocks[i] @ v[i - 1])


def test_base_point_consistency():
    const = EvolutionFamily(CoefficientFunction.constant(np.diag([-1.0, 1.0])))
    assert base_point_consistency(const, [0.0, 0.3, 1.7], 8) <= 1e-10
    fam = EvolutionFamily(CoefficientFunction.scalar("-1+sin"))
    assert base_point_consistency(fam, [0, 2 * math.pi, 4 * math.pi], 16) <= 1e-8
    assert base_point_consistency(fam, [0.0, 0.5], 64) <= 0.05
