import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evodich.errors import DomainError, PreconditionError, SingularMonodromyError, SingularResolventError
from evodich.linalg import matrix_exponential
from evodich.witness import (
    BUMP_SLOPE_MAX,
    TWO_PI,
    build_witness,
    bump,
    bump_derivative,
    gearhart_ratio,
    generator_on_witness,
    grid_norm,
    near_fixed_vector,
    resolvent_fourier,
    witness_quotient,
)

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_bump_profile_and_slope():
    x = np.linspace(0, TWO_PI, 20001)
    assert np.all(bump(x[x <= TWO_PI / 3]) == 0) and np.all(bump(x[x >= 2 * TWO_PI / 3]) == 1)
    # derivative against a central difference, max slope against the dense grid
    h = 1e-6
    fd = (bump(x[1:-1] + h) - bump(x[1:-1] - h)) / (2 * h)
    assert np.max(np.abs(fd - bump_derivative(x[1:-1]))) <= 1e-6
    assert np.max(bump_derivative(x)) == pytest.approx(BUMP_SLOPE_MAX, rel=1e-6)


def test_witness_endpoint_identity():
    A = np.array([[0.1, 1.0], [-0.4, -0.2]])
    v = np.array([0.6, 0.8])
    g = build_witness(A, v, 10, 256)
    assert np.allclose(g.values[0], matrix_exponential(TWO_PI * A) @ v, atol=1e-13)


def test_witness_for_zero_generator_is_constant():
    v = np.array([1.0, 0.0])
    assert np.allclose(build_witness(np.zeros((2, 2)), v, 5, 64).values, v)
    assert np.all(generator_on_witness(np.zeros((2, 2)), v, 64).values == 0)


def test_scalar_witness_against_direct_evaluation():
    g = build_witness(np.array([[-1.0]]), [1.0], 3, 128)
    x = g.nodes
    al = bump(x)
    oracle = (1 - al) * np.exp(-(TWO_PI + x)) + al * np.exp(-x)
    assert np.allclose(g.values[:, 0], oracle, rtol=1e-13)


def test_generator_support():
    A = np.array([[0.05, 1.0], [-1.0, 0.05]])
    Bg = generator_on_witness(A, np.array([1.0, 0.0]), 300)
    x = Bg.nodes
    outside = (x <= TWO_PI / 3) | (x >= 2 * TWO_PI / 3)
    assert np.all(np.linalg.norm(Bg.values[outside], axis=1) == 0)


def test_generator_scalar_oracle():
    delta = 0.01
    a = math.log(1 + delta) / TWO_PI
    Bg = generator_on_witness(np.array([[a]]), [1.0], 512)
    x = Bg.nodes
    assert np.allclose(np.abs(Bg.values[:, 0]), bump_derivative(x) * np.exp(a * x) * delta,
                       rtol=1e-12, atol=1e-300)


def test_generator_matches_finite_difference_of_witness():
    # B g = -g' + A g, differentiated numerically from the closed-form g
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    v = near_fixed_vector(A, 10)
    M = 4096
    g = build_witness(A, v, 10, M).values
    dg = (np.roll(g, -1, axis=0) - np.roll(g, 1, axis=0)) / (2 * TWO_PI / M)
    Bg = generator_on_witness(A, v, M).values
    assert np.max(np.abs(-dg + g @ A.T - Bg)) <= 1e-5


def test_grid_norms():
    vals = np.ones((100, 2)) * np.array([3.0, 4.0])
    assert grid_norm(vals, "C") == pytest.approx(5)
    assert grid_norm(vals, "L1") == pytest.approx(5 * TWO_PI)
    assert grid_norm(vals, "L2") == pytest.approx(5 * math.sqrt(TWO_PI))
    with pytest.raises(DomainError):
        grid_norm(vals, "L0.5")


def test_bound_formulas():
    v = near_fixed_vector(NILPOTENT, 10)
    qc = witness_quotient(NILPOTENT, v, 10, "C")
    q2 = witness_quotient(NILPOTENT, v, 10, "L2")
    b = qc.b
    # max ||exp(xA)|| for the nilpotent block is the norm of [[1, 2pi], [0, 1]]
    assert b == pytest.approx(np.linalg.norm([[1, TWO_PI], [0, 1]], 2), rel=1e-9)
    assert qc.bound == pytest.approx(BUMP_SLOPE_MAX * b / 9)
    assert q2.bound == pytest.approx(math.sqrt(3) * BUMP_SLOPE_MAX * b**2 / 9)


def test_zero_generator_ratio_is_zero():
    ratio, bound = witness_quotient(np.zeros((2, 2)), np.array([1.0, 0.0]), 5, "L2")
    assert ratio == 0 and bound > 0


def test_witness_precondition():
    A = np.array([[-1.0]])
    with pytest.raises(PreconditionError) as info:
        witness_quotient(A, [1.0], 10)
    assert info.value.value == pytest.approx(1 - math.exp(-TWO_PI))
    with pytest.raises(DomainError):
        build_witness(A, [1.0], 1)


@pytest.mark.parametrize("norm", ["C", "L1", "L2", "L3"])
def test_nilpotent_ratios_shrink(norm):
    ratios = []
    for m in (10, 100, 1000):
        q = witness_quotient(NILPOTENT, near_fixed_vector(NILPOTENT, m), m, norm)
        assert q.holds
        ratios.append(q.ratio)
    assert ratios[0] > ratios[1] > ratios[2]


@given(st.integers(-2, 2), st.floats(-0.004, 0.004), st.floats(-2, -0.3), st.floats(0, 1.5),
       st.integers(2, 60), st.sampled_from(["C", "L1", "L2"]))
def test_witness_bound_property(j, drift, mu, shear, m, norm):
    # eigenvalue i j + drift puts exp(2 pi A) within ~2 pi |drift| of 1
    A = np.array([[1j * j + drift, shear], [0.0, mu]])
    try:
        v = near_fixed_vector(A, m)
    except PreconditionError:
        return
    q = witness_quotient(A, v, m, norm, grid_size=512)
    assert q.ratio <= q.bound * (1 + 1e-6)


def test_gearhart_single_term():
    assert gearhart_ratio(np.diag([-1.0]), {0: [1.0]}) == pytest.approx(1.0)


def test_gearhart_parseval(rng):
    A = np.array([[-0.5, 1.0], [0.2, -1.0]]) + 0.3j * np.eye(2)
    v = {k: rng.standard_normal(2) + 1j * rng.standard_normal(2) for k in range(-4, 5)}
    ratio = gearhart_ratio(A, v, ("L2", "L2"), grid_size=64)
    num = sum(np.linalg.norm(np.linalg.solve(A - 1j * k * np.eye(2), v[k])) ** 2 for k in v)
    den = sum(np.linalg.norm(v[k]) ** 2 for k in v)
    assert ratio**2 == pytest.approx(num / den, rel=1e-12)


def test_gearhart_against_dense_quadrature():
    A = np.diag([-1.0, -2.0])
    e1 = np.array([1.0, 0.0])
    v = {k: e1 for k in range(-5, 6)}
    # the first component of the numerator is sum_k e^{ikx}/(-1-ik); denominator is the Dirichlet kernel
    x = np.linspace(0, TWO_PI, 200001)
    ks = np.arange(-5, 6)
    num = np.sum(np.exp(1j * np.outer(x, ks)) / (-1 - 1j * ks), axis=1)
    den = np.sum(np.exp(1j * np.outer(x, ks)), axis=1)
    oracle = math.sqrt(np.trapezoid(np.abs(num) ** 2, x) / np.trapezoid(np.abs(den) ** 2, x))
    assert gearhart_ratio(A, v, grid_size=1024) == pytest.approx(oracle, rel=1e-8)


def test_gearhart_mixed_norms_and_errors():
    A = np.diag([-1.0, -0.5])
    v = {0: [1.0, 0.0], 1: [0.0, 1.0]}
    for pair in (("C", "L1"), ("L1", "C"), ("L3", "L3")):
        assert gearhart_ratio(A, v, pair) > 0
    with pytest.raises(DomainError):
        gearhart_ratio(A, v, ("C", "C"))
    with pytest.raises(SingularResolventError):
        gearhart_ratio(np.diag([2j, -1.0]), {2: [1.0, 0.0]})


def test_resolvent_fourier_scalar():
    assert resolvent_fourier(np.diag([-1.0]), 0)[0, 0] == pytest.approx(-1.0, abs=1e-10)


def test_resolvent_fourier_simpson_convergence():
    A = np.array([[-0.7, 1.0], [0.0, -1.3]])
    direct = np.linalg.inv(A - 2j * np.eye(2))
    errs = [np.linalg.norm(resolvent_fourier(A, 2, n) - direct) for n in (64, 128)]
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


def test_resolvent_fourier_errors():
    with pytest.raises(SingularMonodromyError):
        resolvent_fourier(np.diag([0.0, -1.0]), 0)
    with pytest.raises(DomainError):
        resolvent_fourier(np.diag([-1.0]), 0, quad_nodes=15)
