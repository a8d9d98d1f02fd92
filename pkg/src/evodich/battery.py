"""Reference systems shared by the acceptance checks, the tests and the demos."""

from __future__ import annotations

import math

import numpy as np

from .evolution import CoefficientFunction, EvolutionFamily

__all__ = [
    "random_complex_matrix",
    "random_stable_matrix",
    "gearhart_battery",
    "hyperbolic_families",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240611


def random_complex_matrix(rng, d):
    """Complex Gaussian matrix scaled to spectral radius ~ 1."""
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2 * d)


def random_stable_matrix(rng, d, margin=0.5):
    """Random complex matrix shifted so that ``max Re sigma = -margin``."""
    G = random_complex_matrix(rng, d)
    return G - (np.max(np.linalg.eigvals(G).real) + margin) * np.eye(d)


def gearhart_battery(n_random=20, d=4, seed=DEFAULT_SEED):
    """Named matrices: three diagonal cases plus ``n_random`` random stable ones."""
    rng = np.random.default_rng(seed)
    out = [
        ("diag(-1,-2)", np.diag([-1.0, -2.0]).astype(complex)),
        ("diag(2i,-1)", np.diag([2j, -1.0])),
        ("diag(0.5i)", np.diag([0.5j])),
    ]
    out += [(f"stable[{i}]", random_stable_matrix(rng, d)) for i in range(n_random)]
    return out


def _sampled_rotation_system(n_samples=64):
    t = 2 * np.pi * np.arange(n_samples) / n_samples
    A = np.zeros((n_samples, 2, 2))
    A[:, 0, 0] = -1.0 + 0.5 * np.sin(t)
    A[:, 0, 1] = 0.8 + np.cos(t)
    A[:, 1, 0] = 0.3 * np.sin(t)
    A[:, 1, 1] = 1.0 + 0.4 * np.cos(t)
    return CoefficientFunction.sampled(2 * np.pi, A)


def _switched_system():
    A1 = np.array([[-1.0, 2.0], [0.0, 1.0]])
    A2 = np.array([[-0.5, 0.0], [1.0, 1.5]])
    return CoefficientFunction.piecewise([0.0, 0.5, 1.3], [A1, A2], periodic=True)


def hyperbolic_families(step=1e-2):
    """Named hyperbolic evolution families of every coefficient kind."""
    return [
        ("constant diag(-1,1)", EvolutionFamily(CoefficientFunction.constant(np.diag([-1.0, 1.0])))),
        ("scalar -1+sin", EvolutionFamily(CoefficientFunction.scalar("-1+sin"))),
        ("sampled 2x2", EvolutionFamily(_sampled_rotation_system(), step=step)),
        ("switched 2x2", EvolutionFamily(_switched_system())),
    ]
