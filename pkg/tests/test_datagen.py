import math

import numpy as np
import pytest

from nrp.core import margin
from nrp.datagen import (GenMode, GenSpec, _uniform_pnorm_ball,
                         _unit_pnorm_vector, gen_infeasible, gen_separable,
                         generate)
from nrp.errors import RejectionBudget


def sweep_max_margin(dataset, basis=None, steps=3600):
    """Max over unit directions (within a 2-plane) of the dataset margin."""
    if basis is None:
        basis = np.eye(dataset.d)[:2]
    angles = np.linspace(0.0, 2.0 * math.pi, steps, endpoint=False)
    best = -np.inf
    for theta in angles:
        w = math.cos(theta) * basis[0] + math.sin(theta) * basis[1]
        best = max(best, margin(dataset, w))
    return best


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(n=0, d=2, gamma=0.3)
    with pytest.raises(ValueError):
        GenSpec(n=4, d=2, gamma=1.5)
    with pytest.raises(ValueError):
        GenSpec(n=4, d=1, gamma=0.3, mode=GenMode.EXACT_MARGIN)
    with pytest.raises(ValueError):
        GenSpec(n=4, d=2, gamma=0.3, norm_exponent=1.5)


def test_determinism_bit_identical():
    for mode in GenMode:
        s = GenSpec(n=10, d=4, gamma=0.3, mode=mode, seed=5)
        a = generate(s)
        b = generate(s)
        assert np.array_equal(a.matrix, b.matrix)


def test_seeds_differ():
    a = generate(GenSpec(n=10, d=4, gamma=0.3, seed=0))
    b = generate(GenSpec(n=10, d=4, gamma=0.3, seed=1))
    assert not np.array_equal(a.matrix, b.matrix)


def test_separable_certificate_and_norms():
    for p in (2.0, 4.0):
        for seed in range(5):
            ds = generate(GenSpec(n=20, d=5, gamma=0.25, norm_exponent=p,
                                  seed=seed))
            assert margin(ds, ds.w_star) >= 0.25 - 1e-12
            assert np.all(np.linalg.norm(ds.matrix, ord=p, axis=1) <= 1 + 1e-12)
            q = p / (p - 1.0)
            assert np.linalg.norm(ds.w_star, ord=q) <= 1 + 1e-12


def test_exact_margin_two_point_construction():
    ds = generate(GenSpec(n=2, d=2, gamma=0.5, mode=GenMode.EXACT_MARGIN,
                          seed=0))
    beta = math.sqrt(0.75)
    assert np.allclose(ds.matrix, [[0.5, beta], [0.5, -beta]])
    assert margin(ds, np.array([1.0, 0.0])) == pytest.approx(0.5)
    assert sweep_max_margin(ds) <= 0.5 + 1e-6


def test_exact_margin_sweep_finds_nothing_better():
    for seed in range(5):
        ds = generate(GenSpec(n=12, d=2, gamma=0.3,
                              mode=GenMode.EXACT_MARGIN, seed=seed))
        assert margin(ds, ds.w_star) == pytest.approx(0.3, abs=1e-12)
        assert ds.exact_margin
        assert sweep_max_margin(ds) <= 0.3 + 1e-6


def test_exact_margin_rejects_non_euclidean():
    with pytest.raises(ValueError):
        gen_separable(GenSpec(n=4, d=3, gamma=0.3, norm_exponent=4.0,
                              mode=GenMode.EXACT_MARGIN))


def test_lower_bound_single_point():
    ds = generate(GenSpec(n=1, d=3, gamma=0.2, seed=3))
    row = ds.matrix[0]
    assert margin(ds, row / np.linalg.norm(row)) == pytest.approx(
        np.linalg.norm(row))


def test_rejection_budget_error():
    with pytest.raises(RejectionBudget):
        gen_separable(GenSpec(n=4, d=2, gamma=0.999999, seed=0))


def test_infeasible_canonical_triangle_sweep():
    ds = generate(GenSpec(n=3, d=2, gamma=0.3, mode=GenMode.INFEASIBLE, seed=2))
    assert abs(np.ones(3) / 3 @ ds.matrix).max() <= 1e-12
    assert sweep_max_margin(ds) <= 1e-9


def test_infeasible_embedded_plane_sweep():
    ds = generate(GenSpec(n=30, d=6, gamma=0.3, mode=GenMode.INFEASIBLE,
                          seed=7))
    # rows live in a 2-plane; recover it from the first two rows
    u = ds.matrix[0] / np.linalg.norm(ds.matrix[0])
    v = ds.matrix[1] - (ds.matrix[1] @ u) * u
    v /= np.linalg.norm(v)
    assert sweep_max_margin(ds, basis=np.stack([u, v])) <= 1e-9


def test_infeasible_mode_dispatch():
    with pytest.raises(ValueError):
        gen_infeasible(GenSpec(n=4, d=2, gamma=0.3))


def test_pnorm_sampling_helpers():
    rng = np.random.default_rng(0)
    for p in (2.0, 4.0, 8.0):
        for _ in range(50):
            u = _unit_pnorm_vector(rng, 5, p)
            assert np.linalg.norm(u, ord=p) == pytest.approx(1.0)
            x = _uniform_pnorm_ball(rng, 5, p)
            assert np.linalg.norm(x, ord=p) <= 1.0 + 1e-12
