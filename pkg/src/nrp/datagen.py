"""Deterministic synthetic instances: separable data with a margin
certificate, an exactly-known-margin construction, and infeasible
(origin-in-hull) data."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, build_dataset
from .errors import RejectionBudget


class GenMode(enum.Enum):
    LOWER_BOUND = "lower"
    EXACT_MARGIN = "exact"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class GenSpec:
    n: int
    d: int
    gamma: float
    norm_exponent: float = 2.0
    mode: GenMode = GenMode.LOWER_BOUND
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if self.mode is not GenMode.INFEASIBLE and not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.mode in (GenMode.EXACT_MARGIN, GenMode.INFEASIBLE) and self.d < 2:
            raise ValueError("this mode needs d >= 2")
        if self.norm_exponent < 2.0:
            raise ValueError("norm_exponent must be >= 2")


def _unit_pnorm_vector(rng: np.random.Generator, d: int, p: float) -> np.ndarray:
    """Random direction on the unit p-norm sphere (generalized-normal trick)."""
    g = rng.gamma(1.0 / p, 1.0, size=d) ** (1.0 / p)
    v = rng.choice([-1.0, 1.0], size=d) * g
    return v / np.linalg.norm(v, ord=p)


def _uniform_pnorm_ball(rng: np.random.Generator, d: int, p: float) -> np.ndarray:
    direction = _unit_pnorm_vector(rng, d, p)
    return direction * rng.uniform() ** (1.0 / d)


def gen_separable(spec: GenSpec) -> Dataset:
    """Separable instance; deterministic in the seed.

    LOWER_BOUND: rejection-sample points in the p-norm unit ball keeping
    only those at distance >= gamma from a random dual-unit hyperplane, so
    gamma is a certified lower bound on the true margin.

    EXACT_MARGIN (l2 only): a symmetric pair (gamma, +-beta) with
    beta = sqrt(1 - gamma^2) caps the maximal margin at exactly gamma,
    attained at the first basis vector; fillers project strictly further
    onto that axis and cannot move the optimum.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.mode is GenMode.EXACT_MARGIN:
        if spec.norm_exponent != 2.0:
            raise ValueError("exact-margin construction is Euclidean only")
        gamma = spec.gamma
        beta = math.sqrt(1.0 - gamma * gamma)
        feats = np.zeros((spec.n, spec.d))
        feats[0, :2] = (gamma, beta)
        feats[1, :2] = (gamma, -beta)
        for i in range(2, spec.n):
            c = gamma + (1.0 - gamma) * rng.uniform(0.1, 0.9)
            rest = rng.standard_normal(spec.d - 1)
            rest *= rng.uniform(0.2, 0.95) * math.sqrt(1.0 - c * c) / np.linalg.norm(rest)
            feats[i, 0] = c
            feats[i, 1:] = rest
        w_star = np.zeros(spec.d)
        w_star[0] = 1.0
        labels = np.ones(spec.n)
        return build_dataset(feats, labels, norm_exponent=2.0,
                             known_margin=gamma, exact_margin=True,
                             w_star=w_star)

    if spec.mode is not GenMode.LOWER_BOUND:
        raise ValueError("gen_separable handles separable modes only")
    p = spec.norm_exponent
    q = p / (p - 1.0)
    w_star = _unit_pnorm_vector(rng, spec.d, q)
    feats = np.empty((spec.n, spec.d))
    labels = np.empty(spec.n)
    budget = 10000 * spec.n
    accepted = 0
    while accepted < spec.n:
        if budget <= 0:
            raise RejectionBudget(f"could not place {spec.n} points at margin {spec.gamma}")
        budget -= 1
        x = _uniform_pnorm_ball(rng, spec.d, p)
        proj = float(w_star @ x)
        if abs(proj) < spec.gamma:
            continue
        feats[accepted] = x
        labels[accepted] = 1.0 if proj > 0 else -1.0
        accepted += 1
    return build_dataset(feats, labels, norm_exponent=p,
                         known_margin=spec.gamma, exact_margin=False,
                         w_star=w_star)


def gen_infeasible(spec: GenSpec) -> Dataset:
    """Rows at 0/120/240 degrees in a random 2-plane, plus jittered extras;
    the three base directions sum to zero, so no classifier attains a
    positive margin."""
    if spec.mode is not GenMode.INFEASIBLE:
        raise ValueError("gen_infeasible requires the infeasible mode")
    rng = np.random.default_rng(spec.seed)
    basis, _ = np.linalg.qr(rng.standard_normal((spec.d, 2)))
    u, v = basis[:, 0], basis[:, 1]
    angles = [0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0]
    rows = []
    for k in range(spec.n):
        theta = angles[k % 3]
        if k >= 3:
            theta += rng.uniform(-0.3, 0.3)
        rows.append(math.cos(theta) * u + math.sin(theta) * v)
    feats = np.array(rows)
    labels = np.ones(spec.n)
    return build_dataset(feats, labels, norm_exponent=2.0)


def generate(spec: GenSpec) -> Dataset:
    if spec.mode is GenMode.INFEASIBLE:
        return gen_infeasible(spec)
    return gen_separable(spec)
