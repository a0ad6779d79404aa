"""Closed-form online learners over the three geometries the dynamics use.

Simplex learners (entropy geometry) keep the cumulative weighted loss
vector and output a max-subtracted softmax; nothing multiplicative is
stored, so underflow cannot compound.  The w-side learners keep the
weighted sum of the opponent's distributions and apply the appropriate
mirror/dual map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, UnsupportedGeometry
from .core import TOL


# ---------------------------------------------------------------------------
# learner specs (configuration values, no state)

@dataclass(frozen=True)
class OftlPrevLoss:
    """Optimistic FTL over R^d with previous-round hint; ridge-regularized
    losses make it well posed without an explicit regularizer."""


@dataclass(frozen=True)
class FtrlPlusEntropy:
    """FTRL including the current round, entropy regularizer over the simplex."""
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class OftrlEntropyPrev:
    """Optimistic FTRL over the simplex, previous loss vector as the hint."""
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class FtrlPlusUnregularized:
    """Unregularized follow-the-leader including the current round (R^d)."""


@dataclass(frozen=True)
class OftrlQNorm:
    """Optimistic FTRL over R^d with the q-norm-squared regularizer."""
    eta: float
    q: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 1.0 < self.q <= 2.0:
            raise ValueError("q must lie in (1, 2]")


@dataclass(frozen=True)
class OmdBall:
    """Optimistic mirror descent on the unit l2 ball."""
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class OmdEntropy:
    """Optimistic mirror descent (multiplicative weights) on the simplex."""
    eta: float

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")


LearnerSpec = (OftlPrevLoss | FtrlPlusEntropy | OftrlEntropyPrev
               | FtrlPlusUnregularized | OftrlQNorm | OmdBall | OmdEntropy)


# ---------------------------------------------------------------------------
# shared numeric kernels

def softmax_neg(scores: np.ndarray) -> np.ndarray:
    """Normalized exp(-scores), max-subtracted.  Single implementation shared
    by every learner and every original-form algorithm so the equivalence
    checks compare identical roundoff paths."""
    s = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise NonFinite("softmax scores are not finite")
    z = np.exp(-(s - s.min()))
    z = np.maximum(z, TOL.underflow_floor)
    return z / z.sum()


def project_ball(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm <= 1.0:
        return v
    return v / norm


def qnorm_dual_map(theta: np.ndarray, q: float) -> np.ndarray:
    """Gradient of the conjugate of ||.||_q^2 / (2(q-1)).

    With 1/p + 1/q = 1 the map is
        w_i = (q-1) sign(theta_i) |theta_i|^(p-1) ||theta||_p^(2-p),
    the identity when q = 2, and 0 at theta = 0.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(theta)):
        raise NonFinite("dual map input not finite")
    if q == 2.0:
        return theta.copy()
    p = q / (q - 1.0)
    norm = float(np.linalg.norm(theta, ord=p))
    if norm == 0.0:
        return np.zeros_like(theta)
    return (q - 1.0) * np.sign(theta) * np.abs(theta) ** (p - 1.0) * norm ** (2.0 - p)


def qnorm_primal_grad(w: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ||w||_q^2 / (2(q-1)); inverse of qnorm_dual_map."""
    w = np.asarray(w, dtype=np.float64)
    norm = float(np.linalg.norm(w, ord=q))
    if norm == 0.0:
        return np.zeros_like(w)
    return np.sign(w) * np.abs(w) ** (q - 1.0) * norm ** (2.0 - q) / (q - 1.0)


_dual_map_checked: set[float] = set()


def _self_test_dual_map(q: float) -> None:
    # One-time validation of the closed form against finite differences of
    # the primal regularizer; the analytic form is easy to get wrong.
    if q in _dual_map_checked:
        return
    rng = np.random.default_rng(0)
    # magnitudes bounded away from 0: the regularizer's curvature blows up
    # near zero coordinates for q close to 1 and finite differences there
    # would be meaningless
    theta = rng.choice([-1.0, 1.0], size=5) * rng.uniform(0.8, 1.5, size=5)
    w = qnorm_dual_map(theta, q)
    grad = np.empty_like(w)
    for i in range(w.size):
        h = 1e-6 * max(1.0, abs(w[i]))
        e = np.zeros_like(w)
        e[i] = h
        rp = np.linalg.norm(w + e, ord=q) ** 2 / (2.0 * (q - 1.0))
        rm = np.linalg.norm(w - e, ord=q) ** 2 / (2.0 * (q - 1.0))
        grad[i] = (rp - rm) / (2.0 * h)
    if not np.allclose(grad, theta, rtol=1e-4, atol=1e-4):
        raise AssertionError(f"q-norm dual map self-test failed for q={q}")
    _dual_map_checked.add(q)


# ---------------------------------------------------------------------------
# simplex-side learners (decisions on the simplex, losses are n-vectors A w)

class EntropyFtrlPlusState:
    """p_t proportional to exp(-eta * sum_{s<=t} alpha_s (A w_s))."""

    def __init__(self, n: int, eta: float):
        self.eta = eta
        self.cum_loss = np.zeros(n)
        self.cum_alpha = 0.0
        self.t = 0

    def step(self, alpha: float, loss_vec: np.ndarray) -> np.ndarray:
        self.cum_loss = self.cum_loss + alpha * loss_vec
        self.cum_alpha += alpha
        self.t += 1
        return softmax_neg(self.eta * self.cum_loss)


class EntropyOftrlState:
    """Optimistic variant: the hint is the previous round's loss vector."""

    def __init__(self, n: int, eta: float):
        self.eta = eta
        self.cum_loss = np.zeros(n)
        self.cum_alpha = 0.0
        self.t = 0

    def decide(self, alpha: float, hint_vec: np.ndarray) -> np.ndarray:
        return softmax_neg(self.eta * (self.cum_loss + alpha * hint_vec))

    def absorb(self, alpha: float, loss_vec: np.ndarray) -> None:
        self.cum_loss = self.cum_loss + alpha * loss_vec
        self.cum_alpha += alpha
        self.t += 1


class OmdEntropyState:
    """Two-step multiplicative-weights scheme with a secondary iterate.

    The secondary iterate is kept as a cumulative gradient vector, so both
    outputs come out of the same stable softmax.
    """

    def __init__(self, n: int, eta: float):
        self.eta = eta
        self.cum_hat = np.zeros(n)   # log p_hat up to normalization, / -eta
        self.t = 0

    @property
    def hat(self) -> np.ndarray:
        return softmax_neg(self.eta * self.cum_hat)

    def decide(self, alpha: float, hint_grad: np.ndarray) -> np.ndarray:
        return softmax_neg(self.eta * (self.cum_hat + alpha * hint_grad))

    def absorb(self, alpha: float, realized_grad: np.ndarray) -> None:
        self.cum_hat = self.cum_hat + alpha * realized_grad
        self.t += 1


def entropy_ftrl_plus_step(state: EntropyFtrlPlusState, alpha, loss_vec):
    return state.step(alpha, loss_vec)


def entropy_oftrl_step(state: EntropyOftrlState, alpha, hint_vec):
    return state.decide(alpha, hint_vec)


def omd_simplex_step(state: OmdEntropyState, alpha, hint_grad, realized_grad):
    p = state.decide(alpha, hint_grad)
    state.absorb(alpha, realized_grad)
    return p, state.hat


# ---------------------------------------------------------------------------
# w-side learners (decisions in R^d; the opponent plays distributions)

class OftlWState:
    """Optimistic FTL against ridge-regularized linear losses.

    Closed form: w_t = A' (sum_{s<t} alpha_s p_s + alpha_t p_{t-1}) / sum_{s<=t} alpha_s.
    """

    def __init__(self, a: np.ndarray):
        self.a = a
        self.cum_p = np.zeros(a.shape[0])
        self.cum_alpha = 0.0
        self.t = 0

    def decide(self, alpha: float, hint_p: np.ndarray) -> np.ndarray:
        return self.a.T @ (self.cum_p + alpha * hint_p) / (self.cum_alpha + alpha)

    def leader(self) -> np.ndarray:
        """w-tilde_{t+1}: the exact leader after round t, for regret diagnostics."""
        return self.a.T @ self.cum_p / self.cum_alpha

    def absorb(self, alpha: float, p: np.ndarray) -> None:
        self.cum_p = self.cum_p + alpha * p
        self.cum_alpha += alpha
        self.t += 1


class UnregularizedFtrlWState:
    """Follow-the-leader including the current round: the weighted average
    A' p under ridge losses."""

    def __init__(self, a: np.ndarray):
        self.a = a
        self.cum_p = np.zeros(a.shape[0])
        self.cum_alpha = 0.0
        self.t = 0

    def step(self, alpha: float, p: np.ndarray) -> np.ndarray:
        self.cum_p = self.cum_p + alpha * p
        self.cum_alpha += alpha
        self.t += 1
        return self.a.T @ self.cum_p / self.cum_alpha


class QnormOftrlWState:
    """Optimistic FTRL with the q-norm regularizer anchored at 0, bilinear
    losses; solved through the explicit dual map."""

    def __init__(self, a: np.ndarray, eta: float, q: float):
        _self_test_dual_map(q)
        self.a = a
        self.eta = eta
        self.q = q
        self.cum_p = np.zeros(a.shape[0])
        self.cum_alpha = 0.0
        self.t = 0

    def decide(self, alpha: float, hint_p: np.ndarray) -> np.ndarray:
        theta = self.eta * (self.a.T @ (self.cum_p + alpha * hint_p))
        return qnorm_dual_map(theta, self.q)

    def absorb(self, alpha: float, p: np.ndarray) -> None:
        self.cum_p = self.cum_p + alpha * p
        self.cum_alpha += alpha
        self.t += 1


class OmdBallState:
    """Two-step Euclidean scheme on the unit ball."""

    def __init__(self, d: int, eta: float):
        self.eta = eta
        self.w_hat = np.zeros(d)
        self.t = 0

    @property
    def hat(self) -> np.ndarray:
        return self.w_hat

    def decide(self, alpha: float, hint_grad: np.ndarray) -> np.ndarray:
        return project_ball(self.w_hat - self.eta * alpha * hint_grad)

    def absorb(self, alpha: float, realized_grad: np.ndarray) -> None:
        self.w_hat = project_ball(self.w_hat - self.eta * alpha * realized_grad)
        self.t += 1


def oftl_w_step(state: OftlWState, alpha, hint_p):
    return state.decide(alpha, hint_p)


def unregularized_ftrl_w_step(state: UnregularizedFtrlWState, alpha, p):
    return state.step(alpha, p)


def qnorm_oftrl_step(state: QnormOftrlWState, alpha, hint_p):
    return state.decide(alpha, hint_p)


def omd_ball_step(state: OmdBallState, alpha, hint_grad, realized_grad):
    w = state.decide(alpha, hint_grad)
    state.absorb(alpha, realized_grad)
    return w, state.hat


# ---------------------------------------------------------------------------
# exact weighted regrets from closed-form comparators

def regret_w_from_arrays(a: np.ndarray, alphas, ws, ps, geometry: str):
    """Weighted regret of the w-player against the exact comparator.

    geometry: "l2_unconstrained" (ridge losses over R^d), "ball" (bilinear
    over the unit l2 ball), or "qnorm:<q>" (bilinear; the unconstrained
    minimum is -inf, so the comparator is the q-norm unit ball and the
    result is flagged).  Returns (regret, bounded_comparator_flag).
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    cum_p = alphas @ ps
    bilinear_played = -float(np.einsum("t,ti,ti->", alphas, ps, ws @ a.T))
    if geometry == "l2_unconstrained":
        played = bilinear_played + 0.5 * float(alphas @ np.sum(ws * ws, axis=1))
        best = -0.5 * float(np.dot(a.T @ cum_p, a.T @ cum_p)) / float(alphas.sum())
        return played - best, False
    if geometry == "ball":
        best = -float(np.linalg.norm(a.T @ cum_p))
        return bilinear_played - best, False
    if geometry.startswith("qnorm:"):
        q = float(geometry.split(":")[1])
        if q == 1.0:
            raise UnsupportedGeometry("q must exceed 1")
        p_exp = q / (q - 1.0)
        best = -float(np.linalg.norm(a.T @ cum_p, ord=p_exp))
        return bilinear_played - best, True
    raise UnsupportedGeometry(geometry)


def regret_p_from_arrays(a: np.ndarray, alphas, ws, ps) -> float:
    """Weighted regret of the p-player; the comparator minimum over the
    simplex sits at a vertex, so the enumeration is exact.  Any objective
    term constant in p cancels between the two sides and is dropped."""
    alphas = np.asarray(alphas, dtype=np.float64)
    losses = ws @ a.T                      # row t = A w_t
    played = float(np.einsum("t,ti,ti->", alphas, ps, losses))
    best = float(np.min(alphas @ losses))
    return played - best


def weighted_regret_w(trace, dataset):
    """Regret of the w-player on a completed trace (full trace required)."""
    if trace.ws is None or trace.ps is None:
        raise ValueError("full trace required")
    return regret_w_from_arrays(dataset.matrix, trace.alphas, trace.ws,
                                trace.ps, trace.w_geometry)


def weighted_regret_p(trace, dataset) -> float:
    if trace.ws is None or trace.ps is None:
        raise ValueError("full trace required")
    return regret_p_from_arrays(dataset.matrix, trace.alphas, trace.ws, trace.ps)
