"""Original pseudocode forms of the five accelerated methods, the vanilla
baseline, and the checkers tying each original form to its dynamics run."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, GameObjective
from .dynamics import (DynamicsConfig, PlayOrder, WeightSchedule,
                       run_dynamics)
from .learners import (FtrlPlusEntropy, FtrlPlusUnregularized, OftlPrevLoss,
                       OftrlEntropyPrev, OftrlQNorm, OmdBall, OmdEntropy,
                       project_ball, softmax_neg)


# ---------------------------------------------------------------------------
# dynamics configurations paired with each original form

def smooth_config(horizon: int, record_full_trace: bool = True) -> DynamicsConfig:
    return DynamicsConfig(
        objective=GameObjective.L2_REGULARIZED, order=PlayOrder.W_FIRST,
        weight_schedule=WeightSchedule.LINEAR,
        w_learner=OftlPrevLoss(), p_learner=FtrlPlusEntropy(eta=0.25),
        horizon=horizon, record_full_trace=record_full_trace)


# the momentum form shares the smooth Perceptron's game configuration; only
# the output (weighted sum vs weighted average) differs
ji_config = smooth_config


def nag_config(horizon: int, record_full_trace: bool = True) -> DynamicsConfig:
    return DynamicsConfig(
        objective=GameObjective.L2_REGULARIZED, order=PlayOrder.P_FIRST,
        weight_schedule=WeightSchedule.LINEAR,
        w_learner=FtrlPlusUnregularized(), p_learner=OftrlEntropyPrev(eta=0.25),
        horizon=horizon, record_full_trace=record_full_trace)


def mpfp_config(n: int, horizon: int, record_full_trace: bool = True) -> DynamicsConfig:
    root = math.sqrt(math.log(n))
    return DynamicsConfig(
        objective=GameObjective.BILINEAR, order=PlayOrder.W_FIRST,
        weight_schedule=WeightSchedule.UNIFORM,
        w_learner=OmdBall(eta=1.0 / root), p_learner=OmdEntropy(eta=root),
        horizon=horizon, record_full_trace=record_full_trace)


def pnorm_config(n: int, horizon: int, p_exp: float,
                 record_full_trace: bool = True) -> DynamicsConfig:
    q = p_exp / (p_exp - 1.0)
    eta_w = math.sqrt(1.0 / (2.0 * (q - 1.0) * math.log(n)))
    return DynamicsConfig(
        objective=GameObjective.BILINEAR, order=PlayOrder.W_FIRST,
        weight_schedule=WeightSchedule.UNIFORM,
        w_learner=OftrlQNorm(eta=eta_w, q=q),
        p_learner=FtrlPlusEntropy(eta=1.0 / eta_w),
        horizon=horizon, record_full_trace=record_full_trace)


# ---------------------------------------------------------------------------
# original forms

@dataclass
class SmoothPerceptronResult:
    v: np.ndarray                # v_{T-1}
    q: np.ndarray                # q_{T-1}
    vs: np.ndarray               # v_0 .. v_{T-1}


def smooth_perceptron(dataset: Dataset, horizon: int) -> SmoothPerceptronResult:
    """Excessive-gap recursion over the smoothed responder.

    The responder q_mu(v) is the softmax of -A v / mu relative to the
    uniform prior.  The printed recursion's "A q" is dimensionally "A' q";
    the transpose is used throughout.
    """
    a = dataset.matrix
    n = dataset.n
    mu = 4.0
    v = a.sum(axis=0) / n                       # A' 1 / n
    q = softmax_neg((a @ v) / mu)
    vs = np.empty((horizon, v.size))
    vs[0] = v
    for t in range(1, horizon):
        theta = 2.0 / (t + 2)                   # theta_{t-1}, theta_0 = 2/3
        q_mu_v = softmax_neg((a @ v) / mu)
        v = (1.0 - theta) * (v + theta * (a.T @ q)) + theta * theta * (a.T @ q_mu_v)
        mu = (1.0 - theta) * mu
        q = (1.0 - theta) * q + theta * softmax_neg((a @ v) / mu)
        vs[t] = v
    return SmoothPerceptronResult(v=v, q=q, vs=vs)


@dataclass
class JiResult:
    v: np.ndarray                # v_T
    q: np.ndarray                # q_T
    vs: np.ndarray               # v_1 .. v_T
    gs: np.ndarray               # g_1 .. g_T
    qs: np.ndarray               # q_1 .. q_T


def accel_perceptron_ji(dataset: Dataset, horizon: int) -> JiResult:
    """Momentum recursion in the dual space with the corrected step schedule
    theta_{t-1} = t / (2(t+1))."""
    a = dataset.matrix
    n, d = a.shape
    q = np.ones(n) / n
    v = np.zeros(d)
    g = np.zeros(d)
    vs = np.empty((horizon, d))
    gs = np.empty((horizon, d))
    qs = np.empty((horizon, n))
    for t in range(1, horizon + 1):
        theta = t / (2.0 * (t + 1))
        v = v - theta * (g - a.T @ q)
        q = softmax_neg(a @ v)
        g = (t / (t + 1.0)) * (g - a.T @ q)
        vs[t - 1] = v
        gs[t - 1] = g
        qs[t - 1] = q
    return JiResult(v=v, q=q, vs=vs, gs=gs, qs=qs)


@dataclass
class NagResult:
    s: np.ndarray                # s_T
    vs: np.ndarray
    ss: np.ndarray
    us: np.ndarray
    qs: np.ndarray


def empirical_risk(dataset: Dataset, v: np.ndarray) -> float:
    """Mean exponential loss (1/n) sum_i exp(-(A v)_i)."""
    return float(np.mean(np.exp(-(dataset.matrix @ v))))


def empirical_risk_grad(dataset: Dataset, v: np.ndarray) -> np.ndarray:
    a = dataset.matrix
    return -(a.T @ np.exp(-(a @ v))) / dataset.n


def nag_margin(dataset: Dataset, horizon: int) -> NagResult:
    """Accelerated descent on the exponential empirical risk.

    The step eta_t grad R(u_t) with eta_t = t / R(u_t) equals -t A' q_t
    where q_t is the softmax of -A u_t; that identity is used directly so
    R(u_t) never overflows.  At t = 1 the 1/(2(t-1)) coefficient multiplies
    v_0 = 0 and contributes nothing.
    """
    a = dataset.matrix
    n, d = a.shape
    v = np.zeros(d)
    s = np.zeros(d)
    vs = np.empty((horizon, d))
    ss = np.empty((horizon, d))
    us = np.empty((horizon, d))
    qs = np.empty((horizon, n))
    for t in range(1, horizon + 1):
        u = s + (v / (2.0 * (t - 1)) if t > 1 else 0.0)
        q = softmax_neg(a @ u)
        v = v + t * (a.T @ q)
        s = s + v / (2.0 * (t + 1))
        vs[t - 1] = v
        ss[t - 1] = s
        us[t - 1] = u
        qs[t - 1] = q
    return NagResult(s=s, vs=vs, ss=ss, us=us, qs=qs)


@dataclass
class MpfpResult:
    z_w: np.ndarray              # ball component of the averaged iterate
    z_p: np.ndarray              # simplex component
    us_w: np.ndarray             # u_t ball components, t = 1..T
    us_p: np.ndarray
    hats_w: np.ndarray           # v_{t+1} components
    hats_p: np.ndarray


def mpfp(dataset: Dataset, horizon: int) -> MpfpResult:
    """Mirror-prox on the product space (unit ball) x (simplex).

    The prox over the product factorizes into a Euclidean ball prox and an
    entropic simplex prox; the two components are stored separately.  The
    step is the constant 1 / (sqrt(log n) + 1/sqrt(2)), which cancels out
    of the uniform average.
    """
    a = dataset.matrix
    n, d = a.shape
    eta_w = 1.0 / math.sqrt(math.log(n))
    eta_p = math.sqrt(math.log(n))
    x_hat = np.zeros(d)
    y_hat_cum = np.zeros(n)      # cumulative entropic-prox scores from 1/n
    us_w = np.empty((horizon, d))
    us_p = np.empty((horizon, n))
    hats_w = np.empty((horizon, d))
    hats_p = np.empty((horizon, n))
    for t in range(horizon):
        x = project_ball(x_hat + eta_w * (a.T @ softmax_neg(y_hat_cum)))
        y = softmax_neg(y_hat_cum + eta_p * (a @ x_hat))
        x_hat = project_ball(x_hat + eta_w * (a.T @ y))
        y_hat_cum = y_hat_cum + eta_p * (a @ x)
        us_w[t] = x
        us_p[t] = y
        hats_w[t] = x_hat
        hats_p[t] = softmax_neg(y_hat_cum)
    return MpfpResult(
        z_w=us_w.mean(axis=0), z_p=us_p.mean(axis=0),
        us_w=us_w, us_p=us_p, hats_w=hats_w, hats_p=hats_p)


def pnorm_accelerated(dataset: Dataset, horizon: int, p_exp: float):
    """Optimistic q-norm dynamics for p-norm-bounded rows; returns the plain
    average of the w iterates together with the trace."""
    trace = run_dynamics(pnorm_config(dataset.n, horizon, p_exp), dataset)
    return trace.w_bar, trace


def vanilla_perceptron(dataset: Dataset, max_updates: int,
                       w0: np.ndarray | None = None):
    """Classical additive baseline: cycle the rows, add any row the current
    classifier does not separate, stop after a clean pass.  Returns
    (w, updates, budget_exhausted)."""
    a = dataset.matrix
    w = np.zeros(dataset.d) if w0 is None else np.array(w0, dtype=np.float64)
    updates = 0
    while updates < max_updates:
        clean = True
        for i in range(dataset.n):
            if float(a[i] @ w) <= 0.0:
                w = w + a[i]
                updates += 1
                clean = False
                if updates >= max_updates:
                    break
        if clean:
            return w, updates, False
    return w, updates, True


# ---------------------------------------------------------------------------
# equivalence checking

class EquivalencePair(enum.Enum):
    PROP1 = "prop1"      # smooth Perceptron vs its dynamics
    PROP2 = "prop2"      # momentum form vs the same dynamics
    NAG = "nag"
    MPFP = "mpfp"


@dataclass
class EquivalenceReport:
    which: EquivalencePair
    deviations: dict[str, float]   # relative l-inf deviation per quantity
    max_deviation: float
    tol: float
    passed: bool


def _rel_dev(x: np.ndarray, y: np.ndarray, tol: float, floor: float) -> float:
    scale = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), floor / tol)
    return float(np.max(np.abs(x - y))) / scale


def check_equivalence(which: EquivalencePair, dataset: Dataset, horizon: int,
                      tol: float = 1e-8, abs_floor: float = 1e-10,
                      perturb: float = 0.0) -> EquivalenceReport:
    """Run an original form and its dynamics side by side and compare the
    quantities the theory claims are equal.

    perturb != 0 scales the p-learner's step by (1 + perturb); a negative
    control that must break the match.
    """
    n = dataset.n
    if which in (EquivalencePair.PROP1, EquivalencePair.PROP2):
        config = smooth_config(horizon)
    elif which is EquivalencePair.NAG:
        config = nag_config(horizon)
    else:
        config = mpfp_config(n, horizon)
    if perturb != 0.0:
        pl = config.p_learner
        config = DynamicsConfig(
            objective=config.objective, order=config.order,
            weight_schedule=config.weight_schedule,
            w_learner=config.w_learner,
            p_learner=type(pl)(eta=pl.eta * (1.0 + perturb)),
            horizon=horizon)
    trace = run_dynamics(config, dataset)

    devs: dict[str, float] = {}
    if which is EquivalencePair.PROP1:
        res = smooth_perceptron(dataset, horizon)
        devs["v_vs_w_bar"] = _rel_dev(res.v, trace.w_bar, tol, abs_floor)
        devs["q_vs_p_bar"] = _rel_dev(res.q, trace.p_bar, tol, abs_floor)
    elif which is EquivalencePair.PROP2:
        res = accel_perceptron_ji(dataset, horizon)
        devs["v_vs_quarter_w_sum"] = _rel_dev(res.v, 0.25 * trace.w_sum, tol, abs_floor)
        devs["q_vs_p_final"] = _rel_dev(res.q, trace.ps[-1], tol, abs_floor)
    elif which is EquivalencePair.NAG:
        res = nag_margin(dataset, horizon)
        devs["s_vs_quarter_w_sum"] = _rel_dev(res.s, 0.25 * trace.w_sum, tol, abs_floor)
    else:
        res = mpfp(dataset, horizon)
        devs["u_w_vs_w"] = _rel_dev(res.us_w, trace.ws, tol, abs_floor)
        devs["u_p_vs_p"] = _rel_dev(res.us_p, trace.ps, tol, abs_floor)

    max_dev = max(devs.values())
    return EquivalenceReport(which=which, deviations=devs,
                             max_deviation=max_dev, tol=tol,
                             passed=max_dev <= tol)


def infeasibility_certificate(dataset: Dataset, horizon: int):
    """Average distribution from a mirror-prox run and its certificate norm
    ||p_bar' A||_2; small norm witnesses approximate infeasibility."""
    trace = run_dynamics(mpfp_config(dataset.n, horizon), dataset)
    p_bar = trace.p_bar
    return p_bar, float(np.linalg.norm(dataset.matrix.T @ p_bar))
