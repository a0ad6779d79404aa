"""Two-player no-regret dynamics engine.

Each round the two learners exchange a classifier w_t and a distribution
p_t over rows; the weighted average of the w_t's approaches the max-min
point of the configured payoff at the rate set by the players' regrets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Dataset, GameObjective, best_response_value, margin
from .errors import IncompatibleConfig, NonFiniteIterate
from .learners import (
    EntropyFtrlPlusState,
    EntropyOftrlState,
    FtrlPlusEntropy,
    FtrlPlusUnregularized,
    LearnerSpec,
    OftlPrevLoss,
    OftlWState,
    OftrlEntropyPrev,
    OftrlQNorm,
    OmdBall,
    OmdBallState,
    OmdEntropy,
    OmdEntropyState,
    QnormOftrlWState,
    UnregularizedFtrlWState,
)


class PlayOrder(enum.Enum):
    W_FIRST = "w_first"
    P_FIRST = "p_first"


class WeightSchedule(enum.Enum):
    LINEAR = "linear"     # alpha_t = t
    UNIFORM = "uniform"   # alpha_t = 1


@dataclass(frozen=True)
class DynamicsConfig:
    objective: GameObjective
    order: PlayOrder
    weight_schedule: WeightSchedule
    w_learner: LearnerSpec
    p_learner: LearnerSpec
    horizon: int
    record_full_trace: bool = True

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        _validate(self)


@dataclass
class Trace:
    """Per-round records plus exact regret accounting for one run."""

    config: DynamicsConfig
    alphas: np.ndarray
    ws: np.ndarray | None            # T x d (None when trace not recorded)
    ps: np.ndarray | None            # T x n
    l1_delta_p: np.ndarray
    margin_avg: np.ndarray           # margin of the running weighted average
    normalized_margin: np.ndarray    # of the running weighted sum
    regret_w_running: np.ndarray
    regret_p_running: np.ndarray
    gap_bound_running: np.ndarray
    w_bar: np.ndarray                # weighted average of the w_t
    p_bar: np.ndarray                # weighted average of the p_t
    w_sum: np.ndarray                # weighted sum of the w_t
    sum_alpha: float
    regret_w: float
    regret_p: float
    gap_bound: float
    w_geometry: str
    bounded_w_comparator: bool
    sum_sq_l1_delta: float
    hats_w: np.ndarray | None = None  # secondary iterates of OMD runs
    hats_p: np.ndarray | None = None

    @property
    def horizon(self) -> int:
        return self.alphas.shape[0]


def _alphas(schedule: WeightSchedule, horizon: int) -> np.ndarray:
    if schedule is WeightSchedule.LINEAR:
        return np.arange(1, horizon + 1, dtype=np.float64)
    return np.ones(horizon, dtype=np.float64)


def _w_geometry(spec: LearnerSpec) -> str:
    if isinstance(spec, (OftlPrevLoss, FtrlPlusUnregularized)):
        return "l2_unconstrained"
    if isinstance(spec, OmdBall):
        return "ball"
    if isinstance(spec, OftrlQNorm):
        return f"qnorm:{spec.q}"
    raise IncompatibleConfig(f"{spec} is not a w-side learner")


def _validate(config: DynamicsConfig) -> str:
    """Return the engine regime for a config, or raise IncompatibleConfig."""
    w, p, obj, order = (config.w_learner, config.p_learner,
                        config.objective, config.order)
    if isinstance(w, (OftlPrevLoss, OftrlQNorm)) and isinstance(p, FtrlPlusEntropy):
        if order is not PlayOrder.W_FIRST:
            raise IncompatibleConfig("optimistic-w configs play w first")
        need = (GameObjective.L2_REGULARIZED if isinstance(w, OftlPrevLoss)
                else GameObjective.BILINEAR)
        if obj is not need:
            raise IncompatibleConfig(f"{type(w).__name__} requires {need}")
        return "w_first"
    if isinstance(p, OftrlEntropyPrev) and isinstance(w, FtrlPlusUnregularized):
        if order is not PlayOrder.P_FIRST:
            raise IncompatibleConfig("optimistic-p configs play p first")
        if obj is not GameObjective.L2_REGULARIZED:
            raise IncompatibleConfig("unregularized FTL needs the ridge payoff")
        return "p_first"
    if isinstance(w, OmdBall) and isinstance(p, OmdEntropy):
        if obj is not GameObjective.BILINEAR:
            raise IncompatibleConfig("ball OMD requires the bilinear payoff")
        return "omd"
    raise IncompatibleConfig(
        f"unsupported learner pair {type(w).__name__} / {type(p).__name__}")


def run_dynamics(config: DynamicsConfig, dataset: Dataset) -> Trace:
    """Execute the dynamics; deterministic given config and dataset."""
    regime = _validate(config)
    a = dataset.matrix
    n, d = a.shape
    horizon = config.horizon
    alphas = _alphas(config.weight_schedule, horizon)
    ridge = config.objective is GameObjective.L2_REGULARIZED
    geometry = _w_geometry(config.w_learner)

    # learner states
    if regime == "w_first":
        if isinstance(config.w_learner, OftlPrevLoss):
            wl = OftlWState(a)
        else:
            wl = QnormOftrlWState(a, config.w_learner.eta, config.w_learner.q)
        pl = EntropyFtrlPlusState(n, config.p_learner.eta)
    elif regime == "p_first":
        wl = UnregularizedFtrlWState(a)
        pl = EntropyOftrlState(n, config.p_learner.eta)
    else:
        wl = OmdBallState(d, config.w_learner.eta)
        pl = OmdEntropyState(n, config.p_learner.eta)

    record = config.record_full_trace
    ws = np.empty((horizon, d)) if record else None
    ps = np.empty((horizon, n)) if record else None
    hats_w = np.empty((horizon, d)) if (record and regime == "omd") else None
    hats_p = np.empty((horizon, n)) if (record and regime == "omd") else None
    l1_delta = np.empty(horizon)
    margin_avg = np.empty(horizon)
    norm_margin = np.empty(horizon)
    rw_running = np.empty(horizon)
    rp_running = np.empty(horizon)
    gap_running = np.empty(horizon)

    prev_p = np.ones(n) / n        # p_0
    prev_loss = np.zeros(n)        # A w_0 with w_0 = 0
    w_sum = np.zeros(d)
    p_sum = np.zeros(n)
    cum_alpha = 0.0
    played_w = 0.0                 # sum alpha_t h_t(w_t)
    played_p = 0.0                 # sum alpha_t p_t' A w_t (constants dropped)
    cum_lossvec = np.zeros(n)      # sum alpha_t A w_t
    sum_sq_delta = 0.0

    for t in range(1, horizon + 1):
        alpha = alphas[t - 1]
        if regime == "w_first":
            w_t = wl.decide(alpha, prev_p)
            loss = a @ w_t
            p_t = pl.step(alpha, loss)
            wl.absorb(alpha, p_t)
        elif regime == "p_first":
            p_t = pl.decide(alpha, prev_loss)
            w_t = wl.step(alpha, p_t)
            loss = a @ w_t
            pl.absorb(alpha, loss)
        else:
            hint_w = -(a.T @ pl.hat)
            hint_p = a @ wl.hat
            w_t = wl.decide(alpha, hint_w)
            p_t = pl.decide(alpha, hint_p)
            loss = a @ w_t
            wl.absorb(alpha, -(a.T @ p_t))
            pl.absorb(alpha, loss)

        if not (np.all(np.isfinite(w_t)) and np.all(np.isfinite(p_t))):
            raise NonFiniteIterate(t)

        # accounting
        bilinear = float(p_t @ loss)
        played_w += alpha * (-bilinear + (0.5 * float(w_t @ w_t) if ridge else 0.0))
        played_p += alpha * bilinear
        cum_lossvec += alpha * loss
        w_sum += alpha * w_t
        p_sum += alpha * p_t
        cum_alpha += alpha
        delta = float(np.abs(p_t - prev_p).sum())
        sum_sq_delta += delta * delta

        if geometry == "l2_unconstrained":
            best_w = -0.5 * float(np.dot(a.T @ p_sum, a.T @ p_sum)) / cum_alpha
        elif geometry == "ball":
            best_w = -float(np.linalg.norm(a.T @ p_sum))
        else:
            q = float(geometry.split(":")[1])
            best_w = -float(np.linalg.norm(a.T @ p_sum, ord=q / (q - 1.0)))
        rw = played_w - best_w
        rp = played_p - float(np.min(cum_lossvec))

        w_bar = w_sum / cum_alpha
        l1_delta[t - 1] = delta
        margin_avg[t - 1] = margin(dataset, w_bar)
        wnorm = float(np.linalg.norm(w_sum))
        norm_margin[t - 1] = (margin_avg[t - 1] * cum_alpha / wnorm
                              if wnorm > 0.0 else np.nan)
        rw_running[t - 1] = rw
        rp_running[t - 1] = rp
        gap_running[t - 1] = (rw + rp) / cum_alpha
        if record:
            ws[t - 1] = w_t
            ps[t - 1] = p_t
            if hats_w is not None:
                hats_w[t - 1] = wl.hat
                hats_p[t - 1] = pl.hat

        prev_p = p_t
        prev_loss = loss

    return Trace(
        config=config, alphas=alphas, ws=ws, ps=ps,
        l1_delta_p=l1_delta, margin_avg=margin_avg,
        normalized_margin=norm_margin,
        regret_w_running=rw_running, regret_p_running=rp_running,
        gap_bound_running=gap_running,
        w_bar=w_sum / cum_alpha, p_bar=p_sum / cum_alpha, w_sum=w_sum.copy(),
        sum_alpha=cum_alpha,
        regret_w=float(rw_running[-1]), regret_p=float(rp_running[-1]),
        gap_bound=float(gap_running[-1]),
        w_geometry=geometry,
        bounded_w_comparator=geometry.startswith("qnorm"),
        sum_sq_l1_delta=sum_sq_delta,
        hats_w=hats_w, hats_p=hats_p,
    )


def weighted_average(trace: Trace) -> np.ndarray:
    """Post-hoc weighted average from the recorded iterates."""
    if trace.ws is None:
        return trace.w_bar.copy()
    return trace.alphas @ trace.ws / trace.alphas.sum()


def gap_bound_check(trace: Trace, dataset: Dataset, objective: GameObjective,
                    comparator_w: np.ndarray, slack: float = 1e-9):
    """Duality-gap guarantee: m(w) - m(w_bar) <= (R^p + R^w) / sum(alpha).

    The comparator must lie in the w-player's decision set.
    """
    lhs = (best_response_value(objective, dataset, comparator_w)
           - best_response_value(objective, dataset, trace.w_bar))
    rhs = (trace.regret_w + trace.regret_p) / trace.sum_alpha
    return lhs, rhs, lhs <= rhs + slack
