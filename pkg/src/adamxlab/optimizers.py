"""Projected adaptive-moment step rules and their momentum schedules.

Three closely related optimizers share the moment recursions

    m_t = beta1_t * m_{t-1} + (1 - beta1_t) * g_t
    v_t = beta2   * v_{t-1} + (1 - beta2)   * g_t^2

and differ only in the denominator surrogate v_hat:

* ``step_adam``    keeps v_hat_t = v_t (no maximum), optionally with the
  usual bias correction applied inside the update.
* ``step_amsgrad`` keeps the running maximum v_hat_t = max(v_hat_{t-1}, v_t).
* ``step_adamx``   rescales the previous maximum before comparing,
  v_hat_t = max(((1-beta1_t)^2/(1-beta1_{t-1})^2) * v_hat_{t-1}, v_t),
  with v_hat_1 = v_1, which keeps sqrt(t * v_hat_t)/(1-beta1_t)
  nondecreasing for any decaying schedule.

The update is x_{t+1} = project(x_t - alpha_t * m_t / (sqrt(v_hat_t) + eps))
with alpha_t = alpha / sqrt(t). The gradient passed in must have been
taken at the state's current iterate; the returned state carries the
post-update iterate together with the moments of step t.

Coordinates whose denominator is exactly zero (possible only when every
gradient seen so far vanished there, which forces m = 0 too) take a zero
update; with the default eps = 0 this resolves 0/0 to the limit of the
true update and preserves the 16-digit reference trajectories.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NumericFault
from .numerics import as_vector, project_box


class Schedule(str, Enum):
    """How the first-moment weight beta1_t evolves over steps."""

    CONSTANT = "const"
    EXP_DECAY = "exp"
    INVERSE_T = "inv"


@dataclass(frozen=True)
class HyperParams:
    """Hyperparameters shared by all three step rules.

    ``lam`` is the decay rate of the exponential schedule
    beta1_t = beta1 * lam^(t-1); it is ignored by the other schedules
    but always validated. ``gamma`` = beta1/sqrt(beta2) may not exceed 1;
    the regret bounds additionally need gamma < 1, which the bound code
    enforces at evaluation time. ``alpha_constant`` switches off the
    1/sqrt(t) step-size decay; it exists for toy training runs only and
    is never used in verification.
    """

    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    lam: float = 0.001
    schedule: Schedule = Schedule.EXP_DECAY
    epsilon: float = 0.0
    bias_correction: bool = False
    alpha_constant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not 0 <= self.beta1 < 1:
            raise ValueError("beta1 must lie in [0, 1)")
        if not 0 < self.beta2 < 1:
            raise ValueError("beta2 must lie in (0, 1)")
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.gamma > 1:
            raise ValueError("beta1/sqrt(beta2) must not exceed 1")

    @property
    def gamma(self):
        return self.beta1 / math.sqrt(self.beta2)


@dataclass
class OptimizerState:
    """Value-type snapshot after ``t`` completed steps.

    ``beta1_prev`` records the beta1_t used by the most recent step; the
    AdamX rescaling needs it from step 2 on. A fresh state carries None.
    """

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    t: int = 0
    beta1_prev: float | None = None


def fresh_state(x1):
    """State before the first step: zero moments at the given iterate."""
    x1 = as_vector(x1)
    zeros = np.zeros_like(x1)
    return OptimizerState(x=x1.copy(), m=zeros.copy(), v=zeros.copy(),
                          v_hat=zeros.copy(), t=0, beta1_prev=None)


def beta1_at(t, h):
    """The momentum weight beta1_t at step t >= 1 under h's schedule."""
    if t < 1:
        raise ValueError("step index starts at 1")
    if h.schedule is Schedule.CONSTANT:
        return h.beta1
    if h.schedule is Schedule.EXP_DECAY:
        return h.beta1 * h.lam ** (t - 1)
    return h.beta1 / t


def alpha_at(t, h):
    if h.alpha_constant:
        return h.alpha
    return h.alpha / math.sqrt(t)


def _moments(state, g, b1, h):
    g = as_vector(g, dim=state.x.shape[0])
    m = b1 * state.m + (1.0 - b1) * g
    v = h.beta2 * state.v + (1.0 - h.beta2) * g * g
    return m, v


def _guarded_update(m, v_hat, eps):
    denom = np.sqrt(v_hat) + eps
    out = np.zeros_like(m)
    np.divide(m, denom, out=out, where=denom > 0.0)
    return out

def _finish(state, m, v, v_hat, update, t, b1, h, box):
    z = state.x - alpha_at(t, h) * update
    for name, arr in (("m", m), ("v", v), ("v_hat", v_hat), ("x", z)):
        if not np.all(np.isfinite(arr)):
            raise NumericFault(f"non-finite {name} at step {t}", step=t)
    x = project_box(z, box)
    return OptimizerState(x=x, m=m, v=v, v_hat=v_hat, t=t, beta1_prev=b1)


def step_amsgrad(state, g, h, box):
    """One step with the running-maximum denominator."""
    t = state.t + 1
    b1 = beta1_at(t, h)
    m, v = _moments(state, g, b1, h)
    v_hat = np.maximum(state.v_hat, v)
    update = _guarded_update(m, v_hat, h.epsilon)
    return _finish(state, m, v, v_hat, update, t, b1, h, box)


def step_adamx(state, g, h, box):
    """One step with the rescaled-maximum denominator.

    At t = 1 the rule is v_hat_1 = v_1; afterwards the previous maximum
    is shrunk by ((1-beta1_t)/(1-beta1_{t-1}))^2 before the comparison,
    so a decaying schedule can never leave the denominator stranded at a
    stale scale.
    """
    t = state.t + 1
    b1 = beta1_at(t, h)
    m, v = _moments(state, g, b1, h)
    if t == 1:
        v_hat = v.copy()
    else:
        b1_prev = state.beta1_prev
        if b1_prev is None:
            raise ValueError("state lacks beta1_prev; advance it from a fresh state")
        if b1_prev >= 1:
            raise ValueError("beta1 of the previous step must be below 1")
        scale = (1.0 - b1) ** 2 / (1.0 - b1_prev) ** 2
        v_hat = np.maximum(scale * state.v_hat, v)
    update = _guarded_update(m, v_hat, h.epsilon)
    return _finish(state, m, v, v_hat, update, t, b1, h, box)


def step_adam(state, g, h, box):
    """One step with the raw second moment as denominator.

    Bias correction, when enabled, uses the base weights beta1 and beta2
    (not the scheduled beta1_t) in the classic 1 - beta^t factors. The
    stored v_hat mirrors v so states stay interchangeable with the other
    steppers.
    """
    t = state.t + 1
    b1 = beta1_at(t, h)
    m, v = _moments(state, g, b1, h)
    v_hat = v.copy()
    if h.bias_correction:
        m_eff = m / (1.0 - h.beta1 ** t)
        v_eff = v / (1.0 - h.beta2 ** t)
    else:
        m_eff, v_eff = m, v
    update = _guarded_update(m_eff, v_eff, h.epsilon)
    return _finish(state, m, v, v_hat, update, t, b1, h, box)


STEPPERS = {
    "adam": step_adam,
    "amsgrad": step_amsgrad,
    "adamx": step_adamx,
}


def resolve_stepper(stepper):
    """Accept a stepper function or one of the names in STEPPERS."""
    if callable(stepper):
        return stepper
    try:
        return STEPPERS[stepper]
    except KeyError:
        raise ValueError(f"unknown optimizer {stepper!r}; choose from {sorted(STEPPERS)}") from None
