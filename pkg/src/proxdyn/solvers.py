"""Inexact proximal online gradient descent and its two sub-sampled variants.

* ``run_ipogd``  -- one (possibly noisy) full-gradient step and one prox per step.
* ``run_opsvrg`` -- online proximal SVRG: one fresh component gradient corrected
  by an anchored mean gradient that is recomputed every ``K0`` steps.
* ``run_opiss``  -- online proximal gradient with an increasing random sample of
  components, ``|I_k| = ceil(N (1 - exp(-k)))`` by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .numerics import as_vector
from .problem import DynamicProblem, ErrorModel, TheoreticalConstants, noisy_grad

DIVERGENCE_NORM = 1e8
ALPHA_SAFETY = 0.95


class DivergenceError(RuntimeError):
    def __init__(self, k, norm):
        super().__init__(f"iterate diverged at step k={k} (||x||={norm:.3g}); step size outside the contraction range?")
        self.k = k


def exp_schedule(N: int) -> Callable[[int], int]:
    """``k -> ceil(N (1 - e^{-k}))``."""
    def size(k):
        return int(math.ceil(N * (1.0 - math.exp(-k))))
    return size


def inv_square_schedule(N: int) -> Callable[[int], int]:
    """``k -> N - ceil(N / k^2)``, floored at one sample."""
    def size(k):
        return N - int(math.ceil(N / k ** 2))
    return size


SCHEDULES = {"exp": exp_schedule, "inv_square": inv_square_schedule}


@dataclass
class SolverConfig:
    """Step size and algorithm-specific knobs.

    ``alpha=None`` selects ``0.95 * 2 mu / L^2``; a user value is capped there
    when ``clamp_alpha`` is set and rejected otherwise if it leaves the
    contraction interval.
    """

    alpha: Optional[float] = None
    algorithm: str = "ipogd"
    K0: int = 16
    index_rule: str = "uniform_random"
    sample_schedule: Union[str, Callable[[int], int], None] = "exp"
    seed: int = 0
    clamp_alpha: bool = True
    diagnostics: bool = True

    def __post_init__(self):
        if self.algorithm not in ("ipogd", "opsvrg", "opiss"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.K0 < 1:
            raise ValueError("K0 must be >= 1")
        if self.index_rule not in ("uniform_random", "cyclic"):
            raise ValueError(f"unknown index rule {self.index_rule!r}")
        if isinstance(self.sample_schedule, str) and self.sample_schedule not in SCHEDULES:
            raise ValueError(f"unknown sample schedule {self.sample_schedule!r}")

    def schedule_for(self, N: int) -> Callable[[int], int]:
        s = self.sample_schedule
        if s is None:
            s = "exp"
        base = SCHEDULES[s](N) if isinstance(s, str) else s
        return lambda k: min(N, max(1, int(base(k))))


def effective_alpha(cfg: SolverConfig, tc: TheoreticalConstants) -> float:
    cap = ALPHA_SAFETY * tc.alpha_max
    if cfg.alpha is None:
        return cap
    if not cfg.alpha > 0:
        raise ValueError("alpha must be positive")
    if cfg.clamp_alpha:
        return min(cfg.alpha, cap)
    if cfg.alpha >= tc.alpha_max:
        raise ValueError(f"alpha={cfg.alpha} is outside (0, 2 mu / L^2) = (0, {tc.alpha_max:.6g})")
    return cfg.alpha


@dataclass
class StepTrace:
    """One step: ``x`` is ``x_k``, ``x_next`` is ``x_{k+1}``.

    ``h_val`` is the cost charged at step ``k``: ``h_k(x_k)``, or ``h_k(x_{k+1})``
    for problems that score the committed action.
    """

    k: int
    x: np.ndarray
    x_next: np.ndarray
    e_norm: float
    h_val: float
    grad_evals: int
    info: dict = field(default_factory=dict)


class Trace(list):
    """List of :class:`StepTrace` plus the step size actually used."""

    def __init__(self, alpha, algorithm, seed=0):
        super().__init__()
        self.alpha = alpha
        self.algorithm = algorithm
        self.seed = seed

    def iterates(self):
        return [s.x for s in self]

    def played(self, p: DynamicProblem):
        return [s.x_next if p.scores_next_iterate else s.x for s in self]


@dataclass
class SvrgMemory:
    anchor: np.ndarray
    mean_grad: np.ndarray
    last_refresh: int


def _finish_step(p, trace, k, x, z, alpha, e_norm, evals, info):
    x_next = p.prox_g(k, z, alpha)
    nrm = float(np.linalg.norm(x_next))
    if not math.isfinite(nrm) or nrm > DIVERGENCE_NORM:
        raise DivergenceError(k, nrm)
    h_val = p.eval_h(k, x_next if p.scores_next_iterate else x)
    trace.append(StepTrace(k, x, x_next, e_norm, h_val, evals, info))
    return x_next


def run_ipogd(p: DynamicProblem, em: ErrorModel, cfg: SolverConfig, x1, on_step=None) -> Trace:
    """``x_{k+1} = prox_k(x_k - alpha (grad f_k(x_k) + e_k))`` for ``k = 1..K``."""
    alpha = effective_alpha(cfg, p.constants)
    trace = Trace(alpha, "ipogd", cfg.seed)
    x = as_vector(x1).copy()
    for k in range(1, p.K + 1):
        p.begin_step(k, x)
        g, e = noisy_grad(p, em, k, x)
        if on_step is not None:
            on_step(k, x, e)
        x = _finish_step(p, trace, k, x, x - alpha * g, alpha, float(np.linalg.norm(e)), p.N, {})
    return trace


def mean_component_grad(p: DynamicProblem, k: int, x: np.ndarray) -> np.ndarray:
    acc = p.component_grad(k, 0, x).copy()
    for j in range(1, p.N):
        acc += p.component_grad(k, j, x)
    return acc / p.N


def svrg_sampling_error(p: DynamicProblem, k: int, i: int, x: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Sampling error of the variance-reduced estimate with a same-time anchor mean.

    ``grad_i(x) - grad_i(anchor) + mean_j grad_j(anchor) - mean_j grad_j(x)``,
    all evaluated with ``f_k``.  Its average over ``i`` is exactly zero.
    """
    return (p.component_grad(k, i, x) - p.component_grad(k, i, anchor)
            + mean_component_grad(p, k, anchor) - mean_component_grad(p, k, x))


def run_opsvrg(p: DynamicProblem, cfg: SolverConfig, x1, on_step=None) -> Trace:
    """Online proximal SVRG.

    At every ``k`` with ``(k - 1) mod K0 == 0`` the anchor becomes ``x_k`` and the
    mean gradient is recomputed from all ``N`` components of ``f_k``; every step
    then evaluates one component at ``x_k`` and at the anchor.

    With ``cfg.diagnostics`` the logged ``e_norm`` is the distance between the
    estimate and the exact gradient, and ``info['sampling_error_norm']`` holds
    the same-time sampling error (see :func:`svrg_sampling_error`); the extra
    gradient calls are not counted in ``grad_evals``.
    """
    if p.N < 2:
        raise ValueError("OP-SVRG needs a problem with at least two components")
    alpha = effective_alpha(cfg, p.constants)
    rng = np.random.default_rng(cfg.seed)
    trace = Trace(alpha, "opsvrg", cfg.seed)
    x = as_vector(x1).copy()
    mem = None
    for k in range(1, p.K + 1):
        p.begin_step(k, x)
        evals = 0
        if (k - 1) % cfg.K0 == 0:
            mem = SvrgMemory(x.copy(), mean_component_grad(p, k, x), k)
            evals += p.N
        i = (k - 1) % p.N if cfg.index_rule == "cyclic" else int(rng.integers(p.N))
        gi_x = p.component_grad(k, i, x)
        gi_a = p.component_grad(k, i, mem.anchor)
        evals += 2
        d = gi_x - gi_a + mem.mean_grad
        info = {"component": i, "refresh": mem.last_refresh == k}
        e_norm = math.nan
        if cfg.diagnostics:
            full_x = mean_component_grad(p, k, x)
            e_norm = float(np.linalg.norm(d - full_x))
            e28 = gi_x - gi_a + mean_component_grad(p, k, mem.anchor) - full_x
            info["sampling_error_norm"] = float(np.linalg.norm(e28))
        if on_step is not None:
            on_step(k, x, mem, i)
        x = _finish_step(p, trace, k, x, x - alpha * d, alpha, e_norm, evals, info)
    return trace


def run_opiss(p: DynamicProblem, cfg: SolverConfig, x1, on_step=None) -> Trace:
    """Online proximal gradient with increasing sample size.

    ``I_k`` is drawn uniformly without replacement with ``|I_k| = schedule(k)``.
    With ``cfg.diagnostics`` all ``N`` component gradients are also evaluated
    (uncounted) to log ``e_norm`` and ``info['max_component_norm']``.
    """
    N = p.N
    alpha = effective_alpha(cfg, p.constants)
    schedule = cfg.schedule_for(N)
    rng = np.random.default_rng(cfg.seed)
    trace = Trace(alpha, "opiss", cfg.seed)
    x = as_vector(x1).copy()
    for k in range(1, p.K + 1):
        p.begin_step(k, x)
        size = schedule(k)
        if size == N:
            idx = np.arange(N)
        else:
            idx = np.sort(rng.choice(N, size=size, replace=False))
        info = {"sample_size": size}
        e_norm = math.nan
        if cfg.diagnostics:
            comps = [p.component_grad(k, j, x) for j in range(N)]
            d = sum(comps[j] for j in idx) / size
            full = sum(comps) / N
            e_norm = 0.0 if size == N else float(np.linalg.norm(d - full))
            info["max_component_norm"] = max(float(np.linalg.norm(c)) for c in comps)
        else:
            d = sum(p.component_grad(k, int(j), x) for j in idx) / size
        if on_step is not None:
            on_step(k, x, idx)
        x = _finish_step(p, trace, k, x, x - alpha * d, alpha, e_norm, size, info)
    return trace


def run(p: DynamicProblem, cfg: SolverConfig, x1, em: Optional[ErrorModel] = None) -> Trace:
    if cfg.algorithm == "ipogd":
        return run_ipogd(p, em or ErrorModel(), cfg, x1)
    if em is not None and em.kind != "none":
        raise ValueError(f"{cfg.algorithm} takes exact component gradients; drop the error model")
    if cfg.algorithm == "opsvrg":
        return run_opsvrg(p, cfg, x1)
    return run_opiss(p, cfg, x1)
