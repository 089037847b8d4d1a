"""Build problems and run single replications from a parsed configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import RunReport, attach_bounds, measured_constants, regret, regret_bound_check, regret_bound_rhs
from .oracle import OracleConfig, compute_optima, path_stats
from .problem import ErrorModel
from .scenarios import (FormationSpec, SubspaceStreamSpec, circle_target, formation_problem, quadratic_toy,
                        star_polygon, static_target, subspace_problem, unit_step_target)
from .solvers import SolverConfig, run


def build_problem(cfg: dict):
    """Return ``(problem, x1, scenario_alpha)`` for the configured scenario."""
    sc = cfg["scenario"]
    if sc == "formation":
        spec = FormationSpec(
            m=cfg["formation.m"], K=cfg["formation.K"], omega=cfg["formation.omega"], lam=cfg["formation.lam"],
            sigma_i_sq=cfg["formation.sigma_i_sq"], base_shape_end=star_polygon(cfg["formation.m"], cfg["formation.star_inner"]),
            leader_amplitude=cfg["formation.leader_amplitude"], scale=cfg["formation.scale"], seed=cfg["formation.seed"])
        p = formation_problem(spec)
        x1, alpha = p.initial_point(), None
    elif sc == "subspace":
        fields = SubspaceStreamSpec.__dataclass_fields__
        spec = SubspaceStreamSpec(**{f: cfg["subspace." + f] for f in fields})
        p = subspace_problem(spec)
        x1, alpha = np.zeros(p.n), spec.alpha_L
    else:
        n = cfg["quadratic.n"]
        target = cfg["quadratic.target"]
        if target == "static":
            path = static_target(np.full(n, cfg["quadratic.target_value"]))
        elif target == "unit_step":
            path = unit_step_target(n)
        else:
            path = circle_target(n, cfg["quadratic.radius"], cfg["quadratic.omega"])
        p = quadratic_toy(cfg["quadratic.K"], n, path, l1=cfg["quadratic.l1"], N=cfg["quadratic.N"],
                          spread=cfg["quadratic.spread"], seed=cfg["quadratic.seed"])
        x1, alpha = np.zeros(n), None
    overrides = {k: cfg["constants." + k] for k in ("mu", "L") if cfg["constants." + k] is not None}
    if overrides:
        p.constants = p.constants.replace(**overrides)
    return p, x1, alpha


def solver_config(cfg: dict, seed: int, scenario_alpha=None) -> SolverConfig:
    alpha = cfg["solver.alpha"] if cfg["solver.alpha"] is not None else scenario_alpha
    return SolverConfig(alpha=alpha, algorithm=cfg["algorithm"], K0=cfg["solver.K0"],
                        index_rule=cfg["solver.index_rule"], sample_schedule=cfg["solver.sample_schedule"],
                        seed=seed, clamp_alpha=cfg["solver.clamp_alpha"], diagnostics=cfg["solver.diagnostics"])


def error_model(cfg: dict, seed: int) -> ErrorModel:
    return ErrorModel(kind=cfg["error.kind"], variance=cfg["error.variance"], seed=seed)


def oracle_config(cfg: dict) -> OracleConfig:
    return OracleConfig(tol=cfg["oracle.tol"], max_iters=cfg["oracle.max_iters"], method=cfg["oracle.method"])


@dataclass
class ReplicationResult:
    seed: int
    report: RunReport
    alpha: float
    bound_rhs: float
    bound_ok: bool
    margin: float
    sigma_hat: float
    gamma: float


def evaluate(p, trace, optima, oracle_tol=1e-10) -> ReplicationResult:
    """Regret report plus the explicit bound check with measured ``sigma`` and ``gamma``."""
    rep = regret(p, trace, optima, oracle_tol)
    _, sigma_hat = path_stats(optima) if len(optima) > 1 else (0.0, 0.0)
    tc = measured_constants(p.constants, rep, sigma_hat)
    attach_bounds(rep, tc, trace.alpha)
    ok, margin = regret_bound_check(rep, tc, trace.alpha)
    return ReplicationResult(trace.seed, rep, trace.alpha, regret_bound_rhs(rep, tc, trace.alpha), ok, margin,
                             sigma_hat, tc.gamma)


def run_replication(cfg: dict, seed: int) -> ReplicationResult:
    p, x1, scenario_alpha = build_problem(cfg)
    scfg = solver_config(cfg, seed, scenario_alpha)
    em = error_model(cfg, seed) if cfg["algorithm"] == "ipogd" else None
    trace = run(p, scfg, x1, em)
    optima = compute_optima(p, oracle_config(cfg))
    return evaluate(p, trace, optima, cfg["oracle.tol"])


def decreasing_tail(avg: np.ndarray, frac: float = 0.5) -> bool:
    tail = avg[int(math.floor(len(avg) * (1 - frac))):]
    return bool(np.all(np.diff(tail) <= 0))
