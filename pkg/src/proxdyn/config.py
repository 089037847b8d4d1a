"""Flat ``dotted.key = value`` experiment configuration.

One assignment per line, ``#`` starts a comment.  Every key must appear in
:data:`SCHEMA`; values are parsed by the schema's converter, and ``auto``
selects a scenario-dependent default where the schema allows it.
"""

from __future__ import annotations

from pathlib import Path


class ConfigError(ValueError):
    pass


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return parse


def _auto(conv):
    def parse(s):
        return None if s.strip().lower() == "auto" else conv(s)
    return parse


def _pair(s):
    parts = [float(t) for t in s.replace(",", " ").split()]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {s!r}")
    return tuple(parts)


SCHEMA = {
    "scenario": (_choice("formation", "subspace", "quadratic"), "quadratic"),
    "algorithm": (_choice("ipogd", "opsvrg", "opiss"), "ipogd"),
    "replications": (int, 20),
    "output_dir": (str, "proxdyn_out"),
    "solver.alpha": (_auto(float), None),
    "solver.clamp_alpha": (_bool, True),
    "solver.K0": (int, 16),
    "solver.index_rule": (_choice("uniform_random", "cyclic"), "uniform_random"),
    "solver.sample_schedule": (_choice("exp", "inv_square"), "exp"),
    "solver.diagnostics": (_bool, True),
    "error.kind": (_choice("none", "gaussian"), "none"),
    "error.variance": (float, 0.0),
    "oracle.tol": (float, 1e-10),
    "oracle.max_iters": (int, 100_000),
    "oracle.method": (_auto(_choice("closed_form", "batch_prox_grad")), None),
    "bounds.on_failure": (_choice("error", "warn"), "error"),
    "constants.mu": (_auto(float), None),
    "constants.L": (_auto(float), None),
    "validate.trials": (int, 100),
    "validate.prox_cases": (int, 200),
    "formation.m": (int, 10),
    "formation.K": (int, 500),
    "formation.omega": (float, 0.06),
    "formation.lam": (float, 3.0),
    "formation.sigma_i_sq": (float, 0.01),
    "formation.star_inner": (float, 0.45),
    "formation.leader_amplitude": (_pair, (40.0, 30.0)),
    "formation.scale": (float, 5.0),
    "formation.seed": (int, 0),
    "subspace.r": (int, 64),
    "subspace.Lwin": (int, 16),
    "subspace.rank": (int, 2),
    "subspace.drift_rate": (float, 0.01),
    "subspace.sparsity": (float, 0.05),
    "subspace.N": (int, 8),
    "subspace.mu_L": (float, 0.005),
    "subspace.mu_S": (float, 2.0),
    "subspace.lam_L": (float, 100.0),
    "subspace.lam_S": (float, 0.034),
    "subspace.alpha_L": (float, 0.2),
    "subspace.alpha_S": (float, 0.2),
    "subspace.K": (int, 192),
    "subspace.background_scale": (float, 100.0),
    "subspace.outlier_magnitude": (float, 100.0),
    "subspace.noise_std": (float, 1.0),
    "subspace.seed": (int, 0),
    "quadratic.K": (int, 200),
    "quadratic.n": (int, 5),
    "quadratic.target": (_choice("static", "unit_step", "circle"), "static"),
    "quadratic.target_value": (float, 1.0),
    "quadratic.radius": (float, 10.0),
    "quadratic.omega": (float, 0.05),
    "quadratic.l1": (float, 0.0),
    "quadratic.N": (int, 1),
    "quadratic.spread": (float, 1.0),
    "quadratic.seed": (int, 0),
}

POSITIVE_INTS = ("replications", "solver.K0", "oracle.max_iters", "validate.trials",
                 "formation.m", "formation.K", "subspace.K", "quadratic.K", "quadratic.n", "quadratic.N")


def defaults() -> dict:
    return {k: d for k, (_, d) in SCHEMA.items()}


def _assign(cfg, key, raw, where):
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    conv = SCHEMA[key][0]
    try:
        cfg[key] = conv(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def parse_text(text: str, source: str = "<config>") -> dict:
    cfg = defaults()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (t.strip() for t in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        _assign(cfg, key, raw, f"{source}:{lineno}")
    return cfg


def load(path, overrides=()) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = parse_text(text, str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        _assign(cfg, key.strip(), raw, "--set")
    check(cfg)
    return cfg


def check(cfg: dict) -> None:
    for key in POSITIVE_INTS:
        if cfg[key] < 1:
            raise ConfigError(f"{key} must be >= 1")
    if cfg["oracle.tol"] <= 0:
        raise ConfigError("oracle.tol must be positive")
    if cfg["error.variance"] < 0:
        raise ConfigError("error.variance must be nonnegative")
    if cfg["error.kind"] == "gaussian" and cfg["algorithm"] != "ipogd":
        raise ConfigError("error.kind applies to ipogd only; opsvrg and opiss build their own inexact gradients")
    if cfg["algorithm"] != "ipogd":
        n_comp = {"formation": 1, "subspace": cfg["subspace.N"], "quadratic": cfg["quadratic.N"]}[cfg["scenario"]]
        if n_comp < 2:
            raise ConfigError(f"algorithm {cfg['algorithm']} needs a finite-sum scenario (component count >= 2)")
    if cfg["scenario"] == "subspace" and cfg["subspace.alpha_L"] != cfg["subspace.alpha_S"]:
        raise ConfigError("subspace.alpha_L and subspace.alpha_S must match (a single step size drives both blocks)")
    if cfg["scenario"] == "subspace" and cfg["subspace.r"] % cfg["subspace.N"]:
        raise ConfigError("subspace.r must be divisible by subspace.N")
