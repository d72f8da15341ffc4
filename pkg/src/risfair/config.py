"""Flat ``key = value`` configuration files.

Lines are ``namespace.key = value``; ``#`` starts a comment. Recognized
namespaces: ``channel.``, ``phase.``, ``power.``, ``solver.``, ``experiment.``.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .channel import PathLossParams
from .harness import ConfigError, ExperimentSpec
from .phaseopt import PhaseConfig
from .poweropt import PowerConfig
from .solver import SolverConfig


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.replace(":", ",").split(",") if v.strip()]


def _pair(s: str) -> tuple[float, float]:
    a, b = _floats(s)
    return (a, b)


def _methods(s: str) -> list[str]:
    return [m.strip() for m in s.split(",") if m.strip()]


# key -> (target, field, parser)
KEYS = {
    "experiment.sweep": ("spec", "sweep_variable", str.strip),
    "experiment.values": ("spec", "sweep_values", _floats),
    "experiment.trials": ("spec", "trials", int),
    "experiment.seed": ("spec", "base_seed", int),
    "experiment.xi": ("spec", "xi_ratios", _floats),
    "experiment.methods": ("spec", "methods", _methods),
    "experiment.pmax_dbm": ("spec", "pmax_dbm", float),
    "experiment.workers": ("spec", "workers", int),
    "channel.M": ("spec", "M", int),
    "channel.K": ("spec", "K", int),
    "channel.N": ("spec", "N", int),
    "channel.D": ("spec", "D", float),
    "channel.eta": ("spec", "eta", float),
    "channel.bandwidth_hz": ("spec", "bandwidth_hz", float),
    "channel.psd_dbm_per_hz": ("spec", "psd_dbm_per_hz", float),
    "channel.user_center": ("spec", "user_center", _pair),
    "channel.user_radius": ("spec", "user_radius", float),
    "channel.freeze_users": ("spec", "freeze_users", _bool),
    "channel.reference_loss_db": ("pathloss", "reference_loss_db", float),
    "channel.exponent_bs_user": ("pathloss", "exponent_bs_user", float),
    "channel.exponent_bs_ris": ("pathloss", "exponent_bs_ris", float),
    "channel.exponent_ris_user": ("pathloss", "exponent_ris_user", float),
    "phase.max_dual_iters": ("phase", "max_dual_iters", int),
    "phase.step0": ("phase", "step0", float),
    "phase.y_min": ("phase", "y_min", float),
    "phase.use_literal_lemma1": ("phase", "use_literal_lemma1", _bool),
    "phase.refine": ("phase", "refine", _bool),
    "phase.coordinate_grid": ("phase", "coordinate_grid", int),
    "power.bisect_tol": ("power", "bisect_tol", float),
    "power.lagrangian_enabled": ("power", "lagrangian_enabled", _bool),
    "power.max_iters": ("power", "max_iters", int),
    "power.step0": ("power", "step0", float),
    "solver.max_outer": ("solver", "max_outer_iters", int),
    "solver.tol": ("solver", "outer_tol", float),
    "solver.restarts": ("solver", "restarts", int),
    "solver.p_min_clamp": ("solver", "p_min_clamp", float),
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load(path) -> dict[str, str]:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def build_spec(values: dict[str, str], base: ExperimentSpec | None = None) -> ExperimentSpec:
    spec = base or ExperimentSpec()
    groups: dict[str, dict] = {"spec": {}, "pathloss": {}, "phase": {}, "power": {}, "solver": {}}
    for key, raw in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        target, name, parse = KEYS[key]
        try:
            groups[target][name] = parse(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    try:
        pathloss = replace(spec.pathloss, **groups["pathloss"])
        phase = replace(spec.solver.phase, **groups["phase"])
        power = replace(spec.solver.power, **groups["power"])
        solver = replace(spec.solver, phase=phase, power=power, **groups["solver"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spec = replace(spec, pathloss=pathloss, solver=solver, **groups["spec"])
    return spec.validate()


def _check_types():
    # keep KEYS honest against the dataclasses they target
    for target, cls in (("pathloss", PathLossParams), ("phase", PhaseConfig), ("power", PowerConfig),
                        ("solver", SolverConfig), ("spec", ExperimentSpec)):
        fields = cls.__dataclass_fields__
        for key, (t, name, _) in KEYS.items():
            if t == target and name not in fields:
                raise AssertionError(f"{key} maps to missing field {cls.__name__}.{name}")


_check_types()
