"""Model configuration: strict YAML schema shared by all CLI subcommands.

One file describes the model (immigration and branching sections), the
numeric settings used to build the limit law, and an optional simulation
section.  Parsing is strict: unknown keys anywhere are rejected so typos
surface as errors instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .errors import ConfigError
from .measures import (
    ExponentialDensity,
    FiniteAtoms,
    Measure,
    TabulatedTail,
    TemperedStable,
)
from .mechanisms import BranchingMechanism, ImmigrationMechanism

__all__ = [
    "ModelConfig",
    "NumericsConfig",
    "SimulationConfig",
    "load_config",
    "parse_config",
    "dump_config",
]


@dataclass(frozen=True)
class NumericsConfig:
    xmax: float = 10.0
    nodes: int = 2048
    stehfest_order: int = 16
    force_numeric: bool = False


@dataclass(frozen=True)
class SimulationConfig:
    horizon: float
    dt: float
    paths: int
    seed: int
    x0: float = 0.0
    cutoff: float = 1e-3
    u_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class ModelConfig:
    immigration: ImmigrationMechanism
    branching: BranchingMechanism
    numerics: NumericsConfig
    simulation: SimulationConfig | None = None


def _section(raw: object, name: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return dict(raw)


def _check_empty(d: dict, name: str) -> None:
    if d:
        keys = ", ".join(sorted(map(str, d)))
        raise ConfigError(f"unknown keys in '{name}': {keys}")


def _float(d: dict, key: str, name: str, default: float | None = None) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"'{name}' requires key '{key}'")
        return default
    v = d.pop(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{name}.{key}' must be a number")
    return float(v)


def _int(d: dict, key: str, name: str, default: int | None = None) -> int:
    if key not in d:
        if default is None:
            raise ConfigError(f"'{name}' requires key '{key}'")
        return default
    v = d.pop(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"'{name}.{key}' must be an integer")
    return v


def _bool(d: dict, key: str, name: str, default: bool) -> bool:
    v = d.pop(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"'{name}.{key}' must be true or false")
    return v


def _float_list(d: dict, key: str, name: str) -> tuple[float, ...]:
    if key not in d:
        raise ConfigError(f"'{name}' requires key '{key}'")
    v = d.pop(key)
    if not isinstance(v, (list, tuple)) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in v
    ):
        raise ConfigError(f"'{name}.{key}' must be a list of numbers")
    return tuple(float(x) for x in v)


def _parse_measure(raw: object, name: str) -> Measure | None:
    if raw is None:
        return None
    d = _section(raw, name)
    family = d.pop("family", None)
    try:
        return _build_measure(family, d, name)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid '{name}': {exc}") from None


def _build_measure(family: object, d: dict, name: str) -> Measure:
    if family == "finite_atoms":
        weights = _float_list(d, "weights", name)
        locations = _float_list(d, "locations", name)
        _check_empty(d, name)
        m: Measure = FiniteAtoms(weights=weights, locations=locations)
    elif family == "exponential_density":
        c = _float(d, "c", name)
        rho = _float(d, "rho", name)
        _check_empty(d, name)
        m = ExponentialDensity(c=c, rho=rho)
    elif family == "tempered_stable":
        c = _float(d, "c", name)
        alpha = _float(d, "alpha", name)
        rho = _float(d, "rho", name, default=0.0)
        _check_empty(d, name)
        m = TemperedStable(c=c, alpha=alpha, rho=rho)
    elif family == "tabulated_tail":
        xs = _float_list(d, "xs", name)
        tails = _float_list(d, "tails", name)
        _check_empty(d, name)
        m = TabulatedTail(xs=xs, tails=tails)
    else:
        raise ConfigError(
            f"'{name}.family' must be one of finite_atoms, exponential_density, "
            f"tempered_stable, tabulated_tail (got {family!r})"
        )
    return m


def parse_config(text: str) -> ModelConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from None
    top = _section(raw, "config")

    imm_d = _section(top.pop("immigration", None), "immigration")
    imm_measure = _parse_measure(imm_d.pop("measure", None), "immigration.measure")
    imm_drift = _float(imm_d, "drift", "immigration", default=0.0)
    _check_empty(imm_d, "immigration")

    if "branching" not in top:
        raise ConfigError("config requires a 'branching' section")
    br_d = _section(top.pop("branching"), "branching")
    br_measure = _parse_measure(br_d.pop("measure", None), "branching.measure")
    br_diffusion = _float(br_d, "diffusion", "branching", default=0.0)
    br_drift = _float(br_d, "drift", "branching")
    _check_empty(br_d, "branching")

    num_d = _section(top.pop("numerics", None), "numerics")
    defaults = NumericsConfig()
    numerics = NumericsConfig(
        xmax=_float(num_d, "xmax", "numerics", default=defaults.xmax),
        nodes=_int(num_d, "nodes", "numerics", default=defaults.nodes),
        stehfest_order=_int(
            num_d, "stehfest_order", "numerics", default=defaults.stehfest_order
        ),
        force_numeric=_bool(num_d, "force_numeric", "numerics", defaults.force_numeric),
    )
    _check_empty(num_d, "numerics")
    if numerics.xmax <= 0.0 or numerics.nodes < 8:
        raise ConfigError("numerics.xmax must be positive and numerics.nodes >= 8")
    if numerics.stehfest_order < 4 or numerics.stehfest_order % 2:
        raise ConfigError("numerics.stehfest_order must be an even integer >= 4")

    simulation = None
    if top.get("simulation") is not None:
        sim_d = _section(top.pop("simulation"), "simulation")
        u_values: tuple[float, ...] = ()
        if "u_values" in sim_d:
            u_values = _float_list(sim_d, "u_values", "simulation")
        simulation = SimulationConfig(
            horizon=_float(sim_d, "horizon", "simulation"),
            dt=_float(sim_d, "dt", "simulation"),
            paths=_int(sim_d, "paths", "simulation"),
            seed=_int(sim_d, "seed", "simulation", default=0),
            x0=_float(sim_d, "x0", "simulation", default=0.0),
            cutoff=_float(sim_d, "cutoff", "simulation", default=1e-3),
            u_values=u_values,
        )
        _check_empty(sim_d, "simulation")
        if simulation.horizon <= 0.0 or simulation.dt <= 0.0:
            raise ConfigError("simulation.horizon and simulation.dt must be positive")
        if simulation.paths < 1:
            raise ConfigError("simulation.paths must be >= 1")
    else:
        top.pop("simulation", None)
    _check_empty(top, "config")

    try:
        immigration = ImmigrationMechanism(drift=imm_drift, measure=imm_measure)
        branching = BranchingMechanism(
            diffusion=br_diffusion, drift=br_drift, measure=br_measure
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ModelConfig(
        immigration=immigration,
        branching=branching,
        numerics=numerics,
        simulation=simulation,
    )


def load_config(path: str) -> ModelConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return parse_config(text)


def _measure_dict(m: Measure | None) -> dict | None:
    if m is None:
        return None
    if isinstance(m, FiniteAtoms):
        return {
            "family": "finite_atoms",
            "weights": list(m.weights),
            "locations": list(m.locations),
        }
    if isinstance(m, ExponentialDensity):
        return {"family": "exponential_density", "c": m.c, "rho": m.rho}
    if isinstance(m, TemperedStable):
        return {"family": "tempered_stable", "c": m.c, "alpha": m.alpha, "rho": m.rho}
    if isinstance(m, TabulatedTail):
        return {"family": "tabulated_tail", "xs": list(m.xs), "tails": list(m.tails)}
    raise ConfigError(f"cannot serialize measure of type {type(m).__name__}")


def dump_config(cfg: ModelConfig) -> str:
    """Render a config back to YAML; the output re-parses to an equal value."""
    doc: dict = {
        "immigration": {
            "drift": cfg.immigration.drift,
            "measure": _measure_dict(cfg.immigration.measure),
        },
        "branching": {
            "diffusion": cfg.branching.diffusion,
            "drift": cfg.branching.drift,
            "measure": _measure_dict(cfg.branching.measure),
        },
        "numerics": {
            "xmax": cfg.numerics.xmax,
            "nodes": cfg.numerics.nodes,
            "stehfest_order": cfg.numerics.stehfest_order,
            "force_numeric": cfg.numerics.force_numeric,
        },
    }
    if cfg.simulation is not None:
        doc["simulation"] = {
            "horizon": cfg.simulation.horizon,
            "dt": cfg.simulation.dt,
            "paths": cfg.simulation.paths,
            "seed": cfg.simulation.seed,
            "x0": cfg.simulation.x0,
            "cutoff": cfg.simulation.cutoff,
            "u_values": list(cfg.simulation.u_values),
        }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)
