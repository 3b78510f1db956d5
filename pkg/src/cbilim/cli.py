"""Command line front end.

One YAML config drives every subcommand so the reports stay comparable:

* ``classify``  branching regime and whether a limit law exists
* ``scale``     CSV of the scale function and its right derivative
* ``limit``     limit-law report plus CSV of the jump diagnostics
* ``density``   CSV of the recovered density of the limit law
* ``simulate``  Euler scheme summary and transform estimates
* ``verify``    cross-check suite (jump density two ways, exponent
                derivative identity, Monte Carlo against the transform)

Exit codes: 0 success, 1 invalid config or request, 2 numeric failure.
CSV output uses a header row and 17 significant digits.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .config import ModelConfig, SimulationConfig, dump_config, load_config
from .errors import ConfigError, NumericError
from .limitdist import (
    AtomAt,
    HalfLine,
    Point,
    UndeterminedContinuity,
    build_limit_law,
    class_membership,
    density,
    k_via_excursions,
)
from .mechanisms import (
    SubcriticalOrCritical,
    Supercritical,
    ZeroBranching,
    classify_branching,
    limit_distribution_exists,
)
from .riccati import transient_laplace
from .scale import build_scale
from .simulate import SimConfig, simulate

__all__ = ["main"]


def _fmt(x: float) -> str:
    return "%.17g" % x


def _parse_grid(text: str, name: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--{name} expects start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--{name} expects start:stop:count, got {text!r}") from None
    if n < 1 or b < a:
        raise ConfigError(f"--{name} needs count >= 1 and stop >= start")
    return np.linspace(a, b, n)


def _write_csv(path: str, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {path}")


def _out_dir(args) -> str:
    out = args.out if args.out is not None else "."
    os.makedirs(out, exist_ok=True)
    return out


def _build_law(cfg: ModelConfig):
    n = cfg.numerics
    return build_limit_law(
        cfg.immigration,
        cfg.branching,
        xmax=n.xmax,
        nodes=n.nodes,
        stehfest_order=n.stehfest_order,
        force_numeric=n.force_numeric,
    )


def _sim_config(cfg: ModelConfig, args) -> SimConfig:
    sim = cfg.simulation
    if sim is None:
        raise ConfigError("config has no 'simulation' section")
    if args.paths is not None:
        sim = SimulationConfig(
            horizon=sim.horizon, dt=sim.dt, paths=args.paths, seed=sim.seed,
            x0=sim.x0, cutoff=sim.cutoff, u_values=sim.u_values,
        )
    if args.seed is not None:
        sim = SimulationConfig(
            horizon=sim.horizon, dt=sim.dt, paths=sim.paths, seed=args.seed,
            x0=sim.x0, cutoff=sim.cutoff, u_values=sim.u_values,
        )
    return SimConfig(
        immigration=cfg.immigration,
        branching=cfg.branching,
        horizon=sim.horizon,
        dt=sim.dt,
        paths=sim.paths,
        seed=sim.seed,
        x0=sim.x0,
        cutoff=sim.cutoff,
        u_values=sim.u_values or (0.5, 1.0, 2.0),
    )


# ---------------------------------------------------------------------------
# subcommands


def _describe_class(cls) -> str:
    if isinstance(cls, ZeroBranching):
        return "zero branching (state reverts to immigration flow only)"
    if isinstance(cls, Supercritical):
        root = "none" if math.isinf(cls.root) else _fmt(cls.root)
        return f"supercritical (rate {_fmt(cls.rate)}, positive root {root})"
    if cls.rate < 0.0:
        return f"subcritical (rate {_fmt(cls.rate)})"
    return "critical (rate 0)"


def _cmd_classify(cfg: ModelConfig, args) -> int:
    cls = classify_branching(cfg.branching)
    decision = limit_distribution_exists(cfg.immigration, cfg.branching)
    print(f"branching class: {_describe_class(cls)}")
    print(f"limit law: {decision.verdict} ({decision.reason})")
    return 0


def _cmd_scale(cfg: ModelConfig, args) -> int:
    n = cfg.numerics
    sf = build_scale(
        cfg.branching, n.xmax, nodes=n.nodes,
        stehfest_order=n.stehfest_order, force_numeric=n.force_numeric,
    )
    xs = (
        _parse_grid(args.x_grid, "x-grid")
        if args.x_grid
        else np.linspace(0.0, n.xmax, 201)
    )
    vals = np.array([sf.value(x) for x in xs])
    ders = np.array([sf.deriv(x) for x in xs])
    print(f"scale function built ({sf.provenance}), value at 0: {_fmt(sf.w0)}")
    _write_csv(
        os.path.join(_out_dir(args), "scale.csv"),
        ["x", "scale", "derivative"],
        [xs, vals, ders],
    )
    return 0


def _describe_support(supp) -> str:
    if isinstance(supp, Point):
        return f"point mass at {_fmt(supp.location)}"
    return f"half line [{_fmt(supp.left)}, inf)"


def _describe_continuity(cont) -> str:
    if isinstance(cont, AtomAt):
        return (
            f"atom at {_fmt(cont.location)} with mass {_fmt(cont.mass)}, "
            "absolutely continuous elsewhere"
        )
    if isinstance(cont, UndeterminedContinuity):
        return f"undetermined ({cont.reason})"
    return "absolutely continuous"


def _cmd_limit(cfg: ModelConfig, args) -> int:
    law = _build_law(cfg)
    n = cfg.numerics
    print(f"drift anchor: {_fmt(law.gamma)}")
    print(f"support: {_describe_support(law.support)}")
    print(f"continuity: {_describe_continuity(law.continuity)}")
    print(f"levy measure total mass: {_fmt(law.levy_mass)}")
    if law.boundary is not None:
        print(
            "left-edge asymptotics: density ~ "
            f"kappa/Gamma(c) * d^(c-1) * K(d) with c={_fmt(law.boundary.c)}, "
            f"kappa={_fmt(law.boundary.kappa)}"
        )
    sd = law.sd
    line = f"self-decomposable: {sd.status} ({sd.certificate})"
    if sd.witness is not None:
        line += f"; witness pair x={_fmt(sd.witness[0])}, y={_fmt(sd.witness[1])}"
    print(line)
    report = class_membership(law)
    print(f"class membership: {report.placement}")

    out = _out_dir(args)
    if isinstance(law.support, HalfLine):
        xs = (
            _parse_grid(args.x_grid, "x-grid")
            if args.x_grid
            else np.linspace(n.xmax / 200.0, n.xmax, 200)
        )
        kv = np.array([law.k(x) for x in xs])
        with np.errstate(divide="ignore"):
            dens = np.where(xs > 0.0, kv / np.where(xs > 0.0, xs, 1.0), np.inf)
        _write_csv(
            os.path.join(out, "limit_jumps.csv"),
            ["x", "k", "levy_density"],
            [xs, kv, dens],
        )
    us = (
        _parse_grid(args.u_grid, "u-grid")
        if args.u_grid
        else np.linspace(0.1, 20.0, 100)
    )
    lv = np.array([law.laplace_exponent(u) for u in us])
    _write_csv(
        os.path.join(out, "limit_exponent.csv"), ["u", "exponent"], [us, lv]
    )
    return 0


def _cmd_density(cfg: ModelConfig, args) -> int:
    law = _build_law(cfg)
    xs = (
        _parse_grid(args.x_grid, "x-grid")
        if args.x_grid
        else np.linspace(0.1, 5.0, 25)
    )
    dens = density(law, xs)
    _write_csv(
        os.path.join(_out_dir(args), "density.csv"), ["x", "density"], [xs, dens]
    )
    return 0


def _cmd_simulate(cfg: ModelConfig, args) -> int:
    sim_cfg = _sim_config(cfg, args)
    res = simulate(sim_cfg)
    s = res.summary()
    print(
        f"backend {res.backend}, {s['paths']} paths, {res.nsteps} steps of "
        f"{_fmt(res.step)}, ran in {res.runtime:.2f} s"
    )
    print(
        f"terminal state: mean {_fmt(s['mean'])}, sd {_fmt(s['sd'])}, "
        f"min {_fmt(s['min'])}, max {_fmt(s['max'])}"
    )
    for u, est, se in res.laplace:
        print(f"E[exp(-{_fmt(u)} X_T)] = {_fmt(est)} (se {_fmt(se)})")
    if args.out is not None:
        out = _out_dir(args)
        _write_csv(os.path.join(out, "terminal.csv"), ["terminal"], [res.terminal])
    return 0


def _cmd_verify(cfg: ModelConfig, args) -> int:
    failures = 0
    law = _build_law(cfg)
    n = cfg.numerics

    # jump density from the triplet formula against the excursion route
    xs = np.geomspace(n.xmax / 100.0, n.xmax / 2.0, 12)
    worst = 0.0
    for x in xs:
        a = law.k(x)
        b = k_via_excursions(cfg.immigration, law.sf, x)
        worst = max(worst, abs(a - b) / (1.0 + abs(a)))
    ok = worst <= 1e-5
    failures += not ok
    print(f"check jump density, two routes      {'PASS' if ok else 'FAIL'} "
          f"(max scaled err {worst:.2e})")

    # d/du of the exponent must equal -F/R
    F = cfg.immigration.exponent
    R = cfg.branching.exponent
    worst = 0.0
    for u in np.geomspace(0.2, 5.0, 9):
        h = 1e-4 * max(1.0, u)
        fd = (law.laplace_exponent(u + h) - law.laplace_exponent(u - h)) / (2.0 * h)
        target = -F(u) / R(u)
        worst = max(worst, abs(fd - target) / (1.0 + abs(target)))
    ok = worst <= 5e-6
    failures += not ok
    print(f"check exponent derivative identity  {'PASS' if ok else 'FAIL'} "
          f"(max scaled err {worst:.2e})")

    # Monte Carlo against the exact transform at the simulation horizon
    if cfg.simulation is None:
        print("check simulation vs transform       SKIP (no simulation section)")
    else:
        sim_cfg = _sim_config(cfg, args)
        res = simulate(sim_cfg)
        worst = 0.0
        for u, est, se in res.laplace:
            exact = transient_laplace(
                cfg.immigration, cfg.branching, sim_cfg.x0, sim_cfg.horizon, u
            )
            worst = max(worst, abs(est - exact) / max(se, 1e-12))
        ok = worst <= 3.0
        failures += not ok
        print(f"check simulation vs transform       {'PASS' if ok else 'FAIL'} "
              f"(max |err|/se {worst:.2f})")

    if failures:
        raise NumericError(f"{failures} verification check(s) failed")
    return 0


_COMMANDS = {
    "classify": _cmd_classify,
    "scale": _cmd_scale,
    "limit": _cmd_limit,
    "density": _cmd_density,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def _parse_args(argv):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the YAML model config")
    common.add_argument("--out", default=None, help="directory for CSV output")
    common.add_argument("--u-grid", default=None, metavar="A:B:N",
                        help="transform-argument grid start:stop:count")
    common.add_argument("--x-grid", default=None, metavar="A:B:N",
                        help="state-space grid start:stop:count")
    common.add_argument("--seed", type=int, default=None,
                        help="override the simulation seed")
    common.add_argument("--paths", type=int, default=None,
                        help="override the simulation path count")
    common.add_argument("--print-config", action="store_true",
                        help="echo the parsed config as YAML and exit")

    parser = argparse.ArgumentParser(
        prog="cbilim",
        description="Limit distributions of affine processes with immigration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("classify", "report the branching regime and whether a limit law exists"),
        ("scale", "tabulate the scale function and its derivative"),
        ("limit", "build the limit law and report its structure"),
        ("density", "recover the density of the limit law"),
        ("simulate", "run the Euler scheme and summarize terminal states"),
        ("verify", "run the cross-check suite"),
    ]:
        sub.add_parser(name, parents=[common], help=doc)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.print_config:
            sys.stdout.write(dump_config(cfg))
            return 0
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
