"""Command-line interface.

Every command reads one JSON run configuration (``--config``), prints a JSON
result on stdout and writes file artifacts to ``--out``.  Exit codes: 0 on
success, 1 on a domain or classification failure, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classifier as cl
from .ambient import AmbientSpace
from .errors import HDelaunayError
from .export import (dumps, events_json, mesh_obj, phase_svg, profile_csv, read_profile_csv)
from .integrator import AngularState, Budget, StopSpec, integrate
from .prescribed import h_from_dict, validate_c1
from .torus import find_torus, nonexistence_check

COMMANDS = ("validate", "classify", "phase-plot", "profile", "mesh", "torus-search")


class ConfigError(ValueError):
    """The configuration file is not valid JSON or has the wrong shape."""


_INTEGRATION_DEFAULTS = {"rtol": 1e-12, "atol": 1e-14, "x_max": None, "arc_budget": 200.0,
                         "max_step": 0.02}
_STOP_DEFAULTS = {"y0_crossings": None, "omega_contacts": None, "theta": None}
_MESH_DEFAULTS = {"angular_res": 64, "closed": False, "profile_csv": None}
_PLOT_DEFAULTS = {"eps": 1, "seeds": [], "x_range": None}
_SEED_KINDS = ("axis", "equilibrium", "y0", "s2r-torus", "berger-pole", "state")


def _merge(defaults: dict, given, name: str) -> dict:
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError(f"'{name}' must be an object")
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def _num(d: dict, key: str, name: str, positive=False, optional=False):
    v = d.get(key)
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{name}.{key}' must be a number")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(f"'{name}.{key}' must be positive")
    return v


def _seed(d) -> dict:
    if not isinstance(d, dict) or d.get("kind") not in _SEED_KINDS:
        raise ConfigError(f"seed must be an object with kind in {_SEED_KINDS}")
    kind = d["kind"]
    if kind == "y0":
        out = {"kind": kind, "x0": _num(d, "x0", "seed"), "eps": int(d.get("eps", 1))}
        if out["eps"] not in (1, -1):
            raise ConfigError("seed.eps must be 1 or -1")
        return out
    if kind == "state":
        return {"kind": kind, "x": _num(d, "x", "seed"), "theta": _num(d, "theta", "seed"),
                "z": float(d.get("z", 0.0))}
    return {"kind": kind}


@dataclass
class RunConfig:
    """Normalized run configuration; ``emit`` and ``parse`` round-trip byte for byte."""

    space: dict
    h: dict
    seed: dict | None = None
    integration: dict = field(default_factory=lambda: dict(_INTEGRATION_DEFAULTS))
    stop: dict = field(default_factory=lambda: dict(_STOP_DEFAULTS))
    mesh: dict = field(default_factory=lambda: dict(_MESH_DEFAULTS))
    plot: dict = field(default_factory=lambda: dict(_PLOT_DEFAULTS))
    torus: dict | None = None

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        allowed = {"space", "h", "seed", "integration", "stop", "mesh", "plot", "torus"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        sp = d.get("space")
        if not isinstance(sp, dict):
            raise ConfigError("'space' must be an object with kappa and tau")
        space = {"kappa": _num(sp, "kappa", "space"), "tau": _num(sp, "tau", "space"),
                 "degenerate_ok": bool(sp.get("degenerate_ok", False))}
        h = d.get("h")
        if not isinstance(h, dict) or "kind" not in h:
            raise ConfigError("'h' must be an object with a 'kind'")
        integ = _merge(_INTEGRATION_DEFAULTS, d.get("integration"), "integration")
        for k in ("rtol", "atol", "arc_budget", "max_step"):
            integ[k] = _num(integ, k, "integration", positive=True)
        integ["x_max"] = _num(integ, "x_max", "integration", positive=True, optional=True)
        stop = _merge(_STOP_DEFAULTS, d.get("stop"), "stop")
        for k in ("y0_crossings", "omega_contacts"):
            if stop[k] is not None:
                stop[k] = int(stop[k])
        stop["theta"] = _num(stop, "theta", "stop", optional=True)
        mesh = _merge(_MESH_DEFAULTS, d.get("mesh"), "mesh")
        mesh["angular_res"] = int(mesh["angular_res"])
        if mesh["angular_res"] < 3:
            raise ConfigError("mesh.angular_res must be at least 3")
        mesh["closed"] = bool(mesh["closed"])
        plot = _merge(_PLOT_DEFAULTS, d.get("plot"), "plot")
        plot["eps"] = int(plot["eps"])
        if plot["eps"] not in (1, -1):
            raise ConfigError("plot.eps must be 1 or -1")
        plot["seeds"] = [_seed(s) for s in plot["seeds"]]
        plot["x_range"] = _num(plot, "x_range", "plot", positive=True, optional=True)
        torus = d.get("torus")
        if torus is not None:
            t = _merge({"H0": None, "x1": None, "delta": None, "lambda_max": None}, torus, "torus")
            torus = {"H0": _num(t, "H0", "torus", positive=True),
                     "x1": _num(t, "x1", "torus", positive=True),
                     "delta": _num(t, "delta", "torus", positive=True),
                     "lambda_max": _num(t, "lambda_max", "torus", positive=True, optional=True)}
        seed = _seed(d["seed"]) if d.get("seed") is not None else None
        return cls(space, dict(h), seed, integ, stop, mesh, plot, torus)

    def to_dict(self) -> dict:
        return {"space": self.space, "h": self.h, "seed": self.seed,
                "integration": self.integration, "stop": self.stop, "mesh": self.mesh,
                "plot": self.plot, "torus": self.torus}

    def emit(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(d)

    def ambient(self) -> AmbientSpace:
        return AmbientSpace(self.space["kappa"], self.space["tau"], self.space["degenerate_ok"])

    def budget(self) -> Budget:
        i = self.integration
        return Budget(s_max=i["arc_budget"], x_max=i["x_max"], rtol=i["rtol"], atol=i["atol"],
                      max_step=i["max_step"])


# -- commands ----------------------------------------------------------------


def _classify_seed(space, h, seed, budget):
    kinds = {"axis": cl.Seed("axis"), "equilibrium": cl.Seed("equilibrium"),
             "s2r-torus": cl.Seed("s2r-torus"), "berger-pole": cl.Seed("berger-pole")}
    s = kinds.get(seed["kind"]) or cl.Seed("y0", seed["x0"], seed["eps"])
    return cl.classify(space, h, s, budget)


def _orbit(cfg, space, h, seed):
    """Profile and (optional) trajectory for a seed."""
    budget = cfg.budget()
    if seed["kind"] == "state":
        st = cfg.stop
        stop = StopSpec(y0_crossings=st["y0_crossings"], omega_contacts=st["omega_contacts"],
                        theta=st["theta"])
        tr = integrate(space, h, AngularState(0.0, seed["x"], seed["z"], seed["theta"]),
                       stop, budget)
        return cl.Profile.from_trajectory(tr), tr, {"status": tr.status}
    surf = _classify_seed(space, h, seed, budget)
    if surf.profile is None:
        # cylinders carry no integrated profile; build a unit-height segment
        r = surf.radius
        n = 33
        z = np.linspace(0.0, 1.0, n)
        surf.profile = cl.Profile(z * 4.0 / (4.0 + space.kappa * r * r), np.full(n, r), z,
                                  np.full(n, math.pi / 2))
    return surf.profile, getattr(surf, "trajectory", None), surf.to_dict()


def _write(path, text):
    Path(path).write_text(text)


def cmd_validate(cfg: RunConfig, args) -> int:
    rep = validate_c1(h_from_dict(cfg.h), cfg.ambient())
    sys.stdout.write(dumps(rep.to_dict()))
    return 0 if rep.ok else 1


def cmd_classify(cfg: RunConfig, args) -> int:
    space, h = cfg.ambient(), h_from_dict(cfg.h)
    if cfg.seed is None or cfg.seed["kind"] == "state":
        raise ConfigError("classify needs a seed of kind axis, equilibrium, y0, s2r-torus "
                          "or berger-pole")
    surf = _classify_seed(space, h, cfg.seed, cfg.budget())
    if args.out and surf.profile is not None:
        _write(args.out, profile_csv(space, h, surf.profile))
        tr = getattr(surf, "trajectory", None)
        if tr is not None:
            _write(str(args.out) + ".events.json", events_json(tr.events))
    sys.stdout.write(dumps(surf.to_dict()))
    return 0


def cmd_profile(cfg: RunConfig, args) -> int:
    space, h = cfg.ambient(), h_from_dict(cfg.h)
    if cfg.seed is None:
        raise ConfigError("profile needs a seed")
    prof, tr, info = _orbit(cfg, space, h, cfg.seed)
    text = profile_csv(space, h, prof)
    if args.out:
        _write(args.out, text)
        if tr is not None:
            _write(str(args.out) + ".events.json", events_json(tr.events))
        sys.stdout.write(dumps({"samples": len(prof.x), **info}))
    else:
        sys.stdout.write(text)
    return 0


def cmd_phase_plot(cfg: RunConfig, args) -> int:
    space, h = cfg.ambient(), h_from_dict(cfg.h)
    eps = cfg.plot["eps"]
    orbits = []
    for seed in cfg.plot["seeds"]:
        prof, _, _ = _orbit(cfg, space, h, seed)
        nu = prof.nu(space)
        side = np.sign(np.sin(prof.theta)) == eps
        start = None
        for i, m in enumerate(list(side) + [False]):
            if m and start is None:
                start = i
            elif not m and start is not None:
                if i - start >= 2:
                    orbits.append((prof.x[start:i], nu[start:i]))
                start = None
    svg = phase_svg(space, h, eps, orbits, cfg.plot["x_range"])
    if args.out:
        _write(args.out, svg)
        sys.stdout.write(dumps({"svg": str(args.out), "orbits": len(orbits)}))
    else:
        sys.stdout.write(svg)
    return 0


def cmd_mesh(cfg: RunConfig, args) -> int:
    space = cfg.ambient()
    src = cfg.mesh["profile_csv"]
    if src:
        prof = read_profile_csv(Path(src).read_text())
    else:
        if cfg.seed is None:
            raise ConfigError("mesh needs a seed or mesh.profile_csv")
        prof, _, _ = _orbit(cfg, space, h_from_dict(cfg.h), cfg.seed)
    text = mesh_obj(space, prof, cfg.mesh["angular_res"], require_closed=cfg.mesh["closed"])
    if args.out:
        _write(args.out, text)
        sys.stdout.write(dumps({"obj": str(args.out), "samples": len(prof.x)}))
    else:
        sys.stdout.write(text)
    return 0


def cmd_torus_search(cfg: RunConfig, args) -> int:
    space = cfg.ambient()
    if space.kappa > 0:
        sys.stdout.write(dumps({"refused": True, "reason": "kappa > 0: tori are built by the "
                                "classifier (s2r-torus or berger-pole seeds)"}))
        return 1
    h = h_from_dict(cfg.h)
    if nonexistence_check(h) and cfg.torus is None:
        sys.stdout.write(dumps({"refused": True, "nonexistence_check": True,
                                "reason": "h is non-increasing on [-1, 0]: no rotational tori"}))
        return 1
    if cfg.torus is None:
        raise ConfigError("torus-search needs a 'torus' block with H0, x1 and delta")
    t = cfg.torus
    res = find_torus(space, t["H0"], t["x1"], t["delta"], lambda_max=t["lambda_max"])
    rep = res.to_dict()
    rep["profile_ref"] = None
    if args.out:
        h0 = h_from_dict({"kind": "step", "H0": t["H0"], "lambda": res.lambda0,
                          "nu0": res.nu0, "delta": t["delta"]})
        _write(args.out, profile_csv(space, h0, res.nodoid.profile))
        rep["profile_ref"] = str(args.out)
    sys.stdout.write(dumps(rep))
    return 0


HANDLERS = {"validate": cmd_validate, "classify": cmd_classify, "phase-plot": cmd_phase_plot,
            "profile": cmd_profile, "mesh": cmd_mesh, "torus-search": cmd_torus_search}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", help="output file for CSV, SVG or OBJ artifacts")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--x-max", type=float, dest="x_max")
    common.add_argument("--arc-budget", type=float, dest="arc_budget")
    common.add_argument("--angular-res", type=int, dest="angular_res")
    p = argparse.ArgumentParser(prog="hdelaunay",
                                description="Rotational surfaces of prescribed mean curvature.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def load_config(args) -> RunConfig:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    cfg = RunConfig.parse(text)
    for key in ("rtol", "atol", "x_max", "arc_budget"):
        v = getattr(args, key)
        if v is not None:
            if not v > 0:
                raise ConfigError(f"--{key.replace('_', '-')} must be positive")
            cfg.integration[key] = v
    if args.angular_res is not None:
        if args.angular_res < 3:
            raise ConfigError("--angular-res must be at least 3")
        cfg.mesh["angular_res"] = args.angular_res
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        h_from_dict(cfg.h)
    except (ConfigError, HDelaunayError) as exc:
        if isinstance(exc, ConfigError) or type(exc).__name__ == "SpecError":
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HDelaunayError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
