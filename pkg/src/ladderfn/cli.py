"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a failed check or numerical
error, 2 on invalid input (bad parameters, energies without bound motion).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, limits, verification
from .errors import InvalidInputError, LadderError
from .ladder import alpha_closed, eval_ladder
from .potentials import CurvedKC, FlatKC, PhasePoint, PoschlTeller, RosenMorseII

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
COMMANDS = ("verify", "frequency", "motion", "limits", "sweep")
SWEEP_TOL = 1e-8
MOTION_TOL = 1e-6
Q_MOD_TOL = 1e-7
Q_PHASE_TOL = 1e-6

_DEFAULTS = {
    "system": "rmii",
    "B": None,
    "C": None,
    "l2": None,
    "kappa": None,
    "energies": [],
    "n_energies": None,
    "output_path": None,
    "seed": 0,
    "samples": 50,
    "t_span": None,
    "periods": None,
    "dt": None,
    "theta0": None,
    "jobs": 1,
}


def _g(x):
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    command: str
    system: object
    energies: list = field(default_factory=list)
    output_path: str | None = None
    seed: int = 0
    samples: int = 50
    t_span: float | None = None
    periods: float | None = None
    dt: float | None = None
    theta0: float | None = None
    jobs: int = 1


def build_system(name, B=None, C=None, l2=None, kappa=None):
    def need(label, value):
        if value is None:
            raise InvalidInputError(f"--{label} is required for system {name!r}")
        return float(value)

    if name == "rmii":
        return RosenMorseII(need("B", B), need("C", C))
    if name == "pt":
        return PoschlTeller(need("C", C))
    if name == "kc":
        return CurvedKC(need("B", B), need("l2", l2), need("kappa", kappa))
    if name == "flatkc":
        return FlatKC(need("B", B), need("l2", l2))
    raise InvalidInputError(f"unknown system {name!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ladderfn",
        description="Classical ladder functions for Rosen-Morse II and Kepler-Coulomb wells.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--system", choices=["rmii", "pt", "kc", "flatkc"])
        p.add_argument("--B", type=float)
        p.add_argument("--C", type=float)
        p.add_argument("--l2", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--energy", type=float, action="append", dest="energies")
        p.add_argument("--n-energies", type=int, help="energy grid over the middle 96%% of the window")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--t-span", type=float)
        p.add_argument("--periods", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--theta0", type=float)
        p.add_argument("--jobs", type=int)
        p.add_argument("--config", help="JSON file with the same field names as the flags")
    return parser


def resolve_config(args):
    """Merge defaults, the optional JSON config and explicit flags (flags win)."""
    merged = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config!r}: {exc}") from exc
        unknown = set(data) - set(_DEFAULTS) - {"command"}
        if unknown:
            raise InvalidInputError(f"unknown config fields: {sorted(unknown)}")
        merged.update(data)
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    system = build_system(
        merged["system"], merged["B"], merged["C"], merged["l2"], merged["kappa"]
    )
    energies = [float(e) for e in merged["energies"]]
    if merged["n_energies"] is not None:
        if merged["n_energies"] < 1:
            raise InvalidInputError("--n-energies must be at least 1")
        energies += [float(e) for e in system.window.grid(merged["n_energies"])]
    if not energies:
        w = system.window
        energies = [0.5 * (w.e_min + w.e_max)]
    if merged["samples"] < 10:
        raise InvalidInputError("--samples must be at least 10")
    if merged["jobs"] < 1:
        raise InvalidInputError("--jobs must be at least 1")
    return RunConfig(
        command=args.command,
        system=system,
        energies=energies,
        output_path=merged["output_path"],
        seed=int(merged["seed"]),
        samples=int(merged["samples"]),
        t_span=merged["t_span"],
        periods=merged["periods"],
        dt=merged["dt"],
        theta0=merged["theta0"],
        jobs=int(merged["jobs"]),
    )


def _validate_energies(cfg):
    for E in cfg.energies:
        if cfg.command == "limits" and cfg.system.name in ("rmii", "pt"):
            # the limit runs on the Poschl-Teller well of the same depth
            PoschlTeller(cfg.system.C).require_bound(E)
        else:
            cfg.system.require_bound(E)


class _Output:
    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


# -- commands -------------------------------------------------------------


def cmd_verify(cfg):
    reports = [
        verification.verify_gha(cfg.system, E, n_samples=cfg.samples, seed=cfg.seed)
        for E in cfg.energies
    ]
    with _Output(cfg.output_path) as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
        fh.write("\n")
    for r in reports:
        if not r.passed:
            print(f"FAIL E={_g(r.energy)}: {r.first_failure()}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def cmd_frequency(cfg):
    worst = 0.0
    with _Output(cfg.output_path) as fh:
        fh.write("E,alpha_closed,omega_quadrature,rel_diff\n")
        for E in cfg.energies:
            a = alpha_closed(cfg.system, E)
            w = dynamics.frequency_quadrature(cfg.system, E)
            rel = abs(a - w) / w
            worst = max(worst, rel)
            fh.write(",".join(_g(v) for v in (E, a, w, rel)) + "\n")
    return EXIT_OK if worst <= SWEEP_TOL else EXIT_FAIL


def _motion_one(cfg, E, index):
    sys_ = cfg.system
    T = dynamics.period(sys_, E)
    if cfg.t_span is not None:
        t_span = cfg.t_span
    else:
        t_span = (cfg.periods if cfg.periods is not None else 2.0) * T
    if t_span < 0:
        raise InvalidInputError("--t-span must be non-negative")
    table = dynamics.phase_table(sys_, E)
    if cfg.theta0 is None:
        xm, _ = sys_.turning_points(E)
        start = PhasePoint(xm, 0.0)
        theta0 = dynamics.anchor_phase(sys_, start)
    else:
        theta0 = cfg.theta0
        anchor = dynamics.motion_from_ladder(sys_, E, theta0, [0.0], table=table)
        start = PhasePoint(float(anchor.x[0]), float(anchor.p[0]))
    dt = cfg.dt if cfg.dt is not None else T / 1000.0
    ode = dynamics.integrate_hamilton(sys_, start, t_span, dt)
    lad = dynamics.motion_from_ladder(sys_, E, theta0, ode.times, table=table)
    base = cfg.output_path or "."
    os.makedirs(base, exist_ok=True)
    stem = os.path.join(base, f"motion_{sys_.name}_{index:02d}")
    dynamics.write_trajectory_csv(lad, stem + "_ladder.csv")
    dynamics.write_trajectory_csv(ode, stem + "_ode.csv")
    dev = dynamics.max_deviation(lad, ode)
    drifts = [dynamics.constant_of_motion_drift(sys_, ode, eps) for eps in (1, -1)]
    mod_drift = max(d[0] for d in drifts)
    phase_drift = max(d[1] for d in drifts)
    ok = dev <= MOTION_TOL and mod_drift <= Q_MOD_TOL and phase_drift <= Q_PHASE_TOL
    line = (
        f"E={_g(E)} rows={len(ode)} max_dx={_g(dev)} q_mod_drift={_g(mod_drift)} "
        f"q_phase_drift={_g(phase_drift)} {'pass' if ok else 'FAIL'}"
    )
    return ok, line


def cmd_motion(cfg):
    ok_all = True
    for i, E in enumerate(cfg.energies):
        ok, line = _motion_one(cfg, E, i)
        print(line)
        ok_all &= ok
    return EXIT_OK if ok_all else EXIT_FAIL


def cmd_limits(cfg):
    s = cfg.system
    reports = []
    for E in cfg.energies:
        if s.name in ("rmii", "pt"):
            reports.append(limits.pt_limit_check(s.C, E, n_points=cfg.samples, strict=False))
        elif s.name == "kc":
            reports.append(limits.l_zero_limit_check(s.B, s.kappa, E, n_points=cfg.samples, strict=False))
        else:
            reports.append(limits.flat_kc_limit_check(s.B, s.l2, E, n_points=cfg.samples, strict=False))
    with _Output(cfg.output_path) as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
        fh.write("\n")
    for r in reports:
        if not r.passed:
            print(f"FAIL {r.name}: {', '.join(r.metrics['failed'])}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def sweep_row(system, E):
    a = alpha_closed(system, E)
    w = dynamics.frequency_quadrature(system, E)
    xm, _ = system.turning_points(E)
    modulus = eval_ladder(system, -1, xm, 0.0).modulus
    return E, a, w, modulus


def cmd_sweep(cfg):
    energies = sorted(cfg.energies)
    if cfg.jobs > 1 and len(energies) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(sweep_row, [cfg.system] * len(energies), energies))
    else:
        rows = [sweep_row(cfg.system, E) for E in energies]
    worst = max(abs(a - w) / w for _, a, w, _ in rows)
    ok = worst <= SWEEP_TOL
    with _Output(cfg.output_path) as fh:
        fh.write("E,alpha_closed,omega_quadrature,abs_A\n")
        for row in rows:
            fh.write(",".join(_g(v) for v in row) + "\n")
        fh.write(f"# max_rel_diff={_g(worst)} tol={_g(SWEEP_TOL)} {'pass' if ok else 'FAIL'}\n")
    return EXIT_OK if ok else EXIT_FAIL


_DISPATCH = {
    "verify": cmd_verify,
    "frequency": cmd_frequency,
    "motion": cmd_motion,
    "limits": cmd_limits,
    "sweep": cmd_sweep,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        _validate_energies(cfg)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return _DISPATCH[cfg.command](cfg)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LadderError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
