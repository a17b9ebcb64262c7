"""Command-line interface: ``python3 -m rieff <command> [flags]``.

Every command prints a one-line JSON summary on stdout and optionally
writes CSV data. Exit status: 0 success, 2 usage error, 3 numerical failure
(the error class name appears in the JSON).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .eff import PRESETS, ParamCoordinate, build_eff
from .errors import RieffError
from .flux_model import CoreyModel
from .hugoniot import find_bethe_wendroff, trace_hugoniot
from .rarefaction import integrate_rarefaction
from .scalar_hull import corey_welge_closed_form

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _pair(text):
    try:
        a, b = (float(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return (a, b)


def _coord(text):
    if isinstance(text, (list, tuple)):
        return ParamCoordinate(*(float(v) for v in text))
    key = str(text).lower()
    if key in PRESETS:
        return PRESETS[key]
    try:
        vals = [float(v) for v in key.split(",")]
    except ValueError:
        vals = []
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"coordinate must be u1, u2, u3 or a0,a1,a2; got {text!r}")
    return ParamCoordinate(*vals)


def _fmt(v):
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def emit(summary, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(summary, default=_jsonable, sort_keys=True) + "\n")


# ---- configuration -------------------------------------------------------

COMMON_KEYS = {"A", "B", "C", "tolerances", "coord"}
COMMAND_KEYS = {
    "hugoniot": {"ref", "out"},
    "rarefaction": {"start", "family", "direction", "out"},
    "eff": {"ref", "family", "orientation", "side", "heading", "out"},
    "welge": {"numerical"},
    "riemann": {"left", "right", "profile", "xi_min", "xi_max", "n_xi"},
    "simulate": {"left", "right", "N", "t_end", "cfl", "out", "compare"},
    "validate": set(),
}
DEFAULTS = {
    "A": 1.0, "B": 1.0, "C": 1.0, "coord": "u1",
    "family": "s", "direction": "forward", "orientation": "forward", "side": "shock",
    "N": 400, "t_end": 0.5, "cfl": 0.5, "n_xi": 401, "numerical": False, "compare": False,
}
PAIR_KEYS = {"ref", "start", "heading", "left", "right"}


def load_config(path, command):
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    allowed = COMMON_KEYS | COMMAND_KEYS[command]
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    tols = cfg.get("tolerances", {})
    known = {f.name for f in fields(Tolerances)}
    bad = sorted(set(tols) - known)
    if bad:
        raise UsageError(f"unknown tolerance(s): {', '.join(bad)}")
    return cfg


def resolve(args):
    """Merge defaults < config file < command-line flags."""
    cfg = load_config(args.config, args.command) if args.config else {}
    out = {}
    for key in COMMON_KEYS | COMMAND_KEYS[args.command]:
        val = getattr(args, key, None)
        if val is None or val is False:
            val = cfg.get(key, DEFAULTS.get(key) if val is None else val)
        if key in PAIR_KEYS and val is not None and not isinstance(val, tuple):
            val = _pair(",".join(map(str, val)) if isinstance(val, list) else val)
        out[key] = val
    tols = dict(cfg.get("tolerances", {}))
    for item in args.tol or []:
        name, _, value = item.partition("=")
        if name not in {f.name for f in fields(Tolerances)}:
            raise UsageError(f"--tol: unknown tolerance {name!r}")
        try:
            tols[name] = float(value)
        except ValueError:
            raise UsageError(f"--tol: {item!r} is not name=value")
    try:
        out["tol"] = DEFAULT_TOL.with_overrides(**tols)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        out["coord"] = _coord(out["coord"])
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"--coord: {exc}")
    return out


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


# ---- commands ------------------------------------------------------------

def cmd_hugoniot(model, o):
    _require(o, "ref")
    branches = trace_hugoniot(model, o["ref"], tol=o["tol"])
    if o.get("out"):
        rows = []
        for i, br in enumerate(branches):
            rows.extend((str(i), br.label, p[0], p[1], s) for p, s in zip(br.points, br.sigmas))
        write_csv(o["out"], ["branch", "label", "u1", "u2", "sigma"], rows)
    bws = []
    for i, br in enumerate(branches):
        for p in find_bethe_wendroff(model, br, o["tol"]):
            bws.append({"branch": i, "state": list(p.state), "family": p.family, "sigma": p.sigma})
    return {
        "branches": [{"label": b.label, "samples": len(b), "stop_reason": b.stop_reason,
                      "end": list(b.points[-1])} for b in branches],
        "bethe_wendroff": bws,
    }


def cmd_rarefaction(model, o):
    _require(o, "start")
    seg = integrate_rarefaction(model, o["start"], o["family"], o["direction"], tol=o["tol"])
    if o.get("out"):
        write_csv(o["out"], ["u1", "u2", "lambda"],
                  [(p[0], p[1], lam) for p, lam in zip(seg.points, seg.lambdas)])
    return {"samples": len(seg), "stop_reason": seg.stop_reason, "end": list(seg.end),
            "start_at_inflection": seg.start_at_inflection}


def cmd_eff(model, o):
    _require(o, "ref")
    eff = build_eff(model, o["ref"], o["family"], o["orientation"], o["coord"], side=o["side"],
                    direction=o.get("heading"), tol=o["tol"])
    if o.get("out"):
        write_csv(o["out"], ["ell", "f", "fprime", "u1", "u2", "piece_kind"],
                  [(l, f, d, p[0], p[1], k) for l, f, d, p, k in
                   zip(eff.ell, eff.f, eff.fprime, eff.points, eff.kinds)])
    return eff.summary()


def cmd_welge(model, o):
    l1, l2, l3 = corey_welge_closed_form(model.A, model.B, model.C)
    out = {"l1": l1, "l2": l2, "l3": l3}
    if o.get("numerical"):
        from .scalar_hull import welge_point
        from .validation import oil_vertex_effs

        e1, e2, e3 = oil_vertex_effs(model)
        out.update(l1_numerical=welge_point(e1, 1.0), l2_numerical=welge_point(e2, 1.0),
                   l3_numerical=welge_point(e3, 1.0))
    return out


def cmd_riemann(model, o):
    from .riemann import sample_profile, solve_riemann

    _require(o, "left", "right")
    sol = solve_riemann(model, o["left"], o["right"], tol=o["tol"])
    out = sol.as_dict()
    if o.get("profile"):
        speeds = [s for w in sol.waves for s in (w.speed_left, w.speed_right)] or [0.0]
        lo = o.get("xi_min")
        hi = o.get("xi_max")
        lo = min(speeds) - 0.5 if lo is None else lo
        hi = max(speeds) + 0.5 if hi is None else hi
        xi = np.linspace(lo, hi, int(o["n_xi"]))
        prof = sample_profile(sol, xi, model)
        write_csv(o["profile"], ["xi", "u1", "u2", "u3"],
                  [(x, U.u1, U.u2, U.u3) for x, U in zip(xi, prof)])
    return out


def cmd_simulate(model, o):
    from .fvm_check import simulate

    _require(o, "left", "right")
    grid = simulate(model, o["left"], o["right"], int(o["N"]), float(o["t_end"]), cfl=float(o["cfl"]),
                    tol=o["tol"])
    if o.get("out"):
        grid.to_csv(o["out"])
    out = {"N": grid.N, "t": grid.t, "steps": grid.steps, "clamp_events": grid.clamp_events}
    if o.get("compare"):
        from .fvm_check import l1_compare
        from .riemann import solve_riemann

        sol = solve_riemann(model, o["left"], o["right"], tol=o["tol"])
        out["l1_error"] = l1_compare(grid, sol, grid.t, model)
    return out


def cmd_validate(model, o):
    from .validation import run_all

    results = run_all(echo=lambda line: print(line, file=sys.stderr))
    return {
        "passed": all(r.passed for r in results),
        "criteria": {str(r.number): r.passed for r in results},
    }


COMMANDS = {
    "hugoniot": cmd_hugoniot,
    "rarefaction": cmd_rarefaction,
    "eff": cmd_eff,
    "welge": cmd_welge,
    "riemann": cmd_riemann,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--A", type=float)
    common.add_argument("--B", type=float)
    common.add_argument("--C", type=float)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--coord", help="u1, u2, u3 or a0,a1,a2")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override")

    p = argparse.ArgumentParser(prog="rieff", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hugoniot", parents=[common], help="trace the Hugoniot locus of a state")
    s.add_argument("--ref", type=_pair)
    s.add_argument("--out")

    s = sub.add_parser("rarefaction", parents=[common], help="integrate a rarefaction curve")
    s.add_argument("--start", type=_pair)
    s.add_argument("--family", choices=["s", "f"])
    s.add_argument("--direction", choices=["forward", "backward"])
    s.add_argument("--out")

    s = sub.add_parser("eff", parents=[common], help="build an effective flux function")
    s.add_argument("--ref", type=_pair)
    s.add_argument("--family", choices=["s", "f"])
    s.add_argument("--orientation", choices=["forward", "backward"])
    s.add_argument("--side", choices=["shock", "rarefaction"])
    s.add_argument("--heading", type=_pair, help="start direction, needed at coincidence points")
    s.add_argument("--out")

    s = sub.add_parser("welge", parents=[common], help="Welge points of the oil-vertex curves")
    s.add_argument("--numerical", action="store_true", help="also compute them from the EFFs")

    s = sub.add_parser("riemann", parents=[common], help="solve a Riemann problem")
    s.add_argument("--left", type=_pair)
    s.add_argument("--right", type=_pair)
    s.add_argument("--profile", help="CSV file for U(xi)")
    s.add_argument("--xi-min", dest="xi_min", type=float)
    s.add_argument("--xi-max", dest="xi_max", type=float)
    s.add_argument("--n-xi", dest="n_xi", type=int)

    s = sub.add_parser("simulate", parents=[common], help="finite-volume run from Riemann data")
    s.add_argument("--left", type=_pair)
    s.add_argument("--right", type=_pair)
    s.add_argument("--N", type=int)
    s.add_argument("--t-end", dest="t_end", type=float)
    s.add_argument("--cfl", type=float)
    s.add_argument("--out")
    s.add_argument("--compare", action="store_true", help="report the L1 error against the exact solution")

    sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = resolve(args)
        model = CoreyModel(float(opts["A"]), float(opts["B"]), float(opts["C"]))
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"rieff {args.command}: {exc}", file=sys.stderr)
        emit({"ok": False, "command": args.command, "error": "UsageError", "message": str(exc)})
        return EXIT_USAGE
    except RieffError as exc:
        emit({"ok": False, "command": args.command, "error": type(exc).__name__, "message": str(exc)})
        return EXIT_USAGE
    try:
        summary = COMMANDS[args.command](model, opts)
    except UsageError as exc:
        print(f"rieff {args.command}: {exc}", file=sys.stderr)
        emit({"ok": False, "command": args.command, "error": "UsageError", "message": str(exc)})
        return EXIT_USAGE
    except RieffError as exc:
        emit({"ok": False, "command": args.command, "error": type(exc).__name__, "message": str(exc)})
        return EXIT_NUMERIC
    if args.command == "validate":
        emit(summary)
        return EXIT_OK if summary["passed"] else EXIT_NUMERIC
    if args.command == "welge":
        emit(summary)
    else:
        emit({"ok": True, "command": args.command, **summary})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
