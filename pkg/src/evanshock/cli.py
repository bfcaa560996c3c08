"""Command-line front end: ``evanshock <subcommand> [options]``.

Exit codes: 0 success, 2 instability detected (nonzero winding), 3 numerical
failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import difflib
import io
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    boundary_table, g_eval, hf_bound, mn_condition, sharp_condition, stability_boundary,
)
from .evans import EvansError, EvansSystem, choose_lengths, domain_length
from .evolution import EvolutionError, Grid1D, simulate
from .model import (
    DomainError, ProfileError, ShockParams, ValidationError, solve_profile, validate_profile_decay,
    vplus_from_mach,
)
from .spectral import SplittingError
from .svg import emit_svg
from .winding import ContourError, PipelineConfig, contour_pipeline, mach_grid, sweep, sweep_status

SCHEMA_VERSION = 1
EXIT_OK, EXIT_UNSTABLE, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64
NUMERICAL_ERRORS = (
    EvansError, ContourError, ProfileError, EvolutionError, SplittingError, ValidationError,
    FloatingPointError, ArithmeticError,
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def fmt(x) -> str:
    return format(float(x), ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits; NaN/inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, complex):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if obj is None:
        return "null"
    import json

    return json.dumps(str(obj))


def write_text(path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def artifact(kind: str, config: dict, payload: dict) -> str:
    return to_json({"schema_version": SCHEMA_VERSION, "artifact": kind, "config": config, **payload}) + "\n"


def csv_text(header, rows, config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# evanshock schema_version={SCHEMA_VERSION}\n")
    for k in sorted(config):
        buf.write(f"# {k}={config[k]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(c) if isinstance(c, (float, np.floating)) else c for c in r])
    return buf.getvalue()


def emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_text(out, text)


# ---------------------------------------------------------------------------
# parser


class Parser(argparse.ArgumentParser):
    """Argument parser that exits with status 64 and suggests close matches."""

    def error(self, message):
        hint = ""
        known = []
        for action in self._actions:
            known.extend(action.option_strings)
            if isinstance(action, argparse._SubParsersAction):
                known.extend(action.choices)
                for sub in action.choices.values():
                    for a in sub._actions:
                        known.extend(a.option_strings)
        tokens = []
        if "invalid choice: '" in message:
            tokens = [message.split("invalid choice: '", 1)[1].split("'", 1)[0]]
        elif "unrecognized arguments:" in message:
            tokens = [t for t in message.split(":", 1)[1].split() if t.startswith("-")]
        for token in tokens:
            close = difflib.get_close_matches(token.split("=")[0], known, n=1)
            if close and close[0] != token:
                hint = f" (did you mean {close[0]}?)"
                break
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}{hint}\n")
        raise SystemExit(EXIT_USAGE)


def _shock_args(p, vplus_default=None):
    p.add_argument("--gamma", type=float, default=5.0 / 3.0, help="adiabatic index (default 5/3)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--vplus", type=float, default=vplus_default, help="right endstate v_+ in (0, 1)")
    g.add_argument("--mach", type=float, default=None, help="Mach number (alternative to --vplus)")


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> Parser:
    p = Parser(prog="evanshock", description="Stability of viscous p-system shocks.")
    p.add_argument("--version", action="version", version=f"evanshock {__version__}")
    p.add_argument("--config", help="INI file with one section per subcommand")
    sub = p.add_subparsers(dest="command", parser_class=Parser, metavar="command")

    s = sub.add_parser("profile", help="viscous profile as CSV")
    _shock_args(s, 1e-4)
    s.add_argument("--L", type=float, default=12.0, help="half-length of the domain")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--spacing", type=float, default=1e-3)
    s.add_argument("--center", choices=("auto", "midpoint"), default="auto")
    s.add_argument("--out", help="CSV path (default stdout)")

    s = sub.add_parser("bounds", help="analytic conditions, boundaries and the g diagnostic")
    _shock_args(s, 1e-4)
    s.add_argument("--gamma-list", type=_floats, help="gammas for the boundary table/map")
    s.add_argument("--g-points", type=int, default=400, help="samples for the g curve")
    s.add_argument("--out", help="JSON path (default stdout)")
    s.add_argument("--csv", help="boundary table CSV (requires --gamma-list)")
    s.add_argument("--svg", help="write the g curve (and boundary map if --gamma-list) here")

    s = sub.add_parser("evans", help="Evans function at one spectral point")
    _shock_args(s, 1e-4)
    s.add_argument("--lambda-re", type=float, default=1.0)
    s.add_argument("--lambda-im", type=float, default=0.0)
    s.add_argument("--L", type=float, help="symmetric truncation length (overrides --theta)")
    s.add_argument("--theta", type=float, default=1e-3, help="relative accuracy target for L")
    s.add_argument("--L-cap", type=float, default=18.0, help="cap on the closed-form lengths")
    s.add_argument("--atol", type=float, default=1e-6)
    s.add_argument("--rtol", type=float, default=1e-8)
    s.add_argument("--out", help="JSON path (default stdout)")

    s = sub.add_parser("winding", help="winding number on the indented semicircle")
    _shock_args(s, 1e-4)
    _pipeline_args(s)
    s.add_argument("--out", help="JSON report path; CSV and SVG are written next to it")

    s = sub.add_parser("sweep", help="winding numbers over a (gamma, Mach) grid")
    s.add_argument("--gamma-list", type=_floats, default=[1.4])
    s.add_argument("--mach-min", type=float, default=1.6)
    s.add_argument("--mach-max", type=float, default=3000.0)
    s.add_argument("--n-mach", type=int, default=20)
    sc = s.add_mutually_exclusive_group()
    sc.add_argument("--log-scale", dest="log_scale", action="store_true", default=True)
    sc.add_argument("--linear-scale", dest="log_scale", action="store_false")
    s.add_argument("--analytic-shortcut", action="store_true",
                   help="tag shocks satisfying the sharp condition stable without an Evans run")
    s.add_argument("--jobs", type=int, default=1)
    _pipeline_args(s)
    s.add_argument("--out", help="CSV path (default stdout)")

    s = sub.add_parser("evolve", help="Crank-Nicolson evolution of a perturbed shock")
    _shock_args(s, 9e-6)
    s.add_argument("--domain", type=float, default=75.0, help="half-width of the domain")
    s.add_argument("--n", type=int, default=2000, help="interior grid points")
    s.add_argument("--dt-ratio", type=float, default=0.5, help="dt / dx")
    s.add_argument("--T", type=float, default=50.0)
    s.add_argument("--perturb-amp", type=float, default=0.05)
    s.add_argument("--perturb-width", type=float, default=2.0)
    s.add_argument("--perturb-center", type=float, default=0.0)
    s.add_argument("--perturb-component", choices=("u", "v", "both"), default="both")
    s.add_argument("--coefficients", choices=("lagged", "centered"), default="lagged")
    s.add_argument("--snapshots", type=_floats, default=None, help="comma-separated times")
    s.add_argument("--out", default="evolve_out", help="output directory")

    s = sub.add_parser("validate", help="check the profile decay envelopes")
    _shock_args(s, 1e-4)
    s.add_argument("--L", type=float, default=12.0)
    s.add_argument("--samples", type=int, default=2001)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out", help="JSON path (default stdout)")
    return p


def _pipeline_args(s):
    s.add_argument("--points", type=int, default=60)
    s.add_argument("--safety", type=float, default=1.1)
    s.add_argument("--r0", type=float, default=1e-4)
    s.add_argument("--theta", type=float, default=1e-3)
    s.add_argument("--L", type=float, default=None, help="symmetric truncation length override")
    s.add_argument("--L-cap", type=float, default=18.0)
    s.add_argument("--atol", type=float, default=1e-6)
    s.add_argument("--rtol", type=float, default=1e-8)


def _subparser(parser, name):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def apply_config(parser, argv):
    """Defaults from the ``--config`` INI section of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    cp = configparser.ConfigParser()
    if not cp.read(known.config):
        raise UsageError(f"cannot read config file {known.config!r}")
    command = next((t for t in rest if not t.startswith("-")), None)
    if command is None or not cp.has_section(command):
        return
    sp = _subparser(parser, command)
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in cp.items(command):
        dest = key.replace("-", "_")
        if dest not in actions:
            close = difflib.get_close_matches(dest, list(actions), n=1)
            hint = f" (did you mean {close[0]}?)" if close else ""
            raise UsageError(f"unknown key {key!r} in [{command}]{hint}")
        act = actions[dest]
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[dest] = cp.getboolean(command, key)
        elif act.type is not None:
            defaults[dest] = act.type(raw)
        else:
            defaults[dest] = raw
    sp.set_defaults(**defaults)


def shock_params(args) -> ShockParams:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.mach is not None:
            return ShockParams.from_mach(args.gamma, args.mach)
        return ShockParams(args.gamma, args.vplus)


def effective_config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.items()}


def pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        n_points=args.points, safety=args.safety, r0=args.r0, theta=args.theta, L=args.L,
        L_cap=args.L_cap, atol=args.atol, rtol=args.rtol,
    )


# ---------------------------------------------------------------------------
# commands


def cmd_profile(args):
    p = shock_params(args)
    prof = solve_profile(p, args.L, tol=args.tol, spacing=args.spacing, center=args.center)
    cfg = effective_config(args)
    rows = zip(prof.x, prof.v, prof.dv)
    emit(csv_text(["x", "vhat", "vhat_prime"], rows, {**cfg, **_params_cfg(p)}), args.out)
    return EXIT_OK


def _params_cfg(p):
    return {"v_plus_resolved": fmt(p.v_plus), "a": fmt(p.a), "mach_resolved": fmt(p.mach)}


def cmd_bounds(args):
    p = shock_params(args)
    cfg = effective_config(args)
    v = np.geomspace(p.v_plus, 1.0, args.g_points + 2)[1:-1]
    gv = np.asarray(g_eval(v, p))
    sh = stability_boundary(p.gamma, "sharp")
    mn = stability_boundary(p.gamma, "mn")
    payload = {
        "params": p.to_dict(),
        "hf_bound": hf_bound(p.gamma),
        "mn_condition": {"lhs": mn_condition(p).lhs_value, "holds": mn_condition(p).holds},
        "sharp_condition": {"lhs": sharp_condition(p).lhs_value, "holds": sharp_condition(p).holds},
        "boundary": {"v_plus_sharp": sh.v_plus, "mach_sharp": sh.mach,
                     "v_plus_mn": mn.v_plus, "mach_mn": mn.mach},
        "g_min": float(gv.min()),
        "g_argmin_v": float(v[int(np.argmin(gv))]),
    }
    table = None
    if args.gamma_list:
        table = boundary_table(args.gamma_list)
        payload["boundary_table"] = [
            dict(zip(("gamma", "vplus_mn", "vplus_sharp", "mach_mn", "mach_sharp"), r)) for r in table
        ]
    emit(artifact("bounds", cfg, payload), args.out)
    if table and args.csv:
        emit(csv_text(("gamma", "vplus_mn", "vplus_sharp", "mach_mn", "mach_sharp"), table, cfg),
             args.csv)
    if args.svg:
        emit_svg({"v": v, "g": gv, "gamma": p.gamma, "v_plus": p.v_plus}, "g_curve", args.svg, cfg)
        if table:
            t = np.array(table)
            iso = {m: [vplus_from_mach(g, m) for g in t[:, 0]] for m in (2.0, 5.0, 10.0)}
            stem = Path(args.svg)
            emit_svg({"gamma": t[:, 0], "vplus_mn": t[:, 1], "vplus_sharp": t[:, 2], "iso_mach": iso},
                     "boundary_map", stem.with_name(stem.stem + "_boundary.svg"), cfg)
    return EXIT_OK


def cmd_evans(args):
    p = shock_params(args)
    if args.L is not None:
        Lm = Lp = args.L
    else:
        Lm, Lp = choose_lengths(p, args.theta, cap=args.L_cap)
    system = EvansSystem(solve_profile(p, max(Lm, Lp)), Lm, Lp, atol=args.atol, rtol=args.rtol)
    lam = complex(args.lambda_re, args.lambda_im)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ev = system.evaluate(lam)
    notes = list(ev.warnings) + [str(w.message) for w in caught]
    dl = domain_length(args.theta, p)
    payload = {
        "lambda": {"re": lam.real, "im": lam.imag},
        "D_re": ev.D.real, "D_im": ev.D.imag,
        "L_minus": Lm, "L_plus": Lp,
        "domain_length": dl.as_dict(),
        "warnings": notes,
    }
    emit(artifact("evans", effective_config(args), payload), args.out)
    return EXIT_OK


def cmd_winding(args):
    p = shock_params(args)
    system, rep = contour_pipeline(p, pipeline_config(args))
    cfg = effective_config(args)
    payload = {"params": p.to_dict(), "L_minus": system.L_minus, "L_plus": system.L_plus,
               **rep.to_dict()}
    emit(artifact("winding", cfg, payload), args.out)
    if args.out not in (None, "-"):
        out = Path(args.out)
        rows = [(z.real, z.imag, d.real, d.imag) for z, d in zip(rep.lambdas, rep.D_values)]
        write_text(out.with_suffix(".csv"),
                   csv_text(["lambda_re", "lambda_im", "D_re", "D_im"], rows, cfg))
        emit_svg({"lambda": rep.lambdas, "D": rep.D_values, "winding": rep.winding}, "contour_pair",
                 out.with_suffix(".svg"), cfg)
    return EXIT_OK if rep.winding == 0 else EXIT_UNSTABLE


def cmd_sweep(args):
    jobs = int(os.environ.get("EVANSHOCK_JOBS", args.jobs))
    machs = mach_grid(args.mach_min, args.mach_max, args.n_mach, args.log_scale)
    rows = sweep(args.gamma_list, machs, pipeline_config(args), jobs=jobs,
                 analytic_shortcut=args.analytic_shortcut)
    cfg = effective_config(args)
    cfg.pop("jobs", None)
    fields = ("gamma", "mach", "v_plus", "L_minus", "L_plus", "winding", "refinements",
              "max_arg_step", "status", "message")
    table = [[("" if r[f] is None else r[f]) for f in fields] for r in rows]
    emit(csv_text(fields, table, cfg), args.out)
    return sweep_status(rows)


def cmd_evolve(args):
    p = shock_params(args)
    grid = Grid1D.symmetric(args.domain, args.n, args.dt_ratio)
    snaps = args.snapshots or [0.0, args.T / 8, args.T / 3, args.T]
    res = simulate(p, grid, args.T, amplitude=args.perturb_amp, width=args.perturb_width,
                   center=args.perturb_center, snapshot_times=snaps, coefficients=args.coefficients,
                   component=args.perturb_component)
    cfg = effective_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    panel = []
    for t in sorted(res.snapshots):
        x, v, u = res.snapshots[t]
        write_text(out / f"snapshot_t{t:.6g}.csv", csv_text(["x", "v", "u"], zip(x, v, u), cfg))
        panel.append((t, x, v, u))
    write_text(out / "report.json", artifact("evolve", cfg, {"params": p.to_dict(), **res.report(),
                                                             "run": res.config}))
    emit_svg({"snapshots": panel}, "snapshot_panel", out / "snapshots.svg", cfg)
    return EXIT_OK


def cmd_validate(args):
    p = shock_params(args)
    prof = solve_profile(p, args.L)
    rep = validate_profile_decay(prof, n_samples=args.samples, tol=args.tol, raise_on_fail=False)
    payload = {"params": p.to_dict(), "applicable": rep.applicable, "ok": rep.ok,
               "worst_margin": rep.worst_margin, "worst_x": rep.worst_x,
               "violations": rep.violations[:50], "clamped": prof.clamped}
    emit(artifact("validate", effective_config(args), payload), args.out)
    return EXIT_OK if rep.ok else EXIT_NUMERICAL


COMMANDS = {
    "profile": cmd_profile, "bounds": cmd_bounds, "evans": cmd_evans, "winding": cmd_winding,
    "sweep": cmd_sweep, "evolve": cmd_evolve, "validate": cmd_validate,
}


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if not argv:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, DomainError, ValueError) as exc:
        sys.stderr.write(f"evanshock: error: {exc}\n")
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"evanshock: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
