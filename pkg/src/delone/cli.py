"""``delone`` command-line interface.

Exit codes: 0 success, 1 error, 2 certified negative (NotIrreducible),
3 budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import Box, denseness_scan, digit_equidiscreteness, discreteness_scan
from .cycles import (BudgetExhausted, Discrete, NotIrreducible, Seed, certify,
                     enumerate_cycles, generate, seed_from_cycle, solution_window)
from .errors import DeloneError, MultiplicityOverflow, PartialEnumerationError
from .io import (RunManifest, format_scalar, load_spec, read_points, spec_hash,
                 write_points)
from .multiset import mode_from_name
from .render import render_svg
from .system import validate
from .tiles import (DEFAULT_RESOLUTION, check_tiling, measure_estimate,
                    tile_iterate)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _common(p, suppress):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--json", action="store_true", help="machine-readable output", **kw)
    p.add_argument("--threads", type=int, help="worker threads for frontier expansion",
                   **(kw or {"default": 1}))
    p.add_argument("--manifest", help="write a run manifest (JSON) here", **(kw or {"default": None}))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="delone", description="Substitution Delone sets and multi-tiles.")
    parser.add_argument("--version", action="version", version=f"delone {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=True)
        return p

    p = add("validate", "check a system spec and report Perron data")
    p.add_argument("spec")
    p.add_argument("--require-primitive", action="store_true")

    p = add("cycles", "enumerate periodic cycles")
    p.add_argument("spec")
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--minimal-only", action="store_true")
    p.add_argument("--budget", type=int, default=10**6, help="max digit words")

    for name, help_ in (("generate", "iterate the inflation operator from a seed"),
                        ("certify", "run the discreteness certifier")):
        p = add(name, help_)
        p.add_argument("spec")
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--cycle", help="cycle id 'p:idx' as listed by 'cycles'")
        g.add_argument("--seed", help="seed points CSV")
        p.add_argument("--budget-points", type=int, default=None)
        p.add_argument("--out", help="points CSV output")
        if name == "generate":
            p.add_argument("--iters", type=int, required=True)
            p.add_argument("--prune-radius", type=float, default=None,
                           help="adapted-norm pruning radius (>= generation radius)")
        else:
            p.add_argument("--budget-k", type=int, default=50)
            p.add_argument("--radius", type=float, default=None,
                           help="with --out, write the exact limit on this Euclidean ball")

    p = add("analyze", "discreteness and denseness diagnostics on a window")
    p.add_argument("points")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--window", required=True, help="a,b or a,b,c,d")
    p.add_argument("--arithmetic", choices=("rational", "float"), default="rational")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--resolution", type=float, default=None, help="grid spacing for d=2")

    p = add("digits", "ordinariness and spacing of iterated digit sets")
    p.add_argument("spec")
    p.add_argument("--max-m", type=int, default=6)
    p.add_argument("--r", type=float, default=1.0)

    p = add("tile", "approximate the multi-tile")
    p.add_argument("spec")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--start", choices=("hull", "unit_ball"), default="hull")
    p.add_argument("--out", help="tile.json or tile.svg")

    p = add("check-tiling", "covering multiplicity of tiles + points on a window")
    p.add_argument("spec")
    p.add_argument("--points", required=True)
    p.add_argument("--window", required=True)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--out")

    p = add("render", "draw points and/or tiles as SVG")
    p.add_argument("--points")
    p.add_argument("--spec", help="system spec; draws its tiles")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--resolution", type=int, default=7)
    p.add_argument("--arithmetic", choices=("rational", "float"), default=None)
    p.add_argument("--out", required=True)
    return parser


# Helpers ----------------------------------------------------------------------------

def _fmt_point(p, mode):
    return [format_scalar(c, mode) for c in p]


def _pick_cycle(system, cid: str):
    try:
        p, idx = (int(t) for t in cid.split(":"))
    except ValueError:
        raise UsageError(f"cycle id must look like 'p:idx', got {cid!r}") from None
    cycles = enumerate_cycles(system, p)
    if not 1 <= idx <= len(cycles):
        raise UsageError(f"period {p} has {len(cycles)} cycles; index {idx} out of range")
    return cycles[idx - 1]


def _seed(system, args) -> Seed:
    if args.cycle:
        return seed_from_cycle(system, _pick_cycle(system, args.cycle))
    return Seed(read_points(args.seed, system.mode, system.n))


class _Out:
    def __init__(self, args):
        self.json = getattr(args, "json", False)
        self.data = {}

    def text(self, line):
        if not self.json:
            print(line)

    def emit(self):
        if self.json:
            print(json.dumps(self.data, indent=2, sort_keys=True))


# Commands -----------------------------------------------------------------------------

def cmd_validate(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    rep = validate(system, require_primitive=args.require_primitive)
    out.data.update(rep.as_dict())
    out.data["subdivision_matrix"] = system.subdivision_matrix().tolist()
    out.data["digit_collisions"] = system.digit_collisions
    out.text(f"system: d={system.d} n={system.n} arithmetic={system.mode}")
    out.text(f"S = {system.subdivision_matrix().tolist()}")
    for k, v in rep.as_dict().items():
        out.text(f"{k}: {v}")
    return EXIT_OK


def cmd_cycles(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    partial = False
    try:
        cycles = enumerate_cycles(system, args.period, budget=args.budget,
                                  minimal_only=args.minimal_only)
    except PartialEnumerationError as e:
        cycles, partial = e.partial, True
    allc = enumerate_cycles(system, args.period, budget=args.budget) if not partial else cycles
    ids = {c.vertices: k + 1 for k, c in enumerate(allc)}
    items = []
    for c in cycles:
        items.append({
            "id": f"{args.period}:{ids.get(c.vertices, '?')}",
            "vertices": [{"point": _fmt_point(p, system.mode), "color": i + 1} for p, i in c.vertices],
            "digits": [_fmt_point(d, system.mode) for d in c.digits],
            "minimal_period": c.minimal_period,
            "simple": c.is_simple,
            "closes_exactly": c.check(system),
        })
        verts = ", ".join(f"{'/'.join(map(str, v['point']))}@{v['color']}" for v in items[-1]["vertices"])
        out.text(f"{items[-1]['id']}  minimal_period={c.minimal_period}  [{verts}]")
    out.data = {"period": args.period, "cycles": items, "partial": partial}
    return EXIT_BUDGET if partial else EXIT_OK


def cmd_generate(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    seed = _seed(system, args)
    try:
        run = generate(system, seed, args.iters, point_budget=args.budget_points,
                       prune_radius=args.prune_radius, threads=args.threads)
    except MultiplicityOverflow as e:
        out.data = {"status": "multiplicity_overflow", "message": str(e)}
        out.text(f"multiplicity blow-up: {e}")
        return EXIT_BUDGET
    shells = [{"k": s.k, "points": list(s.points), "totals": list(s.totals),
               "max_multiplicity": s.max_multiplicity, "new_points": list(s.new_points)}
              for s in run.shells]
    out.data = {"steps": run.steps, "exhausted": run.exhausted, "shells": shells}
    for s in shells:
        out.text(f"k={s['k']:3d} points={s['points']} H={s['totals']} max_mult={s['max_multiplicity']}")
    if args.out:
        write_points(args.out, run.frontier)
        man.add_output(args.out)
    if run.exhausted:
        out.text("point budget exhausted")
        return EXIT_BUDGET
    return EXIT_OK


def cmd_certify(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    seed = _seed(system, args)
    res = certify(system, seed, k_max=args.budget_k, point_budget=args.budget_points,
                  threads=args.threads)
    out.data = {"verdict": res.verdict}
    out.text(f"verdict: {res.verdict}")
    if isinstance(res, Discrete):
        out.data.update({"stabilized_at": res.stabilized_at, "window_radius": res.window_radius,
                         "rho": res.norm.rho, "window_points": res.family_window.point_count(),
                         "max_multiplicity": res.family_window.max_multiplicity()})
        out.text(f"stabilized at k={res.stabilized_at}; adapted window radius {res.window_radius!r}")
        if args.out:
            pts = res.family_window
            if args.radius is not None:
                run = solution_window(system, seed, args.radius, outcome=res,
                                      point_budget=args.budget_points, threads=args.threads)
                pts = run.frontier.restrict_to_ball(
                    lambda c: np.linalg.norm(c, axis=1), args.radius)
                out.data["radius"] = args.radius
            write_points(args.out, pts)
            man.add_output(args.out)
        return EXIT_OK
    if isinstance(res, NotIrreducible):
        out.data["witness"] = res.witness.describe(system.mode)
        out.text(f"witness: {json.dumps(out.data['witness'])}")
        return EXIT_NEGATIVE
    assert isinstance(res, BudgetExhausted)
    out.data.update({"max_k": res.max_k, "max_points": res.max_points, "reason": res.reason})
    out.text(f"gave up at k={res.max_k} ({res.reason})")
    return EXIT_BUDGET


def cmd_analyze(args, out, man):
    mode = mode_from_name(args.arithmetic, args.epsilon)
    fam = read_points(args.points, mode)
    win = Box.parse(args.window)
    reports = []
    for i, X in enumerate(fam):
        dr = discreteness_scan(X, args.r, win)
        de = denseness_scan(X, win, args.resolution)
        reports.append({"color": i + 1, "discreteness": dr.as_dict(), "denseness": de.as_dict()})
        out.text(f"color {i + 1}: max count in r-ball = {dr.max_count_per_ball} "
                 f"(uniformly discrete: {dr.uniformly_discrete}); covering radius = {de.R_cov}")
    out.data = {"r": args.r, "window": args.window, "colors": reports}
    return EXIT_OK


def cmd_digits(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    rows = digit_equidiscreteness(system, args.max_m, args.r)
    out.data = {"cells": [{"m": r.m, "i": r.i + 1, "j": r.j + 1, "size": r.size,
                           "is_ordinary": r.is_ordinary, "min_separation": r.min_separation,
                           "max_per_ball": r.max_per_ball} for r in rows]}
    for r in rows:
        out.text(f"m={r.m} D[{r.i + 1}][{r.j + 1}] size={r.size} ordinary={r.is_ordinary} "
                 f"min_sep={r.min_separation} max_per_ball={r.max_per_ball}")
    return EXIT_OK


def cmd_tile(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    tiles = tile_iterate(system, args.depth, args.resolution, start=args.start)
    info = []
    for t in tiles:
        me = measure_estimate(t)
        info.append({**t.as_dict(), "measure": me.value, "measure_error": me.error})
        out.text(f"T{t.color + 1}: measure ~ {me.value!r} +/- {me.error!r}")
    out.data = {"tiles": info}
    if args.out:
        path = Path(args.out)
        if path.suffix == ".svg":
            path.write_text(render_svg(tiles=tiles))
        else:
            path.write_text(json.dumps({"tiles": info}, indent=2, sort_keys=True) + "\n")
        man.add_output(path)
    return EXIT_OK


def cmd_check_tiling(args, out, man):
    system = load_spec(args.spec)
    man.spec_hash = spec_hash(system)
    fam = read_points(args.points, system.mode, system.n)
    win = Box.parse(args.window)
    tiles = tile_iterate(system, args.depth, args.resolution)
    rep = check_tiling(system, fam, tiles, win)
    out.data = rep.as_dict()
    out.text(f"thickness {rep.thickness}, defect fraction {rep.defect_fraction!r}")
    out.text(f"histogram {out.data['histogram']}")
    if args.out:
        Path(args.out).write_text(json.dumps(out.data, indent=2, sort_keys=True) + "\n")
        man.add_output(args.out)
    return EXIT_OK


def cmd_render(args, out, man):
    system = load_spec(args.spec) if args.spec else None
    tiles = tile_iterate(system, args.depth, args.resolution) if system else None
    fam = None
    if args.points:
        if system is not None and args.arithmetic is None:
            mode, n = system.mode, system.n
        else:
            mode, n = mode_from_name(args.arithmetic or "rational"), None
        fam = read_points(args.points, mode, n)
    svg = render_svg(points=fam, tiles=tiles)
    Path(args.out).write_text(svg)
    man.add_output(args.out)
    out.data = {"out": args.out}
    out.text(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate, "cycles": cmd_cycles, "generate": cmd_generate,
    "certify": cmd_certify, "analyze": cmd_analyze, "digits": cmd_digits,
    "tile": cmd_tile, "check-tiling": cmd_check_tiling, "render": cmd_render,
}


VALUE_OPTIONS = ("--window",)
NEGATIVE_STARTS = {f"-{c}" for c in "0123456789."}


def _join_negative_values(argv):
    """Rewrite ``--window -3,3`` as ``--window=-3,3`` so argparse accepts it."""
    out = []
    k = 0
    while k < len(argv):
        tok = argv[k]
        if tok in VALUE_OPTIONS and k + 1 < len(argv) and argv[k + 1][:2] in NEGATIVE_STARTS:
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
            continue
        out.append(tok)
        k += 1
    return out


def main(argv=None) -> int:
    argv = _join_negative_values(list(_sys.argv[1:] if argv is None else argv))
    wants_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        if wants_json:
            print(json.dumps({"error": "usage", "message": str(e)}))
        else:
            print(str(e), file=_sys.stderr)
        return EXIT_ERROR
    out = _Out(args)
    params = {k: v for k, v in vars(args).items() if k not in ("json", "manifest", "command")}
    man = RunManifest(None, args.command, params, __version__)
    try:
        code = COMMANDS[args.command](args, out, man)
    except (DeloneError, UsageError, OSError, ValueError) as e:
        kind = "usage" if isinstance(e, UsageError) else type(e).__name__
        err = {"error": kind, "message": str(e)}
        for attr in ("field", "line"):
            if getattr(e, attr, None) is not None:
                err[attr] = getattr(e, attr)
        if out.json:
            print(json.dumps(err, sort_keys=True))
        else:
            print(f"error: {e}", file=_sys.stderr)
        return EXIT_ERROR
    out.emit()
    if args.manifest:
        man.finish()
        man.write(args.manifest)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
