"""Command-line driver: scenario files in, classification/reports/tables out.

Scenario files are JSON with an explicit schema_version; reports are CSV with
a fixed column order and 17-significant-digit floats (bit-exact across runs),
plus an optional command-driven plot script next to the data.

Exit codes: 0 ok, 2 parse error, 3 degenerate configuration, 4 numerical
failure.  Set DISKTREE_LOG=DEBUG|INFO|WARNING for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import specfun
from .errors import DegenerateError, DisktreeError, NoBracket, NoConvergence, ParseError, QuadratureError
from .geometry import AffineLagrangian, Scenario, classify, criticals
from .gradtree import build_gradient_tree, internal_edge_length
from .param import solve_z4
from .converge import ConvergenceReport, GridSpec, ReportRow, run_report
from .scmap import DiskMap, sc_quadrature

log = logging.getLogger("disktree")

SCHEMA_VERSION = 1
CSV_COLUMNS = ("region", "epsilon", "sup_error", "bound", "z4", "l_estimate")


# ---------------------------------------------------------------------------
# scenario files


def load_scenario_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read scenario file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"scenario file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ParseError("scenario file must hold a JSON object")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {raw.get('schema_version')!r}")
    k = raw.get("k")
    lags = raw.get("lagrangians")
    if k not in (3, 4):
        raise ParseError("k must be 3 or 4")
    if not isinstance(lags, list) or len(lags) != k:
        raise ParseError("lagrangians must list exactly k objects {a, b}")
    for item in lags:
        if not isinstance(item, dict) or not {"a", "b"} <= set(item):
            raise ParseError("each lagrangian needs numeric fields a and b")
        for key in ("a", "b"):
            if not isinstance(item[key], (int, float)):
                raise ParseError(f"lagrangian field {key} must be numeric")
    sched = raw.get("epsilon_schedule", [0.2, 0.1, 0.05, 0.025])
    if (not isinstance(sched, list) or not sched
            or any(not isinstance(e, (int, float)) or e <= 0 for e in sched)):
        raise ParseError("epsilon_schedule must be a non-empty list of positive reals")
    delta = raw.get("delta", 0.25)
    if not isinstance(delta, (int, float)) or not (0.0 < delta < 0.5):
        raise ParseError("delta must lie in (0, 1/2)")
    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ParseError("grid must be an object")
    gs = GridSpec(
        tau_samples=int(grid.get("tau_samples", 64)),
        sigma_samples=int(grid.get("sigma_samples", 64)),
        polar_samples=int(grid.get("polar_samples", 64)))
    seed = raw.get("seed", 0)
    return {"k": k, "lagrangians": lags, "epsilon_schedule": [float(e) for e in sched],
            "delta": float(delta), "grid": gs, "seed": int(seed)}


def scenario_from_file(data: dict, epsilon: float | None = None,
                       delta: float | None = None) -> Scenario:
    eps = epsilon if epsilon is not None else data["epsilon_schedule"][0]
    return Scenario(
        tuple(AffineLagrangian(float(l["a"]), float(l["b"])) for l in data["lagrangians"]),
        epsilon=eps, delta=delta if delta is not None else data["delta"])


# ---------------------------------------------------------------------------
# report files


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.17g}"


def write_report(report: ConvergenceReport, path: str, seed: int = 0):
    from .converge import TAU_MIN

    meta = {
        "k": report.k, "classification": report.classification,
        "tree_type": report.tree_type, "internal_length": report.internal_length,
        "canonical_shift": report.canonical_shift, "delta": report.delta,
        "grid": asdict(report.grid), "seed": seed, "tau_min": TAU_MIN,
        "versions": report.versions,
    }
    lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(CSV_COLUMNS)]
    for r in report.rows:
        lines.append(",".join((r.region, _fmt(r.epsilon), _fmt(r.sup_error),
                               _fmt(r.bound), _fmt(r.z4), _fmt(r.l_estimate))))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_report(path: str) -> tuple[dict, list[ReportRow]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ParseError(f"cannot read report {path}: {e}") from e
    if len(lines) < 2 or not lines[0].startswith("# "):
        raise ParseError("report file missing metadata header")
    meta = json.loads(lines[0][2:])
    if tuple(lines[1].split(",")) != CSV_COLUMNS:
        raise ParseError("report file has unexpected columns")
    rows = []
    for line in lines[2:]:
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ParseError(f"malformed report row: {line!r}")
        region = parts[0]
        nums = [None if p == "" else float(p) for p in parts[1:]]
        for v in nums:
            if v is not None and not math.isfinite(v):
                raise ParseError("report contains non-finite numeric fields")
        rows.append(ReportRow(region=region, epsilon=nums[0], sup_error=nums[1],
                              bound=nums[2], z4=nums[3], l_estimate=nums[4],
                              windowed=region == "internal_annulus", points=0))
    return meta, rows


def write_plot_script(report: ConvergenceReport, csv_path: str):
    """Emit per-region data files plus a command-driven plotter script."""
    base = Path(csv_path).with_suffix("")
    regions = []
    for name in dict.fromkeys(r.region for r in report.rows):
        dat = Path(f"{base}_{name}.dat")
        rows = report.rows_for(name)
        body = ["# epsilon sup_error bound"]
        for r in rows:
            body.append(f"{_fmt(r.epsilon)} {_fmt(r.sup_error)} {_fmt(r.bound) or 'nan'}")
        dat.write_text("\n".join(body) + "\n", encoding="utf-8")
        regions.append((name, dat.name))
    gp = Path(f"{base}.gp")
    plot_parts = []
    for name, fname in regions:
        plot_parts.append(f"'{fname}' using 1:2 with linespoints title '{name} sup'")
        plot_parts.append(f"'{fname}' using 1:3 with lines dashtype 2 title '{name} bound'")
    script = "\n".join([
        "set logscale xy",
        "set xlabel 'epsilon'",
        "set ylabel 'sup error'",
        "set key outside",
        "plot \\",
        ", \\\n".join("  " + p for p in plot_parts),
        "pause -1",
    ])
    gp.write_text(script + "\n", encoding="utf-8")
    return str(gp)


# ---------------------------------------------------------------------------
# subcommands


def _parse_eps_list(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise ParseError(f"bad --eps list {text!r}") from e
    if not vals or any(v <= 0 for v in vals):
        raise ParseError("--eps needs positive comma-separated values")
    return vals


def cmd_classify(args) -> int:
    data = load_scenario_file(args.scenario)
    s = scenario_from_file(data, delta=args.delta)
    c = classify(s)
    cp = criticals(s)
    pstr = "(" + ", ".join(f"{v:g}" for v in cp.p) + ")"
    if c.kind == "Degenerate":
        print(f"Degenerate: {c.table_row}, p={pstr}")
        return 3
    if s.k == 3:
        print(f"Triangle, row {c.table_row}, p={pstr}")
    else:
        length = internal_edge_length(s, c)
        print(f"ConvexQuad, row {c.table_row}, tree {c.tree_type}, "
              f"l={length:.6f}, p={pstr}")
    return 0


def cmd_tree(args) -> int:
    data = load_scenario_file(args.scenario)
    s = scenario_from_file(data, delta=args.delta)
    tree = build_gradient_tree(s)
    print(f"topology {tree.topology.kind}, internal length {tree.topology.internal_length:.12g}")
    print(f"junctions: {', '.join(f'{j:.12g}' for j in tree.junctions)}")
    for i, curve in enumerate(tree.external, start=1):
        print(f"  e{i}: {curve.kind} coeff={curve.coeff:.12g} rate={curve.rate:.12g} "
              f"offset={curve.offset:.12g}")
    if tree.internal is not None:
        c = tree.internal
        print(f"  int: {c.kind} coeff={c.coeff:.12g} rate={c.rate:.12g} offset={c.offset:.12g} "
              f"(flows pair {tree.internal_pair})")
    return 0


def cmd_map_eval(args) -> int:
    data = load_scenario_file(args.scenario)
    eps = _parse_eps_list(args.eps)[0] if args.eps else None
    s = scenario_from_file(data, epsilon=eps, delta=args.delta)
    try:
        re_s, im_s = args.z.split(",")
        z = complex(float(re_s), float(im_s))
    except ValueError as e:
        raise ParseError(f"--z expects RE,IM (got {args.z!r})") from e
    if s.k == 4:
        sol = solve_z4(s)
        dm = DiskMap(s, z4=sol.z4)
        print(f"z4 = {sol.z4:.17g}")
    else:
        dm = DiskMap(s)
    w = dm.eval(z)
    print(f"w({z.real:g}{z.imag:+g}i) = {w.real:.17g} {w.imag:+.17g}i  [{dm.region_tag(z)}]")
    return 0


def cmd_solve_z4(args) -> int:
    data = load_scenario_file(args.scenario)
    schedule = _parse_eps_list(args.eps) if args.eps else data["epsilon_schedule"]
    s = scenario_from_file(data, delta=args.delta)
    if s.k != 4:
        raise DegenerateError("solve-z4 needs a four-line scenario")
    print("epsilon,z4,log_z4,residual,iterations,l_estimate")
    for eps in schedule:
        sol = solve_z4(s.with_epsilon(eps))
        print(f"{_fmt(eps)},{_fmt(sol.z4)},{_fmt(sol.log_z4)},{_fmt(sol.residual)},"
              f"{sol.iterations},{_fmt(-eps * sol.log_z4 / math.pi)}")
    return 0


def cmd_converge(args) -> int:
    data = load_scenario_file(args.scenario)
    schedule = _parse_eps_list(args.eps) if args.eps else data["epsilon_schedule"]
    grid = GridSpec.square(args.grid) if args.grid else data["grid"]
    s = scenario_from_file(data, delta=args.delta)
    regions = args.regions.split(",") if args.regions else None
    report = run_report(s, eps_schedule=schedule, grid=grid, regions=regions)
    out = args.out or "report.csv"
    write_report(report, out, seed=data["seed"])
    gp = write_plot_script(report, out)
    bad = [r for r in report.rows if r.bound is not None and r.sup_error > r.bound]
    print(f"wrote {out} ({len(report.rows)} rows) and {gp}")
    if bad:
        print(f"WARNING: {len(bad)} rows exceed their analytic bound", file=sys.stderr)
        return 4
    return 0


def cmd_bounds(args) -> int:
    from .converge import _k3_bounds, _k4_bounds, build_context, canonical_shift

    data = load_scenario_file(args.scenario)
    schedule = _parse_eps_list(args.eps) if args.eps else data["epsilon_schedule"]
    s = scenario_from_file(data, delta=args.delta)
    s = s.rotated(canonical_shift(s))
    for eps in schedule:
        ctx = build_context(s.with_epsilon(eps))
        table = _k3_bounds(ctx) if s.k == 3 else _k4_bounds(ctx)
        for name in sorted(table):
            print(f"{_fmt(eps)},{name},{_fmt(table[name])}")
    return 0


# ---------------------------------------------------------------------------
# selftest


def _selftest_cases():
    import random

    def specfun_identities():
        assert abs(specfun.gauss_2f1(1.0, 1.0, 2.0, 0.5) - 2.0 * math.log(2.0)) < 1e-10
        rng = random.Random(7)
        for _ in range(20):
            a = rng.uniform(0.1, 1.5)
            b = rng.uniform(0.1, 1.5)
            c = a + b + rng.uniform(0.31, 2.0)
            lhs = specfun.gauss_2f1(a, b, c, 1.0)
            rhs = specfun.gamma_ratio((c, c - a - b), (c - a, c - b))
            assert abs(lhs - rhs) <= 1e-10 * abs(rhs)
        for x in (-0.5, -0.25, 0.0, 0.3, 0.5):
            lhs = specfun.appell_f1(0.4, 0.2, 0.3, 1.1, x, x)
            rhs = specfun.gauss_2f1(0.4, 0.5, 1.1, x)
            assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(rhs))
        assert specfun.pochhammer(0.5, -1) == -2.0

    def connection_residual():
        lhs = specfun._euler_f1(0.3, 0.2, 0.7, 1.3, -0.5, -4.0, specfun.DEFAULT_CONTROL)
        rhs = specfun.f1_connection(0.3, 0.2, 0.7, 1.3, -0.5, -4.0)
        assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(lhs)), f"residual {abs(lhs - rhs):.3e}"

    def oracle_equivalence():
        s = Scenario((AffineLagrangian(0, 0), AffineLagrangian(-1, 1),
                      AffineLagrangian(1, 0)), epsilon=0.5)
        dm = DiskMap(s)
        for z in (0.3 + 0.2j, 1.4 + 0.8j, -0.2 + 0.5j):
            a = dm.eval(z)
            b = sc_quadrature(dm.spec, z)
            assert abs(a - b) < 1e-9, f"series/quadrature gap {abs(a - b):.3e} at {z}"

    def classification_properties():
        rng = random.Random(11)
        checked = 0
        while checked < 200:
            a = sorted(rng.uniform(-4, 4) for _ in range(3))
            slopes = (a[1], a[0], a[2])  # a2 < a1 < a3 pattern
            b = tuple(rng.uniform(-3, 3) for _ in range(3))
            try:
                s = Scenario(tuple(AffineLagrangian(x, y) for x, y in zip(slopes, b)),
                             epsilon=1.0)
            except DegenerateError:
                continue
            c = classify(s)
            if c.kind != "Triangle":
                continue
            # a3 > a1 > a2 is the decreasing chain at i=3, so p2 sits
            # strictly between p1 and p3 (it is the junction value)
            p = criticals(s).p
            assert p[0] < p[1] < p[2] or p[2] < p[1] < p[0], f"ordering law broken: {p}"
            checked += 1

    return [
        ("specfun-identities", specfun_identities),
        ("connection-residual", connection_residual),
        ("oracle-equivalence", oracle_equivalence),
        ("classification-properties", classification_properties),
    ]


def cmd_selftest(args) -> int:
    if args.perturb_gamma:
        # sensitivity hook: scales a connection-formula prefactor so the
        # residual check must fail if it is actually exercised
        specfun._PREFACTOR_SCALE = 1.0 + args.perturb_gamma
    cases = _selftest_cases()
    if args.only is not None:
        cases = [(n, f) for n, f in cases if args.only in n]
    if not cases:
        print("0 tests")
        return 0
    failed = 0
    for name, fn in cases:
        try:
            fn()
            print(f"PASS {name}")
        except AssertionError as e:
            failed += 1
            print(f"FAIL {name}: {e}")
        except DisktreeError as e:
            failed += 1
            print(f"FAIL {name}: {type(e).__name__}: {e}")
    print(f"{len(cases) - failed} passed, {failed} failed")
    return 4 if failed else 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="disktree", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--delta", type=float, default=None, help="override split radius")
        p.add_argument("--eps", default=None, help="comma-separated epsilon list")

    p = sub.add_parser("classify", help="print the matched table row and tree type")
    add_common(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("tree", help="print the gradient-tree curves")
    add_common(p)
    p.set_defaults(fn=cmd_tree)

    p = sub.add_parser("map-eval", help="evaluate the disk map at one point")
    add_common(p)
    p.add_argument("--z", required=True, help="evaluation point as RE,IM")
    p.set_defaults(fn=cmd_map_eval)

    p = sub.add_parser("solve-z4", help="solve the accessory parameter per epsilon")
    add_common(p)
    p.set_defaults(fn=cmd_solve_z4)

    p = sub.add_parser("converge", help="run the convergence report and write CSV")
    add_common(p)
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--grid", type=int, default=None, help="samples per grid dimension")
    p.add_argument("--regions", default=None, help="comma-separated region filter")
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("bounds", help="print analytic bound values per region/epsilon")
    add_common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("selftest", help="run built-in identity and oracle checks")
    p.add_argument("--only", default=None, help="substring filter on test names")
    p.add_argument("--perturb-gamma", type=float, default=0.0,
                   help="test hook: perturb a connection prefactor by this amount")
    p.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("DISKTREE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s: %(message)s")
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except DegenerateError as e:
        print(f"degenerate configuration: {e}", file=sys.stderr)
        return 3
    except (NoConvergence, NoBracket, QuadratureError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 4
    except DisktreeError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
