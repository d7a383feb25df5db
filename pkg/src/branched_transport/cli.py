"""Command-line surface: build trees, certify split ratios, tabulate E, verify.

Subcommands
-----------
tree    construct the truncated optimal tree and emit JSON and/or SVG
alpha   certified lower bounds on the N-way split ratio (exit 0 iff all hold)
energy  tabulate the energy curve with its sandwich bounds as CSV
verify  run the library's invariant suites (exit 0 iff everything passes)

All file outputs are deterministic bytes for a fixed command line; numbers are
serialized with 17 significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import certify, kernels, measures, recursion, selfsimilar, tree as tree_mod


def _fmt(v) -> str:
    return format(float(v), ".17g")


# -- tree ------------------------------------------------------------------------


def render_svg(t: tree_mod.TransportTree) -> str:
    """Render branches as line segments, time increasing downward.

    The view box spans [-0.55, 0.55] in space and the tree's horizon in time;
    stroke width is proportional to sqrt(mass) (a visual flux cue).
    """
    a, b = t.horizon
    height = b - a
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-0.55 0 1.1 %s">' % _fmt(height),
        '<rect x="-0.55" y="0" width="1.1" height="%s" fill="white"/>' % _fmt(height),
    ]
    for m, t0, t1, x0, x1 in zip(t.masses, t.t0, t.t1, t.x0, t.x1):
        lines.append(
            '<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="black" '
            'stroke-width="%s" stroke-linecap="round"/>'
            % (_fmt(x0), _fmt(t0 - a), _fmt(x1), _fmt(t1 - a), _fmt(0.02 * math.sqrt(m)))
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_tree(args) -> int:
    try:
        t = selfsimilar.optimal_tree(args.T, args.phi, args.X, args.depth)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    breakdown = tree_mod.energy(t)
    wrote = False
    json_path = args.json or (args.out if args.format == "json" else None)
    svg_path = args.svg or (args.out if args.format == "svg" else None)
    if json_path:
        payload = tree_mod.to_json(t, breakdown)
        with open(json_path, "w", newline="\n") as fh:
            fh.write(payload + "\n")
        wrote = True
    if svg_path:
        with open(svg_path, "w", newline="\n") as fh:
            fh.write(render_svg(t))
        wrote = True
    tail = selfsimilar.optimal_tree_energy(args.T, args.phi, args.X, args.depth)
    print(
        f"tree: {len(t)} branches on [{_fmt(t.horizon[0])}, {_fmt(t.horizon[1])}], "
        f"energy {_fmt(breakdown.total)} "
        f"(limit {_fmt(tail.limit)}, truncation tail <= {_fmt(tail.tail_upper)})"
    )
    if not wrote:
        print(tree_mod.to_json(t, breakdown))
    return 0


# -- alpha -----------------------------------------------------------------------


def _alpha_csv(bounds) -> str:
    rows = ["N,grid_min,argmin,slack,certified_lower,threshold,verdict"]
    for b in bounds:
        rows.append(
            ",".join(
                [str(b.n)]
                + [_fmt(v) for v in (b.grid_min, b.grid_argmin, b.slack, b.certified_lower, b.threshold)]
                + ["true" if b.verdict else "false"]
            )
        )
    return "\n".join(rows) + "\n"


def _alpha_md(bounds) -> str:
    out = [
        "| N | grid minimum | argmin | slack | certified lower | critical threshold | verdict |",
        "|---|--------------|--------|-------|-----------------|--------------------|---------|",
    ]
    for b in bounds:
        out.append(
            f"| {b.n} | {b.grid_min:.6f} | {b.grid_argmin:.6f} | {b.slack:.6f} "
            f"| {b.certified_lower:.6f} | {b.threshold:.6f} | "
            f"{'certified' if b.verdict else 'FAILED'} |"
        )
    return "\n".join(out) + "\n"


def cmd_alpha(args) -> int:
    ns = (3, 4, 5, 6) if args.all or args.N is None else (args.N,)
    for n in ns:
        if not 3 <= n <= 6:
            print(f"error: N must lie in 3..6, got {n}", file=sys.stderr)
            return 2
    workers = max(1, args.workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            bounds = list(pool.map(lambda n: certify.certify_alpha_lower(n, args.delta), ns))
    else:
        bounds = [certify.certify_alpha_lower(n, args.delta) for n in ns]
    text = _alpha_md(bounds) if args.format == "md" else _alpha_csv(bounds)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(b.verdict for b in bounds) else 1


# -- energy ----------------------------------------------------------------------


def cmd_energy(args) -> int:
    curve = recursion.solve_E(
        t_lo=args.t_lo,
        t_hi=args.T,
        step_above=args.grid_step,
        mass_step=args.mass_step,
        n_max=args.N or 6,
    )
    rows = ["T,E,lower,upper"]
    sandwich_ok = True
    for t, e, lo, hi in curve.rows():
        sandwich_ok &= lo - 1e-9 <= e <= hi + 1e-9
        rows.append(",".join(_fmt(v) for v in (t, e, lo, hi)))
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not sandwich_ok:
        print("error: energy left the sandwich bounds", file=sys.stderr)
        return 1
    return 0


# -- verify ----------------------------------------------------------------------


def _verify_checks(full: bool, seed: int):
    """Yield (name, ok, detail) for every invariant suite."""
    rng = np.random.default_rng(seed)
    sqrt2 = math.sqrt(2.0)

    # measures
    unit = measures.UniformSegment(0.0, 1.0, 1.0)
    d0 = measures.AtomicMeasure.dirac(1.0, 0.0)
    yield (
        "w2 dirac->block equals 1/12",
        abs(measures.w2_atomic_uniform(d0, unit) - 1.0 / 12.0) <= 1e-15,
        "",
    )
    pair = measures.AtomicMeasure([(0.5, -0.25), (0.5, 0.25)])
    yield (
        "w2 two-atom->block equals 1/48",
        abs(measures.w2_atomic_uniform(pair, unit) - 1.0 / 48.0) <= 1e-15,
        "",
    )
    ok = True
    for _ in range(50 if not full else 200):
        n_a, n_b = rng.integers(1, 8, size=2)
        a = measures.AtomicMeasure.from_arrays(rng.random(n_a) + 0.1, rng.normal(size=n_a))
        b = measures.AtomicMeasure.from_arrays(rng.random(n_b) + 0.1, rng.normal(size=n_b))
        b = measures.AtomicMeasure.from_arrays(
            b.masses * (measures.total_mass(a) / measures.total_mass(b)), b.positions
        )
        w = measures.w2_atomic_atomic(a, b)
        ok &= abs(w - measures.w2_atomic_atomic(b, a)) <= 1e-12
        c = float(rng.normal())
        ok &= abs(measures.w2_atomic_atomic(a.translate(c), b.translate(c)) - w) <= 1e-12 * max(1.0, w)
        lam = float(rng.random() + 0.5)
        ok &= abs(measures.w2_atomic_atomic(a.dilate(lam), b.dilate(lam)) - lam * lam * w) <= 1e-10 * max(1.0, w)
    yield ("w2 symmetry/translation/scaling", ok, "")
    n_ref = 1000
    approx = measures.w2_atomic_atomic(d0, unit.to_atoms(n_ref))
    exact = measures.w2_atomic_uniform(d0, unit)
    yield (
        "w2 refinement oracle O(1/n^2)",
        abs(approx - exact) <= 1.0 / n_ref**2,
        f"err={abs(approx - exact):.3g}",
    )

    # tree
    mu6 = selfsimilar.build_mu_star(6)
    rep = tree_mod.validate(mu6)
    yield ("cascade depth 6 validates", rep.ok, f"{len(rep.violations)} violations")
    sheared = tree_mod.shear(mu6, 0.3, 0.25)
    back = tree_mod.shear(sheared, -0.3, 0.25)
    ok = (
        np.allclose(back.x0, mu6.x0, atol=1e-12)
        and np.allclose(back.x1, mu6.x1, atol=1e-12)
    )
    yield ("shear involution", ok, "")
    resc = tree_mod.rescale_mass_time(tree_mod.rescale_mass_time(mu6, 0.5), 2.0)
    ok = np.allclose(resc.x0, mu6.x0, rtol=1e-12) and np.allclose(resc.t1, mu6.t1, rtol=1e-12)
    yield ("rescale roundtrip", ok, "")
    e6 = tree_mod.energy(mu6).total
    waited = tree_mod.prepend_stationary(mu6, 0.1)
    yield (
        "waiting adds exactly its duration",
        abs(tree_mod.energy(waited).total - e6 - 0.1) <= 1e-12,
        "",
    )
    ok = True
    a_h, b_h = mu6.horizon
    for _ in range(50):
        s, sp = rng.uniform(a_h, b_h, size=2)
        _, _, hold = tree_mod.holder_check(mu6, s, sp)
        ok &= hold
    yield ("square-root modulus of continuity", ok, "")

    # selfsimilar
    ok = abs(selfsimilar.branching_time(2) - 0.21875) == 0.0
    ok &= abs(selfsimilar.branching_time(1) - 0.25 * (1 - 2.0**-1.5)) <= 1e-17
    yield ("branching times", ok, "")
    tr = tree_mod.trace_at(selfsimilar.build_mu_star(2), selfsimilar.branching_time(2))
    yield ("depth-2 trace is 4 quarter atoms", len(tr) == 4 and np.allclose(tr.masses, 0.25), "")
    closed = selfsimilar.mu_star_energy(8)
    built = tree_mod.energy(selfsimilar.build_mu_star(8))
    yield (
        "cascade energy closed form matches construction",
        abs(closed.truncated.total - built.total) <= 1e-12,
        "",
    )
    ok = True
    for k in range(1, 13):
        ek = selfsimilar.mu_star_energy(k)
        ok &= ek.truncated.total <= ek.limit <= ek.truncated.total + ek.tail_upper
    yield ("truncation bracket", ok, "")
    n28, _ = selfsimilar.select_branch_count(0.28)
    n60, _ = selfsimilar.select_branch_count(0.6)
    _, xo = selfsimilar.select_branch_count((sqrt2 + 1.0) / 8.0)
    yield ("stem count selection", n28 == 2 and n60 == 1 and abs(xo - 2.0) <= 1e-12, "")

    # recursion
    ok = True
    for _ in range(1000):
        p = rng.dirichlet(np.ones(int(rng.integers(1, 9))))
        p = np.append(p[:-1], 1.0 - p[:-1].sum())
        if np.any(p <= 0):
            continue
        recursion.barycenter_shear_cost(p)  # raises if the identity fails
    yield ("barycenter shear identity", ok, "")
    fixed = recursion.recursion_value(0.25, (0.5, 0.5), recursion.closed_form_energy)
    yield (
        "recursion fixed point",
        abs(fixed - (recursion.CASCADE_CONSTANT + 0.25)) <= 1e-12,
        f"value={fixed!r}",
    )
    yield (
        "equipartition at the critical split",
        recursion.equipartition_residual(0.25, (0.5, 0.5)) == 0.0,
        "",
    )
    jstar = recursion.j_ratio(0.25, (0.5, 0.5))
    yield (
        "critical branching ratio",
        abs(jstar - 2.0 * sqrt2 / (sqrt2 - 1.0)) <= 1e-12,
        "",
    )
    yield ("branch bound at ratio 1", recursion.branch_count_bound(1.0) == 6, "")
    window = recursion.t_star_window()
    yield (
        "branching-horizon window",
        abs(window.t_minus - 0.1330193882256924) <= 1e-12 and window.t_star == 0.25,
        "",
    )

    # certify
    cert2 = certify.alpha2_certificate()
    yield ("two-way split certificate", cert2.value == 2.0, "")
    bounds = certify.certify_all(1e-6)
    ok = all(b.verdict and b.certified_lower - b.threshold >= 0.1 for b in bounds)
    yield ("certified split bounds N=3..6", ok, "")
    ok = all(
        recursion.branch_count_bound(b.certified_lower) < b.n for b in bounds
    )
    yield ("branch-count exclusion", ok, "")
    report = certify.neq2_suite(n_psi=1000, n_grid=1000 if full else 300)
    yield ("two-branch endgame", report.passed, "; ".join(report.failures))

    if full:
        value, masses = certify.simplex_bruteforce_alpha(3, 1e-2)
        yield (
            "simplex oracle vs certificate",
            value > bounds[0].certified_lower,
            f"oracle={value:.6f}",
        )
        ok = all(certify.two_value_reduction_check(n).passed for n in (3, 4))
        yield ("two-value reduction", ok, "")
        masses, jmin = recursion.minimize_j(0.25, 6, 1e-3)
        yield (
            "ratio minimum over the fine grid",
            masses == (0.5, 0.5) and abs(jmin - jstar) <= 1e-3,
            "",
        )
        curve = recursion.solve_E(0.05, 2.0, mass_step=1e-2)
        ok = bool(np.all(curve.lower - 1e-9 <= curve.values) and np.all(curve.values <= curve.upper + 1e-9))
        at_floor = curve.values[np.argmin(np.abs(curve.ts - 0.25))]
        ok &= abs(at_floor - recursion.dyadic_upper_bound(0.25)) <= 1e-9
        yield ("energy curve sandwich", ok, "")


def cmd_verify(args) -> int:
    failures = 0
    for name, ok, detail in _verify_checks(args.full, args.seed):
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        suffix = f"  ({detail})" if detail and not ok else ""
        print(f"{status}  {name}{suffix}")
    total = "all checks passed" if failures == 0 else f"{failures} check(s) failed"
    print(f"verify: {total}")
    return 0 if failures == 0 else 1


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branched-transport",
        description="Self-similar minimizers of the 1+1d branched transport energy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_tree = sub.add_parser("tree", help="build the truncated optimal tree")
    p_tree.add_argument("--T", type=float, default=0.25, help="time horizon")
    p_tree.add_argument("--phi", type=float, default=1.0, help="total flux")
    p_tree.add_argument("--X", type=float, default=0.0, help="initial offset")
    p_tree.add_argument("--depth", type=int, default=6, help="truncation depth")
    p_tree.add_argument("--json", metavar="PATH", help="write the tree schema JSON here")
    p_tree.add_argument("--svg", metavar="PATH", help="write an SVG rendering here")
    p_tree.add_argument("--out", metavar="PATH", help="write --format output here")
    p_tree.add_argument("--format", choices=("json", "svg"), default="json")
    p_tree.set_defaults(func=cmd_tree)

    p_alpha = sub.add_parser("alpha", help="certified split-ratio lower bounds")
    p_alpha.add_argument("--N", type=int, help="single split count in 3..6")
    p_alpha.add_argument("--all", action="store_true", help="certify N = 3..6")
    p_alpha.add_argument("--delta", type=float, default=1e-6, help="grid step")
    p_alpha.add_argument("--format", choices=("csv", "md"), default="csv")
    p_alpha.add_argument("--out", metavar="PATH")
    p_alpha.add_argument("--workers", type=int, default=1)
    p_alpha.set_defaults(func=cmd_alpha)

    p_energy = sub.add_parser("energy", help="tabulate the energy curve as CSV")
    p_energy.add_argument("--T", type=float, default=2.0, help="upper horizon")
    p_energy.add_argument("--t-lo", type=float, default=0.05, dest="t_lo", help="lower horizon")
    p_energy.add_argument("--grid-step", type=float, default=0.01, dest="grid_step")
    p_energy.add_argument("--mass-step", type=float, default=0.01, dest="mass_step")
    p_energy.add_argument("--N", type=int, default=6, help="max branches per split")
    p_energy.add_argument("--out", metavar="PATH")
    p_energy.set_defaults(func=cmd_energy)

    p_verify = sub.add_parser("verify", help="run the invariant suites")
    group = p_verify.add_mutually_exclusive_group()
    group.add_argument("--quick", action="store_true", default=True)
    group.add_argument("--full", action="store_true", default=False)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--workers", type=int, default=1)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
