"""Command-line front end.

Exit status: 0 on success, 1 on computation errors, 2 on usage errors, 3 when
``verify`` finds a result contradicting the expected outcome.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bounds, catalog, compose, decode, estimate, experiments
from .errors import (CompositionSyntaxError, DimensionMismatchError, LatticeError,
                     NoGeneratorError, UnknownLatticeError)
from .linalg import read_matrix, volume

EXIT_COMPUTE = 1
EXIT_USAGE = 2
EXIT_VERDICT = 3


class UsageError(Exception):
    pass


def resolve(name: str | None, matrix: str | None = None):
    """A catalog lattice, a product plan, or a lattice loaded from a matrix file."""
    if matrix:
        return catalog.lattice_from_matrix(read_matrix(matrix), name=name or matrix)
    if not name:
        raise UsageError("a lattice name, composition or --matrix FILE is required")
    items = compose.parse_composition(name)
    if len(items) == 1 and items[0][1] is None:
        return catalog.get_lattice(items[0][0])
    return compose.product_lattice(items)


def _emit(args, rows: list[dict], text: str | None = None, out=None):
    out = out or sys.stdout
    if args.json:
        json.dump(rows if len(rows) != 1 else rows[0], out, indent=2)
        out.write("\n")
    elif args.csv:
        w = csv.DictWriter(out, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
    else:
        out.write(text if text is not None else _aligned(rows))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9f}" if abs(v) >= 1e-4 or v == 0 else f"{v:.3e}"
    if v is None:
        return "-"
    return str(v)


def _aligned(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0].keys())
    cells = [keys] + [[_fmt(r[k]) for k in keys] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(keys))]
    return "".join("  ".join(c[i].ljust(widths[i]) for i in range(len(keys))).rstrip() + "\n" for c in cells)


def cmd_catalog(args):
    rows = []
    names = args.names or catalog.named_lattices()
    for nm in names:
        L = catalog.get_lattice(nm)
        rows.append({
            "name": L.name, "dim": L.dim, "golden_nsm": L.golden_nsm, "decoder": L.decoder or "none",
            "volume": L.volume if L.basis is not None else None,
        })
    _emit(args, rows)


def cmd_decode(args):
    L = resolve(args.lattice, args.matrix)
    x = np.array([float(v) for v in args.x])
    if isinstance(L, compose.ProductPlan):
        r = decode.closest_product(L.component_pairs(), x)
    else:
        r = decode.closest_point(L, x)
    row = {"u": r.u.tolist(), "point": r.point.tolist(), "error": r.error.tolist(), "d2": r.d2}
    text = (f"u      {' '.join(str(int(v)) for v in r.u)}\n"
            f"point  {' '.join(f'{v:.9g}' for v in r.point)}\n"
            f"d2     {r.d2:.12g}\n")
    _emit(args, [row], text)


def _estimate(args):
    L = resolve(args.lattice, args.matrix)
    return L, estimate.estimate_moments(L, args.samples, args.seed, args.workers)


def cmd_nsm(args):
    L, est = _estimate(args)
    d = est.to_dict()
    golden = getattr(L, "best_nsm", None) or getattr(L, "predicted_G", None)
    d["reference_G"] = golden
    text = (f"{est.name}  n={est.n}  samples={est.samples}  seed={est.seed}\n"
            f"G = {est.G_hat:.9f} +/- {est.se_G:.2e}   E = {est.E_hat:.9g}   V = {est.volume:.9g}\n")
    if golden is not None:
        text += f"reference {golden:.9f}  ({(est.G_hat - golden) / est.se_G:+.2f} se)\n"
    _emit(args, [d], text)


def cmd_whiteness(args):
    L, est = _estimate(args)
    w = estimate.whiteness_from(est)
    d = est.to_dict()
    text = (f"{est.name}  n={est.n}  samples={est.samples}  seed={est.seed}\n"
            f"rho = {w.rho:.9f}\n"
            f"anisotropy = {w.anisotropy:.3e}  (noise level {w.anisotropy_se:.3e}, {w.anisotropy_sigmas:.2f} x)\n"
            f"eigen_spread = {w.eigen_spread:.6f} +/- {w.eigen_spread_se:.2e}\n")
    _emit(args, [d], text)


def cmd_product(args):
    plan = compose.product_lattice(args.composition)
    d = plan.to_dict()
    lines = [f"{plan.name}  n={plan.dim}"]
    for p, s in zip(plan.parts, plan.scales):
        lines.append(f"  {p.name:<8} n={p.n:<3} G={p.G:.9f}  scale={s:.9f}")
    lines.append(f"predicted G = {plan.predicted_G:.9f}")
    if args.samples_given:
        est = estimate.estimate_moments(plan, args.samples, args.seed, args.workers)
        d["estimate"] = est.to_dict()
        lines.append(f"estimated G = {est.G_hat:.9f} +/- {est.se_G:.2e}")
    _emit(args, [d], "\n".join(lines) + "\n")


def cmd_laminate(args):
    base = resolve(args.lattice, args.matrix)
    if base.basis is None:
        raise NoGeneratorError(f"{base.name} has no generator")
    n1 = base.dim
    h = np.zeros(n1) if args.h is None else np.array([float(v) for v in args.h])
    G1 = getattr(base, "best_nsm", None)
    if args.a is not None:
        a = args.a
    elif G1 is not None:
        a = compose.optimal_scale(n1, volume(base.basis), G1, 1, 1.0, 1 / 12)
    else:
        raise UsageError("no NSM known for the base lattice; pass --a")
    B = compose.laminate_generator(base.basis, h, a)
    d = {"n": n1 + 1, "a": a, "h": h.tolist(), "generator": np.asarray(B.rows).tolist(), "volume": volume(B)}
    lines = [f"laminated {base.name}: n={n1 + 1}  a={a:.9f}  volume={volume(B):.9g}"]
    if G1 is not None:
        d["bound"] = compose.lamination_bound(G1, n1 + 1)
        lines.append(f"lamination bound {d['bound']:.9f}")
    if args.samples_given:
        est = estimate.estimate_moments(B, args.samples, args.seed, args.workers)
        d["estimate"] = est.to_dict()
        lines.append(f"estimated G = {est.G_hat:.9f} +/- {est.se_G:.2e}")
    _emit(args, [d], "\n".join(lines) + "\n")


def _table_rows(n_lo, n_hi):
    rows = []
    for r in bounds.best_product_table(n_hi)[n_lo - 1:]:
        rows.append(r.as_dict())
    return rows


def cmd_bounds(args):
    n_hi = args.n or args.n_max or bounds.N_MAX
    n_lo = args.n or 1
    rows = [{"n": r["n"], "lower": r["lower"], "upper": r["upper"]} for r in _table_rows(n_lo, n_hi)]
    _emit(args, rows)


def cmd_table(args):
    n_hi = args.n or args.n_max or bounds.N_MAX
    n_lo = args.n or 1
    _emit(args, _table_rows(n_lo, n_hi))


def cmd_verify(args):
    which = args.experiment
    reports = []
    if which in ("whitening", "all"):
        B = resolve(args.lattice, args.matrix) if (args.lattice or args.matrix) else np.diag([1.0, 2.0])
        reports.append(experiments.whitening_experiment(B, args.beta, args.samples, args.seed, args.workers))
    if which in ("saddle", "all"):
        Z = catalog.get_lattice("Z")
        reports.append(experiments.saddle_experiment(Z, Z, [[0.5]], args.epsilon, args.samples, args.seed,
                                                     args.workers))
    if which in ("product", "all"):
        comp = args.composition or "A2*Z"
        reports.append(experiments.product_factorization_check(comp, args.samples, args.seed,
                                                               workers=args.workers))
    rows = [r.to_dict() for r in reports]
    if which in ("slope", "all"):
        s = experiments.rectangle_slope_check(beta=0.01)
        ok = s["rel_err"] <= 0.10
        rows.append({"name": "slope", "parameters": s, "verdict": "consistent" if ok else "inconsistent"})
    text = "".join(
        f"{r['name']:<22} {r['verdict']:<13}"
        + (f" baseline {r['baseline_G']:.7f}+/-{r['baseline_se']:.1e}  perturbed {r['perturbed_G']:.7f}"
           f"+/-{r['perturbed_se']:.1e}" if "baseline_G" in r else f" rel_err {r['parameters']['rel_err']:.2e}")
        + "\n" for r in rows)
    _emit(args, rows, text)
    def contradicts(r):
        if r["verdict"] == "inconsistent":
            return True
        # shrinking along -Rbar (beta < 0) and shearing must not increase G
        growing = r["name"] == "whitening" and r["parameters"]["beta"] > 0
        return r["verdict"] == ("improved" if growing else "not-improved")

    return EXIT_VERDICT if any(contradicts(r) for r in rows) else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latquant", description="Lattice quantizers: decoding, NSM estimation, products, bounds.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, samples=True):
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="JSON output")
        fmt.add_argument("--csv", action="store_true", help="CSV output")
        if samples:
            sp.add_argument("--samples", type=int, default=None, help="Monte Carlo samples (default 100000)")
            sp.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
            sp.add_argument("--workers", type=int, default=1, help="worker threads")

    sp = sub.add_parser("catalog", help="list named lattices")
    sp.add_argument("names", nargs="*")
    common(sp, samples=False)
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("decode", help="closest lattice point")
    sp.add_argument("lattice", nargs="?")
    sp.add_argument("--x", nargs="+", required=True, help="coordinates of the point")
    sp.add_argument("--matrix", help="generator matrix file")
    common(sp, samples=False)
    sp.set_defaults(func=cmd_decode)

    for verb, fn, hlp in (("nsm", cmd_nsm, "Monte Carlo NSM"), ("whiteness", cmd_whiteness, "error correlation check")):
        sp = sub.add_parser(verb, help=hlp)
        sp.add_argument("lattice", nargs="?", help="name or composition such as K12*Z")
        sp.add_argument("--matrix", help="generator matrix file")
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("product", help="optimal product of lattices")
    sp.add_argument("composition", help="e.g. K12*Z, L24*L16*Z, D4@2*Z")
    common(sp)
    sp.set_defaults(func=cmd_product)

    sp = sub.add_parser("laminate", help="stack copies of a lattice")
    sp.add_argument("lattice", nargs="?")
    sp.add_argument("--matrix", help="generator matrix file")
    sp.add_argument("--h", nargs="+", help="offset of the next layer")
    sp.add_argument("--a", type=float, help="layer spacing (default: optimal against Z)")
    common(sp)
    sp.set_defaults(func=cmd_laminate)

    for verb, fn in (("bounds", cmd_bounds), ("table", cmd_table)):
        sp = sub.add_parser(verb, help="Zador and lower bounds" if verb == "bounds" else "best-known-quantizer table")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--n", type=int, help="single dimension")
        g.add_argument("--n-max", type=int, help="dimensions 1..N")
        common(sp, samples=False)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("verify", help="run the theorem checks")
    sp.add_argument("experiment", nargs="?", default="all", choices=["all", "whitening", "saddle", "product", "slope"])
    sp.add_argument("--lattice", help="lattice for the whitening check (default diag(1,2))")
    sp.add_argument("--matrix", help="generator matrix file for the whitening check")
    sp.add_argument("--composition", help="product for the factorization check (default A2*Z)")
    sp.add_argument("--beta", type=float, default=-0.1)
    sp.add_argument("--epsilon", type=float, default=1.0, help="shear of the Z x Z saddle check")
    common(sp)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "samples"):
        args.samples_given = args.samples is not None
        if args.samples is None:
            args.samples = 100_000
        if args.samples < 1:
            parser.error("--samples must be positive")
    for k in ("n", "n_max"):
        v = getattr(args, k, None)
        if v is not None and not 1 <= v <= bounds.N_MAX:
            parser.error(f"--{k.replace('_', '-')} must be in 1..{bounds.N_MAX}")
    try:
        return args.func(args) or 0
    except (UsageError, UnknownLatticeError, CompositionSyntaxError, DimensionMismatchError) as e:
        print(f"latquant {args.verb}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LatticeError, ValueError, OSError) as e:
        print(f"latquant {args.verb}: error: {e}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
