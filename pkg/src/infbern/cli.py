"""Command-line front end.

Subcommands: analyze, figure-f, figure-minj, papprox, potential, isoper.
Every figure command writes an SVG rendering next to a CSV twin carrying
the same sampled values; the CSV is the source of truth and is emitted
byte-identically for identical inputs.

Exit codes: 0 ok, 2 input error, 3 geometry inconsistency, 4 unsupported
domain, 5 hypothesis violation, 6 solver divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bernoulli, isoperimetry, papprox, plotting, solutions
from .errors import (
    DomainError,
    EmptyInteriorError,
    GeometryInconsistencyError,
    HypothesisViolationError,
    NoRootError,
    NotApplicableError,
    ProfileResolutionError,
    QuadratureError,
    SolverDivergenceError,
)
from .geometry import Ball, build_profile, load_domain_file

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_UNSUPPORTED = 4
EXIT_HYPOTHESIS = 5
EXIT_DIVERGED = 6


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _load(args):
    domain = load_domain_file(args.domain_file)
    return domain, build_profile(domain, args.samples)


def cmd_analyze(args) -> int:
    domain, profile = _load(args)
    an = bernoulli.analyze(profile)
    lines = [
        f"R_Omega = {_fmt(profile.R_Omega)}",
        f"r_star = {_fmt(an.r_star)}",
        f"lambda_infinity = {_fmt(an.lambda_star)}",
        f"lambda_prime = {_fmt(an.lambda_prime)}",
        f"r_sing = {_fmt(an.r_sing)}",
        f"phi_max = {_fmt(an.phi_max)}",
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_figure_f(args) -> int:
    domain, profile = _load(args)
    an = bernoulli.analyze(profile)
    lambdas = ([float(s) for s in args.lambdas.split(",")] if args.lambdas
               else [an.lambda_prime, an.lambda_star, 3.0])
    R = profile.R_Omega
    r = np.linspace(R / 100, R, args.points)
    cols = [bernoulli.f_lambda(profile, lam, r) for lam in lambdas]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / args.csv
    _write_csv(csv_path, ["r"] + [f"f_{_fmt(lam)}" for lam in lambdas],
               [r] + cols)

    ymin = min(float(c.min()) for c in cols)
    spec = plotting.PlotSpec(
        curves=[plotting.Curve(f"weight {_fmt(lam)}", r, c)
                for lam, c in zip(lambdas, cols)],
        xlabel="r", ylabel="energy gap of the slope-1/r cone",
        ylim=(ymin - 0.5, max(3 * abs(ymin), 2.0 / R)),
        axhline=0.0,
    )
    plotting.render(spec, out_dir / args.svg)
    return EXIT_OK


def cmd_figure_minj(args) -> int:
    domain, profile = _load(args)
    weights = [float(s) for s in args.weights.split(",")] if args.weights else None
    if weights is None:
        an = bernoulli.analyze(profile)
        weights = [an.lambda_prime, an.lambda_star, 3.0]
    R = profile.R_Omega
    lam_max = args.lambda_max if args.lambda_max else 3.0 / \
        bernoulli.find_r_star(profile)
    lam = np.unique(np.concatenate([
        np.linspace(0.0, lam_max, args.points), [1.0 / R]
    ]))
    cols = [papprox.j_lambda_limit(profile, lam, w) for w in weights]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / args.csv,
               ["lambda"] + [f"minJ_{_fmt(w)}" for w in weights],
               [lam] + cols)
    spec = plotting.PlotSpec(
        curves=[plotting.Curve(f"weight {_fmt(w)}", lam, c)
                for w, c in zip(weights, cols)],
        xlabel="slope multiplier", ylabel="min of the constrained energy",
    )
    plotting.render(spec, out_dir / args.svg)
    return EXIT_OK


def cmd_papprox(args) -> int:
    domain, profile = _load(args)
    if not isinstance(domain, Ball):
        sys.stderr.write("p-approximation supported on balls only\n")
        return EXIT_UNSUPPORTED
    p_list = [float(s) for s in args.p_list.split(",")]
    weight = args.weight
    m_val = bernoulli.m_lambda(profile, weight)
    rows = {"p": [], "lambda_opt": [], "s_opt": [], "energy": [],
            "m_lambda": [], "relative_gap": []}
    for p in p_list:
        di = papprox.double_infimum(domain, p, weight, profile)
        rows["p"].append(p)
        rows["lambda_opt"].append(di.lambda_opt)
        rows["s_opt"].append(di.s_opt)
        rows["energy"].append(di.energy)
        rows["m_lambda"].append(m_val)
        rows["relative_gap"].append(abs(di.energy - m_val) / m_val)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = list(rows)
    _write_csv(out_dir / args.csv, header,
               [np.asarray(rows[k]) for k in header])
    spec = plotting.PlotSpec(
        curves=[
            plotting.Curve("double infimum", np.asarray(rows["p"]),
                           np.asarray(rows["energy"])),
            plotting.Curve("supremal minimum", np.asarray(rows["p"]),
                           np.full(len(p_list), m_val)),
        ],
        xlabel="p", ylabel="energy",
    )
    plotting.render(spec, out_dir / Path(args.csv).with_suffix(".svg").name)
    return EXIT_OK


def cmd_potential(args) -> int:
    domain, _ = _load(args)
    field = solutions.infinity_potential(domain, args.r, args.grid_h)
    mask = solutions.d_hat_mask(domain, args.r, args.grid_h)
    rep = solutions.sandwich_report(field, mask)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / args.csv
    field.to_csv(csv_path)
    heat = np.where(np.isfinite(field.values), field.values, np.nan)
    x0, y0, x1, y1 = field.bbox
    plotting.render_heatmap(heat, (x0, x1, y0, y1),
                            csv_path.with_suffix(".svg"), label="potential")
    sys.stdout.write(
        f"max_lower_violation = {_fmt(rep.max_lower_violation)}\n"
        f"max_upper_violation = {_fmt(rep.max_upper_violation)}\n"
        f"max_dhat_gap = {_fmt(rep.max_dhat_gap)}\n"
        f"tolerance = {_fmt(rep.tolerance)}\n"
        f"sweeps = {field.solve_stats.sweeps}\n"
    )
    return EXIT_OK


def cmd_isoper(args) -> int:
    records = isoperimetry.batch_isoperimetric(args.seed, args.count,
                                               args.samples)
    if args.with_ball:
        records.append(isoperimetry.compare_with_ball(
            Ball(2, 1.0), args.samples, descriptor="ball"))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / args.csv
    with open(path, "w", newline="\n") as fh:
        fh.write("id,n_vertices,area,perimeter,lambda_inf,lambda_inf_ball,"
                 "gap,deficit\n")
        for rec in records:
            fh.write(",".join([
                rec.descriptor, str(rec.n_vertices), _fmt(rec.area),
                _fmt(rec.perimeter), _fmt(rec.lambda_inf),
                _fmt(rec.lambda_inf_ball), _fmt(rec.gap), _fmt(rec.deficit),
            ]) + "\n")
    spec = plotting.PlotSpec(
        curves=[plotting.Curve(
            "batch",
            np.array([rec.deficit for rec in records]),
            np.array([rec.gap for rec in records]))],
        xlabel="isoperimetric deficit", ylabel="threshold gap",
    )
    _scatter(spec, path.with_suffix(".svg"))
    return EXIT_OK


def _scatter(spec: plotting.PlotSpec, path) -> None:
    import matplotlib.pyplot as plt
    spec.validate()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for c in spec.curves:
        ax.plot(c.x, c.y, "o", markersize=3, label=c.label)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="infbern",
        description="Supremal free-boundary analysis on convex domains",
    )
    ap.add_argument("--out-dir", default=".", help="output directory")
    ap.add_argument("--samples", type=int, default=1024,
                    help="profile resolution (default 1024)")
    ap.add_argument("--tol", type=float, default=None,
                    help="root tolerance override")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="threshold constants of a domain")
    p.add_argument("domain_file")
    p.add_argument("--out", default=None, help="report file (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("figure-f", help="energy-gap curves over the radius")
    p.add_argument("domain_file")
    p.add_argument("--lambdas", default=None,
                   help="comma-separated weights (default: flex, threshold, 3)")
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--svg", default="figure_f.svg")
    p.add_argument("--csv", default="figure_f.csv")
    p.set_defaults(func=cmd_figure_f)

    p = sub.add_parser("figure-minj",
                       help="multiplier sweep of the limit energy")
    p.add_argument("domain_file")
    p.add_argument("--weights", default=None, help="comma-separated weights")
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--svg", default="figure_minj.svg")
    p.add_argument("--csv", default="figure_minj.csv")
    p.set_defaults(func=cmd_figure_minj)

    p = sub.add_parser("papprox", help="p-energy convergence table (balls)")
    p.add_argument("domain_file")
    p.add_argument("--weight", type=float, required=True)
    p.add_argument("--p-list", default="10,20,40,80,160")
    p.add_argument("--csv", default="papprox.csv")
    p.set_defaults(func=cmd_papprox)

    p = sub.add_parser("potential",
                       help="infinity-harmonic potential field + certificate")
    p.add_argument("domain_file")
    p.add_argument("--r", type=float, required=True, help="erosion radius")
    p.add_argument("--grid-h", type=float, required=True, help="grid spacing")
    p.add_argument("--csv", default="potential.csv")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("isoper", help="random-polygon isoperimetric batch")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--with-ball", action="store_true")
    p.add_argument("--csv", default="isoper.csv")
    p.set_defaults(func=cmd_isoper)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None:
        bernoulli.ROOT_RTOL_OVERRIDE = args.tol
    try:
        return args.func(args)
    except (DomainError, EmptyInteriorError, NoRootError,
            NotApplicableError, OSError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (GeometryInconsistencyError, ProfileResolutionError) as exc:
        sys.stderr.write(f"geometry inconsistency: {exc}\n")
        return EXIT_GEOMETRY
    except HypothesisViolationError as exc:
        sys.stderr.write(f"hypothesis violation: {exc}\n")
        return EXIT_HYPOTHESIS
    except (SolverDivergenceError, QuadratureError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_DIVERGED
    finally:
        bernoulli.ROOT_RTOL_OVERRIDE = None


if __name__ == "__main__":
    sys.exit(main())
