"""Command-line interface.

Each subcommand writes one delimited table to stdout or ``--out`` (CSV by
default, a JSON mirror via ``--format json``), and the density/compare/
asymmetry commands can render a PNG alongside with ``--plot``.  Exact
quantities are printed as integers or num/den rationals, never floats.

Exit status: 0 on success, 1 when the inputs are mathematically out of range
or a bounded search gives up (messages go to stderr), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

import sympy

from .census import (
    TraceHistogram,
    elliptic_census,
    hyperelliptic_census,
    nolimit_bounds,
    parity_report,
    root_count_table,
)
from .classnumbers import (
    QuadDiscriminant,
    SearchBudget,
    class_number_forms,
    deuring_check,
    find_anomalous_trace,
    kronecker_H,
)
from .errors import DomainError, QuadratureError
from .quadrature import (
    density_profile,
    fit_gaussian_poly,
    nu_lim_reference,
    vlim_reference,
)
from .reports import (
    AsymmetryRow,
    ComparisonRow,
    emit_asymmetry,
    emit_comparison,
    ingest_external,
    read_histogram_csv,
    write_histogram_csv,
    write_histogram_json,
    write_table_csv,
    write_table_json,
)
from .symplectic import a_n, b_n, multiplicity

__all__ = ["run_cli", "main"]


def _frac(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _add_output_options(p: argparse.ArgumentParser, *, plot: bool = False) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write the table to FILE instead of stdout")
    if plot:
        p.add_argument("--plot", metavar="PNG", default=None,
                       help="also render a figure to PNG")


def _emit_table(args, meta, columns, rows) -> None:
    writer = write_table_csv if args.format == "csv" else write_table_json
    writer(args.out if args.out else sys.stdout, meta, columns, rows)


def _emit_histogram(args, hist: TraceHistogram) -> None:
    writer = write_histogram_csv if args.format == "csv" else write_histogram_json
    writer(hist, args.out if args.out else sys.stdout)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _parse_partition(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise DomainError(f"--lambda expects comma-separated integers, got {text!r}") from None


def _cmd_moments(args) -> int:
    _require(args.g >= 1, f"genus must be positive, got {args.g}")
    _require(args.n_max >= 1, f"--n-max must be positive, got {args.n_max}")
    meta = {"table": "moments", "g": args.g,
            "normalization": "multiplicities in the n-th tensor power"}
    rows: list[list[object]] = []
    if args.lam is not None:
        parts = _parse_partition(args.lam)
        try:
            for n in range(1, args.n_max + 1):
                rows.append([n, multiplicity(args.g, n, parts)])
        except ValueError as exc:
            raise DomainError(str(exc)) from None
        meta["lambda"] = "(" + " ".join(str(p) for p in parts) + ")"
        _emit_table(args, meta, ["n", "c_lambda"], rows)
        return 0
    with_b = args.g >= 3
    columns = ["n", "a_n", "b_n"] if with_b else ["n", "a_n"]
    for n in range(1, args.n_max + 1):
        row: list[object] = [n, a_n(args.g, n)]
        if with_b:
            row.append(b_n(args.g, n))
        rows.append(row)
    _emit_table(args, meta, columns, rows)
    return 0


def _cmd_density(args) -> int:
    _require(args.g >= 1, f"genus must be positive, got {args.g}")
    sample = density_profile(args.g, step=args.step, inner_nodes=args.inner_nodes,
                             outer_nodes=args.outer_nodes, mc_samples=args.mc_samples,
                             seed=args.seed)
    if args.tol is not None:
        _require(args.tol > 0, f"--tol must be positive, got {args.tol}")
        defect = abs(float(sample.mass()) - 1.0)
        if defect > args.tol:
            raise QuadratureError(
                f"density mass defect {defect:.3e} exceeds --tol {args.tol:.3e}; "
                "refine --step or the node counts"
            )
    rows = [
        [float(tau), float(F), float(H), float(nu_lim_reference(tau)), float(vlim_reference(tau))]
        for tau, F, H in zip(sample.tau, sample.F, sample.H)
    ]
    meta = {"table": "density", "g": args.g, "step": sample.step,
            "method": sample.method, "lower_precision": sample.lower_precision,
            "normalization": "densities in tau, unit total F mass"}
    _emit_table(args, meta, ["tau", "F", "H", "nu_lim", "vlim"], rows)
    if args.plot:
        from .plotting import plot_density

        plot_density(sample, args.plot)
    return 0


def _cmd_fit_nulim(args) -> int:
    _require(args.n_check >= 5, f"--n-check must be at least 5, got {args.n_check}")
    _require(args.degree >= 1 and args.degree % 2 == 1,
             f"--degree must be an odd positive integer, got {args.degree}")
    targets = [Fraction(-2) * b_n(3, n) for n in range(1, args.degree + 1, 2)]
    fit = fit_gaussian_poly(targets)
    rows: list[list[object]] = []
    for j, coeff in enumerate(fit.coefficients):
        rows.append(["coefficient", 2 * j + 1, coeff.numerator, coeff.denominator])
    for n in range(1, args.n_check + 1, 2):
        fitted = fit.moment(n)
        reference = Fraction(-2) * b_n(3, n)
        rows.append(["fitted_moment", n, fitted.numerator, fitted.denominator])
        rows.append(["reference_moment", n, reference.numerator, reference.denominator])
    meta = {"table": "fit-nulim",
            "targets": "odd moments -2 b_n(3) at n=1,3,5",
            "columns_note": "coefficient rows give P(tau)=sum c_j tau^j, density P phi"}
    _emit_table(args, meta, ["quantity", "n", "num", "den"], rows)
    return 0


def _cmd_census_hyp(args) -> int:
    _require(args.g >= 1, f"genus must be positive, got {args.g}")
    _require(args.threads >= 1, f"--threads must be positive, got {args.threads}")
    hist = hyperelliptic_census(args.g, args.q, threads=args.threads)
    _emit_histogram(args, hist)
    return 0


def _cmd_census_ell(args) -> int:
    hist = elliptic_census(args.q)
    _emit_histogram(args, hist)
    return 0


def _load_histogram(args) -> TraceHistogram:
    if getattr(args, "hist", None):
        return read_histogram_csv(args.hist)
    if getattr(args, "external", None):
        return ingest_external(args.external, q=args.q, g=args.g)
    _require(args.family is not None,
             "provide --hist FILE, --external FILE, or --family with --g/--q")
    _require(args.q is not None, "--q is required when computing a census")
    if args.family == "elliptic":
        _require(args.g in (None, 1), "elliptic censuses have g=1")
        return elliptic_census(args.q)
    _require(args.g is not None, "--g is required for a hyperelliptic census")
    return hyperelliptic_census(args.g, args.q, threads=args.threads)


def _add_histogram_source_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("hyperelliptic", "elliptic"), default=None,
                   help="compute a fresh census of this family")
    p.add_argument("--g", type=int, default=None, help="genus (census or external file)")
    p.add_argument("--q", type=int, default=None, help="field size")
    p.add_argument("--hist", metavar="FILE", default=None,
                   help="read a histogram written by census-hyp/census-ell")
    p.add_argument("--external", metavar="FILE", default=None,
                   help="ingest a third-party t,weight_num,weight_den histogram")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for a fresh hyperelliptic census")


def _add_density_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step", type=float, default=0.02, help="tau grid spacing")
    p.add_argument("--inner-nodes", type=int, default=None,
                   help="slice-rule nodes, innermost variable (default per g)")
    p.add_argument("--outer-nodes", type=int, default=None,
                   help="slice-rule nodes per outer variable (default per g)")
    p.add_argument("--mc-samples", type=int, default=2_000_000,
                   help="Monte Carlo sample count used when g >= 5")
    p.add_argument("--seed", type=int, default=None, help="seed for the g >= 5 sampler")


def _cmd_parity(args) -> int:
    hist = _load_histogram(args)
    report = parity_report(hist)
    lo, hi = nolimit_bounds(report.g, args.eps)
    rows: list[list[object]] = [
        ["g", str(report.g)],
        ["q", str(report.q)],
        ["even_mass", _frac(report.even_mass)],
        ["odd_mass", _frac(report.odd_mass)],
        ["parity_defect", _frac(report.r_g)],
        ["predicted_even", _frac(report.predicted_even)],
        ["deviation", _frac(report.deviation)],
    ]
    if args.eps == 0:
        rows.append(["bound_low", _frac(lo)])
        rows.append(["bound_high", _frac(hi)])
    else:
        rows.append(["bound_low", float(lo)])
        rows.append(["bound_high", float(hi)])
    meta = {"table": "parity", "g": report.g, "q": report.q, "eps": args.eps,
            "normalization": "masses are weighted fractions of the census"}
    _emit_table(args, meta, ["quantity", "value"], rows)
    return 0


def _cmd_classno(args) -> int:
    disc = QuadDiscriminant.from_int(args.delta)
    rows = [
        ["delta", disc.delta],
        ["delta0", disc.delta0],
        ["conductor", disc.conductor],
        ["h_delta0", class_number_forms(disc.delta0)],
        ["H_delta", kronecker_H(disc)],
    ]
    meta = {"table": "classno", "delta": args.delta}
    _emit_table(args, meta, ["quantity", "value"], rows)
    return 0


def _cmd_deuring(args) -> int:
    columns = ["t", "delta", "delta0", "conductor", "H",
               "expected_weight", "census_weight", "equal"]

    def as_row(report) -> list[object]:
        return [report.t, report.delta, report.delta0, report.conductor, report.H,
                _frac(report.expected), _frac(report.census), str(report.equal).lower()]

    meta = {"table": "deuring", "q": args.q,
            "normalization": "weights are curve counts / (q - 1)"}
    if args.t is not None:
        rows = [as_row(deuring_check(args.q, args.t))]
        meta["t"] = args.t
    else:
        _require(sympy.isprime(args.q) and args.q > 3,
                 f"q must be a prime > 3, got {args.q}")
        hist = elliptic_census(args.q)
        rows = []
        for t in range(-math.isqrt(4 * args.q - 1), math.isqrt(4 * args.q - 1) + 1):
            if math.gcd(t, args.q) != 1:
                continue
            try:
                rows.append(as_row(deuring_check(args.q, t, hist=hist)))
            except DomainError:
                continue  # fundamental part -3 or -4 carries extra units
        meta["t"] = "all admissible"
    _emit_table(args, meta, columns, rows)
    return 0


def _cmd_anomaly(args) -> int:
    max_inert = args.budget if args.max_inert is None else args.max_inert
    budget = SearchBudget(max_inert=max_inert, x_max=args.x_max, y_max=args.y_max,
                          m_max=args.m_max, census_q_max=args.census_q_max)
    cert = find_anomalous_trace(args.c, args.delta0, budget)
    st = cert.state
    rows = [
        ["c", _frac(cert.c)],
        ["delta0", st.delta0],
        ["inert_primes", " ".join(str(p) for p in st.inert_primes) or "none"],
        ["f", st.f],
        ["q0", st.q0],
        ["x", st.x],
        ["y", st.y],
        ["m", st.m],
        ["q", cert.q],
        ["t", cert.t],
        ["discriminant", cert.discriminant],
        ["conductor", cert.conductor],
        ["H", cert.H],
        ["ratio", cert.ratio],
        ["inert_product", _frac(cert.inert_product)],
        ["product_threshold", cert.threshold],
        ["census_verified", "" if cert.census_verified is None
         else str(cert.census_verified).lower()],
    ]
    meta = {"table": "anomaly", "c": _frac(cert.c), "delta0": args.delta0,
            "certificate": "H/2 > c sqrt(4q - t^2), checked exactly"}
    _emit_table(args, meta, ["quantity", "value"], rows)
    return 0


def _cmd_compare(args) -> int:
    hist = _load_histogram(args)
    sample = density_profile(hist.g, step=args.step, inner_nodes=args.inner_nodes,
                             outer_nodes=args.outer_nodes, mc_samples=args.mc_samples,
                             seed=args.seed)
    rows = emit_comparison(hist, sample, parity_scale=args.parity_scale)
    meta = {"table": "compare", "family": hist.family, "g": hist.g, "q": hist.q,
            "parity_scale": args.parity_scale,
            "normalization": "observed = sqrt(q) * weight / total mass"}
    _emit_table(args, meta, list(ComparisonRow.COLUMNS), [r.astuple() for r in rows])
    if args.plot:
        from .plotting import plot_comparison

        plot_comparison(rows, args.plot)
    return 0


def _cmd_asymmetry(args) -> int:
    hist = _load_histogram(args)
    sample = density_profile(hist.g, step=args.step, inner_nodes=args.inner_nodes,
                             outer_nodes=args.outer_nodes, mc_samples=args.mc_samples,
                             seed=args.seed)
    rows = emit_asymmetry(hist, sample)
    meta = {"table": "asymmetry", "family": hist.family, "g": hist.g, "q": hist.q,
            "normalization": "observed_diff = q (N(t) - N(-t)) / total mass"}
    _emit_table(args, meta, list(AsymmetryRow.COLUMNS), [r.astuple() for r in rows])
    if args.plot:
        from .plotting import plot_asymmetry

        plot_asymmetry(rows, args.plot)
    return 0


def _cmd_rootcount(args) -> int:
    table = root_count_table(args.q, args.d, separable=args.separable)
    rows = [[k, v] for k, v in sorted(table.items())]
    meta = {"table": "rootcount", "q": args.q, "d": args.d, "separable": args.separable}
    _emit_table(args, meta, ["k", "count"], rows)
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(sys.stdout, fast=args.fast)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksrefine",
        description="Refined trace statistics of curves over finite fields: "
                    "exact tensor multiplicities, Weyl densities, censuses, and "
                    "class-number cross-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="exact a_n and b_n multiplicity table")
    p.add_argument("--g", type=int, required=True,
                   help="genus (rank of the symplectic group)")
    p.add_argument("--n-max", type=int, default=25)
    p.add_argument("--lambda", dest="lam", metavar="p1,p2,...", default=None,
                   help="emit the multiplicity of this highest weight instead")
    _add_output_options(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("density", help="sample the trace densities F_g and H_g")
    p.add_argument("--g", type=int, required=True)
    _add_density_options(p)
    p.add_argument("--tol", type=float, default=None,
                   help="fail unless |mass(F) - 1| is within this tolerance")
    _add_output_options(p, plot=True)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("fit-nulim", help="exact Gaussian-polynomial fit of the odd density")
    p.add_argument("--moments-from-table", action="store_true",
                   help="take the target moments from the exact b_n table (the default "
                        "and only source; flag kept for scripting clarity)")
    p.add_argument("--degree", type=int, default=5,
                   help="odd degree of the fitted polynomial (default 5)")
    p.add_argument("--n-check", type=int, default=13,
                   help="compare fitted odd moments up to this order")
    _add_output_options(p)
    p.set_defaults(func=_cmd_fit_nulim)

    p = sub.add_parser("census-hyp", help="exact hyperelliptic trace histogram")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    _add_output_options(p)
    p.set_defaults(func=_cmd_census_hyp)

    p = sub.add_parser("census-ell", help="exact elliptic trace histogram")
    p.add_argument("--q", type=int, required=True)
    _add_output_options(p)
    p.set_defaults(func=_cmd_census_ell)

    p = sub.add_parser("parity", help="even/odd trace mass split and bounds")
    _add_histogram_source_options(p)
    p.add_argument("--eps", type=float, default=0.0,
                   help="tail width for the no-limit bounds (0 = exact)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_parity)

    p = sub.add_parser("classno", help="class number and Kronecker class number")
    p.add_argument("--delta", type=int, required=True, help="negative discriminant")
    _add_output_options(p)
    p.set_defaults(func=_cmd_classno)

    p = sub.add_parser("deuring", help="check isogeny-class weights against H/2")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--t", type=int, default=None,
                   help="trace to check (default: every admissible trace)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_deuring)

    p = sub.add_parser("anomaly", help="search for an overloaded central trace")
    p.add_argument("--c", default="0.5", help="excess constant, parsed exactly (e.g. 1/2)")
    p.add_argument("--delta0", type=int, default=-19)
    p.add_argument("--budget", type=int, default=SearchBudget.max_inert,
                   help="how many inert primes the conductor may absorb "
                        f"(default {SearchBudget.max_inert})")
    p.add_argument("--max-inert", type=int, default=None,
                   help="override --budget under its original name")
    p.add_argument("--x-max", type=int, default=SearchBudget.x_max)
    p.add_argument("--y-max", type=int, default=SearchBudget.y_max)
    p.add_argument("--m-max", type=int, default=SearchBudget.m_max)
    p.add_argument("--census-q-max", type=int, default=SearchBudget.census_q_max)
    _add_output_options(p)
    p.set_defaults(func=_cmd_anomaly)

    p = sub.add_parser("compare", help="census vs F and F - H/sqrt(q)")
    _add_histogram_source_options(p)
    _add_density_options(p)
    p.add_argument("--parity-scale", action="store_true",
                   help="deflate even/odd rows by 1 +- r_g before comparing")
    _add_output_options(p, plot=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("asymmetry", help="signed census differences vs -2H")
    _add_histogram_source_options(p)
    _add_density_options(p)
    _add_output_options(p, plot=True)
    p.set_defaults(func=_cmd_asymmetry)

    p = sub.add_parser("rootcount", help="monic polynomials by number of roots")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--separable", action="store_true")
    _add_output_options(p)
    p.set_defaults(func=_cmd_rootcount)

    p = sub.add_parser("selftest", help="run the internal consistency suite")
    p.add_argument("--fast", action="store_true", help="skip the slowest checks")
    p.set_defaults(func=_cmd_selftest)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed the message
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
