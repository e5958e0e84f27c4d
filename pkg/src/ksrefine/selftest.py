"""Internal consistency suite.

Every check compares two independent routes to the same quantity — branching
recursion vs. dimension counts, quadrature vs. exact multiplicities, censuses
vs. closed-form totals, class-number formulas vs. brute enumeration — and
prints one PASS/FAIL line.  The suite exits nonzero if any line fails; it
never weakens a tolerance to pass.
"""

from __future__ import annotations

import io
import math
import sys
from fractions import Fraction
from typing import IO, Callable

import numpy as np

from .census import (
    elliptic_census,
    empirical_Sn,
    hyperelliptic_census,
    parity_report,
    root_count_table,
)
from .classnumbers import (
    QuadDiscriminant,
    _form_count,
    class_number_forms,
    deuring_check,
    find_anomalous_trace,
    kronecker_H,
)
from .errors import IngestError
from .quadrature import (
    WeylIntegrand,
    density_profile,
    fit_gaussian_poly,
    moment_by_quadrature,
)
from .reports import ingest_external, read_histogram_csv, write_histogram_csv
from .symplectic import a_n, b_n, multiplicity_table, weyl_dimension

__all__ = ["run_selftest"]


def _check_tensor_mass() -> str | None:
    for g in range(1, 5):
        table = multiplicity_table(g)
        for n in range(0, 13):
            total = sum(c * weyl_dimension(g, lam) for lam, c in table.row(n).items())
            if total != (2 * g) ** n:
                return f"g={g}, n={n}: dimension mass {total} != {(2 * g) ** n}"
    return None


def _check_parity_vanishing() -> str | None:
    table = multiplicity_table(3)
    for n in range(0, 14):
        for lam, c in table.row(n).items():
            if c and (lam.size - n) % 2:
                return f"n={n}: nonzero multiplicity at |lam|={lam.size}"
    return None


def _check_quadrature_moments() -> str | None:
    for g, n in ((2, 2), (2, 4), (2, 6), (3, 4)):
        est = moment_by_quadrature(g, n)
        if abs(est.value - a_n(g, n)) > 1e-9:
            return f"a_{n}(g={g}): quadrature {est.value} vs exact {a_n(g, n)}"
    for n in (3, 5):
        est = moment_by_quadrature(3, n, WeylIntegrand.s111())
        if abs(est.value - b_n(3, n)) > 1e-8:
            return f"b_{n}(3): quadrature {est.value} vs exact {b_n(3, n)}"
    return None


def _check_fit() -> str | None:
    targets = [Fraction(-2) * b_n(3, n) for n in (1, 3, 5)]
    fit = fit_gaussian_poly(targets)
    if fit.coefficients != (Fraction(5, 4), Fraction(-1, 2), Fraction(1, 60)):
        return f"coefficients {fit.coefficients}"
    for n in range(1, 12, 2):
        if fit.moment(n) != -2 * b_n(3, n):
            return f"fitted moment n={n} is {fit.moment(n)}, want {-2 * b_n(3, n)}"
    if fit.moment(13) == -2 * b_n(3, 13):
        return "degree-5 fit cannot match n=13 but did"
    return None


_profile_cache: dict = {}


def _profile(g: int, **kw):
    key = (g, tuple(sorted(kw.items())))
    if key not in _profile_cache:
        _profile_cache[key] = density_profile(g, **kw)
    return _profile_cache[key]


def _check_h2_zero() -> str | None:
    sample = _profile(2, step=0.05)
    peak = float(np.max(np.abs(sample.H)))
    if peak > 1e-10:
        return f"max |H_2| = {peak}"
    if float(np.max(np.abs(sample.F - sample.F[::-1]))) > 1e-12:
        return "F_2 not symmetric on its grid"
    return None


def _check_mass_g1() -> str | None:
    sample = _profile(1, step=1e-4)
    err = abs(sample.mass() - 1.0)
    return None if err <= 1e-6 else f"|mass - 1| = {err}"


def _check_mass_g2() -> str | None:
    sample = _profile(2, step=0.01)
    err = abs(sample.mass() - 1.0)
    return None if err <= 1e-6 else f"|mass - 1| = {err}"


def _check_mass_g3() -> str | None:
    sample = _profile(3, step=0.02)
    err = abs(sample.mass() - 1.0)
    return None if err <= 1e-6 else f"|mass - 1| = {err}"


def _check_density_parity(fast: bool) -> str | None:
    # F must be even and H odd, point by point on the symmetric tau grid
    cases = [(1, 1e-4), (2, 0.01)] + ([] if fast else [(3, 0.02)])
    for g, step in cases:
        sample = _profile(g, step=step)
        f_defect = float(np.max(np.abs(sample.F - sample.F[::-1])))
        if f_defect > 1e-10:
            return f"g={g}: F is not even on its grid (defect {f_defect})"
        h_defect = float(np.max(np.abs(sample.H + sample.H[::-1])))
        if h_defect > 1e-10:
            return f"g={g}: H is not odd on its grid (defect {h_defect})"
    return None


def _check_density_vs_exact() -> str | None:
    sample = _profile(3, step=0.02)
    for n in (2, 4):
        got, want = sample.moment(n, "F"), a_n(3, n)
        if abs(got - want) > 1e-3 * want:
            return f"F_3 moment n={n}: {got} vs {want}"
    for n in (3, 5):
        got, want = sample.moment(n, "H"), b_n(3, n)
        if abs(got - want) > 1e-3 * want:
            return f"H_3 moment n={n}: {got} vs {want}"
    odd = sample.moment(1, "F")
    if abs(odd) > 1e-10:
        return f"F_3 has an odd moment {odd}"
    return None


def _check_census_hyp() -> str | None:
    hist = hyperelliptic_census(2, 5)
    if hist.total_mass() != 5**3:
        return f"mass {hist.total_mass()} != 125"
    for t in hist.traces():
        if hist.weight(t) != hist.weight(-t):
            return f"weights at +-{t} differ"
    for n in (1, 3, 5):
        raw, _ = empirical_Sn(hist, n)
        if raw != 0:
            return f"odd power sum S_{n} = {raw} != 0"
    report = parity_report(hist)
    if report.deviation > Fraction(3, 5):
        return f"parity deviation {report.deviation} > 3/q"
    return None


def _check_census_ell() -> str | None:
    hist = elliptic_census(7)
    if hist.total_mass() != 7:
        return f"mass {hist.total_mass()} != 7"
    rep = deuring_check(7, 2, hist=hist)
    if not rep.equal:
        return f"Deuring weight at (7, 2): census {rep.census} vs H/2 = {rep.expected}"
    return None


def _check_roundtrip() -> str | None:
    hist = hyperelliptic_census(2, 5)
    buf = io.StringIO()
    write_histogram_csv(hist, buf)
    again = read_histogram_csv(io.StringIO(buf.getvalue()))
    if (again.counts, again.raw_pair_counts, again.family, again.g, again.q) != (
        hist.counts, hist.raw_pair_counts, hist.family, hist.g, hist.q
    ):
        return "histogram did not round-trip exactly"
    bad = "t,weight_num,weight_den\n1,1,2\n1,1,3\n"
    try:
        ingest_external(io.StringIO(bad), q=5, g=2)
    except IngestError as exc:
        if "line 3" not in str(exc):
            return f"duplicate-row error lacks its line number: {exc}"
    else:
        return "duplicate trace was accepted"
    return None


def _check_class_numbers() -> str | None:
    for delta0, h in ((-19, 1), (-23, 3), (-47, 5), (-71, 7)):
        if class_number_forms(delta0) != h:
            return f"h({delta0}) = {class_number_forms(delta0)}, want {h}"
    for delta, H in ((-76, 4), (-92, 6)):
        if kronecker_H(delta) != H:
            return f"H({delta}) = {kronecker_H(delta)}, want {H}"
    for delta in range(-400, -4, -1):
        if delta % 4 not in (0, 1):
            continue
        try:
            disc = QuadDiscriminant.from_int(delta)
        except Exception:
            continue  # fundamental part is -3 or -4, out of scope
        by_orders = sum(
            _form_count(d * d * disc.delta0)
            for d in range(1, disc.conductor + 1)
            if disc.conductor % d == 0
        )
        if kronecker_H(disc) != by_orders:
            return f"H({delta}): product {kronecker_H(disc)} vs order sum {by_orders}"
    return None


def _check_root_counts() -> str | None:
    table = root_count_table(3, 2)
    even = sum(v for k, v in table.items() if k % 2 == 0)
    if even != 6:
        return f"even-root count over F_3, d=2: {even} != 6"
    sep = root_count_table(5, 3, separable=True)
    if sum(sep.values()) != 5**3 - 5**2:
        return f"separable total {sum(sep.values())} != 100"
    return None


def _check_anomaly() -> str | None:
    cert = find_anomalous_trace(Fraction(1, 10), -19)
    if cert.t * cert.t > cert.q:
        return f"|t| = {abs(cert.t)} exceeds sqrt(q = {cert.q})"
    if Fraction(cert.H, 2) ** 2 <= cert.c**2 * (4 * cert.q - cert.t**2):
        return "returned certificate fails its own inequality"
    if cert.census_verified is False:
        return "census disagrees with the certificate's H/2"
    return None


def run_selftest(stream: IO[str] | None = None, *, fast: bool = False) -> bool:
    """Run every check, print one PASS/FAIL line each, return overall success."""
    stream = stream or sys.stdout
    checks: list[tuple[str, Callable[[], str | None]]] = [
        ("tensor-mass-identity", _check_tensor_mass),
        ("parity-vanishing", _check_parity_vanishing),
        ("quadrature-vs-exact-multiplicities", _check_quadrature_moments),
        ("gaussian-fit-exactness", _check_fit),
        ("odd-density-vanishes-rank-2", _check_h2_zero),
        ("density-mass-g1", _check_mass_g1),
        ("density-mass-g2", _check_mass_g2),
        ("density-parity-on-grid", lambda: _check_density_parity(fast)),
        ("hyperelliptic-census-g2-q5", _check_census_hyp),
        ("elliptic-census-q7-deuring", _check_census_ell),
        ("histogram-roundtrip-and-ingest", _check_roundtrip),
        ("class-numbers-vs-enumeration", _check_class_numbers),
        ("root-count-tables", _check_root_counts),
        ("anomalous-trace-smoke", _check_anomaly),
    ]
    if not fast:
        checks.insert(7, ("density-mass-g3", _check_mass_g3))
        checks.insert(8, ("density-moments-vs-exact-g3", _check_density_vs_exact))
    ok = True
    for name, fn in checks:
        try:
            detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            detail = f"{type(exc).__name__}: {exc}"
        if detail is None:
            print(f"PASS {name}", file=stream)
        else:
            ok = False
            print(f"FAIL {name}: {detail}", file=stream)
    print("selftest: OK" if ok else "selftest: FAILED", file=stream)
    return ok
