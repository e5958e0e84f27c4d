"""Delimited tables and trace-histogram files.

The on-disk histogram format is a metadata comment, a tiny ``q,g,family``
block, then one row per trace.  Weights are exact rationals stored as separate
integer numerator/denominator columns — never floats — so reading a file back
reproduces the histogram bit for bit.  Externally produced histograms use the
same layout minus the raw-count column, and are validated line by line on
ingestion (integer fields, positive denominators, no duplicate traces, Weil
bound).

Comparison tables join a histogram to the continuous densities: ``observed``
is the weighted share of curves at trace t rescaled to a density in
tau = t/sqrt(q), set against the symmetric leading density F, the refined
prediction F - H/sqrt(q), and their residual.  Asymmetry tables difference the
two signs of t, which cancels F and isolates -2H(tau) at the census's own
sqrt(q) scale.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Iterator, Sequence

from .census import TraceHistogram, parity_defect
from .errors import DomainError, IngestError
from .quadrature import DensitySample, nu_lim_reference, vlim_reference

__all__ = [
    "ComparisonRow",
    "AsymmetryRow",
    "emit_comparison",
    "emit_asymmetry",
    "write_histogram_csv",
    "write_histogram_json",
    "read_histogram_csv",
    "ingest_external",
    "write_table_csv",
    "write_table_json",
]


def _version() -> str:
    from . import __version__

    return __version__


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


@contextlib.contextmanager
def _open_dest(dest: str | IO[str]) -> Iterator[IO[str]]:
    if hasattr(dest, "write"):
        yield dest  # type: ignore[misc]
    else:
        with open(dest, "w", newline="") as fh:
            yield fh


def write_table_csv(
    dest: str | IO[str],
    meta: dict[str, object],
    columns: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> None:
    """One comment line of metadata, a header, then the rows."""
    with _open_dest(dest) as fh:
        pairs = ", ".join(f"{k}={v}" for k, v in meta.items())
        fh.write(f"# ksrefine v{_version()}" + (f", {pairs}" if pairs else "") + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_table_json(
    dest: str | IO[str],
    meta: dict[str, object],
    columns: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> None:
    payload = {
        "tool": "ksrefine",
        "version": _version(),
        "meta": meta,
        "columns": list(columns),
        "rows": [list(row) for row in rows],
    }
    with _open_dest(dest) as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# histogram files
# ---------------------------------------------------------------------------


def _histogram_rows(hist: TraceHistogram) -> tuple[list[str], list[list[object]]]:
    raw = hist.raw_pair_counts
    if raw is not None:
        columns = ["t", "raw_count", "weight_num", "weight_den"]
        rows = [[t, raw.get(t, 0), hist.counts[t].numerator, hist.counts[t].denominator]
                for t in hist.traces()]
    else:
        columns = ["t", "weight_num", "weight_den"]
        rows = [[t, hist.counts[t].numerator, hist.counts[t].denominator]
                for t in hist.traces()]
    return columns, rows


def write_histogram_csv(hist: TraceHistogram, dest: str | IO[str]) -> None:
    columns, rows = _histogram_rows(hist)
    with _open_dest(dest) as fh:
        fh.write(f"# ksrefine v{_version()} trace histogram, weights are 1/#Aut counts\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "g", "family"])
        writer.writerow([hist.q, hist.g, hist.family])
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_histogram_json(hist: TraceHistogram, dest: str | IO[str]) -> None:
    raw = hist.raw_pair_counts
    rows = []
    for t in hist.traces():
        entry: dict[str, object] = {"t": t, "weight": str(hist.counts[t])}
        if raw is not None:
            entry["raw_count"] = raw.get(t, 0)
        rows.append(entry)
    payload = {
        "tool": "ksrefine",
        "version": _version(),
        "q": hist.q,
        "g": hist.g,
        "family": hist.family,
        "rows": rows,
    }
    with _open_dest(dest) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _data_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, next(csv.reader(io.StringIO(line)))


def _parse_int(field: str, lineno: int, what: str) -> int:
    try:
        return int(field.strip())
    except ValueError:
        raise IngestError(f"line {lineno}: {what} must be an integer, got {field!r}") from None


def _parse_histogram(
    text: str,
    *,
    q: int | None = None,
    g: int | None = None,
    family: str | None = None,
) -> TraceHistogram:
    counts: dict[int, Fraction] = {}
    raw: dict[int, int] = {}
    has_raw: bool | None = None
    header_seen = False
    for lineno, fields in _data_lines(text):
        fields = [f.strip() for f in fields]
        if not header_seen:
            if fields == ["q", "g", "family"]:
                header_seen = "meta"
                continue
            if fields in (["t", "raw_count", "weight_num", "weight_den"],
                          ["t", "weight_num", "weight_den"]):
                has_raw = len(fields) == 4
                header_seen = True
                continue
            raise IngestError(
                f"line {lineno}: expected a 'q,g,family' or 't,...' header, got {fields!r}"
            )
        if header_seen == "meta":
            if len(fields) != 3:
                raise IngestError(f"line {lineno}: expected 'q,g,family' values, got {fields!r}")
            q = _parse_int(fields[0], lineno, "q")
            g = _parse_int(fields[1], lineno, "g")
            family = fields[2]
            header_seen = False
            continue
        if q is None or g is None:
            raise IngestError("histogram carries no q,g metadata and none was supplied")
        expected = 4 if has_raw else 3
        if len(fields) != expected:
            raise IngestError(f"line {lineno}: expected {expected} fields, got {len(fields)}")
        t = _parse_int(fields[0], lineno, "trace")
        if t in counts:
            raise IngestError(f"line {lineno}: duplicate trace t={t}")
        bound = math.isqrt(4 * g * g * q)
        if abs(t) > bound:
            raise IngestError(
                f"line {lineno}: trace {t} violates the Weil bound |t| <= {bound}"
            )
        if has_raw:
            raw[t] = _parse_int(fields[1], lineno, "raw_count")
        num = _parse_int(fields[-2], lineno, "weight numerator")
        den = _parse_int(fields[-1], lineno, "weight denominator")
        if den <= 0:
            raise IngestError(f"line {lineno}: weight denominator must be positive, got {den}")
        if num < 0:
            raise IngestError(f"line {lineno}: weight must be nonnegative, got {num}/{den}")
        counts[t] = Fraction(num, den)
    if q is None or g is None:
        raise IngestError("histogram carries no q,g metadata and none was supplied")
    if not counts:
        raise IngestError("histogram has no trace rows")
    return TraceHistogram(family=family or "external", g=g, q=q, counts=counts,
                          raw_pair_counts=raw if has_raw else None)


def read_histogram_csv(src: str | IO[str]) -> TraceHistogram:
    """Read back a histogram written by write_histogram_csv, exactly."""
    if hasattr(src, "read"):
        text = src.read()  # type: ignore[union-attr]
    else:
        with open(src, newline="") as fh:
            text = fh.read()
    return _parse_histogram(text)


def ingest_external(
    path: str | IO[str],
    *,
    q: int | None = None,
    g: int | None = None,
    family: str = "external",
) -> TraceHistogram:
    """Validate and load a third-party trace histogram.

    The file may carry its own ``q,g,family`` block; otherwise q and g must be
    passed.  Every defect is reported with its line number.
    """
    if hasattr(path, "read"):
        text = path.read()  # type: ignore[union-attr]
    else:
        with open(path, newline="") as fh:
            text = fh.read()
    hist = _parse_histogram(text, q=q, g=g, family=family)
    return hist


# ---------------------------------------------------------------------------
# comparison and asymmetry tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    """Observed trace density at tau = t/sqrt(q) against the predictions."""

    t: int
    tau: float
    observed: float
    predicted_F: float
    predicted_refined: float
    residual: float

    COLUMNS = ("t", "tau", "observed", "predicted_F", "predicted_refined", "residual")

    def astuple(self) -> tuple[object, ...]:
        return (self.t, self.tau, self.observed, self.predicted_F,
                self.predicted_refined, self.residual)


@dataclass(frozen=True)
class AsymmetryRow:
    """Signed difference of the two trace signs against -2H and the closed forms."""

    t: int
    tau: float
    observed_diff: float
    predicted: float
    nu_lim: float
    vlim: float

    COLUMNS = ("t", "tau", "observed_diff", "predicted", "nu_lim", "vlim")

    def astuple(self) -> tuple[object, ...]:
        return (self.t, self.tau, self.observed_diff, self.predicted,
                self.nu_lim, self.vlim)


def emit_comparison(
    hist: TraceHistogram,
    density: DensitySample,
    *,
    parity_scale: bool = False,
) -> list[ComparisonRow]:
    """One row per occupied trace: sqrt(q)-rescaled weighted share vs F and
    F - H/sqrt(q).  With parity_scale, even traces are deflated by 1 + r_g and
    odd ones by 1 - r_g, removing the even/odd imbalance of hyperelliptic
    counts before comparison."""
    if density.g != hist.g:
        raise DomainError(f"density is for g={density.g}, histogram for g={hist.g}")
    if parity_scale and hist.family != "hyperelliptic":
        raise DomainError("parity scaling only applies to hyperelliptic histograms")
    sq = math.sqrt(hist.q)
    mass = hist.total_mass()
    r = float(parity_defect(hist.g)) if parity_scale else 0.0
    rows = []
    for t in hist.traces():
        tau = t / sq
        observed = float(hist.weight(t) / mass) * sq
        if parity_scale:
            observed /= (1.0 + r) if t % 2 == 0 else (1.0 - r)
        F = float(density.interpolate(tau, "F"))
        H = float(density.interpolate(tau, "H"))
        refined = F - H / sq
        rows.append(ComparisonRow(t=t, tau=tau, observed=observed, predicted_F=F,
                                  predicted_refined=refined, residual=observed - refined))
    return rows


def emit_asymmetry(hist: TraceHistogram, density: DensitySample) -> list[AsymmetryRow]:
    """For each positive trace, q (N(t) - N(-t)) / mass against -2 H(tau); the
    two reference columns carry the fitted odd density and tau(1 - tau^2/3)
    times the Gaussian, the leading closed forms."""
    if density.g != hist.g:
        raise DomainError(f"density is for g={density.g}, histogram for g={hist.g}")
    sq = math.sqrt(hist.q)
    mass = hist.total_mass()
    rows = []
    for t in hist.traces():
        if t <= 0:
            continue
        tau = t / sq
        diff = float((hist.weight(t) - hist.weight(-t)) / mass) * hist.q
        predicted = -2.0 * float(density.interpolate(tau, "H"))
        rows.append(AsymmetryRow(t=t, tau=tau, observed_diff=diff, predicted=predicted,
                                 nu_lim=float(nu_lim_reference(tau)),
                                 vlim=float(vlim_reference(tau))))
    return rows
