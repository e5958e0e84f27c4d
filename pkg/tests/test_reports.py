"""Histogram files, external ingestion, and the comparison/asymmetry tables."""

from __future__ import annotations

import io
import json
import math
from fractions import Fraction

import pytest

from ksrefine.errors import DomainError, IngestError
from ksrefine.quadrature import density_profile, nu_lim_reference, vlim_reference
from ksrefine.reports import (
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

# ---------------------------------------------------------------------------
# histogram round-trips
# ---------------------------------------------------------------------------


def test_histogram_roundtrip_file(tmp_path, hyp_g2):
    hist = hyp_g2[5]
    path = tmp_path / "hyp_g2_q5.csv"
    write_histogram_csv(hist, str(path))
    assert read_histogram_csv(str(path)) == hist


def test_histogram_roundtrip_stream(ell_small):
    hist = ell_small[7]
    buf = io.StringIO()
    write_histogram_csv(hist, buf)
    buf.seek(0)
    back = read_histogram_csv(buf)
    assert back == hist
    assert back.counts[2] == Fraction(1, 1)  # exact, not a float echo


def test_histogram_csv_layout(hyp_g2):
    buf = io.StringIO()
    write_histogram_csv(hyp_g2[5], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# ksrefine v")
    assert lines[1] == "q,g,family"
    assert lines[2] == "5,2,hyperelliptic"
    assert lines[3] == "t,raw_count,weight_num,weight_den"
    # weights are integer pairs, never floats
    for line in lines[4:]:
        fields = line.split(",")
        assert len(fields) == 4
        assert all(int(f) or True for f in fields)


def test_histogram_json_payload(ell_small):
    hist = ell_small[7]
    buf = io.StringIO()
    write_histogram_json(hist, buf)
    payload = json.loads(buf.getvalue())
    assert payload["tool"] == "ksrefine"
    assert (payload["q"], payload["g"], payload["family"]) == (7, 1, "elliptic")
    weights = {row["t"]: Fraction(row["weight"]) for row in payload["rows"]}
    assert weights == hist.counts


# ---------------------------------------------------------------------------
# external ingestion
# ---------------------------------------------------------------------------

EXTERNAL_OK = """\
# produced elsewhere
q,g,family
53,3,external
t,weight_num,weight_den
-1,1,10
0,2,5
1,1,5
2,3,10
"""


def test_ingest_external_with_metadata(tmp_path):
    path = tmp_path / "external.csv"
    path.write_text(EXTERNAL_OK)
    hist = ingest_external(str(path))
    assert (hist.q, hist.g, hist.family) == (53, 3, "external")
    assert hist.counts[2] == Fraction(3, 10)
    assert hist.raw_pair_counts is None
    assert hist.dimension() == 6  # full-moduli dimension 3g - 3


def test_ingest_external_without_metadata():
    text = "t,weight_num,weight_den\n0,1,2\n1,1,2\n"
    hist = ingest_external(io.StringIO(text), q=5, g=1)
    assert (hist.q, hist.g) == (5, 1)
    with pytest.raises(IngestError, match="no q,g metadata"):
        ingest_external(io.StringIO(text))


@pytest.mark.parametrize(
    "rows,message",
    [
        ("1,2,x", "line 2: weight denominator must be an integer"),
        ("1.5,2,3", "line 2: trace must be an integer"),
        ("1,-2,3", "line 2: weight must be nonnegative"),
        ("1,2,0", "line 2: weight denominator must be positive"),
        ("1,1,2\n1,1,3", "line 3: duplicate trace t=1"),
        ("5,1,2", "line 2: trace 5 violates the Weil bound"),
        ("1,2", "line 2: expected 3 fields"),
    ],
)
def test_ingest_external_line_errors(rows, message):
    text = "t,weight_num,weight_den\n" + rows + "\n"
    with pytest.raises(IngestError, match=message.replace("|", r"\|")):
        ingest_external(io.StringIO(text), q=5, g=1)


def test_ingest_external_header_errors():
    with pytest.raises(IngestError, match="header"):
        ingest_external(io.StringIO("foo,bar\n1,2\n"), q=5, g=1)
    with pytest.raises(IngestError, match="no trace rows"):
        ingest_external(io.StringIO("t,weight_num,weight_den\n"), q=5, g=1)
    with pytest.raises(IngestError, match="expected 'q,g,family' values"):
        ingest_external(io.StringIO("q,g,family\n5,1\nt,weight_num,weight_den\n0,1,2\n"))


# ---------------------------------------------------------------------------
# comparison tables
# ---------------------------------------------------------------------------


def test_comparison_rows(hyp_g2, density2):
    hist = hyp_g2[5]
    rows = emit_comparison(hist, density2)
    assert len(rows) == len(hist.traces())
    assert [r.t for r in rows] == hist.traces()
    # observed is the sqrt(q)-rescaled share, so the shares sum back to sqrt(q)
    assert math.isclose(sum(r.observed for r in rows), math.sqrt(5), rel_tol=1e-12)
    for r in rows:
        assert math.isclose(r.tau, r.t / math.sqrt(5), rel_tol=1e-15)
        assert r.residual == r.observed - r.predicted_refined


def test_comparison_refined_equals_leading_when_correction_vanishes(hyp_g2, density2):
    # the odd correction is identically zero in genus 2
    for r in emit_comparison(hyp_g2[5], density2):
        assert r.predicted_refined == r.predicted_F


def test_comparison_parity_scale(hyp_g2, density2):
    plain = {r.t: r.observed for r in emit_comparison(hyp_g2[5], density2)}
    scaled = {
        r.t: r.observed
        for r in emit_comparison(hyp_g2[5], density2, parity_scale=True)
    }
    r2 = 7.0 / 45.0
    for t, value in plain.items():
        factor = 1.0 + r2 if t % 2 == 0 else 1.0 - r2
        assert math.isclose(scaled[t] * factor, value, rel_tol=1e-12)


def test_comparison_validation(hyp_g2, ell_small, density2, density3):
    with pytest.raises(DomainError, match="density is for g=3"):
        emit_comparison(hyp_g2[5], density3)
    density1 = density_profile(1, step=0.05)
    with pytest.raises(DomainError, match="parity scaling"):
        emit_comparison(ell_small[5], density1, parity_scale=True)


# ---------------------------------------------------------------------------
# asymmetry tables
# ---------------------------------------------------------------------------


def test_asymmetry_vanishes_for_twist_closed_family(hyp_g2, density2):
    rows = emit_asymmetry(hyp_g2[5], density2)
    assert rows and all(r.t > 0 for r in rows)
    assert len(rows) == sum(1 for t in hyp_g2[5].traces() if t > 0)
    for r in rows:
        assert r.observed_diff == 0.0


def test_asymmetry_external_numbers(density3):
    hist = ingest_external(io.StringIO(EXTERNAL_OK))
    rows = {r.t: r for r in emit_asymmetry(hist, density3)}
    assert set(rows) == {1, 2}
    # mass is exactly 1, so diff(t) = q (w(t) - w(-t))
    assert math.isclose(rows[1].observed_diff, 53 * (1 / 5 - 1 / 10), rel_tol=1e-12)
    assert math.isclose(rows[2].observed_diff, 53 * (3 / 10), rel_tol=1e-12)
    for r in rows.values():
        assert math.isclose(
            r.predicted, -2.0 * density3.interpolate(r.tau, "H"), rel_tol=1e-12
        )
        assert math.isclose(r.nu_lim, float(nu_lim_reference(r.tau)), rel_tol=1e-12)
        assert math.isclose(r.vlim, float(vlim_reference(r.tau)), rel_tol=1e-12)


def test_asymmetry_validation(hyp_g2, density3):
    with pytest.raises(DomainError, match="density is for g=3"):
        emit_asymmetry(hyp_g2[5], density3)


# ---------------------------------------------------------------------------
# generic tables
# ---------------------------------------------------------------------------


def test_write_table_csv_formats():
    buf = io.StringIO()
    write_table_csv(buf, {"g": 3, "n": 5}, ["a", "b", "c", "d"],
                    [[0.5, Fraction(1, 3), "x", 7], [1 / 3, Fraction(2), "y", -1]])
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# ksrefine v")
    assert lines[0].endswith(", g=3, n=5")
    assert lines[1] == "a,b,c,d"
    assert lines[2] == "0.5,1/3,x,7"
    assert lines[3] == "0.333333333333,2,y,-1"


def test_write_table_json(tmp_path):
    path = tmp_path / "table.json"
    write_table_json(str(path), {"g": 3}, ["a", "b"], [[Fraction(1, 3), 2]])
    payload = json.loads(path.read_text())
    assert payload["tool"] == "ksrefine"
    assert payload["meta"] == {"g": 3}
    assert payload["columns"] == ["a", "b"]
    assert payload["rows"] == [["1/3", 2]]


def test_row_dataclasses_expose_columns():
    assert ComparisonRow.COLUMNS[0] == "t"
    assert AsymmetryRow.COLUMNS == ("t", "tau", "observed_diff", "predicted",
                                    "nu_lim", "vlim")
