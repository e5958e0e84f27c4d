"""End-to-end command-line checks: argument handling, exit codes, file output,
and figure rendering."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from ksrefine.cli import run_cli
from ksrefine.reports import read_histogram_csv
from ksrefine.symplectic import a_n, b_n

EXTERNAL_G1 = """\
t,weight_num,weight_den
-2,1,10
-1,1,5
0,1,5
1,3,10
2,1,5
"""


def lines_of(capsys) -> list[str]:
    return capsys.readouterr().out.splitlines()


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def test_moments_table_genus_three(capsys):
    assert run_cli(["moments", "--g", "3", "--n-max", "25"]) == 0
    lines = lines_of(capsys)
    assert lines[0].startswith("# ksrefine v")
    assert lines[1] == "n,a_n,b_n"
    body = lines[2:]
    assert len(body) == 25
    assert body == [f"{n},{a_n(3, n)},{b_n(3, n)}" for n in range(1, 26)]
    # frozen spot values
    assert body[0] == "1,0,0"
    assert body[2] == "3,0,1"
    assert body[24].endswith(",2836568118720")


def test_moments_low_genus_has_no_bn_column(capsys):
    assert run_cli(["moments", "--g", "2", "--n-max", "6"]) == 0
    lines = lines_of(capsys)
    assert lines[1] == "n,a_n"
    assert lines[-1] == f"6,{a_n(2, 6)}"


def test_moments_json(capsys):
    assert run_cli(["moments", "--g", "3", "--n-max", "4", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["columns"] == ["n", "a_n", "b_n"]
    assert payload["rows"][2] == [3, 0, 1]


def test_moments_lambda_column(capsys):
    assert run_cli(["moments", "--g", "3", "--n-max", "9", "--lambda", "1,1,1"]) == 0
    lines = lines_of(capsys)
    assert lines[1] == "n,c_lambda"
    assert lines[2:] == [f"{n},{b_n(3, n)}" for n in range(1, 10)]


def test_moments_lambda_errors(capsys):
    assert run_cli(["moments", "--g", "1", "--n-max", "4", "--lambda", "1,1,1"]) == 1
    assert run_cli(["moments", "--g", "3", "--n-max", "4", "--lambda", "1,x"]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_usage_errors_exit_two(capsys):
    assert run_cli(["no-such-command"]) == 2
    assert run_cli([]) == 2
    assert run_cli(["moments"]) == 2  # missing --g
    capsys.readouterr()


def test_domain_errors_exit_one(capsys):
    assert run_cli(["moments", "--g", "0"]) == 1
    assert "error:" in capsys.readouterr().err
    # discriminant 1 - 28 = -27 has fundamental part -3
    assert run_cli(["deuring", "--q", "7", "--t", "1"]) == 1
    assert "error:" in capsys.readouterr().err
    assert run_cli(["census-ell", "--q", "4"]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run_cli(["--help"]) == 0
    assert "usage: ksrefine" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# censuses to files
# ---------------------------------------------------------------------------


def test_census_hyp_out_file(tmp_path, hyp_g2, capsys):
    path = tmp_path / "hyp.csv"
    assert run_cli(["census-hyp", "--g", "2", "--q", "5", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert read_histogram_csv(str(path)) == hyp_g2[5]


def test_census_ell_json(tmp_path, ell_small):
    path = tmp_path / "ell.json"
    assert run_cli(["census-ell", "--q", "7", "--format", "json", "--out", str(path)]) == 0
    payload = json.loads(path.read_text())
    assert payload["family"] == "elliptic"
    weights = {row["t"]: Fraction(row["weight"]) for row in payload["rows"]}
    assert weights == ell_small[7].counts


# ---------------------------------------------------------------------------
# density and figures
# ---------------------------------------------------------------------------


def test_density_json_and_plot(tmp_path):
    out = tmp_path / "density.json"
    png = tmp_path / "density.png"
    code = run_cli(["density", "--g", "1", "--step", "0.1",
                    "--format", "json", "--out", str(out), "--plot", str(png)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["columns"] == ["tau", "F", "H", "nu_lim", "vlim"]
    assert payload["meta"]["method"] == "closed-form"
    taus = [row[0] for row in payload["rows"]]
    assert taus[0] == -2.0 and taus[-1] == pytest.approx(2.0)
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_density_tol_gate(tmp_path, capsys):
    out = tmp_path / "density.csv"
    code = run_cli(["density", "--g", "1", "--step", "0.0001", "--tol", "1e-6",
                    "--out", str(out)])
    assert code == 0 and out.exists()
    assert run_cli(["density", "--g", "1", "--step", "0.5", "--tol", "1e-9"]) == 1
    assert "mass defect" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# parity, classno, deuring, anomaly, rootcount
# ---------------------------------------------------------------------------


def test_parity_output(capsys):
    assert run_cli(["parity", "--family", "hyperelliptic", "--g", "2", "--q", "5"]) == 0
    out = capsys.readouterr().out
    assert "parity_defect,7/45" in out
    assert "predicted_even,26/45" in out
    assert "deviation,229/5625" in out
    assert "bound_low,38/45" in out and "bound_high,52/45" in out


def test_parity_requires_a_source(capsys):
    assert run_cli(["parity"]) == 1
    assert "provide --hist" in capsys.readouterr().err


def test_classno_output(capsys):
    assert run_cli(["classno", "--delta", "-76"]) == 0
    out = capsys.readouterr().out
    assert "delta0,-19" in out
    assert "conductor,2" in out
    assert "H_delta,4" in out


def test_deuring_single_trace(capsys):
    assert run_cli(["deuring", "--q", "5", "--t", "1"]) == 0
    lines = lines_of(capsys)
    assert lines[1] == "t,delta,delta0,conductor,H,expected_weight,census_weight,equal"
    assert lines[2] == "1,-19,-19,1,1,1/2,1/2,true"


def test_deuring_all_admissible_traces(capsys):
    assert run_cli(["deuring", "--q", "5"]) == 0
    lines = lines_of(capsys)
    body = lines[2:]
    # gcd(t,5)=1 keeps t in {±1,±2,±3,±4}; t=±2, ±4 hit fundamental part -4
    assert [int(line.split(",")[0]) for line in body] == [-3, -1, 1, 3]
    assert all(line.endswith(",true") for line in body)


def test_anomaly_output(capsys):
    assert run_cli(["anomaly", "--c", "0.1", "--delta0", "-19"]) == 0
    out = capsys.readouterr().out
    assert "q,23" in out
    assert "t,4" in out
    assert "census_verified,true" in out
    assert "inert_primes,none" in out


def test_anomaly_budget_flag(capsys):
    code = run_cli(["anomaly", "--c", "0.5", "--delta0", "-19",
                    "--budget", "0", "--x-max", "5", "--m-max", "3"])
    assert code == 1
    assert "budget" in capsys.readouterr().err


def test_rootcount_output(capsys):
    assert run_cli(["rootcount", "--q", "3", "--d", "2"]) == 0
    lines = lines_of(capsys)
    assert lines[1] == "k,count"
    counts = {int(k): int(v) for k, v in (line.split(",") for line in lines[2:])}
    assert sum(counts.values()) == 9
    assert counts[2] == 3


# ---------------------------------------------------------------------------
# compare / asymmetry with every histogram source
# ---------------------------------------------------------------------------


def test_fit_nulim_output(capsys):
    assert run_cli(["fit-nulim", "--moments-from-table", "--degree", "5"]) == 0
    lines = lines_of(capsys)
    assert lines[1] == "quantity,n,num,den"
    assert "coefficient,1,5,4" in lines
    assert "coefficient,3,-1,2" in lines
    assert "coefficient,5,1,60" in lines
    assert "fitted_moment,13,-270270,1" in lines
    assert "reference_moment,13,-271128,1" in lines


def test_compare_from_saved_histogram(tmp_path, capsys):
    path = tmp_path / "ell5.csv"
    assert run_cli(["census-ell", "--q", "5", "--out", str(path)]) == 0
    png = tmp_path / "compare.png"
    code = run_cli(["compare", "--hist", str(path), "--step", "0.1",
                    "--plot", str(png)])
    assert code == 0
    lines = lines_of(capsys)
    assert lines[1] == "t,tau,observed,predicted_F,predicted_refined,residual"
    assert len(lines) == 2 + len(read_histogram_csv(str(path)).traces())
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_compare_from_external_file(tmp_path, capsys):
    path = tmp_path / "external.csv"
    path.write_text(EXTERNAL_G1)
    code = run_cli(["compare", "--external", str(path), "--q", "5", "--g", "1",
                    "--step", "0.1"])
    assert code == 0
    lines = lines_of(capsys)
    assert len(lines) == 2 + 5


def test_asymmetry_from_external_file(tmp_path, capsys):
    path = tmp_path / "external.csv"
    path.write_text(EXTERNAL_G1)
    png = tmp_path / "asymmetry.png"
    code = run_cli(["asymmetry", "--external", str(path), "--q", "5", "--g", "1",
                    "--step", "0.1", "--plot", str(png)])
    assert code == 0
    lines = lines_of(capsys)
    assert lines[1] == "t,tau,observed_diff,predicted,nu_lim,vlim"
    assert len(lines) == 2 + 2  # only t > 0 rows
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_compare_census_flags_validated(capsys):
    assert run_cli(["compare", "--family", "elliptic", "--g", "2", "--q", "5"]) == 1
    assert "elliptic censuses have g=1" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def test_selftest_fast(capsys):
    assert run_cli(["selftest", "--fast"]) == 0
    out = capsys.readouterr().out
    assert "selftest: OK" in out
