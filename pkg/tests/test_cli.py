import json

import pytest

from cubicpoints.cli import EXIT_DATA, EXIT_OK, EXIT_UNDETERMINED, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_genus_command(capsys):
    code, out = run(capsys, "genus", "--level", "222", "--d", "37")
    assert code == EXIT_OK
    assert json.loads(out) == {"N": 222, "d": 37, "genus": 18}


def test_genus_markdown(capsys):
    code, out = run(capsys, "--format", "markdown", "genus", "--level", "37")
    assert (code, out) == (EXIT_OK, "2\n")


def test_biquotient_needs_d(capsys):
    assert main(["genus", "--level", "30", "--r", "3"]) == EXIT_USAGE


def test_trace_command(capsys):
    code, out = run(capsys, "trace", "--level", "11", "--m", "2")
    assert code == EXIT_OK and json.loads(out)["trace"] == -2


def test_points_command(capsys):
    code, out = run(capsys, "points", "--level", "11", "--p", "2")
    counts = json.loads(out)["counts"]
    assert code == EXIT_OK and [c["x0"] for c in counts] == [5, 5]


def test_points_with_curve(capsys):
    code, out = run(capsys, "points", "--level", "37", "--p", "3", "--k", "1", "--curve", "37a1")
    counts = json.loads(out)["counts"]
    assert code == EXIT_OK and counts == [{"k": 1, "x0": counts[0]["x0"], "curve": 7}]


@pytest.mark.parametrize(
    "argv",
    [
        ["genus", "--level", "12"],
        ["trace", "--level", "22", "--m", "11"],
        ["classify", "--level", "30", "--d", "4"],
        ["classify", "--level", "30", "--d", "30"],
        ["points", "--level", "11", "--p", "11"],
        ["gram", "--level", "500", "--curve", "37a1"],
        ["gram", "--level", "74", "--curve", "99z9"],
    ],
)
def test_invalid_input_exit_code(argv, capsys):
    assert main(argv) == EXIT_USAGE


def test_missing_database_exit_code(tmp_path, capsys):
    assert main(["--db", str(tmp_path / "absent.csv"), "classify", "--level", "222", "--d", "37"]) == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense\n", encoding="utf-8")
    assert main(["--db", str(bad), "classify", "--level", "222", "--d", "37"]) == EXIT_DATA


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--level", "30"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--primes", "2,x", "genus", "--level", "30"])
    assert exc.value.code == 2


def test_classify_output_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["--out", str(a), "classify", "--level", "222", "--d", "37"]) == EXIT_OK
    assert main(["--out", str(b), "classify", "--level", "222", "--d", "37"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text(encoding="utf-8"))
    assert report["verdict"] == "FiniteCubic" and report["genus"] == 18


def test_classify_infinite(capsys):
    code, out = run(capsys, "classify", "--level", "106", "--d", "53")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "InfiniteCubic"


def test_undetermined_exit_code(capsys):
    # above the lattice bound only the point counts exclude 83a1 at level 415
    code, out = run(capsys, "classify", "--level", "415", "--d", "83", "--primes", "")
    assert code == EXIT_UNDETERMINED
    assert json.loads(out)["verdict"] == "Undetermined"
    code, out = run(capsys, "classify", "--level", "415", "--d", "83")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "FiniteCubic"


def test_flags_after_the_command(capsys):
    code, out = run(capsys, "--format", "markdown", "genus", "--level", "37", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["genus"] == 2


def test_stamp_wraps_report(capsys):
    code, out = run(capsys, "--stamp", "genus", "--level", "37")
    payload = json.loads(out)
    assert payload["report"]["genus"] == 2 and "version" in payload["meta"]


def test_gram_command(capsys):
    code, out = run(capsys, "--format", "markdown", "gram", "--level", "129", "--curve", "43a1")
    assert (code, out) == (EXIT_OK, "4x₁²−4x₁x₂+4x₂²\n")


def test_survey_command(tmp_path, capsys):
    out = tmp_path / "survey.json"
    assert main(["survey", "--n-max", "120", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert set(report) == {"pairs", "infinite_by_genus", "leftover_triples", "leftover_levels", "sieve_bound_check"}
    assert [42, 2] in report["infinite_by_genus"]["3"]
    assert report["sieve_bound_check"] == {"from": 623, "to": 1869, "ok": True, "exceptions": []}
