import argparse
import json

import pytest

from sharpineq.cli import RunConfig, _count, build_parser, config_from_args, main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bliss_constant(capsys):
    code, out, _ = _run(capsys, "constants", "--id", "bliss", "--p", "2", "--q", "4")
    doc = json.loads(out)
    assert code == 0 and doc["header"]["exit_code"] == 0
    assert doc["results"][0]["value"] == pytest.approx(1.5 ** 0.25, rel=1e-14)


def test_out_of_range_exits_2(capsys):
    code, out, err = _run(capsys, "constants", "--id", "bliss", "--p", "4", "--q", "2")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "RangeViolation"


def test_csv_has_a_header_comment(capsys):
    code, out, _ = _run(capsys, "constants", "--all", "--csv", "--samples", "20000")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# ") and json.loads(lines[0][2:])["exit_code"] == 0
    assert "id" in lines[1].split(",")


@pytest.mark.parametrize("text", ["1000000", "1e6", "10**6"])
def test_sample_counts(text):
    assert _count(text) == 10 ** 6


def test_bad_sample_count():
    with pytest.raises(argparse.ArgumentTypeError):
        _count("2.5")


def test_config_round_trip():
    ns = build_parser().parse_args(["verify", "--suite", "young", "--seed", "9"])
    c = config_from_args(ns)
    assert RunConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c


def test_mc_sphere_reports_a_z_score(capsys):
    code, out, _ = _run(capsys, "mc", "--integral", "sphere", "--n", "2", "--m", "2",
                        "--samples", "50000", "--seed", "5")
    row = json.loads(out)["results"][0]
    assert code == 0 and abs(row["z_score"]) < 5


def test_quick_young_suite_passes(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "young", "--quick")
    assert code == 0
    assert all(r["verdict"] != "Fail" for r in json.loads(out)["results"])


def test_out_writes_a_file(capsys, tmp_path):
    path = tmp_path / "bliss.json"
    code, out, _ = _run(capsys, "constants", "--id", "bliss", "--p", "2", "--q", "4",
                        "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["results"][0]["id"] == "bliss"
