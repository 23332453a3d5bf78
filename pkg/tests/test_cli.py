import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from insider_default import __version__
from insider_default.cli import main
from insider_default.experiments import CURVE_HEADER, SWEEP_HEADER, UNBOUNDED_HEADER, fmt, write_csv

NUMBER = re.compile(r"^-?\d(\.\d+)?(e[+-]\d+)?$|^-?\d+(\.\d+)?$")


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_fmt_nine_significant_digits():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(1.046027859908717) == "1.04602786"
    assert fmt(3) == "3"
    assert fmt(1.5e-12) == "1.5e-12"


def test_write_csv_is_atomic(tmp_path):
    path = write_csv(tmp_path / "x.csv", ("a", "b"), [(1, 2.0)])
    assert path.read_text() == "a,b\n1,2\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_figure1_outputs(tmp_path):
    assert main(["figure1", "--out", str(tmp_path), "--svg"]) == 0
    header, data = read(tmp_path / "figure1.csv")
    assert tuple(header) == CURVE_HEADER
    assert (tmp_path / "figure1.svg").read_text().lstrip().startswith("<?xml")
    manifest = json.loads((tmp_path / "figure1_manifest.json").read_text())
    assert manifest["version"] == __version__
    assert manifest["models"]["model"]["lambda"] == 0.3
    assert manifest["models"]["model"]["delta"] == 0.5
    assert manifest["results"]["jump"]["merton"] < 0
    # the duplicated default time carries the flag switch
    k = int(np.argmax(data[:, 4]))
    assert data[k, 0] == data[k - 1, 0] == 0.5


def test_csv_numbers_have_nine_digits(tmp_path):
    main(["figure4", "--out", str(tmp_path)])
    lines = (tmp_path / "figure4.csv").read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    for line in lines[1:]:
        for cell in line.split(","):
            assert NUMBER.match(cell), cell
            assert len(cell.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 9


def test_figure4_nondecreasing(tmp_path):
    main(["figure4", "--out", str(tmp_path)])
    _, data = read(tmp_path / "figure4.csv")
    np.testing.assert_array_equal(data[:, 0], [0.0, 0.1, 0.3, 0.5])
    assert np.all(np.diff(data[:, 1]) >= 0)


def test_figure3_investor_beats_insider(tmp_path):
    main(["figure3", "--out", str(tmp_path)])
    _, data = read(tmp_path / "figure3.csv")
    assert data[0, 2] > data[0, 1]
    header, wealth = read(tmp_path / "figure3_wealth.csv")
    assert header == ["t", "insider", "investor", "merton"]
    assert wealth[0, 1:].tolist() == [1.0, 1.0, 1.0]


def test_figure1_without_default_risk_coincides(tmp_path):
    main(["figure1", "--out", str(tmp_path), "--lambda=1e-9"])
    _, data = read(tmp_path / "figure1.csv")
    np.testing.assert_allclose(data[:, 2], data[:, 1], atol=1e-6)
    np.testing.assert_allclose(data[:, 3], data[:, 1], atol=1e-6)


def test_deterministic_outputs(tmp_path):
    for d in ("a", "b"):
        main(["figure1", "--out", str(tmp_path / d), "--seed", "7"])
    assert (tmp_path / "a" / "figure1.csv").read_bytes() == (tmp_path / "b" / "figure1.csv").read_bytes()
    main(["figure1", "--out", str(tmp_path / "c"), "--seed", "8"])
    assert (tmp_path / "a" / "figure1.csv").read_bytes() != (tmp_path / "c" / "figure1.csv").read_bytes()


def test_sweep_parallel_matches_serial(tmp_path):
    args = ["sweep", "--param", "delta", "--values", "0,0.5", "--gamma=0.5"]
    main(args + ["--out", str(tmp_path / "s")])
    main(args + ["--out", str(tmp_path / "p"), "--workers", "2"])
    assert (tmp_path / "s" / "sweep.csv").read_bytes() == (tmp_path / "p" / "sweep.csv").read_bytes()
    assert sorted(p.name for p in (tmp_path / "p" / "points").iterdir()) == [
        "sweep_delta=0.5.csv",
        "sweep_delta=0.csv",
    ]


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambda": 0.2, "gamma": 0.4}))
    main(["figure1", "--out", str(tmp_path), "--config", str(cfg), "--gamma=0.3"])
    resolved = json.loads((tmp_path / "figure1_manifest.json").read_text())["models"]["model"]
    assert (resolved["lambda"], resolved["gamma"]) == (0.2, 0.3)


def test_unbounded_schema(tmp_path):
    main(["unbounded", "--out", str(tmp_path), "--n", "4000"])
    header, data = read(tmp_path / "unbounded.csv")
    assert tuple(header) == UNBOUNDED_HEADER
    np.testing.assert_array_equal(data[:, 0], [1, 5, 25, 125])


@pytest.mark.parametrize(
    "args, message",
    [
        (["figure1", "--gamma=1.5"], "gamma must lie in (0,1)"),
        (["figure1", "--foo=1"], "unknown model key"),
        (["figure1", "--gamma=abc"], "needs a number"),
        (["sweep", "--param", "seed"], "cannot sweep"),
        (["figure1", "--config", "/nonexistent.json"], "could not read configuration"),
    ],
)
def test_invalid_invocations(tmp_path, capsys, args, message):
    with pytest.raises(SystemExit) as exc:
        main(args + ["--out", str(tmp_path)])
    assert exc.value.code == 2
    assert message in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["figure4", "--out", str(blocker / "sub")]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_verify_flags_terminal_fault(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "insider_default", "verify", "--n", "10000", "--terminal", "over_p",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    failed = {line.split()[1].rstrip(":") for line in proc.stdout.splitlines() if line.startswith("FAIL")}
    assert {"insider_solution_vs_oracle", "bsde_tightness"} <= failed
    manifest = json.loads((tmp_path / "verify_manifest.json").read_text())
    assert manifest["results"]["passed"] is False


def test_verify_small_n_passes(tmp_path):
    """At n=1000 the 3-stderr bands widen and every check should still pass."""
    assert main(["verify", "--n", "1000", "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("barrier, defaults", [("none", False), ("0.06", True), ("auto", True)])
def test_barrier_option(tmp_path, barrier, defaults):
    main(["figure1", "--out", str(tmp_path), "--barrier", barrier])
    _, data = read(tmp_path / "figure1.csv")
    assert bool(data[:, 4].any()) is defaults
    manifest = json.loads((tmp_path / "figure1_manifest.json").read_text())
    expected = {"none": None, "0.06": 0.2, "auto": 0.5}[barrier]
    got = manifest["results"]["default_time"]
    assert got == expected if expected is None else got == pytest.approx(expected)
