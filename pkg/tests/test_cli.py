"""Command-line contracts: columns, determinism, exit codes."""

import numpy as np
import pytest

from fdwpc.cli import main

# Small fading grids keep CLI tests quick; contracts don't depend on them.
FAST = ["--fading-states", "64"]


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows(text):
    return [line.split(",") for line in text.strip().splitlines()]


def test_capacity_sweep_contract(capsys):
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "0", "--stop", "35", "--step", "5", "--pp-dbm", "-10"]
        + FAST,
        capsys,
    )
    assert code == 0
    table = rows(out)
    assert table[0] == ["variable", "capacity_fd_bits", "rate_hd_bits", "case_tag"]
    assert len(table) == 9  # header + 8 grid points
    # The reference processing cost of -10 dBm exceeds the harvest at these
    # link budgets: every row is the zero allocation.
    assert all(float(r[1]) == 0.0 for r in table[1:])
    assert all(r[3] == "Zero" for r in table[1:])


def test_capacity_sweep_strictly_increasing_when_feasible(capsys):
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "0", "--stop", "35", "--step", "5", "--pp-watts", "0"]
        + FAST,
        capsys,
    )
    assert code == 0
    caps = [float(r[1]) for r in rows(out)[1:]]
    assert all(b > a for a, b in zip(caps, caps[1:]))
    hd_rates = [float(r[2]) for r in rows(out)[1:]]
    assert all(c > h for c, h in zip(caps, hd_rates))


def test_capacity_sweep_distance_dominance(capsys):
    runs = {}
    for d in ("10", "20"):
        code, out, err = run_cli(
            [
                "capacity-sweep",
                "--start", "0", "--stop", "30", "--step", "10",
                "--pp-watts", "0", "--distance-m", d,
            ]
            + FAST,
            capsys,
        )
        assert code == 0
        runs[d] = [float(r[1]) for r in rows(out)[1:]]
    assert all(a >= b for a, b in zip(runs["10"], runs["20"]))


def test_byte_identical_output(tmp_path, capsys):
    argv = [
        "capacity-sweep", "--start", "0", "--stop", "20", "--step", "10",
        "--pp-watts", "0", "--seed", "5",
    ] + FAST
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_numeric_fields_have_12_significant_digits(capsys):
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "10", "--stop", "10", "--step", "5", "--pp-watts", "0"]
        + FAST,
        capsys,
    )
    value = rows(out)[1][1]
    mantissa = value.split("e")[0]
    assert len(mantissa.split(".")[1]) >= 12


def test_ratio_sweep_contract(capsys):
    code, out, err = run_cli(
        ["ratio-sweep", "--start", "40", "--stop", "100", "--step", "20", "--pp-watts", "0"]
        + FAST,
        capsys,
    )
    assert code == 0
    table = rows(out)
    assert table[0] == ["suppression_db", "ratio_fd_hd"]
    assert len(table) == 5
    ratios = [float(r[1]) for r in table[1:]]
    assert all(b >= a - 1e-7 for a, b in zip(ratios, ratios[1:]))


def test_recycle_sweep_nondecreasing(capsys):
    code, out, err = run_cli(
        ["recycle-sweep", "--start", "0", "--stop", "1.2", "--step", "0.2", "--pp-watts", "0"]
        + FAST,
        capsys,
    )
    assert code == 0
    caps = [float(r[1]) for r in rows(out)[1:]]
    assert all(b >= a - 1e-9 for a, b in zip(caps, caps[1:]))


def test_pcost_compare_ordering(capsys):
    # Feasible processing costs well under the harvested power: capacity must
    # drop strictly as the cost rises, at every transmit power.
    code, out, err = run_cli(
        [
            "pcost-compare",
            "--start", "20", "--stop", "30", "--step", "5",
            "--pp-dbm", "-75", "-70", "--pp-zero",
        ]
        + FAST,
        capsys,
    )
    assert code == 0
    table = rows(out)
    assert table[0] == ["pet_dbm", "pp_watts", "capacity_fd_bits"]
    by_pet = {}
    for pet, pp, cap in table[1:]:
        by_pet.setdefault(pet, []).append((float(pp), float(cap)))
    for pet, entries in by_pet.items():
        entries.sort()
        caps = [c for _, c in entries]
        assert all(a > b for a, b in zip(caps, caps[1:])), pet


def test_simulate_summary_and_trace(tmp_path, capsys):
    trace_path = tmp_path / "trace.csv"
    code, out, err = run_cli(
        [
            "simulate",
            "--k", "100", "--slots", "3000", "--seed", "3",
            "--pp-watts", "0", "--fading-states", "1",
            "--out", str(trace_path),
        ],
        capsys,
    )
    assert code == 0
    table = rows(out)
    assert table[0] == ["empirical_rate", "analytic_capacity", "outage_fraction"]
    emp, cap, outage = (float(v) for v in table[1])
    assert cap > 0.0
    assert abs(emp - cap) / cap < 0.05
    assert outage < 0.05
    lines = trace_path.read_text().splitlines()
    assert lines[0] == "slot,h,transmitted,slot_rate_bits,battery_j"
    assert len(lines) == 3001


def test_simulate_stdout_trace(capsys):
    code, out, err = run_cli(
        ["simulate", "--k", "20", "--slots", "10", "--seed", "1", "--pp-watts", "0",
         "--fading-states", "1"],
        capsys,
    )
    assert code == 0
    assert out.splitlines()[0] == "slot,h,transmitted,slot_rate_bits,battery_j"
    assert err.splitlines()[0] == "empirical_rate,analytic_capacity,outage_fraction"


def test_fading_file_roundtrip(tmp_path, capsys):
    fpath = tmp_path / "states.txt"
    fpath.write_text("1.0e-4 0.5\n2.0e-4 0.5\n")
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "30", "--stop", "30", "--step", "5",
         "--pp-watts", "0", "--fading-file", str(fpath)],
        capsys,
    )
    assert code == 0
    assert float(rows(out)[1][1]) > 0.0


def test_exit_2_on_bad_range(capsys):
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "10", "--stop", "0", "--step", "5"], capsys
    )
    assert code == 2
    assert err.strip() != ""
    code2, _, _ = run_cli(
        ["capacity-sweep", "--start", "0", "--stop", "10", "--step", "-1"], capsys
    )
    assert code2 == 2


def test_exit_2_on_bad_params(capsys):
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "0", "--stop", "10", "--step", "5", "--eta", "2.0"],
        capsys,
    )
    assert code == 2
    assert err.strip() != ""


def test_exit_2_on_unknown_command(capsys):
    assert main(["no-such-command"]) == 2


def test_exit_3_on_nonconvergence(monkeypatch, capsys):
    import fdwpc.cli as cli

    def stall(*args, **kwargs):
        raise cli.solver.NonConvergenceError("stalled")

    monkeypatch.setattr(cli.solver, "solve", stall)
    code, out, err = run_cli(
        ["capacity-sweep", "--start", "0", "--stop", "0", "--step", "5"] + FAST, capsys
    )
    assert code == 3
    assert "converge" in err


def test_ratio_nan_on_dead_channel(tmp_path, capsys):
    # A dead channel zeroes both rates; the ratio column reports nan rather
    # than inventing a number.
    fpath = tmp_path / "dead.txt"
    fpath.write_text("0.0 1.0\n")
    code, out, err = run_cli(
        ["ratio-sweep", "--start", "40", "--stop", "40", "--step", "10",
         "--pp-watts", "0", "--fading-file", str(fpath)],
        capsys,
    )
    assert code == 0
    assert rows(out)[1][1] == "nan"
