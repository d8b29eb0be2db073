"""Exercises the command-line tool end to end: outputs and exit codes."""

import json
import os
import subprocess
import sys
import tempfile

CLI = sys.argv[1]
CONFIG_DIR = sys.argv[2]


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def main():
    out_dir = tempfile.mkdtemp(prefix="crngnet_cli_")

    # verify writes result files and succeeds
    res = run("verify", "--config", os.path.join(CONFIG_DIR, "mac_three_verify.json"),
              "--out", out_dir)
    assert res.returncode == 0, res.stderr
    with open(os.path.join(out_dir, "result.json")) as fh:
        record = json.load(fh)
    assert record["command"] == "verify"
    assert record["payload"]["all_pass"] is True
    assert len(record["payload"]["sets"]["family"]) == 5
    with open(os.path.join(out_dir, "result.csv")) as fh:
        header = fh.readline().strip()
    assert header == "check,pass,witness"

    # simulate with overrides; summary lands in the csv
    res = run("simulate", "--config", os.path.join(CONFIG_DIR, "p2p_noiseless.json"),
              "--trials", "50", "--seed", "7", "--out", out_dir)
    assert res.returncode == 0, res.stderr
    with open(os.path.join(out_dir, "result.json")) as fh:
        record = json.load(fh)
    assert record["payload"]["trials"] == 50
    assert 0.0 <= record["payload"]["p_hat"] <= 1.0

    # the shipped operating point decodes reliably at full trial count
    res = run("simulate", "--config", os.path.join(CONFIG_DIR, "p2p_noiseless.json"),
              "--out", out_dir)
    assert res.returncode == 0, res.stderr
    with open(os.path.join(out_dir, "result.json")) as fh:
        record = json.load(fh)
    assert record["payload"]["trials"] == 500
    assert record["payload"]["p_hat"] <= 0.1

    # region on the noisy channel: the projected rate bound shows in the csv
    res = run("region", "--config", os.path.join(CONFIG_DIR, "p2p_bsc.json"), "--out", out_dir)
    assert res.returncode == 0, res.stderr
    with open(os.path.join(out_dir, "result.csv")) as fh:
        csv_text = fh.read()
    projected = [line for line in csv_text.splitlines() if line.startswith("projected")]
    assert any("0.531004406411" in line for line in projected), projected

    # bounds
    res = run("bounds", "--config", os.path.join(CONFIG_DIR, "p2p_bsc.json"), "--out", out_dir)
    assert res.returncode == 0, res.stderr
    with open(os.path.join(out_dir, "result.json")) as fh:
        record = json.load(fh)
    assert record["payload"]["rhs_total"] > 0

    # schema violations exit with 2
    bad = os.path.join(out_dir, "bad.json")
    with open(bad, "w") as fh:
        json.dump({"access_structure": {"messages": ["a"], "encoders": ["1"],
                                        "decoders": ["1"], "arcs": [["a", "zz"]],
                                        "demands": {"1": ["a"]}}}, fh)
    res = run("verify", "--config", bad)
    assert res.returncode == 2, (res.returncode, res.stderr)
    assert "unknown encoder" in res.stderr

    # enumeration guards exit with 3
    huge = os.path.join(out_dir, "huge.json")
    with open(huge, "w") as fh:
        json.dump({
            "access_structure": {"messages": ["m"], "encoders": ["1"], "decoders": ["1"],
                                 "arcs": [["m", "1"]], "demands": {"1": ["m"]}},
            "channel": {"preset": "noiseless"},
            "code": {"n": 60, "q": 2, "per_message": {"m": {"l_f": 0, "l_g": 1}}},
            "run": {"trials": 2, "seed": 1}
        }, fh)
    res = run("simulate", "--config", huge)
    assert res.returncode == 3, (res.returncode, res.stderr)
    assert "guard" in res.stderr

    # unknown flags exit with 2
    res = run("simulate", "--config", bad, "--nonsense")
    assert res.returncode == 2

    print("cli checks passed")


if __name__ == "__main__":
    main()
