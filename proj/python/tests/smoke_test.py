"""End-to-end smoke checks of the python module against known values."""

import json
import math
import os
import sys

for var in ("CRNGNET_MODULE_DIR", "CRNGNET_PKG_DIR"):
    path = os.environ.get(var)
    if path:
        sys.path.insert(0, path)

import crngnet  # noqa: E402

MAC_COMMON = {
    "access_structure": {
        "messages": ["1", "2", "12"],
        "encoders": ["1", "2"],
        "decoders": ["1", "2"],
        "arcs": [["1", "1"], ["2", "2"], ["12", "1"], ["12", "2"]],
        "demands": {"1": ["1", "12"], "2": ["2", "12"]},
    }
}

P2P_BSC = {
    "access_structure": {
        "messages": ["m"],
        "encoders": ["1"],
        "decoders": ["1"],
        "arcs": [["m", "1"]],
        "demands": {"1": ["m"]},
    },
    "channel": {"preset": "bsc", "p": 0.1},
    "code": {"n": 8, "q": 2, "per_message": {"m": {"l_f": 3, "l_g": 3}}},
    "run": {"trials": 60, "seed": 5, "threads": 1, "rate_points": [{"m": 0.25}, {"m": 0.8}]},
}


def test_verify():
    rec = crngnet.verify(MAC_COMMON)
    assert rec["payload"]["all_pass"] is True
    family = rec["payload"]["sets"]["family"]
    assert len(family) == 3
    assert sorted(family[0]["encoders"]) == ["1", "2"]
    assert family[0]["messages"] == ["12"]


def test_region_projects_the_noisy_capacity():
    rec = crngnet.region(P2P_BSC)
    h = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
    found = False
    for row in rec["payload"]["projected"]["rows"]:
        coeff = row["coeffs"].get("R_m")
        if coeff and coeff > 0 and abs(row["bound"] / coeff - (1 - h)) < 1e-9:
            found = True
    assert found, "projected system misses the expected rate bound"
    points = rec["payload"]["rate_points"]
    assert points[0]["feasible"] is True
    assert points[1]["feasible"] is False


def test_simulate_is_deterministic():
    one = dict(P2P_BSC, run=dict(P2P_BSC["run"], threads=1))
    three = dict(P2P_BSC, run=dict(P2P_BSC["run"], threads=3))
    r1 = crngnet.simulate(one)
    r3 = crngnet.simulate(three)
    assert r1["payload"]["p_hat"] == r3["payload"]["p_hat"]
    assert r1["payload"] == r3["payload"]


def test_hash_parameters():
    alpha, beta = crngnet.hash_parameters("uniform", 2, 3)
    assert alpha == 1.0
    assert beta == 0.0
    alpha_s, beta_s = crngnet.hash_parameters("sparse", 2, 2, 2, 1)
    assert alpha_s == 1.0
    assert beta_s > 0.0


def test_conditional_entropy():
    # uniform bit through a 0.1 flip
    probs = [0.45, 0.05, 0.05, 0.45]
    h = crngnet.conditional_entropy(probs, [2, 2], [0], [1])
    want = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
    assert abs(h - want) < 1e-12


def test_linear_extension():
    order = crngnet.linear_extension([[0], [0, 1], [1]], 2)
    assert order[0] == [0, 1]
    assert sorted(map(tuple, order[1:])) == [(0,), (1,)]


def test_decision_comparison():
    st, mp, ratio = crngnet.decision_comparison([[0.9, 0.1], [0.9, 0.1]], [0.5, 0.5])
    assert abs(st - 0.18) < 1e-12
    assert abs(mp - 0.10) < 1e-12
    assert abs(ratio - 1.8) < 1e-12


def test_validate_reports_errors():
    bad = json.loads(json.dumps(MAC_COMMON))
    bad["access_structure"]["arcs"].append(["1", "nope"])
    errors = crngnet.validate(bad)
    assert errors and "unknown encoder" in errors[0]
    assert crngnet.validate(MAC_COMMON) == []


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
