"""Command-line interface: problem files, reports, exit codes."""

import json

from zpint.cli import run_command

GENUS0_PROBLEM = {
    "rank": 1,
    "zeros": [{"point": [2.0, 0.0], "x": [[1.0, 0.0]]}],
    "poles": [{"point": [3.0, 0.0], "u": [[1.0, 0.0]]}],
}

LINE_PROBLEM = {
    "tau": [0.3, 0.9],
    "chi": {"a": [0.23], "b": [0.41]},
    "chi_tilde": "auto",
    "zeros": [[0.13, 0.27], [0.61, 0.43]],
    "poles": [[0.37, 0.71], [0.83, 0.11]],
    "base_point": [0.52, 0.18],
    "base_value": [1.3, -0.4],
}


def run_json(argv, path):
    code = run_command(argv + ["--out", str(path)])
    with open(path) as handle:
        return code, json.load(handle)


def test_theta_command(tmp_path):
    code, report = run_json(["theta", "--tau", "0+1i", "--z", "0"],
                            tmp_path / "r.json")
    assert code == 0
    value = complex(*report["value"])
    assert abs(value - 1.0864348112) < 1e-9
    assert report["passed"]


def test_theta_with_characteristics_and_gradient(tmp_path):
    code, report = run_json(
        ["theta", "--tau", "0.3+0.9i", "--z", "0.2+0.1i",
         "--char", "0.5:0.5", "--grad"],
        tmp_path / "r.json",
    )
    assert code == 0
    assert "gradient" in report


def test_solve_genus0_fixture(tmp_path):
    problem = tmp_path / "p.json"
    problem.write_text(json.dumps(GENUS0_PROBLEM))
    code, report = run_json(["solve-genus0", str(problem), "--seed", "3"],
                            tmp_path / "r.json")
    assert code == 0
    by_z = {tuple(e["z"]): e["value"] for e in report["evaluations"]}
    value = complex(*by_z[(10.0, 0.0)][0][0])
    assert abs(value - 8 / 7) < 1e-12
    assert report["passed"]


def test_solve_line(tmp_path):
    problem = tmp_path / "p.json"
    problem.write_text(json.dumps(LINE_PROBLEM))
    code, report = run_json(["solve-line", str(problem), "--samples", "20"],
                            tmp_path / "r.json")
    assert code == 0
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["mult_vs_partial_fraction"]["residual"] < 1e-9


def test_fay_check(tmp_path):
    code, report = run_json(
        ["fay-check", "--tau", "0+1i", "--samples", "30", "--seed", "7"],
        tmp_path / "r.json",
    )
    assert code == 0
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["fay.random_sweep"]["residual"] < 1e-9


def test_reports_are_reproducible(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    run_command(["fay-check", "--samples", "10", "--seed", "11", "--out", str(a)])
    run_command(["fay-check", "--samples", "10", "--seed", "11", "--out", str(b)])
    ra = json.loads(a.read_text())
    rb = json.loads(b.read_text())
    ra.pop("elapsed_s")
    rb.pop("elapsed_s")
    assert ra == rb


def test_exit_code_2_on_bad_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_command(["solve-genus0", str(bad)]) == 2
    ok_syntax = tmp_path / "empty.json"
    ok_syntax.write_text(json.dumps({"rank": 1, "zeros": []}))
    assert run_command(["solve-genus0", str(ok_syntax)]) == 2
    assert run_command(["theta", "--tau", "huh"]) == 2


def test_exit_code_1_on_check_failure(tmp_path):
    # shrinking every tolerance by 1e-16 makes honest residuals fail
    code = run_command(["fay-check", "--samples", "5", "--seed", "1",
                        "--tol-scale", "1e-16", "--out",
                        str(tmp_path / "r.json")])
    assert code == 1


ABSINT_PROBLEM = {
    "tau": [0.3, 0.9],
    "rank": 1,
    "chi": {"blocks": [{"a": [0.23], "b": [0.41]}]},
    # bundle difference matching the divisor class of the data below
    "chi_tilde": {"blocks": [{"a": [0.09666666666666668],
                              "b": [-0.010000000000000009]}]},
    "zeros": [
        {"point": [0.13, 0.27], "vectors": [[[1.0, 0.0]]]},
        {"point": [0.61, 0.43], "vectors": [[[1.0, 0.0]]]},
    ],
    "poles": [
        {"point": [0.37, 0.71], "vectors": [[[1.0, 0.0]]]},
        {"point": [0.83, 0.11], "vectors": [[[1.0, 0.0]]]},
    ],
    "base_point": [0.52, 0.18],
    "base_value": [[[1.3, -0.4]]],
}


def test_conint_problem_file(tmp_path):
    problem = tmp_path / "absint.json"
    problem.write_text(json.dumps(ABSINT_PROBLEM))
    code, report = run_json(["conint", str(problem), "--samples", "20"],
                            tmp_path / "r.json")
    assert code == 0
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["gamma_equality"]["residual"] < 1e-8
    assert checks["intertwining"]["residual"] < 1e-7
    assert "gamma" in report


def test_theta_omega_alias(tmp_path):
    code, report = run_json(["theta", "--omega", "i", "--z", "0"],
                            tmp_path / "r.json")
    assert code == 0
    assert abs(complex(*report["value"]) - 1.0864348112) < 1e-9


def test_theta_omega_file_genus2(tmp_path):
    omega_file = tmp_path / "omega.json"
    omega_file.write_text(json.dumps({
        "genus": 2,
        "omega": [[[0.3, 1.1], [0.1, 0.2]], [[0.1, 0.2], [-0.2, 0.9]]],
    }))
    code, report = run_json(
        ["theta", "--omega-file", str(omega_file), "--z", "0.2+0.1i,-0.3+0.05i"],
        tmp_path / "r.json",
    )
    assert code == 0
    import oracles

    ref = oracles.theta_char_direct(
        [0, 0], [0, 0], [0.2 + 0.1j, -0.3 + 0.05j],
        [[0.3 + 1.1j, 0.1 + 0.2j], [0.1 + 0.2j, -0.2 + 0.9j]], radius=20,
    )
    assert abs(complex(*report["value"]) - complex(ref)) < 1e-11


def test_detrep_export(tmp_path):
    out = tmp_path / "pencil.json"
    code = run_command(["detrep", "--export", str(out), "--out",
                        str(tmp_path / "r.json")])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["M"] == 3
    from zpint.detrep import PencilRep

    pencil = PencilRep.from_json(out.read_text())
    assert pencil.size == 3
