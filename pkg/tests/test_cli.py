import json
import subprocess
import sys

import pytest

from padic_gibbs import __version__
from padic_gibbs.cli import evaluate, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# -- eval -----------------------------------------------------------------------


def test_eval_exp(capsys):
    code, out, _ = run(["eval", "--p", "3", "--prec", "8", "exp(3)"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["value"]["digits"][:2] == [1, 1]
    assert rep["digit_string"].endswith("11 · 3^0")
    assert rep["version"] == __version__


def test_eval_norm_text(capsys):
    code, out, _ = run(["eval", "--p", "3", "--format", "text", "norm(12)"], capsys)
    assert code == 0 and out.strip() == "1/3"


def test_eval_domain_error(capsys):
    code, _, err = run(["eval", "--p", "3", "exp(1)"], capsys)
    assert code == 3 and "domain" in err


@pytest.mark.parametrize("expr", ["exp(", "foo(3)", "3 ** x", "'a'"])
def test_eval_parse_errors(expr, capsys):
    code, _, _ = run(["eval", "--p", "3", expr], capsys)
    assert code == 2


def test_evaluate_arithmetic():
    x = evaluate("log(exp(9) * exp(-3)) - 6", 3, 12)
    assert x.is_zero() or x.valuation >= 12
    assert evaluate("(1/2) * 2 - 1", 5, 8).is_zero()
    assert evaluate("norm(1/9)", 3, 8) == 9
    assert evaluate("2 ** -1", 3, 5).unit == 122


# -- classify -------------------------------------------------------------------


def test_classify_unique_exit_code(capsys):
    code, out, _ = run(["classify", "--p", "5", "--J", "5", "--K", "5"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "unique"
    assert rep["config"] == {"p": 5, "J": 5, "K": 5, "H": 0, "precision": 16}


def test_classify_transition_exit_code(capsys):
    code, out, _ = run(["classify", "--p", "3", "--J", "-3", "--K", "9"], capsys)
    assert code == 10


def test_classify_unit_couplings_at_three(capsys):
    # recorded deviation: only the trivial translation-invariant solution exists
    code, out, _ = run(["classify", "--p", "3", "--J", "3", "--K", "3"], capsys)
    assert code == 20
    assert json.loads(out)["verdict"] == "inconclusive"


def test_classify_domain_exit_code(capsys):
    code, _, _ = run(["classify", "--p", "3", "--J", "1", "--K", "3"], capsys)
    assert code == 3


def test_classify_config_file(tmp_path, capsys):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps({"p": 7, "precision": 12, "J": {"num": 7, "den": 1}, "K": "49", "H": 7}))
    out = tmp_path / "verdict.json"
    code, stdout, _ = run(["classify", str(cfg), "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["config"]["K"] == "49" and rep["precision"] == 12


@pytest.mark.parametrize(
    "content",
    ["not json", "[1, 2]", json.dumps({"p": 4, "J": 4, "K": 4}), json.dumps({"p": 5, "J": 5}), json.dumps({"p": 5, "J": "x", "K": 5})],
)
def test_classify_bad_configs(content, tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    code, _, _ = run(["classify", str(cfg)], capsys)
    assert code == 2


def test_missing_config_file(capsys):
    code, _, _ = run(["classify", "/nonexistent/config.json"], capsys)
    assert code == 2


def test_precision_floor(capsys):
    code, _, _ = run(["classify", "--p", "5", "--J", "5", "--K", "5", "--prec", "3"], capsys)
    assert code == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["classify", "--bogus"])
    assert info.value.code == 2


def test_classify_output_is_deterministic(capsys):
    argv = ["classify", "--p", "3", "--J", "6", "--K", "-9", "--seed", "11"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


# -- check-compat / solve ------------------------------------------------------------


def test_check_compat_zero_field_passes(tmp_path, capsys):
    field = tmp_path / "field.json"
    rows = [[[1, i], 0, 0] for i in range(2)] + [[[2, i], 0, 0] for i in range(4)]
    field.write_text(json.dumps(rows))
    code, out, _ = run(["check-compat", "--p", "5", "--J", "5", "--K", "5", "--field", str(field)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] and rep["terms"] == 2187


def test_check_compat_failure_exit_code(tmp_path, capsys):
    field = tmp_path / "field.json"
    field.write_text(json.dumps({"uniform": [0, 0]}))
    code, _, _ = run(["check-compat", "--p", "5", "--J", "5", "--K", "5", "--H", "5", "--field", str(field)], capsys)
    assert code == 1


def test_check_compat_depth_limit(tmp_path, capsys):
    field = tmp_path / "field.json"
    field.write_text(json.dumps({"uniform": [0, 0]}))
    code, _, _ = run(["check-compat", "--p", "5", "--J", "5", "--K", "5", "--field", str(field), "--depth", "3"], capsys)
    assert code == 2


def test_check_compat_incomplete_field(tmp_path, capsys):
    field = tmp_path / "field.json"
    field.write_text(json.dumps([[[1, 0], 0, 0]]))
    code, _, _ = run(["check-compat", "--p", "5", "--J", "5", "--K", "5", "--field", str(field)], capsys)
    assert code == 2


def test_solve_single_certificate(capsys):
    code, out, _ = run(["solve", "--p", "5", "--J", "5", "--K", "5"], capsys)
    assert code == 0
    certs = json.loads(out)["certificates"]
    assert len(certs) == 1
    assert all(x["digits"][0] == 1 and not any(x["digits"][1:]) for x in certs[0]["point"])


# -- reproduce ------------------------------------------------------------------------


def test_reproduce_grid_file(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"p": 5, "J": 5, "K": 25, "H": 0}, {"p": 3, "J": -3, "K": 9, "H": 0}]))
    code, out, _ = run(["reproduce", str(grid), "--prec", "8"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert [c["verdict"] for c in rep["cells"]] == ["unique", "transition"]
    assert rep["deviations"] == 0


def test_reproduce_bad_grid(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"p": 5}]))
    code, _, _ = run(["reproduce", str(grid)], capsys)
    assert code == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "padic_gibbs.cli", "eval", "--p", "5", "--format", "text", "norm(50)"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "1/25"
