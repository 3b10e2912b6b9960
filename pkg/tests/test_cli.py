"""Expression grammar and the CLI surface, including byte determinism."""

import filecmp
import json
import math
import os

import numpy as np
import pytest

from colombeau.cli import main
from colombeau.errors import ExpressionError
from colombeau.exprs import eval_scale_expression, parse, to_sympy
from colombeau.gnum import Symbolic


class TestExpressions:
    def test_monomial_sum(self):
        v = eval_scale_expression("alpha^2 + 3*alpha^5")
        assert v.valuation() == 2.0
        assert v.sharp_norm() == math.exp(-2.0)

    def test_negative_powers_and_division(self):
        v = eval_scale_expression("1/alpha - alpha^-1")
        assert v.valuation() == math.inf

    def test_parse_error_position(self):
        with pytest.raises(ExpressionError) as err:
            parse("alpha^2 + $")
        assert err.value.position == 10

    def test_unknown_function_rejected(self):
        with pytest.raises(ExpressionError):
            parse("tanh(alpha)")

    def test_transcendental_rejected_for_scales(self):
        with pytest.raises(ExpressionError):
            eval_scale_expression("sin(alpha)")

    def test_smooth_expression_roundtrip(self):
        import sympy as sp
        e = to_sympy("sin(x) + 0.5*x^2", "x")
        x = sp.Symbol("x")
        assert sp.simplify(e - (sp.sin(x) + 0.5 * x ** 2)) == 0


def run_cli(tmp_path, name, args):
    out = tmp_path / name
    code = main(["--out", str(out)] + args)
    return code, out


class TestCliCommands:
    def test_norm(self, tmp_path):
        code, out = run_cli(tmp_path, "n", ["norm", "--expr",
                                            "alpha^2 + 3*alpha^5"])
        assert code == 0
        rep = json.loads((out / "norm.json").read_text())
        assert rep["valuation"] == 2.0
        assert abs(rep["sharp_norm"] - math.exp(-2)) < 1e-15
        assert rep["meta"]["config_hash"]
        lines = (out / "norm_net.csv").read_text().splitlines()
        assert lines[0] == "eps,v0" and len(lines) == 49

    def test_hseq_certifies(self, tmp_path):
        code, out = run_cli(tmp_path, "h", ["hseq", "--rule", "1/n",
                                            "--r", "2"])
        assert code == 0
        rep = json.loads((out / "hseq.json").read_text())
        assert rep["radii"][0]["certified"]
        assert rep["radii"][0]["n0_rule"] == "floor(eps^-2+1.5)"

    def test_density_family(self, tmp_path):
        code, out = run_cli(tmp_path, "d", ["density", "--family", "6"])
        assert code == 0
        rep = json.loads((out / "density.json").read_text())
        assert abs(rep["total"] - 1.0) < 6e-3

    def test_membrane(self, tmp_path):
        spec = json.dumps({"a": "0", "b": "1",
                           "probes": ["0.5", "0", "-0.3"]})
        code, out = run_cli(tmp_path, "m", ["membrane", "--spec", spec])
        assert code == 0
        rep = json.loads((out / "membrane.json").read_text())
        kinds = [p["kind"] for p in rep["probes"]]
        assert kinds == ["Interior", "Boundary", "Exterior"]
        assert rep["interleaved_endpoints"] == "Boundary"

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"tolerances\": {\"v_negl\": -1}}")
        code = main(["--config", str(bad), "--out",
                     str(tmp_path / "x"), "norm", "--expr", "alpha"])
        assert code == 2

    def test_computation_error_exit_code(self, tmp_path):
        code = main(["--out", str(tmp_path / "e"), "norm",
                     "--expr", "sin(alpha)"])
        assert code == 3
        rep = json.loads((tmp_path / "e" / "error.json").read_text())
        assert rep["exit_code"] == 3


def _tree_bytes(root):
    out = {}
    for dirpath, _dirs, files in os.walk(root):
        for f in sorted(files):
            p = os.path.join(dirpath, f)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


class TestDeterminism:
    @pytest.mark.parametrize("args", [
        ["norm", "--expr", "alpha^2 - 7*alpha^3"],
        ["hseq", "--rule", "1/n", "--r", "1,2"],
        ["density", "--family", "6"],
        ["riemann", "--f", "x", "--mesh", "alpha^1",
         "--k-lo", "0", "--k-hi", "1"],
        ["membrane", "--spec",
         '{"a": "0", "b": "1", "probes": ["0.5"]}'],
    ])
    def test_repeat_runs_identical(self, tmp_path, args):
        code1 = main(["--out", str(tmp_path / "a")] + args)
        code2 = main(["--out", str(tmp_path / "b")] + args)
        assert code1 == code2 == 0
        ta = _tree_bytes(tmp_path / "a")
        tb = _tree_bytes(tmp_path / "b")
        assert ta.keys() == tb.keys() and all(ta[k] == tb[k] for k in ta)
