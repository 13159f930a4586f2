import math
import os
import subprocess
import tempfile

import pytest

pscur = pytest.importorskip("pscur")


def test_poly_eval_and_diff():
    assert pscur.poly_eval("z1*z2", ["z1", "z2"], [2, 3]) == 6
    assert pscur.poly_eval("w - z1*z2", ["w", "z1", "z2"], [6, 2, 3]) == 0
    d = pscur.poly_diff("z1^2*z2", ["z1", "z2"], 0)
    assert pscur.poly_eval(d, ["z1", "z2"], [3, 5]) == 30


def test_chi_profile():
    assert pscur.chi(0.5) == 0.0
    assert pscur.chi(2.5) == 1.0
    assert abs(pscur.chi(1.5) - 0.5) < 1e-13
    assert pscur.chi(1.5, 1) > 0.0


def test_cohom_verify():
    checks = pscur.cohom_verify()
    assert len(checks) > 20
    assert all(ok for _, ok in checks)


def test_list_and_run_cheap_oracle():
    names = pscur.list_oracles()
    assert "cohom_identities" in names
    assert "sturm1" in names
    with tempfile.TemporaryDirectory() as tmp:
        res = pscur.run_oracle("submersion_direct", out_dir=tmp, workers=2, no_cache=True)
        assert res["pass"]
        assert res["converged"]
        assert abs(res["value"].real - 27 * math.pi / 25) < 1e-3


def test_scenario_text_roundtrip():
    text = """
name smoke
kind pair
ambient 1
current mu 1
  dirac 0,0
end
testform phi 1 { (1) bump(0,0; 1.0) } boxc(1.1)
run mu=mu test=phi
expect re=1 im=0 tol=1e-12 mode=abs
"""
    with tempfile.TemporaryDirectory() as tmp:
        res = pscur.run_scenario_text(text, out_dir=tmp, no_cache=True)
        assert res["pass"]
        assert res["value"] == 1.0


def test_cli_cohom_verify():
    cli = os.environ.get("PSCUR_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI binary not exported")
    with tempfile.TemporaryDirectory() as tmp:
        out = subprocess.run(
            [cli, "cohom-verify", "--out", tmp], capture_output=True, text=True, timeout=60
        )
        assert out.returncode == 0
        assert "pass" in out.stdout
