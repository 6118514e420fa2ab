# SPDX-License-Identifier: MIT
import cmath
import math
import os
import subprocess

import numpy as np
import pytest

import levy_multiscale as lm


def test_cauchy_exponent_and_stationary_cf():
    model = lm.LevyMeasureModel.symmetric(1.0)
    assert lm.stable_exponent(model, 1.0).real == pytest.approx(-math.pi, abs=1e-12)
    assert lm.stationary_cf(model, 1.0).real == pytest.approx(math.exp(-math.pi), abs=1e-12)
    assert abs(lm.levy_exponent(model, 1.0) - lm.stable_exponent(model, 1.0)) < 1e-6


def test_assumptions_and_errors():
    assert lm.check_assumptions(lm.LevyMeasureModel.symmetric(1.5))["all_satisfied"]
    sub = lm.LevyMeasureModel.subordinator(0.5)
    assert not lm.check_assumptions(sub)["all_satisfied"]
    with pytest.raises(lm.AssumptionError):
        lm.sample_stationary(sub, n_samples=1000)
    with pytest.raises(ValueError):
        lm.LevyMeasureModel.symmetric(2.5)


def test_stationary_samples_match_characteristic_function():
    model = lm.LevyMeasureModel.symmetric(1.5)
    ys = lm.sample_stationary(model, n_samples=50000, seed=3)
    assert isinstance(ys, np.ndarray) and ys.shape == (50000,)
    empirical = np.mean(np.exp(1j * ys))
    assert abs(empirical - lm.stationary_cf(model, 1.0)) < 0.03
    again = lm.sample_stationary(model, n_samples=50000, seed=3)
    assert np.array_equal(ys, again)


def test_generator_of_identity():
    model = lm.LevyMeasureModel.symmetric(1.5)
    value, error = lm.generator_apply(lambda y: y, lambda y: 1.0, lambda y: 0.0, 1.0, model, 2.0)
    assert value == pytest.approx(-2.0, abs=error + 1e-12)


def test_volatility_means_and_closed_forms():
    sigma = lambda y: 0.1 if y < 0 else 0.3
    nodes, weights = [-1.0, 1.0], [0.5, 0.5]
    assert lm.effective_vol_quadratic(sigma, nodes, weights) == pytest.approx(math.sqrt(0.05), abs=1e-15)
    assert lm.effective_vol_harmonic(sigma, nodes, weights) < lm.effective_vol_quadratic(sigma, nodes, weights)
    assert lm.merton_value(0.2, 0.0, 1.0) == pytest.approx(2.0 * math.exp(0.040625), abs=1e-14)
    textbook_vol = math.sqrt(2.0) * 0.2
    d1 = (0.05 + 0.5 * textbook_vol**2) / textbook_vol
    d2 = d1 - textbook_vol
    phi = lambda z: 0.5 * math.erfc(-z / math.sqrt(2.0))
    assert lm.black_scholes(0.2, 1.0, 1.0) == pytest.approx(phi(d1) - math.exp(-0.05) * phi(d2), abs=1e-12)


def test_counterexample_and_lyapunov():
    result = lm.subordinator_counterexample(lm.LevyMeasureModel.subordinator(0.5))
    assert result["max_violation"] <= 1e-6
    assert len(result["y"]) == 401
    a, ok = lm.lyapunov_drift_check(lm.LevyMeasureModel.symmetric(1.5), 1.0, 5.0, [5.0, 10.0, 20.0])
    assert ok and a > 0.0


def test_config_and_experiment(tmp_path):
    with pytest.raises(ValueError, match="alpha"):
        lm.parse_config("[levy]\nalpha = 2.5\n")
    text = "[experiment]\nkind = counterexample\n[levy]\nfamily = one_sided\nalpha = 0.5\nsubordinator = true\n"
    rows, monotone = lm.run_experiment(text, tmp_path)
    assert monotone and rows[0]["gap"] <= 1e-6
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "gap_vs_epsilon.svg").exists()


CLI = os.environ.get("LEVY_MULTISCALE_CLI")


@pytest.mark.skipif(not CLI, reason="command-line tool path not provided")
def test_cli_exit_codes(tmp_path):
    good = tmp_path / "good.ini"
    good.write_text("[levy]\nalpha = 1.5\n")
    bad = tmp_path / "bad.ini"
    bad.write_text("[levy]\nalpha = 2.5\n")
    sub = tmp_path / "sub.ini"
    sub.write_text("[levy]\nfamily = one_sided\nalpha = 0.5\nsubordinator = true\n")

    def run(*args):
        return subprocess.run([CLI, *args], capture_output=True, text=True).returncode

    assert run("check-assumptions", "--config", str(good), "--out", str(tmp_path / "a")) == 0
    assert (tmp_path / "a" / "assumptions.csv").exists()
    assert run("check-assumptions", "--config", str(bad), "--out", str(tmp_path / "b")) == 1
    assert run("check-assumptions", "--config", str(sub), "--out", str(tmp_path / "c")) == 2
    assert run("invariant", "--config", str(sub), "--out", str(tmp_path / "d")) == 2
    assert run("invariant", "--config", str(tmp_path / "missing.ini")) in (1, 4)
    assert run("no-such-command") == 1
