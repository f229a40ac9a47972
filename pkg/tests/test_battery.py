"""
Tests for the verify-lemmas battery
"""
import json

import numpy as np
import pytest

from main import main
from services import battery


def test_kernel_check_uses_the_stated_bound():
    """|∇B_α − ∇B₀| ≤ √α·π/2 on every sampled radius"""
    result = battery.check_kernel(np.random.default_rng(0))
    assert result.passed
    assert result.detail["bound_holds"]
    assert 0.0 < result.detail["bound_ratio"] < 1.0
    assert result.detail["constant"] == pytest.approx(0.5 * np.pi, abs=1e-10)


def test_gamma_star_check():
    result = battery.check_gamma_star(np.random.default_rng(0))
    assert result.passed
    assert result.detail["value"] == pytest.approx(0.806, abs=0.01)


@pytest.mark.slow
def test_verify_lemmas_passes_and_ignores_thread_count(capsys):
    assert main(["--threads", "1", "verify-lemmas"]) == 0
    single = json.loads(capsys.readouterr().out)
    assert main(["--threads", "3", "verify-lemmas"]) == 0
    pooled = json.loads(capsys.readouterr().out)
    assert single["passed"]
    assert [c["name"] for c in single["checks"]] == [c["name"] for c in pooled["checks"]]
    assert [c["passed"] for c in pooled["checks"]] == [True] * len(pooled["checks"])
