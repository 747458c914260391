"""Full acceptance suite: one test per end-to-end numerical criterion.

Each test prints its own [PASS]/[FAIL] line with the measured detail, so a
plain pytest run doubles as the acceptance report.
"""

import pytest

from bathdyn.checks import run_all


@pytest.fixture(scope="module")
def results():
    return {r.index: r for r in run_all()}


def _report(results, index):
    r = results[index]
    tag = "PASS" if r.passed else "FAIL"
    print(f"[{tag}] {r.index}. {r.name}: {r.detail}")
    assert r.passed, f"{r.name}: {r.detail}"


def test_retarded_determinant_unity(results):
    _report(results, 1)


def test_limit_determinants(results):
    _report(results, 2)


def test_trace_log_rates(results):
    _report(results, 3)


def test_kramers_ordering_dichotomy(results):
    _report(results, 4)


def test_smoluchowski_ordering_dichotomy(results):
    _report(results, 5)


def test_ensemble_grid_agreement(results):
    _report(results, 6)


def test_stationarity(results):
    _report(results, 7)


def test_kernel_contracts(results):
    _report(results, 8)


def test_interference_decay(results):
    _report(results, 9)


def test_reproducibility(results):
    _report(results, 10)
