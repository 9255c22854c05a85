import dataclasses
import time

import numpy as np
import pytest

from tsdae.chain import IndexFlag
from tsdae.errors import InputError, NotIndexOne
from tsdae.matexpr import MatrixFunction
from tsdae.problem import load_problem
from tsdae.schemas import CheckResult
from tsdae.verify import (
    analyze_problem,
    delta_calculus_checks,
    example1_checks,
    example2_checks,
    form_suite,
    identity_suite,
    level1_suite,
    oracle_suite,
    run_checks,
    verify_problem,
)


def _failed(results):
    return [(r.name, r.value, r.detail) for r in results if not r.passed]


def test_run_checks_keeps_submission_order():
    def slow():
        time.sleep(0.05)
        return [CheckResult(name="slow", passed=True)]

    def fast():
        return [CheckResult(name="fast", passed=True), CheckResult(name="fast-2", passed=True)]

    results = run_checks([("slow", slow), ("fast", fast)], workers=2, tag="test")
    assert [r.name for r in results] == ["slow", "fast", "fast-2"]


def test_run_checks_turns_domain_errors_into_failed_results():
    def broken():
        raise NotIndexOne("G1 is singular")

    (result,) = run_checks([("broken", broken)], workers=1)
    assert not result.passed
    assert result.detail.startswith("NotIndexOne")


def test_run_checks_propagates_input_errors():
    def bad_input():
        raise InputError("missing file")

    with pytest.raises(InputError):
        run_checks([("bad", bad_input)], workers=1)


def test_analyze_example2(example2_path):
    analysis = analyze_problem(load_problem(example2_path))
    assert analysis.index_flag is IndexFlag.index1
    assert len(analysis.chain) == 11
    assert _failed(analysis.checks) == []


def test_analyze_example1_reports_failed_identities(example1_path):
    analysis = analyze_problem(load_problem(example1_path))
    assert analysis.index_flag is IndexFlag.index1
    failed = {name for name, *_ in _failed(analysis.checks)}
    assert {"identity AP=A", "identity A1invA=P", "identity kerP=kerA"} <= failed


def test_analyze_stops_at_the_chain_for_higher_index(example2_path):
    spec = load_problem(example2_path)
    level1 = dataclasses.replace(
        spec,
        n=3,
        m=2,
        A=MatrixFunction.constant(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])),
        B=MatrixFunction.constant(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])),
        C=MatrixFunction.constant(np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])),
        f=MatrixFunction.constant(np.zeros((3, 1))),
        x0=None,
    )
    analysis = analyze_problem(level1)
    assert analysis.index_flag is IndexFlag.not_index_le_1
    assert analysis.ds is None
    assert [c.name for c in analysis.checks] == ["index<=1"]
    assert not analysis.checks[0].passed
    assert not verify_problem(level1).passed


def test_verify_example2(example2_path):
    result = verify_problem(load_problem(example2_path), seed=3, workers=2)
    assert _failed(result.checks) == []
    assert result.passed
    assert result.reversibility <= 1e-8
    assert result.oracle_gap <= 1e-8


def test_verify_without_initial_data_uses_ones(example2_path):
    spec = dataclasses.replace(load_problem(example2_path), x0=None, t0=None)
    result = verify_problem(spec, workers=1)
    assert result.passed
    assert any(c.name == "initial data" for c in result.checks)
    np.testing.assert_array_equal(result.trajectory.x0, np.ones(5))


def test_verify_example1_fails(example1_path):
    result = verify_problem(load_problem(example1_path), workers=1)
    assert not result.passed


def test_example2_checks_pass():
    assert _failed(example2_checks()) == []


def test_example1_checks_pass():
    results = example1_checks()
    assert _failed(results) == []
    assert {r.name for r in results} >= {
        "example1 f-coefficient (1,3)",
        "example1 detects AP=A",
        "example1 detects kerP=kerA",
        "example1 detects A1inv-identities",
    }


def test_identity_suite_quick():
    assert _failed(identity_suite(11, 10)) == []


def test_level1_suite():
    assert _failed(level1_suite(11, 20)) == []


def test_oracle_suite_quick():
    assert _failed(oracle_suite(11, 10)) == []


def test_form_suite():
    assert _failed(form_suite(11, 5)) == []


def test_delta_calculus_checks():
    assert _failed(delta_calculus_checks(11)) == []


@pytest.mark.slow
def test_identity_suite_full():
    start = time.perf_counter()
    assert _failed(identity_suite(20240531, 200)) == []
    assert time.perf_counter() - start < 30.0


@pytest.mark.slow
def test_oracle_suite_full():
    assert _failed(oracle_suite(20240531, 50)) == []
