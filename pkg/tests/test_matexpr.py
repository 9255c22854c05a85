import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsdae.errors import DimensionMismatch, EvalError, ParseError
from tsdae.matexpr import (
    CallableMatrixFunction,
    MatrixFunction,
    SampledMatrixFunction,
    TimeVaryingMatrix,
    constant_expr,
    eval_matrix,
    parse_expr,
    tabulate,
    tabulate_sigma,
)
from tsdae import worked_examples as wx
from tsdae.problem import load_problem
from tsdae.timescale import TimeScale


@pytest.mark.parametrize(
    "src,t,expected",
    [
        ("2*t+1", 3.0, 7.0),
        ("t - 1 - 1", 5.0, 3.0),
        ("t/2/2", 8.0, 2.0),
        ("-t^2", 3.0, -9.0),
        ("(-t)^2", 3.0, 9.0),
        ("2*t^3", 2.0, 16.0),
        ("-(t+1)", 4.0, -5.0),
        ("1e-3*t", 2.0, 0.002),
        (".5 + t", 1.0, 1.5),
        ("t^0", 7.0, 1.0),
    ],
)
def test_evaluate_follows_precedence_and_associativity(src, t, expected):
    assert parse_expr(src).evaluate(t) == pytest.approx(expected)


def test_printer_is_fully_parenthesised():
    assert parse_expr("-t^2").to_source() == "(-(t^2))"
    assert parse_expr("1 + 2*t").to_source() == "(1 + (2 * t))"
    assert parse_expr("(t-1)/t").to_source() == "((t - 1) / t)"


@pytest.mark.parametrize(
    "src,offset",
    [
        ("2t", 1),  # no implicit multiplication
        ("t + $", 4),
        ("t^-1", 2),
        ("t^1.5", 2),
        ("(t + 1", 6),
        ("t +", 3),
    ],
)
def test_parse_errors_carry_byte_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse_expr(src, location="A[1,1]")
    assert info.value.offset == offset
    assert "A[1,1]" in str(info.value)


def test_empty_expression_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_expr("  ")


def test_division_by_zero_is_an_eval_error():
    expr = parse_expr("1/(t-1)")
    assert expr.evaluate(3.0) == 0.5
    with pytest.raises(EvalError) as info:
        expr.evaluate(1.0)
    assert "DivisionByZero" in str(info.value)
    assert info.value.t == 1.0


def test_overflow_is_an_eval_error():
    with pytest.raises(EvalError):
        parse_expr("t^400").evaluate(1e10)


def test_constant_expr_round_trips_negative_values():
    e = constant_expr(-2.5)
    assert e.evaluate(0.0) == -2.5
    assert e.to_source() == "(-2.5)"
    assert parse_expr(e.to_source()).evaluate(0.0) == -2.5


_leaves = st.sampled_from(["t", "1", "2.5", "3", "0.25"])


def _extend(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda x: f"({x[0]} {x[1]} {x[2]})"),
        children.map(lambda c: f"(-{c})"),
        children.map(lambda c: f"({c})^2"),
    )


@settings(max_examples=100, deadline=None)
@given(src=st.recursive(_leaves, _extend, max_leaves=8), t=st.floats(min_value=-2.0, max_value=2.0))
def test_printed_source_reparses_to_the_same_expression(src, t):
    expr = parse_expr(src)
    again = parse_expr(expr.to_source())
    assert again.to_source() == expr.to_source()
    assert again.evaluate(t) == expr.evaluate(t)


def test_matrix_function_reports_failing_entry():
    mf = MatrixFunction.from_sources([["1", "t/0"]], name="C")
    with pytest.raises(EvalError) as info:
        mf.evaluate(2.0)
    assert info.value.entry == (0, 1)
    assert "entry (1,2)" in str(info.value)


def test_matrix_function_rejects_ragged_rows():
    with pytest.raises(DimensionMismatch):
        MatrixFunction.from_sources([["1", "2"], ["3"]], name="A")


def test_matrix_function_parse_error_names_entry():
    with pytest.raises(ParseError) as info:
        MatrixFunction.from_sources([["1", "2"], ["3", "t**2"]], name="A")
    assert info.value.location == "A[2,2]"


def test_matrix_function_evaluate_and_sources():
    mf = MatrixFunction.from_sources([["t", "1"], ["0", "t^2"]])
    np.testing.assert_array_equal(mf.evaluate(3.0), [[3.0, 1.0], [0.0, 9.0]])
    assert mf.to_sources() == [["t", "1"], ["0", "(t^2)"]]
    const = MatrixFunction.constant(np.array([[1.5, -2.0]]))
    np.testing.assert_array_equal(const.evaluate(10.0), [[1.5, -2.0]])


def test_all_matrix_function_kinds_satisfy_the_protocol():
    ts = TimeScale.integer_range(0, 3)
    mf = MatrixFunction.from_sources([["t"]])
    cf = CallableMatrixFunction((1, 1), lambda t: np.array([[2 * t]]))
    sf = SampledMatrixFunction(tabulate(mf, ts))
    for m in (mf, cf, sf):
        assert isinstance(m, TimeVaryingMatrix)
    assert sf.evaluate(2.0)[0, 0] == 2.0
    assert cf(1.5)[0, 0] == 3.0


def test_tabulate_sigma_repeats_final_point():
    ts = TimeScale.integer_range(0, 3)
    samples = tabulate_sigma(MatrixFunction.from_sources([["t"]]), ts)
    assert samples.values[:, 0, 0].tolist() == [1.0, 2.0, 3.0, 3.0]


def test_eval_matrix_on_example2_leading_term(example2_path):
    B = load_problem(example2_path).B
    B2 = eval_matrix(B, 2.0)
    assert B2.shape == (3, 5)
    np.testing.assert_allclose(B2, wx.ex2_B(2.0))
    np.testing.assert_array_equal(eval_matrix(B, 2.0), B.evaluate(2.0))
