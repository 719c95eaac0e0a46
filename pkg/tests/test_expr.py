import pytest

from grwcert.expr import (Binary, Coord, EvalDomainError, Param, ParseError,
                          Power, Unary, UnknownSymbolError, depth, eval_jet3,
                          eval_value, parse)


class TestGrammar:
    def test_three_node_deep_tree(self):
        tree = parse("t^2 + x*t", ["t", "x"])
        assert isinstance(tree, Binary) and tree.op == "+"
        assert isinstance(tree.left, Power) and tree.left.exponent == 2.0
        assert isinstance(tree.right, Binary) and tree.right.op == "*"
        assert depth(tree) == 3

    def test_malformed_call_offset(self):
        with pytest.raises(ParseError) as err:
            parse("q(", ["t"])
        assert err.value.offset == 2

    def test_parameter_node(self):
        tree = parse("exp(H*t)", ["t"], ["H"])
        assert isinstance(tree, Unary) and tree.op == "exp"
        assert isinstance(tree.arg.left, Param)
        assert isinstance(tree.arg.right, Coord)

    def test_unknown_identifier_named(self):
        with pytest.raises(UnknownSymbolError) as err:
            parse("t + foo", ["t"])
        assert err.value.symbol == "foo"

    def test_unknown_function_named(self):
        with pytest.raises(UnknownSymbolError) as err:
            parse("arctan(t)", ["t"])
        assert err.value.symbol == "arctan"

    def test_empty_expression(self):
        with pytest.raises(ParseError):
            parse("   ", ["t"])

    def test_precedence_pow_over_unary_minus(self):
        # -t^2 is -(t^2)
        assert eval_value(parse("-t^2", ["t"]), (3.0,), {}) == -9.0

    def test_precedence_mul_over_add(self):
        assert eval_value(parse("1+2*3", ["t"]), (0.0,), {}) == 7.0

    def test_left_associative_subtraction(self):
        assert eval_value(parse("10-4-3", ["t"]), (0.0,), {}) == 3.0

    def test_left_associative_pow(self):
        # documented grammar quirk: (2^3)^2, not 2^(3^2)
        assert eval_value(parse("2^3^2", ["t"]), (0.0,), {}) == 64.0

    def test_constant_folded_exponent(self):
        tree = parse("t^(2/3)", ["t"])
        assert isinstance(tree, Power)
        assert tree.exponent == pytest.approx(2.0 / 3.0)

    def test_non_constant_exponent_rejected(self):
        with pytest.raises(ParseError) as err:
            parse("t^x", ["t", "x"])
        assert "constant" in str(err.value)

    def test_negative_exponent(self):
        assert eval_value(parse("t^-2", ["t"]), (2.0,), {}) == 0.25

    def test_scientific_literal(self):
        assert eval_value(parse("1e-3 + t", ["t"]), (0.0,), {}) == 1e-3

    def test_trailing_garbage(self):
        with pytest.raises(ParseError) as err:
            parse("t )", ["t"])
        assert err.value.offset == 2

    def test_unexpected_character(self):
        with pytest.raises(ParseError) as err:
            parse("t @ 2", ["t"])
        assert err.value.offset == 2

    def test_whitespace_tolerant(self):
        assert eval_value(parse("  1.5 *  ( t + 2 ) ", ["t"]), (1.0,), {}) == 4.5


class TestEvaluation:
    def test_unbound_parameter(self):
        tree = parse("H*t", ["t"], ["H"])
        with pytest.raises(EvalDomainError) as err:
            eval_value(tree, (1.0,), {})
        assert "H" in str(err.value)

    def test_domain_error_names_node(self):
        tree = parse("1 + ln(t)", ["t"])
        with pytest.raises(EvalDomainError) as err:
            eval_jet3(tree, (-1.0,), {})
        assert err.value.op == "ln"
        assert err.value.offset == 4

    def test_div_by_zero_location(self):
        tree = parse("1/(t-1)", ["t"])
        with pytest.raises(EvalDomainError) as err:
            eval_value(tree, (1.0,), {})
        assert err.value.op == "div"

    def test_jet_and_value_agree(self):
        tree = parse("sinh(t)*cos(x) + t^3/(1.5+x^2)", ["t", "x"])
        point = (0.7, -0.4)
        assert eval_jet3(tree, point, {}).value == pytest.approx(
            eval_value(tree, point, {}), rel=1e-15)

    def test_parameters_bound(self):
        tree = parse("exp(H*t)", ["t"], ["H"])
        assert eval_value(tree, (2.0,), {"H": 0.5}) == pytest.approx(
            2.718281828459045, rel=1e-12)

    def test_immutability(self):
        tree = parse("t+1", ["t"])
        with pytest.raises(Exception):
            tree.op = "-"
