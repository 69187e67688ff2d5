import random
import warnings

import pytest
from hypothesis import given, strategies as st

from orbindex.corpus import random_matrix, random_weyl, reference_models
from orbindex.exactnum import CycloScalar
from orbindex.model import build_model
from orbindex.parsing import (ParseError, TruncationWarning, parse_observable, parse_scalar,
                              parse_scalar_literal, render_matrix, render_weyl)
from orbindex.weyl import MatrixWeyl, WeylElement

MODELS = reference_models(1, hbar_trunc=3, weight_trunc=8) + reference_models(2, hbar_trunc=3, weight_trunc=8)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
@given(seed=st.integers(0, 10_000))
def test_render_parse_round_trip(model, seed):
    x = random_matrix(random.Random(seed), model, 3, 3, 2)
    assert (parse_observable(render_matrix(x), model) - x).is_zero()


def test_parse_simple_observable():
    model = build_model(1, 1, 1, 1, [])
    x = parse_observable("3/2*y1^2*h - y2 + (y1 + 1)^2", model)
    y1, y2 = WeylElement.variable(model, 0), WeylElement.variable(model, 1)
    want = y1.commutative_mul(y1).hbar_shift(1).scale(CycloScalar.rational(1, "3/2")) - y2 + \
        y1.commutative_mul(y1) + y1.scale(2) + 1
    assert x.entries[0][0] == want


def test_parse_roots_of_unity_and_z_coordinates():
    model = build_model(1, 0, 1, 3, [1])
    x = parse_observable("zeta3^2*z1 + zeta3^-1*z2", model).entries[0][0]
    assert render_weyl(x) == "-z1 - zeta3^1*z1 - z2 - zeta3^1*z2"


def test_parse_matrix_observable():
    model = build_model(1, 1, 2, 1, [])
    x = parse_observable("[y1, 0; h, y2]", model)
    assert isinstance(x, MatrixWeyl)
    assert render_matrix(x) == "[y1, 0; h^1, y2]"


@pytest.mark.parametrize("src,line,column", [
    ("y1 +", 1, 5),
    ("y1 * * y2", 1, 6),
    ("y3", 1, 1),
    ("y1 )", 1, 4),
    ("y1 +\n  ^2", 2, 3),
])
def test_parse_errors_report_position(src, line, column):
    model = build_model(1, 1, 1, 1, [])
    with pytest.raises(ParseError) as info:
        parse_observable(src, model)
    assert (info.value.line, info.value.column) == (line, column)


def test_matrix_size_must_match_rank():
    model = build_model(1, 1, 2, 1, [])
    with pytest.raises(ParseError, match="r=2"):
        parse_observable("[y1]", model)


def test_truncation_warning():
    model = build_model(1, 1, 1, 1, [], None, 2, 3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        x = parse_observable("y1^4 + y2", model)
    assert any(issubclass(w.category, TruncationWarning) for w in caught)
    assert render_matrix(x) == "y2"


def test_u_is_rejected_in_observables():
    with pytest.raises(ParseError):
        parse_observable("u*y1", build_model(1, 1, 1, 1, []))


@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-9, 9), st.integers(1, 9))
def test_scalar_grammar(upow, hpow, num, den):
    text = f"({num}/{den})*z5^2*h^{hpow}*u^{upow}"
    value = parse_scalar(text, 5)
    assert value.coefficient(upow, hpow) == CycloScalar.zeta(5, 2) * CycloScalar.rational(5, f"{num}/{den}")


def test_scalar_literal():
    assert parse_scalar_literal("1/3 + z3^1", 3) == CycloScalar(3, ["1/3", 1])
    with pytest.raises(ParseError):
        parse_scalar_literal("h", 3)
