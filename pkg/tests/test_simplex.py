from gmpy2 import mpq
import pytest
import sympy
from hypothesis import given, strategies as st

from orbindex.simplex import bernoulli_wheel, pairing_weight, wheel_coefficient


def simplex_oracle(size, edges):
    """Iterated sympy integral with the circle distance written piecewise by hand."""
    ts = [sympy.Integer(0)] + list(sympy.symbols(f"t1:{size}"))
    integrand = sympy.Integer(1)
    for a, b in edges:
        dist = ts[b] - ts[a] if b > a else 1 + ts[b] - ts[a]
        integrand *= dist - sympy.Rational(1, 2)
    for v in range(size - 1, 0, -1):
        lower = ts[v - 1] if v > 1 else 0
        integrand = sympy.integrate(integrand, (ts[v], lower, 1))
    return mpq(str(sympy.nsimplify(integrand)))


edge_lists = st.integers(2, 4).flatmap(lambda size: st.tuples(
    st.just(size),
    st.lists(st.tuples(st.integers(0, size - 1), st.integers(0, size - 1))
             .filter(lambda e: e[0] != e[1]), max_size=4)))


@given(edge_lists)
def test_pairing_weight_matches_sympy(case):
    size, edges = case
    assert pairing_weight(size, edges) == simplex_oracle(size, edges)


@pytest.mark.parametrize("size,edges,value", [
    (2, [], mpq(1)),
    (3, [], mpq(1, 2)),
    (2, [(0, 1)], mpq(0)),
    (2, [(0, 1), (0, 1)], mpq(1, 12)),
    (2, [(0, 1), (1, 0)], mpq(-1, 12)),
])
def test_pairing_weight_known_values(size, edges, value):
    assert pairing_weight(size, edges) == value


def test_pairing_weight_validates_edges():
    with pytest.raises(ValueError):
        pairing_weight(2, [(0, 0)])
    with pytest.raises(ValueError):
        pairing_weight(2, [(0, 2)])


@pytest.mark.parametrize("k", range(1, 8))
def test_wheels_match_bernoulli_closed_form(k):
    assert wheel_coefficient(k) == bernoulli_wheel(k)


def test_wheel_values():
    assert [wheel_coefficient(k) for k in (2, 4, 6)] == [mpq(-1, 24), mpq(1, 2880), mpq(-1, 181440)]
    assert all(wheel_coefficient(k) == 0 for k in (1, 3, 5, 7))


def test_bernoulli_wheel_generating_function():
    # log((x/2) / sinh(x/2)) = sum_k C(k) x^k / ... with C(2j) = -B_2j / (2j (2j)!)
    x = sympy.Symbol("x")
    series = sympy.series(sympy.log((x / 2) / sympy.sinh(x / 2)), x, 0, 9).removeO()
    for k in (2, 4, 6, 8):
        want = series.coeff(x, k)
        assert bernoulli_wheel(k) == mpq(str(want))
