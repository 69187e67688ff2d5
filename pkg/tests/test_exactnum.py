import cmath

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from orbindex.exactnum import CycloScalar, HbarSeries, ScalarK, cyclo_inv, format_rational, totient
from orbindex.parsing import parse_scalar

ORDERS = st.sampled_from([1, 2, 3, 4, 5, 6, 8, 12])
SMALL = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def cyclo(draw, order=None):
    N = draw(ORDERS) if order is None else order
    coeffs = draw(st.lists(SMALL, min_size=totient(N), max_size=totient(N)))
    return CycloScalar(N, [mpq(c.numerator, c.denominator) for c in coeffs])


@st.composite
def cyclo_triple(draw):
    N = draw(ORDERS)
    return draw(cyclo(N)), draw(cyclo(N)), draw(cyclo(N))


def numeric(c: CycloScalar) -> complex:
    root = cmath.exp(2j * cmath.pi / c.order)
    return sum(float(q) * root ** j for j, q in enumerate(c.coeffs))


@given(cyclo_triple())
def test_field_operations_match_complex_embedding(triple):
    a, b, c = triple
    assert abs(numeric(a * b + c) - (numeric(a) * numeric(b) + numeric(c))) < 1e-9
    assert abs(numeric(a - b) - (numeric(a) - numeric(b))) < 1e-9


@given(cyclo_triple())
def test_ring_axioms(triple):
    a, b, c = triple
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(cyclo())
def test_inverse(a):
    if a.is_zero():
        with pytest.raises(ZeroDivisionError):
            cyclo_inv(a)
    else:
        assert a * cyclo_inv(a) == 1
        assert abs(numeric(cyclo_inv(a)) * numeric(a) - 1) < 1e-9


@given(cyclo())
def test_conjugation_is_complex_conjugation(a):
    assert abs(numeric(a.conjugate()) - numeric(a).conjugate()) < 1e-9
    assert a.conjugate().conjugate() == a


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 6, 7, 8, 9, 12])
def test_roots_of_unity(N):
    z = CycloScalar.zeta(N)
    assert z ** N == 1
    assert all(z ** j != 1 for j in range(1, N))
    assert CycloScalar.zeta(N, -1) * z == 1
    # the primitive roots sum to the Moebius function value
    from sympy import mobius
    assert sum((z ** j for j in range(N)), CycloScalar.rational(N, 0)) == (1 if N == 1 else 0)
    prim = [j for j in range(1, N + 1) if __import__("math").gcd(j, N) == 1]
    assert sum((z ** j for j in prim), CycloScalar.rational(N, 0)) == int(mobius(N))


def test_mismatched_orders_rejected():
    with pytest.raises(ValueError):
        CycloScalar.zeta(3) + CycloScalar.zeta(4)


def test_format_rational():
    assert format_rational(mpq(3, 1)) == "3"
    assert format_rational(mpq(-1, 24)) == "(-1/24)"


def test_hbar_series_truncates_products():
    h = HbarSeries.monomial(1, 3, 1)
    assert (h * h * h * h).is_zero()
    assert (h * h).coeffs == {2: CycloScalar.rational(1, 1)}


@given(st.integers(-3, 3), st.integers(-3, 3), SMALL)
def test_scalar_render_parse_round_trip(upow, hpow, q):
    value = ScalarK.constant(3, 6, CycloScalar(3, [mpq(q.numerator, q.denominator), 1]), upow, hpow)
    assert parse_scalar(value.render(), 3) == value


def test_scalar_u_and_hbar_shifts():
    one = ScalarK.constant(2, 4, 1)
    moved = one.u_shift(-1).hbar_shift(2)
    assert moved.coefficient(-1, 2) == 1
    assert moved.render() == "h^2*u^-1"
