import random
from math import comb, factorial

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, strategies as st

from orbindex.corpus import random_matrix, random_weyl, reference_models
from orbindex.model import build_model
from orbindex.weyl import (MatrixWeyl, WeylElement, commutator_over_hbar, g_act, hat_star,
                           matrix_moyal_mul, moyal_mul, perp_star, sigma_y, sigma_z)

MODELS = reference_models(1, hbar_trunc=4, weight_trunc=9)
RANK_TWO = reference_models(2, hbar_trunc=3, weight_trunc=7)
H = sympy.Symbol("h")


def to_sympy(a: WeylElement):
    xs = sympy.symbols(f"x0:{a.model.nvars}")
    expr = 0
    for (e, h), c in a.terms.items():
        assert c.is_rational()
        q = c.rational_value()
        expr += sympy.Rational(int(q.numerator), int(q.denominator)) * H ** h * \
            sympy.prod([x ** k for x, k in zip(xs, e)])
    return expr, xs


def moyal_oracle(model, f, g):
    """Textbook exponential of the Poisson bivector, one Darboux pair at a time."""
    xs = sympy.symbols(f"x0:{model.nvars}")
    total = f * g
    # sequentially apply each pair's operator; pairs commute
    pairs = list(model.pairs)
    terms = [(f, g, 1)]
    for p, q in pairs:
        new = []
        for ff, gg, coef in terms:
            for s in range(0, model.weight_trunc + 1):
                for a in range(s + 1):
                    b = s - a
                    df = sympy.diff(ff, xs[p], a, xs[q], b) if s else ff
                    dg = sympy.diff(gg, xs[q], a, xs[p], b) if s else gg
                    if df == 0 or dg == 0:
                        continue
                    new.append((df, dg, coef * sympy.Rational(1, 2) ** s * H ** s *
                                comb(s, a) * (-1) ** b / factorial(s)))
        terms = new
    total = sum(ff * gg * coef for ff, gg, coef in terms)
    return sympy.expand(total), xs


def truncate(expr, xs, W, T):
    poly = sympy.Poly(expr, *xs, H)
    out = 0
    for mono, c in poly.terms():
        h = mono[-1]
        if h <= T and sum(mono[:-1]) + 2 * h <= W:
            out += c * sympy.prod([v ** k for v, k in zip(list(xs) + [H], mono)])
    return sympy.expand(out)


@pytest.mark.parametrize("model", [m for m in MODELS if m.N <= 2], ids=lambda m: m.describe())
@given(seed=st.integers(0, 10_000))
def test_moyal_matches_bidifferential_oracle(model, seed):
    rng = random.Random(seed)
    # rational coefficients so the sympy oracle stays in Q
    a = random_weyl(rng, model, 2, 3, 1)
    b = random_weyl(rng, model, 2, 3, 1)
    if not all(c.is_rational() for c in list(a.terms.values()) + list(b.terms.values())):
        return
    fa, xs = to_sympy(a)
    fb, _ = to_sympy(b)
    want, _ = moyal_oracle(model, fa, fb)
    got, _ = to_sympy(moyal_mul(a, b))
    W, T = min(a.W, b.W), min(a.T, b.T)
    assert sympy.expand(got - truncate(want, xs, W, T)) == 0


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
@given(seed=st.integers(0, 10_000))
def test_associativity_and_automorphism(model, seed):
    rng = random.Random(seed)
    a, b, c = (random_weyl(rng, model, 2, 3, 1) for _ in range(3))
    assert moyal_mul(moyal_mul(a, b), c).agrees(moyal_mul(a, moyal_mul(b, c)))
    assert g_act(model, moyal_mul(a, b)).agrees(moyal_mul(g_act(model, a), g_act(model, b)))


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
def test_canonical_commutation(model):
    for a, b in model.pairs:
        x, y = WeylElement.variable(model, a), WeylElement.variable(model, b)
        assert commutator_over_hbar(x, y) == WeylElement.constant(model, 1)
        assert commutator_over_hbar(y, x) == WeylElement.constant(model, -1)


def test_sample_product():
    model = build_model(1, 1, 1, 1, [])
    y1, y2 = WeylElement.variable(model, 0), WeylElement.variable(model, 1)
    assert moyal_mul(y1, y2).render() == "y1*y2 + (1/2)*h^1"
    assert moyal_mul(y2, y1).render() == "y1*y2 - (1/2)*h^1"


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
def test_g_has_order_N(model):
    rng = random.Random(7)
    a = random_weyl(rng, model, 3, 3, 1)
    assert g_act(model, a, model.N) == a
    assert g_act(model, g_act(model, a), -1) == a


@pytest.mark.parametrize("model", [m for m in MODELS if m.n > m.k], ids=lambda m: m.describe())
@given(seed=st.integers(0, 10_000))
def test_twisted_products_are_associative(model, seed):
    rng = random.Random(seed)
    zs = range(model.ny, model.nvars)
    a, b, c = (random_weyl(rng, model, 2, 2, 1, variables=zs) for _ in range(3))
    for star in (hat_star, perp_star):
        assert star(star(a, b), c).agrees(star(a, star(b, c)))


@pytest.mark.parametrize("model", RANK_TWO, ids=lambda m: m.describe())
@given(seed=st.integers(0, 10_000))
def test_matrix_product_associative(model, seed):
    rng = random.Random(seed)
    a, b, c = (random_matrix(rng, model, 2, 2, 1) for _ in range(3))
    left = matrix_moyal_mul(matrix_moyal_mul(a, b), c)
    right = matrix_moyal_mul(a, matrix_moyal_mul(b, c))
    assert (left - right).is_zero()


def test_sigma_restrictions():
    model = build_model(2, 1, 1, 2, [1])
    y1, z1 = WeylElement.variable(model, 0), WeylElement.variable(model, 2)
    mixed = y1.commutative_mul(z1) + y1 + z1 + WeylElement.constant(model, 2)
    assert sigma_z(mixed) == y1 + WeylElement.constant(model, 2)
    assert sigma_y(mixed) == z1 + WeylElement.constant(model, 2)


def test_truncation_drops_high_weight():
    model = build_model(1, 1, 1, 1, [], hbar_trunc=1, weight_trunc=3)
    y1 = WeylElement.variable(model, 0)
    assert (y1.commutative_mul(y1).commutative_mul(y1).commutative_mul(y1)).is_zero()
    assert WeylElement.constant(model, 1, 2).is_zero()


def test_identity_matrix_is_unit():
    model = RANK_TWO[0]
    rng = random.Random(3)
    a = random_matrix(rng, model)
    one = MatrixWeyl.identity(model)
    assert (matrix_moyal_mul(one, a) - a).is_zero()
    assert (matrix_moyal_mul(a, one) - a).is_zero()
