import random
from math import comb

import pytest
from hypothesis import given, strategies as st

from orbindex.chains import (B_g, Chain, NonInvariantChainError, b_g, g_act_chain,
                             invariant_project_chain, is_invariant_chain, periodic_differential,
                             shuffle, tr_g)
from orbindex.corpus import random_chain, random_matrix, random_scalar, reference_models
from orbindex.exactnum import CycloScalar
from orbindex.model import build_model, matrix_inverse, matrix_mul
from orbindex.weyl import MatrixWeyl, WeylElement, g_act, matrix_moyal_mul

SMALL_MODELS = reference_models(1, hbar_trunc=2, weight_trunc=6) + \
    reference_models(2, hbar_trunc=2, weight_trunc=6)
model_ids = [m.describe() for m in SMALL_MODELS]


@pytest.mark.parametrize("model", SMALL_MODELS, ids=model_ids)
@given(seed=st.integers(0, 10_000), m=st.integers(0, 2))
def test_complex_identities(model, seed, m):
    c = random_chain(random.Random(seed), model, m, terms=1, max_weight=2, max_hbar=1)
    assert b_g(b_g(c)).is_zero()
    assert B_g(B_g(c)).is_zero()
    assert (b_g(B_g(c)) + B_g(b_g(c))).is_zero()
    assert periodic_differential(periodic_differential(c)).is_zero()


@pytest.mark.parametrize("model", SMALL_MODELS[:4], ids=model_ids[:4])
@given(seed=st.integers(0, 10_000))
def test_b_on_two_tensors(model, seed):
    rng = random.Random(seed)
    a0, a1 = random_matrix(rng, model), random_matrix(rng, model)
    chain = Chain.from_tensor(model, [a0, a1])
    want = Chain.from_tensor(model, [matrix_moyal_mul(a0, g_act(model, a1))]) - \
        Chain.from_tensor(model, [matrix_moyal_mul(a1, a0)])
    assert b_g(chain) == want


@pytest.mark.parametrize("model", SMALL_MODELS, ids=model_ids)
def test_invariant_projection(model):
    rng = random.Random(11)
    raw = random_chain(rng, model, 1, invariant=False)
    proj = invariant_project_chain(raw)
    assert is_invariant_chain(proj)
    assert invariant_project_chain(proj) == proj
    assert g_act_chain(raw, model.N) == raw


def test_connes_operator_rejects_non_invariant_chain():
    model = build_model(1, 0, 1, 2, [1])
    odd = Chain.from_tensor(model, [MatrixWeyl.scalar_matrix(WeylElement.variable(model, 0))])
    with pytest.raises(NonInvariantChainError):
        B_g(odd)


def test_normalized_chains_drop_units_after_slot_zero():
    model = build_model(1, 1, 1, 1, [])
    one = MatrixWeyl.identity(model)
    a = random_matrix(random.Random(2), model)
    assert Chain.from_tensor(model, [a, one]).is_zero()
    assert not Chain.from_tensor(model, [one, a]).is_zero()


@given(st.integers(0, 4), st.integers(0, 4))
def test_shuffle_count_and_words(p, q):
    s = tuple(f"s{i}" for i in range(p))
    t = tuple(f"t{i}" for i in range(q))
    out = shuffle(s, t)
    assert len(out) == comb(p + q, p)
    assert len({w for _, w in out}) == len(out)
    for sign, word in out:
        assert sign == 1
        assert [x for x in word if x.startswith("s")] == list(s)


def test_shuffle_koszul_sign():
    out = dict((w, sign) for sign, w in shuffle(("a",), ("b",), [1], [1]))
    assert out == {("a", "b"): 1, ("b", "a"): -1}


@given(seed=st.integers(0, 10_000), m=st.integers(1, 4), r=st.integers(1, 3))
def test_twisted_trace_cyclicity(seed, m, r):
    rng = random.Random(seed)
    N = 4
    twist = [[CycloScalar.zeta(N, i) if i == j else CycloScalar.rational(N, 0) for j in range(r)]
             for i in range(r)]
    model = build_model(1, 0, r, N, [1], twist)
    g, ginv = model.twist, matrix_inverse(model.twist)
    mats = [[[random_scalar(rng, model) for _ in range(r)] for _ in range(r)] for _ in range(m + 1)]
    moved = [matrix_mul(matrix_mul(g, mats[1]), ginv)] + mats[2:] + [mats[0]]
    assert tr_g(mats, model) == tr_g(moved, model)


def test_twisted_trace_of_identity_is_character():
    model = build_model(1, 0, 2, 3, [1], [[CycloScalar.zeta(3), 0], [0, 1]])
    one = [[CycloScalar.rational(3, 1), CycloScalar.rational(3, 0)],
           [CycloScalar.rational(3, 0), CycloScalar.rational(3, 1)]]
    assert tr_g([one], model) == CycloScalar.zeta(3) + 1
