import json

import pytest
from gmpy2 import mpq

from orbindex.exactnum import CycloScalar
from orbindex.model import (ModelError, REFERENCE_MODELS, build_model, kernels, load_model,
                            matrix_inverse, matrix_mul, model_from_dict, symplectic_matrices,
                            vacuum_factor)


@pytest.mark.parametrize("n,k,N,eigs", REFERENCE_MODELS)
def test_reference_models_are_symplectic(n, k, N, eigs):
    model = build_model(n, k, 1, N, eigs)
    assert model.nvars == 2 * n
    assert model.ny == 2 * k
    omega, g = symplectic_matrices(model)
    assert matrix_mul(g, matrix_inverse(g)) == matrix_mul(matrix_inverse(g), g)


@pytest.mark.parametrize("N,expected", [(2, CycloScalar.rational(2, "1/4")),
                                        (3, CycloScalar.rational(3, "1/3")),
                                        (4, CycloScalar.rational(4, "1/2"))])
def test_vacuum_factor(N, expected):
    # |1 - zeta|^-2 for a single perpendicular plane
    assert vacuum_factor(build_model(1, 0, 1, N, [1])) == expected


def test_vacuum_factor_of_trivial_action_is_one():
    assert vacuum_factor(build_model(2, 2, 1, 1, [])) == 1


@pytest.mark.parametrize("kwargs,fragment", [
    (dict(n=1, k=2), "k <= n"),
    (dict(n=1, k=0, N=2, perp_eigs=[2]), "0 mod 2"),
    (dict(n=1, k=0, N=2, perp_eigs=[]), "expected 1"),
    (dict(n=1, k=1, r=0), "rank"),
    (dict(n=1, k=1, r=2, N=2, e_twist=[[1, 0], [0, 3]]), r"e\^2 = 1"),
])
def test_invalid_models(kwargs, fragment):
    with pytest.raises(ModelError, match=fragment):
        build_model(**kwargs)


def test_twist_defaults_to_identity():
    model = build_model(1, 1, 2, 1, [])
    assert [[c == (1 if i == j else 0) for j, c in enumerate(row)] for i, row in enumerate(model.twist)] \
        == [[True, True], [True, True]]


def test_kernel_relations():
    model = build_model(2, 1, 1, 3, [1])
    kern = kernels(model)
    for (a, b), c in kern.pi1.items():
        assert kern.pi1[(b, a)] == -c
    for key in set(kern.p3) | set(kern.p2) | set(kern.pi2):
        zero = model.scalar(0)
        assert kern.p3.get(key, zero) - kern.p2.get(key, zero) == kern.pi2.get(key, zero) * mpq(1, 2)


def test_p12_at_half_turn():
    # zeta = -1 makes every perpendicular kernel entry rational
    kern = kernels(build_model(1, 0, 1, 2, [1]))
    assert sorted((key, str(c.rational_value())) for key, c in kern.p12.items()) == \
        [((0, 1), "-1/4"), ((1, 0), "1/4")]


def test_load_model_from_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"n": 2, "k": 1, "N": 3, "perp_eigs": [1], "r": 2,
                                "e_twist": [["1", "0"], ["0", "z3^1"]], "hbar_trunc": 3,
                                "weight_trunc": 6}))
    model = load_model(str(path))
    assert (model.n, model.k, model.N, model.r) == (2, 1, 3, 2)
    assert model.twist[1][1] == CycloScalar.zeta(3)
    assert model.hbar_trunc == 3


def test_model_from_dict_rejects_missing_keys():
    with pytest.raises((ModelError, KeyError)):
        model_from_dict({"k": 1})


def test_with_truncation():
    model = build_model(1, 1, 1, 1, [], hbar_trunc=5, weight_trunc=9)
    smaller = model.with_truncation(2, None)
    assert (smaller.hbar_trunc, smaller.weight_trunc) == (2, 9)
