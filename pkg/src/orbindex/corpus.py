"""Seeded random observables and chains for the identity suites."""

from __future__ import annotations

import random
from itertools import product
from typing import List

from gmpy2 import mpq

from .chains import Chain, invariant_project_chain
from .exactnum import CycloScalar
from .model import ModelData, build_model, REFERENCE_MODELS
from .weyl import MatrixWeyl, WeylElement


def reference_models(r: int = 1, hbar_trunc: int = 4, weight_trunc: int = 10) -> List[ModelData]:
    twist = None
    out = []
    for n, k, N, eigs in REFERENCE_MODELS:
        if r > 1:
            # a finite-order diagonal twist on the coefficient bundle
            twist = [[CycloScalar.zeta(N, i) if i == j else CycloScalar.rational(N, 0)
                      for j in range(r)] for i in range(r)]
        out.append(build_model(n, k, r, N, eigs, twist, hbar_trunc, weight_trunc))
    return out


def random_scalar(rng: random.Random, model: ModelData, cyclotomic: bool = True) -> CycloScalar:
    phi = len(model.scalar(0).coeffs)
    coeffs = [mpq(rng.randint(-3, 3), rng.choice((1, 1, 2, 3)))]
    if cyclotomic:
        coeffs += [mpq(rng.randint(-2, 2), rng.choice((1, 2))) for _ in range(phi - 1)]
    c = CycloScalar(model.N, coeffs)
    return c if not c.is_zero() else model.scalar(1)


def random_monomial(rng: random.Random, model: ModelData, max_weight: int, max_hbar: int,
                    variables=None):
    variables = list(range(model.nvars)) if variables is None else list(variables)
    h = rng.randint(0, min(max_hbar, max_weight // 2))
    deg = rng.randint(0, max_weight - 2 * h)
    e = [0] * model.nvars
    for _ in range(deg):
        if variables:
            e[rng.choice(variables)] += 1
    return tuple(e), h


def random_weyl(rng: random.Random, model: ModelData, terms: int = 3, max_weight: int = 3,
                max_hbar: int = 1, variables=None, nonconstant: bool = True) -> WeylElement:
    out = {}
    for _ in range(terms):
        e, h = random_monomial(rng, model, max_weight, max_hbar, variables)
        out[(e, h)] = random_scalar(rng, model)
    a = WeylElement(model, out)
    if nonconstant and a.is_constant():
        v = rng.choice(list(variables) if variables is not None else range(model.nvars))
        a = a + WeylElement.variable(model, v)
    return a


def random_matrix(rng: random.Random, model: ModelData, terms: int = 2, max_weight: int = 3,
                  max_hbar: int = 1) -> MatrixWeyl:
    r = model.r
    if r == 1:
        return MatrixWeyl.scalar_matrix(random_weyl(rng, model, terms, max_weight, max_hbar))
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            if rng.random() < 0.5:
                row.append(random_weyl(rng, model, 1, max_weight, max_hbar, nonconstant=False))
            else:
                row.append(WeylElement.zero(model))
        rows.append(row)
    mat = MatrixWeyl(model, rows)
    if mat.is_constant():
        mat = mat + MatrixWeyl.scalar_matrix(WeylElement.variable(model, rng.randrange(model.nvars)))
    return mat


def random_chain(rng: random.Random, model: ModelData, m: int, terms: int = 2,
                 max_weight: int = 3, max_hbar: int = 1, invariant: bool = True) -> Chain:
    acc = Chain(model)
    for _ in range(terms):
        factors = [random_matrix(rng, model, 2, max_weight, max_hbar) for _ in range(m + 1)]
        acc = acc + Chain.from_tensor(model, factors)
    if invariant:
        acc = invariant_project_chain(acc)
    return acc


def random_invariant_chain(rng: random.Random, model: ModelData, m: int, total_weight: int = 6,
                           max_hbar: int = 3) -> Chain:
    """A nonzero invariant chain whose tensors have total weight <= total_weight."""
    for _ in range(50):
        per = max(1, total_weight // (m + 1))
        chain = random_chain(rng, model, m, terms=2, max_weight=per,
                             max_hbar=min(max_hbar, per // 2))
        if not chain.is_zero():
            return chain
    raise RuntimeError("could not draw a nonzero invariant chain")
