"""Truncated Weyl algebra over the cyclotomic field, scalar and matrix valued.

A ``WeylElement`` stores ``{(exponents, hbar_power): CycloScalar}``.  The
weight of a term is its polynomial degree plus twice its hbar power; terms
above the weight truncation W or above hbar order T are dropped.  Every
bidifferential contraction lowers the degree by two and raises the hbar
power by one, so products never need re-filtering beyond the input pairs.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .exactnum import CycloScalar, HbarSeries, Q
from .model import Kernel, ModelData

Exps = Tuple[int, ...]
Mono = Tuple[Exps, int]
Terms = Dict[Mono, CycloScalar]


def _falling(n: int, s: int) -> int:
    out = 1
    for i in range(s):
        out *= n - i
    return out


def _add_into(out: Terms, key: Mono, val: CycloScalar) -> None:
    cur = out.get(key)
    if cur is None:
        out[key] = val
    else:
        s = cur + val
        if s.is_zero():
            del out[key]
        else:
            out[key] = s


def kernel_entries(kernel: Kernel, scale=1) -> Tuple[Tuple[int, int, CycloScalar], ...]:
    return tuple(sorted((a, b, c * Q(scale)) for (a, b), c in kernel.items()))


@lru_cache(maxsize=200000)
def _pair_expansion(ea: Exps, eb: Exps, entries, max_s: int):
    """All ways of applying exp(sum c d_a (x) d_b) to x^ea (x) x^eb.

    Returns tuples (ea', eb', number of contractions, coefficient).
    """
    one = None
    states = [(ea, eb, 0, None)]
    for a, b, c in entries:
        if one is None:
            one = c * 0 + 1
        new = []
        for x, y, s0, co in states:
            top = min(x[a], y[b], max_s - s0)
            new.append((x, y, s0, co))
            power = one
            for s in range(1, top + 1):
                power = power * c
                weight = mpq(_falling(x[a], s) * _falling(y[b], s), factorial(s))
                x2 = list(x)
                x2[a] -= s
                y2 = list(y)
                y2[b] -= s
                coef = power * weight if co is None else co * power * weight
                new.append((tuple(x2), tuple(y2), s0 + s, coef))
        states = new
    return tuple(states)


def contract_product(f: Terms, g: Terms, entries, W: int, T: int) -> Terms:
    """m(exp(hbar K)(f (x) g)) with K given by ``entries``, truncated at (W, T)."""
    out: Terms = {}
    for (ea, ha), ca in f.items():
        wa = sum(ea) + 2 * ha
        for (eb, hb), cb in g.items():
            if wa + sum(eb) + 2 * hb > W:
                continue
            h0 = ha + hb
            if h0 > T:
                continue
            base = ca * cb
            for x, y, s, co in _pair_expansion(ea, eb, entries, T - h0):
                mono = (tuple(i + j for i, j in zip(x, y)), h0 + s)
                _add_into(out, mono, base if co is None else base * co)
    return out


class WeylElement:
    """Immutable truncated element of the Weyl algebra of a model."""

    __slots__ = ("model", "terms", "W", "T")

    def __init__(self, model: ModelData, terms: Terms | None = None,
                 W: int | None = None, T: int | None = None):
        self.model = model
        self.W = model.weight_trunc if W is None else W
        self.T = model.hbar_trunc if T is None else T
        clean: Terms = {}
        for (e, h), c in (terms or {}).items():
            if not isinstance(c, CycloScalar):
                c = model.scalar(c)
            if c.is_zero() or h > self.T or sum(e) + 2 * h > self.W:
                continue
            if len(e) != model.nvars or min(e, default=0) < 0:
                raise ValueError(f"bad exponent vector {e}")
            _add_into(clean, (tuple(e), h), c)
        self.terms = clean

    @classmethod
    def _raw(cls, model, terms, W, T):
        obj = object.__new__(cls)
        obj.model, obj.terms, obj.W, obj.T = model, terms, W, T
        return obj

    # constructors
    @classmethod
    def zero(cls, model, W=None, T=None):
        return cls(model, {}, W, T)

    @classmethod
    def constant(cls, model, value=1, hpow: int = 0, W=None, T=None):
        return cls(model, {((0,) * model.nvars, hpow): value}, W, T)

    @classmethod
    def variable(cls, model, v: int, power: int = 1, coef=1, W=None, T=None):
        e = [0] * model.nvars
        e[v] = power
        return cls(model, {(tuple(e), 0): coef}, W, T)

    @classmethod
    def monomial(cls, model, exps: Sequence[int], hpow: int = 0, coef=1, W=None, T=None):
        return cls(model, {(tuple(exps), hpow): coef}, W, T)

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "WeylElement":
        if isinstance(other, WeylElement):
            return other
        return WeylElement.constant(self.model, other, 0, self.W, self.T)

    def _trunc(self, other):
        return min(self.W, other.W), min(self.T, other.T)

    def __add__(self, other):
        other = self._coerce(other)
        W, T = self._trunc(other)
        out = {k: v for k, v in self.terms.items() if k[1] <= T and sum(k[0]) + 2 * k[1] <= W}
        for k, v in other.terms.items():
            if k[1] <= T and sum(k[0]) + 2 * k[1] <= W:
                _add_into(out, k, v)
        return WeylElement._raw(self.model, out, W, T)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement._raw(self.model, {k: -v for k, v in self.terms.items()}, self.W, self.T)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "WeylElement":
        if not isinstance(c, CycloScalar):
            c = self.model.scalar(c)
        if c.is_zero():
            return WeylElement._raw(self.model, {}, self.W, self.T)
        return WeylElement._raw(self.model, {k: v * c for k, v in self.terms.items()},
                                self.W, self.T)

    def __mul__(self, other):
        """Star product for Weyl elements, scaling otherwise."""
        if isinstance(other, WeylElement):
            return moyal_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def commutative_mul(self, other: "WeylElement") -> "WeylElement":
        W, T = self._trunc(other)
        return WeylElement._raw(self.model, contract_product(self.terms, other.terms, (), W, T),
                                W, T)

    def hbar_shift(self, amount: int) -> "WeylElement":
        """Multiply by hbar**amount; truncation orders move with it."""
        return WeylElement._raw(self.model,
                                {(e, h + amount): c for (e, h), c in self.terms.items()},
                                self.W + 2 * amount, self.T + amount)

    def retruncate(self, W=None, T=None) -> "WeylElement":
        return WeylElement(self.model, self.terms, min(self.W, W if W is not None else self.W),
                           min(self.T, T if T is not None else self.T))

    def derivative(self, v: int) -> "WeylElement":
        out: Terms = {}
        for (e, h), c in self.terms.items():
            if e[v]:
                e2 = list(e)
                e2[v] -= 1
                out[(tuple(e2), h)] = c * e[v]
        return WeylElement._raw(self.model, out, self.W - 1, self.T)

    def constant_part(self) -> "WeylElement":
        zero = (0,) * self.model.nvars
        return WeylElement._raw(self.model, {k: v for k, v in self.terms.items() if k[0] == zero},
                                self.W, self.T)

    def constant_series(self) -> HbarSeries:
        zero = (0,) * self.model.nvars
        return HbarSeries(self.model.N, self.T,
                          {h: c for (e, h), c in self.terms.items() if e == zero})

    def value_at_zero(self, hpow: int = 0) -> CycloScalar:
        return self.terms.get(((0,) * self.model.nvars, hpow), self.model.scalar(0))

    def hbar_part(self, hpow: int) -> "WeylElement":
        return WeylElement._raw(self.model, {k: v for k, v in self.terms.items() if k[1] == hpow},
                                self.W, self.T)

    def homogeneous(self, degree: int) -> "WeylElement":
        return WeylElement._raw(self.model,
                                {k: v for k, v in self.terms.items() if sum(k[0]) == degree},
                                self.W, self.T)

    def is_constant(self) -> bool:
        zero = (0,) * self.model.nvars
        return all(e == zero for (e, _h) in self.terms)

    def min_hbar(self):
        return min((h for (_e, h) in self.terms), default=None)

    def supported_on(self, variables: Iterable[int]) -> bool:
        allowed = set(variables)
        return all(all(x == 0 or i in allowed for i, x in enumerate(e)) for (e, _h) in self.terms)

    def agrees(self, other: "WeylElement") -> bool:
        """Equality on all terms valid in both operands."""
        other = self._coerce(other)
        W, T = self._trunc(other)
        keys = set(self.terms) | set(other.terms)
        zero = self.model.scalar(0)
        for k in keys:
            if k[1] <= T and sum(k[0]) + 2 * k[1] <= W:
                if self.terms.get(k, zero) != other.terms.get(k, zero):
                    return False
        return True

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.agrees(other)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]) + 2 * kv[0][1],
                                                          kv[0][1], tuple(-x for x in kv[0][0])))

    def render(self) -> str:
        from .parsing import render_weyl
        return render_weyl(self)

    def __repr__(self):
        return f"WeylElement({self.render()})"


def _check_models(a, b):
    if a.model != b.model:
        raise ValueError(f"model mismatch: {a.model.describe()} vs {b.model.describe()}")


@lru_cache(maxsize=None)
def _moyal_entries(model: ModelData):
    k = model.kernels
    return kernel_entries({**k.pi1, **k.pi2})


@lru_cache(maxsize=None)
def _perp_entries(model: ModelData, sign: int):
    return kernel_entries(model.kernels.pi2, sign)


def moyal_mul(a: WeylElement, b: WeylElement) -> WeylElement:
    """Ordered Moyal product sum_j hbar^j/j! m(Pi^j(a (x) b))."""
    _check_models(a, b)
    W, T = a._trunc(b)
    return WeylElement._raw(a.model, contract_product(a.terms, b.terms, _moyal_entries(a.model),
                                                      W, T), W, T)


def _perp_product(a: WeylElement, b: WeylElement, sign: int) -> WeylElement:
    _check_models(a, b)
    ys = range(a.model.ny)
    for x in (a, b):
        if any(e[v] for (e, _h) in x.terms for v in ys):
            raise ValueError("perpendicular products need operands without y-variables")
    W, T = a._trunc(b)
    return WeylElement._raw(a.model, contract_product(a.terms, b.terms,
                                                      _perp_entries(a.model, sign), W, T), W, T)


def hat_star(a: WeylElement, b: WeylElement) -> WeylElement:
    """m(exp(-hbar Pi_2)(a (x) b)) on z-only operands."""
    return _perp_product(a, b, -1)


def perp_star(a: WeylElement, b: WeylElement) -> WeylElement:
    """m(exp(+hbar Pi_2)(a (x) b)) on z-only operands."""
    return _perp_product(a, b, 1)


def commutator_over_hbar(a: WeylElement, b: WeylElement) -> WeylElement:
    return (moyal_mul(a, b) - moyal_mul(b, a)).hbar_shift(-1)


def g_act_scalar(a: WeylElement, power: int = 1) -> WeylElement:
    """Apply g**power: x^v -> zeta^(power*e_v) x^v."""
    model = a.model
    eig = model.eig_powers
    if not any(eig):
        return a
    out = {}
    for (e, h), c in a.terms.items():
        p = sum(x * y for x, y in zip(e, eig)) * power
        out[(e, h)] = c * model.zeta(p) if p % model.N else c
    return WeylElement._raw(model, out, a.W, a.T)


def is_invariant_scalar(a: WeylElement) -> bool:
    eig, N = a.model.eig_powers, a.model.N
    return all(sum(x * y for x, y in zip(e, eig)) % N == 0 for (e, _h) in a.terms)


def invariant_project_scalar(a: WeylElement) -> WeylElement:
    eig, N = a.model.eig_powers, a.model.N
    return WeylElement._raw(a.model, {(e, h): c for (e, h), c in a.terms.items()
                                      if sum(x * y for x, y in zip(e, eig)) % N == 0}, a.W, a.T)


def sigma(a: WeylElement, kill: Iterable[int]) -> WeylElement:
    kill = tuple(kill)
    return WeylElement._raw(a.model, {(e, h): c for (e, h), c in a.terms.items()
                                      if not any(e[v] for v in kill)}, a.W, a.T)


def sigma_z(a):
    """Set every z-variable to zero (matrix-aware)."""
    if isinstance(a, MatrixWeyl):
        return a.map(sigma_z)
    return sigma(a, range(a.model.ny, a.model.nvars))


def sigma_y(a):
    """Set every y-variable to zero (matrix-aware)."""
    if isinstance(a, MatrixWeyl):
        return a.map(sigma_y)
    return sigma(a, range(a.model.ny))


def euler_scalar(a: WeylElement) -> WeylElement:
    """L_E: multiply each monomial by half its polynomial degree."""
    return WeylElement._raw(a.model, {k: c * mpq(sum(k[0]), 2) for k, c in a.terms.items()
                                      if sum(k[0])}, a.W, a.T)


def gm_nabla_scalar(a: WeylElement) -> WeylElement:
    """hbar d/dhbar + L_E."""
    out = {}
    for (e, h), c in a.terms.items():
        w = mpq(sum(e), 2) + h
        if w:
            out[(e, h)] = c * w
    return WeylElement._raw(a.model, out, a.W, a.T)


class MatrixWeyl:
    """r x r matrix of Weyl elements with a shared truncation."""

    __slots__ = ("model", "entries")

    def __init__(self, model: ModelData, entries):
        self.model = model
        rows = tuple(tuple(entries[i][j] for j in range(len(entries[i])))
                     for i in range(len(entries)))
        r = len(rows)
        if any(len(row) != r for row in rows):
            raise ValueError("matrix observables must be square")
        self.entries = rows

    @property
    def r(self) -> int:
        return len(self.entries)

    @classmethod
    def scalar_matrix(cls, a: WeylElement, r: int | None = None) -> "MatrixWeyl":
        r = a.model.r if r is None else r
        zero = WeylElement.zero(a.model, a.W, a.T)
        return cls(a.model, [[a if i == j else zero for j in range(r)] for i in range(r)])

    @classmethod
    def from_constant_matrix(cls, model, mat, W=None, T=None) -> "MatrixWeyl":
        return cls(model, [[WeylElement.constant(model, c, 0, W, T) for c in row] for row in mat])

    @classmethod
    def identity(cls, model, W=None, T=None) -> "MatrixWeyl":
        return cls.scalar_matrix(WeylElement.constant(model, 1, 0, W, T))

    @classmethod
    def zero(cls, model, W=None, T=None) -> "MatrixWeyl":
        return cls.scalar_matrix(WeylElement.zero(model, W, T))

    def map(self, fn) -> "MatrixWeyl":
        return MatrixWeyl(self.model, [[fn(x) for x in row] for row in self.entries])

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.entries for x in row)

    @property
    def W(self):
        return min(x.W for row in self.entries for x in row)

    @property
    def T(self):
        return min(x.T for row in self.entries for x in row)

    def __add__(self, other):
        return MatrixWeyl(self.model, [[x + y for x, y in zip(r1, r2)]
                                       for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MatrixWeyl":
        return self.map(lambda x: x.scale(c))

    def hbar_shift(self, amount: int) -> "MatrixWeyl":
        return self.map(lambda x: x.hbar_shift(amount))

    def __mul__(self, other):
        if isinstance(other, MatrixWeyl):
            return matrix_moyal_mul(self, other)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, MatrixWeyl):
            return NotImplemented
        return self.r == other.r and all(
            x == y for r1, r2 in zip(self.entries, other.entries) for x, y in zip(r1, r2))

    def __hash__(self):
        return hash(tuple(hash(x) for row in self.entries for x in row))

    def is_scalar_identity_multiple(self) -> bool:
        d = self.entries[0][0]
        return all((x == d) if i == j else x.is_zero()
                   for i, row in enumerate(self.entries) for j, x in enumerate(row))

    def is_constant(self) -> bool:
        return all(x.is_constant() for row in self.entries for x in row)

    def constant_part(self) -> "MatrixWeyl":
        return self.map(lambda x: x.constant_part())

    def is_unit_multiple(self) -> bool:
        """True when the matrix is a constant multiple of the identity (unit line)."""
        if not self.is_scalar_identity_multiple():
            return False
        return self.entries[0][0].is_constant()

    def render(self) -> str:
        from .parsing import render_matrix
        return render_matrix(self)

    def __repr__(self):
        return f"MatrixWeyl({self.render()})"


def _matrix_product(a: MatrixWeyl, b: MatrixWeyl, scalar_mul) -> MatrixWeyl:
    if a.r != b.r:
        raise ValueError(f"rank mismatch {a.r} vs {b.r}")
    r = a.r
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = None
            for t in range(r):
                x, y = a.entries[i][t], b.entries[t][j]
                if x.is_zero() or y.is_zero():
                    term = WeylElement.zero(a.model, min(x.W, y.W), min(x.T, y.T))
                else:
                    term = scalar_mul(x, y)
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return MatrixWeyl(a.model, out)


def matrix_moyal_mul(a: MatrixWeyl, b: MatrixWeyl) -> MatrixWeyl:
    _check_models(a, b)
    return _matrix_product(a, b, moyal_mul)


def matrix_commutative_mul(a: MatrixWeyl, b: MatrixWeyl) -> MatrixWeyl:
    return _matrix_product(a, b, lambda x, y: x.commutative_mul(y))


def matrix_commutator_over_hbar(a: MatrixWeyl, b: MatrixWeyl) -> MatrixWeyl:
    return (matrix_moyal_mul(a, b) - matrix_moyal_mul(b, a)).hbar_shift(-1)


def _conjugate_constant(model: ModelData, mat: MatrixWeyl, left, right) -> MatrixWeyl:
    r = mat.r
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            acc = WeylElement.zero(model, mat.W, mat.T)
            for s in range(r):
                if left[i][s].is_zero():
                    continue
                for t in range(r):
                    if right[t][j].is_zero():
                        continue
                    acc = acc + mat.entries[s][t].scale(left[i][s] * right[t][j])
            row.append(acc)
        out.append(row)
    return MatrixWeyl(model, out)


def g_act(model: ModelData, a, power: int = 1):
    """g**power on a scalar or matrix observable (conjugating by e_twist)."""
    if isinstance(a, WeylElement):
        return g_act_scalar(a, power)
    moved = a.map(lambda x: g_act_scalar(x, power))
    if model.e_twist is None or model.r == 1 and model.twist[0][0] == 1:
        return moved
    left, right = _twist_powers(model, power % model.N)
    return _conjugate_constant(model, moved, left, right)


@lru_cache(maxsize=None)
def _twist_powers(model: ModelData, p: int):
    return _matrix_power(model, model.twist, p), _matrix_power(model, model.twist_inverse, p)


def _matrix_power(model, mat, p):
    from .model import matrix_mul
    out = tuple(tuple(model.scalar(1 if i == j else 0) for j in range(model.r))
                for i in range(model.r))
    for _ in range(p):
        out = matrix_mul(out, mat)
    return out


def is_invariant(model: ModelData, a) -> bool:
    return g_act(model, a) == a


def invariant_project(model: ModelData, a):
    """Average over the cyclic group generated by g."""
    if isinstance(a, WeylElement) and model.e_twist is None:
        return invariant_project_scalar(a)
    acc = a
    for p in range(1, model.N):
        acc = acc + g_act(model, a, p)
    return acc.scale(model.scalar(mpq(1, model.N)))


def as_matrix(model: ModelData, a) -> MatrixWeyl:
    if isinstance(a, MatrixWeyl):
        return a
    if isinstance(a, WeylElement):
        return MatrixWeyl.scalar_matrix(a)
    return MatrixWeyl.scalar_matrix(WeylElement.constant(model, a))
