"""Projection onto the isotropy subalgebra, curvature and characteristic classes.

The Lie algebra is g = W^g * Id + hbar gl_r(W^g) with bracket
[x, y] = (x * y - y * x) / hbar.  Its subalgebra h is the sum of the
y-quadratics, the invariant z-quadratics, hbar gl_r and the central series
C + sum_{i > 1} hbar^i C.  ``pr`` splits g -> h by reading Taylor data at 0.

Classes are evaluated as Lie algebra cochains.  A class Phi, a power series
in the curvature, takes 2m arguments to
    sum over perfect matchings (sign) * [t_1 ... t_m] Phi(sum_i t_i R(pair_i))
which is the usual wedge product convention, so exp(X) on four arguments is
X(1,2) X(3,4) - X(1,3) X(2,4) + X(1,4) X(2,3).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import factorial
from typing import Callable, Dict, FrozenSet, List, Sequence, Tuple

from gmpy2 import mpq

from .chains import Chain
from .correlate import LieElement, tau1, universal_trace
from .exactnum import CycloScalar, HbarSeries, ScalarK
from .model import ModelData, matrix_mul
from .simplex import bernoulli_wheel
from .weyl import MatrixWeyl, WeylElement, matrix_commutator_over_hbar

Matrix = Tuple[Tuple[CycloScalar, ...], ...]


class UnsupportedDegree(ValueError):
    pass


# ---------------------------------------------------------------- projection

@dataclass(frozen=True)
class Projection:
    """The four components of pr(x)."""

    sp_fixed: WeylElement       # pr1, quadratic in y
    sp_perp: WeylElement        # pr2, quadratic in z
    gl: Matrix                  # pr3 / hbar, a constant r x r matrix
    central: HbarSeries         # pr4

    def as_lie(self, model: ModelData) -> LieElement:
        scalar = self.sp_fixed + self.sp_perp
        r = model.r
        entries = []
        for i in range(r):
            row = []
            for j in range(r):
                x = WeylElement.constant(model, self.gl[i][j], 1)
                if i == j:
                    x = x + scalar
                    for h, c in self.central.coeffs.items():
                        x = x + WeylElement.constant(model, c, h)
                row.append(x)
            entries.append(row)
        return LieElement(model, MatrixWeyl(model, entries))


def _scalar_part(x: LieElement) -> WeylElement:
    return x.value.entries[0][0].hbar_part(0)


def _quadratic(f: WeylElement, ys: bool) -> WeylElement:
    ny = f.model.ny
    keep = {}
    for (e, h), c in f.homogeneous(2).terms.items():
        y_degree = sum(e[:ny])
        if (y_degree == 2) if ys else (y_degree == 0):
            keep[(e, h)] = c
    return WeylElement(f.model, keep, f.W, f.T)


def pr(x: LieElement) -> Projection:
    model = x.model
    f = _scalar_part(x)
    r = model.r
    gl = tuple(tuple(x.value.entries[i][j].value_at_zero(1) for j in range(r))
                for i in range(r))
    central = {0: f.value_at_zero(0)}
    top = max((h for row in x.value.entries for el in row for (_e, h) in el.terms), default=0)
    for h in range(2, top + 1):
        tr = sum((x.value.entries[i][i].value_at_zero(h) for i in range(r)), model.scalar(0))
        central[h] = tr * mpq(1, r)
    return Projection(_quadratic(f, True), _quadratic(f, False), gl,
                      HbarSeries(model.N, model.hbar_trunc, central))


def gamma_hat(x: LieElement) -> LieElement:
    """x - pr(x), the argument actually inserted into the trace."""
    p = pr(x).as_lie(x.model)
    return LieElement(x.model, x.value - p.value)


def bracket(x: LieElement, y: LieElement) -> LieElement:
    return LieElement(x.model, matrix_commutator_over_hbar(x.value, y.value))


# ---------------------------------------------------------------- curvature

@dataclass(frozen=True)
class CurvatureValue:
    """R(x, y) split as R1 + R2 + R3 + R4; ``gl`` is the coefficient of hbar in R3."""

    R1: WeylElement
    R2: WeylElement
    gl: Matrix
    R4: HbarSeries

    def is_zero(self) -> bool:
        return (self.R1.is_zero() and self.R2.is_zero() and self.R4.is_zero()
                and all(c.is_zero() for row in self.gl for c in row))


def _mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _scalar_bracket(a: WeylElement, b: WeylElement) -> WeylElement:
    from .weyl import commutator_over_hbar
    return commutator_over_hbar(a, b)


def curvature(x: LieElement, y: LieElement) -> CurvatureValue:
    """R(x, y) = [pr x, pr y] - pr [x, y], componentwise."""
    model = x.model
    px, py, pxy = pr(x), pr(y), pr(bracket(x, y))
    r1 = _scalar_bracket(px.sp_fixed, py.sp_fixed) - pxy.sp_fixed
    r2 = _scalar_bracket(px.sp_perp, py.sp_perp) - pxy.sp_perp
    # [hbar A, hbar B] / hbar = hbar [A, B]
    comm = _mat_sub(matrix_mul(px.gl, py.gl), matrix_mul(py.gl, px.gl))
    r3 = _mat_sub(comm, pxy.gl)
    r4 = -pxy.central
    return CurvatureValue(_quadratic(r1.hbar_part(0), True), _quadratic(r2.hbar_part(0), False),
                          r3, r4)


def omega0(x: LieElement, y: LieElement) -> CycloScalar:
    """omega^{ij} d_i f(0) d_j g(0) on the fixed directions."""
    model = x.model
    f, g = _scalar_part(x), _scalar_part(y)
    total = model.scalar(0)
    for a, b in model.pairs[:model.k]:
        fa = f.derivative(a).value_at_zero(0)
        fb = f.derivative(b).value_at_zero(0)
        ga = g.derivative(a).value_at_zero(0)
        gb = g.derivative(b).value_at_zero(0)
        total = total + fa * gb - fb * ga
    return total


def hamiltonian_matrix(model: ModelData, quad: WeylElement) -> List[List[CycloScalar]]:
    """Matrix of v -> [quad, v] on the linear functions in y."""
    ny = model.ny
    out = [[model.scalar(0)] * ny for _ in range(ny)]
    for b in range(ny):
        lin = WeylElement.variable(model, b)
        val = _scalar_bracket(quad, lin)
        for (e, h), c in val.terms.items():
            if h == 0 and sum(e) == 1:
                a = e.index(1)
                out[a][b] = out[a][b] + c
    return out


# ---------------------------------------------------------------- nilpotent bookkeeping

Nil = Dict[FrozenSet[int], ScalarK]


def _nil_mul(a: Nil, b: Nil) -> Nil:
    out: Nil = {}
    for s1, v1 in a.items():
        for s2, v2 in b.items():
            if s1 & s2:
                continue
            s = s1 | s2
            p = v1 * v2
            out[s] = out[s] + p if s in out else p
    return out


def _nil_exp(x: Nil, one: ScalarK) -> Nil:
    """exp of a nilpotent element with no constant term."""
    out: Nil = {frozenset(): one}
    term: Nil = {frozenset(): one}
    j = 1
    while True:
        term = _nil_mul(term, x)
        term = {s: v * mpq(1, j) for s, v in term.items()}
        if not term:
            return out
        for s, v in term.items():
            out[s] = out[s] + v if s in out else v
        j += 1


def _ordered_products(mats: Sequence[Matrix], idx: Sequence[int]):
    """Yield prod_{i in order} mats[i] for every ordering of idx."""
    for order in permutations(idx):
        acc = None
        for i in order:
            acc = mats[i] if acc is None else matrix_mul(acc, mats[i])
        yield acc


def _trace(m) -> CycloScalar:
    total = m[0][0] * 0
    for i in range(len(m)):
        total = total + m[i][i]
    return total


def _subsets(n: int):
    for mask in range(1 << n):
        yield frozenset(i for i in range(n) if mask >> i & 1)


# ---------------------------------------------------------------- classes on lists of curvature values

def _K(model: ModelData, value=1, upow=0, hpow=0) -> ScalarK:
    return ScalarK.constant(model.N, model.hbar_trunc, value, upow, hpow)


def a_hat_series(model: ModelData, values: Sequence[CurvatureValue]) -> Nil:
    """det((X/2)/sinh(X/2))^(1/2), X = sum_i t_i R1_i, as exp(1/2 sum_j C(2j) tr X^2j)."""
    n = len(values)
    mats = [hamiltonian_matrix(model, v.R1) for v in values]
    log: Nil = {}
    for s in _subsets(n):
        if not s or len(s) % 2:
            continue
        coef = bernoulli_wheel(len(s)) * mpq(1, 2)
        if not coef or not mats or model.ny == 0:
            continue
        total = model.scalar(0)
        for prod_ in _ordered_products(mats, sorted(s)):
            total = total + _trace(prod_)
        if not total.is_zero():
            log[s] = _K(model, total * coef)
    return _nil_exp(log, _K(model))


def ch_glr_series(model: ModelData, values: Sequence[CurvatureValue],
                  literal: bool = False) -> Nil:
    """tr(g exp(-sum_i t_i R3_i / hbar)), or tr(g exp(sum_i t_i R3_i)) when ``literal``.

    The trace is hbar-linear in its arguments while pr is not, so the gl_r
    curvature has to enter with the same -1/hbar as the central part R4 for
    the two-vertex diagram to match; ``literal`` keeps the bare exponential.
    """
    out: Nil = {}
    n = len(values)
    twist = model.twist
    for s in _subsets(n):
        total = model.scalar(0)
        if not s:
            total = _trace(twist)
        else:
            for prod_ in _ordered_products([v.gl for v in values], sorted(s)):
                total = total + _trace(matrix_mul(twist, prod_))
        total = total * mpq(1, factorial(len(s)))
        if not total.is_zero():
            if literal:
                out[s] = _K(model, total, 0, len(s))
            else:
                out[s] = _K(model, total * (-1) ** len(s), 0, 0)
    return out


def ch_star_series(model: ModelData, values: Sequence[CurvatureValue],
                   route: Callable = tau1) -> Nil:
    """sum_m (1/m!) tau1(1, -X/hbar, ..., -X/hbar) with X = sum_i t_i R2_i."""
    out: Nil = {}
    n = len(values)
    one = WeylElement.constant(model, 1)
    for s in _subsets(n):
        total = HbarSeries(model.N, model.hbar_trunc)
        for order in permutations(sorted(s)):
            ops = [one] + [values[i].R2.hbar_shift(-1).scale(model.scalar(-1)) for i in order]
            total = total + route(model, ops)
        total = total * model.scalar(mpq(1, factorial(len(s))))
        if not total.is_zero():
            out[s] = ScalarK(model.N, model.hbar_trunc, {0: total})
    return out


def central_series(model: ModelData, values: Sequence[CurvatureValue], sign: int = -1) -> Nil:
    """exp(sign * sum_i t_i R4_i / hbar)."""
    log: Nil = {}
    for i, v in enumerate(values):
        if not v.R4.is_zero():
            log[frozenset([i])] = ScalarK(model.N, model.hbar_trunc,
                                          {0: v.R4.shift(-1) * model.scalar(sign)})
    return _nil_exp(log, _K(model))


# ---------------------------------------------------------------- cochain evaluation

def _matchings(items: Sequence[int]):
    """Perfect matchings of ``items`` with the sign of the flattened permutation."""
    if not items:
        yield 1, []
        return
    first, rest = items[0], items[1:]
    for pos, partner in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1:]
        for sign, tail in _matchings(remaining):
            yield sign * (-1 if pos % 2 else 1), [(first, partner)] + tail


def _evaluate_model(model, args, series_fns, u_weight):
    m = len(args) // 2
    full = frozenset(range(m))
    total = _K(model, 0)
    for sign, pairs in _matchings(list(range(len(args)))):
        values = [curvature(args[a], args[b]) for a, b in pairs]
        prod_: Nil = {frozenset(): _K(model)}
        for fn in series_fns:
            prod_ = _nil_mul(prod_, fn(model, values))
        if full in prod_:
            total = total + prod_[full] * sign
    return total.u_shift(-m) if u_weight else total


def a_hat_eval(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    _even(args)
    return _evaluate_model(model, args, [a_hat_series], False)


def ch_g_star_eval(model: ModelData, args: Sequence[LieElement], route: Callable = tau1) -> ScalarK:
    _even(args)
    return _evaluate_model(model, args, [lambda md, vs: ch_star_series(md, vs, route)], False)


def ch_g_glr_eval(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    _even(args)
    return _evaluate_model(model, args, [ch_glr_series], False)


def omega0_eval(args: Sequence[LieElement]) -> CycloScalar:
    if len(args) != 2:
        raise UnsupportedDegree("omega0 takes exactly two arguments")
    return omega0(args[0], args[1])


def _even(args) -> bool:
    if len(args) % 2:
        raise UnsupportedDegree("characteristic classes need an even number of arguments")
    return True


# ---------------------------------------------------------------- one-loop comparison

def oneloop_bracket(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    """(A-hat * Ch_g^star * Ch_g(gl_r))_u."""
    _even(args)
    return _evaluate_model(model, args, [a_hat_series, ch_star_series, ch_glr_series], True)


def oneloop_rhs(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    """u^k exp(-R4/(u hbar)) (A-hat * Ch_g^star * Ch_g(gl_r))_u."""
    _even(args)
    fns = [central_series, a_hat_series, ch_star_series, ch_glr_series]
    return _evaluate_model(model, args, fns, True).u_shift(model.k)


def unit_chain(model: ModelData) -> Chain:
    return Chain.from_tensors(model, [(model.scalar(1), 0, [MatrixWeyl.identity(model)])])


def oneloop_lhs(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    """The universal trace of (1) with x - pr(x) inserted for every argument."""
    return universal_trace(unit_chain(model), [gamma_hat(a) for a in args])


def _shuffle_sign(first: Sequence[int], rest: Sequence[int]) -> int:
    perm = list(first) + list(rest)
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
                     if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def untwisted_lhs(model: ModelData, args: Sequence[LieElement]) -> ScalarK:
    """u^-k exp(R4/(u hbar)) wedge the trace: the part the bracket must match mod hbar."""
    n = len(args)
    total = _K(model, 0)
    for size in range(0, n + 1, 2):
        for picked in combinations(range(n), size):
            rest = [i for i in range(n) if i not in picked]
            sub = [args[i] for i in picked]
            factor = _evaluate_model(model, sub, [lambda md, vs: central_series(md, vs, 1)], True)
            if factor.is_zero():
                continue
            lhs = oneloop_lhs(model, [args[i] for i in rest])
            total = total + factor * lhs * _shuffle_sign(picked, rest)
    return total.u_shift(-model.k)


@dataclass
class OneLoopReport:
    degree: int
    lhs: ScalarK
    rhs: ScalarK
    normalized_lhs: ScalarK
    bracket: ScalarK
    difference: ScalarK

    @property
    def agrees(self) -> bool:
        """The normalized trace and the class product differ only by positive hbar powers."""
        return all(e >= 1 for (_p, e) in self.difference.flat())

    def as_dict(self) -> dict:
        return {"degree": self.degree, "lhs": self.lhs.render(), "rhs": self.rhs.render(),
                "normalized_lhs": self.normalized_lhs.render(),
                "bracket": self.bracket.render(), "difference": self.difference.render(),
                "agrees": self.agrees}


SUPPORTED_DEGREES = (0, 2)


def oneloop_compare(model: ModelData, args: Sequence[LieElement],
                    degrees: Sequence[int] = SUPPORTED_DEGREES) -> OneLoopReport:
    """Compare both sides of the one-loop formula on ``args``.

    The formula holds modulo O(hbar) inside the bracket, and exp(-R4/(u hbar))
    can lift such terms back to hbar^0, so the comparison strips that factor
    from the trace (as a cochain wedge) before matching against the bracket.
    """
    if len(args) not in degrees:
        raise UnsupportedDegree(f"one-loop comparison is implemented for degrees {tuple(degrees)}")
    lhs = oneloop_lhs(model, args)
    rhs = oneloop_rhs(model, args)
    normalized = untwisted_lhs(model, args)
    bracket_ = oneloop_bracket(model, args)
    return OneLoopReport(len(args), lhs, rhs, normalized, bracket_, normalized - bracket_)
