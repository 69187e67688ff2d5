"""Exact coefficient rings.

``CycloScalar`` is an element of Q(zeta_N) stored in the power basis modulo
the N-th cyclotomic polynomial.  ``HbarSeries`` is a truncated Laurent
series in hbar over ``CycloScalar``; ``ScalarK`` is a Laurent polynomial in
u whose coefficients are ``HbarSeries``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, Iterator, Tuple

import sympy
from gmpy2 import mpq

Rational = type(mpq(0))


def Q(value, den=None):
    """Coerce ints, Fractions, strings and mpq values to an exact rational."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, Rational):
        return value
    return mpq(value)


def format_rational(q) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


@lru_cache(maxsize=None)
def _field_data(order: int):
    """Return (phi, reduction table, zeta powers) for Q(zeta_order).

    The reduction table maps x**j for j < 2*phi - 1 to its coordinates
    modulo the cyclotomic polynomial.
    """
    if order < 1:
        raise ValueError(f"cyclotomic order must be positive, got {order}")
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(order, x), x).all_coeffs()
    phi = len(poly) - 1
    # x**phi = -sum(poly[phi - i] * x**i)  (poly is monic, highest first)
    low = [-int(poly[phi - i]) for i in range(phi)]
    table = []
    for j in range(max(2 * phi - 1, order)):
        if j < phi:
            vec = [0] * phi
            vec[j] = 1
        else:
            prev = table[j - 1]
            carry = prev[-1]
            vec = [0] + prev[:-1]
            if carry:
                vec = [v + carry * c for v, c in zip(vec, low)]
        table.append(vec)
    powers = tuple(tuple(mpq(v) for v in table[j]) for j in range(order))
    return phi, tuple(tuple(row) for row in table), powers


def totient(order: int) -> int:
    return _field_data(order)[0]


class CycloScalar:
    """Immutable element of the N-th cyclotomic field."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Iterable = ()):
        phi = _field_data(order)[0]
        vals = [Q(c) for c in coeffs]
        if len(vals) > phi:
            vals = _reduce_poly(order, vals)
        vals += [mpq(0)] * (phi - len(vals))
        self.order = order
        self.coeffs = tuple(vals)

    @classmethod
    def _raw(cls, order: int, coeffs: tuple) -> "CycloScalar":
        obj = object.__new__(cls)
        obj.order = order
        obj.coeffs = coeffs
        return obj

    @classmethod
    def rational(cls, order: int, value) -> "CycloScalar":
        return cls(order, [Q(value)])

    @classmethod
    def zeta(cls, order: int, power: int = 1) -> "CycloScalar":
        """zeta_N ** power for any integer power."""
        return cls._raw(order, _field_data(order)[2][power % order])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def _check(self, other: "CycloScalar") -> None:
        if self.order != other.order:
            raise ValueError(
                f"mismatched cyclotomic orders {self.order} and {other.order}")

    def _coerce(self, other) -> "CycloScalar":
        if isinstance(other, CycloScalar):
            self._check(other)
            return other
        return CycloScalar.rational(self.order, other)

    def __add__(self, other):
        other = self._coerce(other)
        return CycloScalar._raw(
            self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycloScalar._raw(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, CycloScalar):
            q = Q(other)
            return CycloScalar._raw(self.order, tuple(a * q for a in self.coeffs))
        self._check(other)
        return cyclo_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, CycloScalar):
            q = Q(other)
            if q == 0:
                raise ZeroDivisionError("division of a cyclotomic scalar by zero")
            return CycloScalar._raw(self.order, tuple(a / q for a in self.coeffs))
        return self * cyclo_inv(other)

    def __rtruediv__(self, other):
        return self._coerce(other) * cyclo_inv(self)

    def __pow__(self, exp: int):
        if exp < 0:
            return cyclo_inv(self) ** (-exp)
        result = CycloScalar.rational(self.order, 1)
        base = self
        while exp:
            if exp & 1:
                result = result * base
            base = base * base
            exp >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, CycloScalar):
            return self.order == other.order and self.coeffs == other.coeffs
        try:
            q = Q(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.is_rational() and self.coeffs[0] == q

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def __bool__(self):
        return not self.is_zero()

    def conjugate(self) -> "CycloScalar":
        """Complex conjugation zeta -> zeta**-1."""
        powers = _field_data(self.order)[2]
        out = [mpq(0)] * len(self.coeffs)
        for j, c in enumerate(self.coeffs):
            if c:
                for i, v in enumerate(powers[(-j) % self.order]):
                    out[i] += c * v
        return CycloScalar._raw(self.order, tuple(out))

    def render(self) -> str:
        terms = [(j, c) for j, c in enumerate(self.coeffs) if c]
        if not terms:
            return "0"
        return _join_terms(
            (c, f"z{self.order}^{j}" if j else "") for j, c in terms)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"CycloScalar({self.order}, {self.render()})"


def _join_terms(pairs) -> str:
    """Render (rational, monomial-text) pairs as a signed sum."""
    out = []
    for coef, mono in pairs:
        neg = coef < 0
        mag = -coef if neg else coef
        if mono and mag == 1:
            body = mono
        else:
            body = format_rational(mag) + ("*" + mono if mono else "")
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out) if out else "0"


def _reduce_poly(order: int, vals):
    phi, table, _ = _field_data(order)
    out = [mpq(0)] * phi
    for j, c in enumerate(vals):
        if not c:
            continue
        if j >= len(table):
            row = _field_data(order)[2][j % order]
        else:
            row = table[j]
        for i, v in enumerate(row):
            if v:
                out[i] += c * v
    return out


def cyclo_mul(a: CycloScalar, b: CycloScalar) -> CycloScalar:
    """Canonical product in Q(zeta_N)."""
    if a.order != b.order:
        raise ValueError(f"mismatched cyclotomic orders {a.order} and {b.order}")
    ac, bc = a.coeffs, b.coeffs
    if len(ac) == 1:
        return CycloScalar._raw(a.order, (ac[0] * bc[0],))
    prod = [mpq(0)] * (2 * len(ac) - 1)
    for i, x in enumerate(ac):
        if x:
            for j, y in enumerate(bc):
                if y:
                    prod[i + j] += x * y
    return CycloScalar._raw(a.order, tuple(_reduce_poly(a.order, prod)))


def cyclo_inv(a: CycloScalar) -> CycloScalar:
    """Inverse in Q(zeta_N) by solving the multiplication-matrix system."""
    if a.is_zero():
        raise ZeroDivisionError("inverse of zero in the cyclotomic field")
    phi = len(a.coeffs)
    if phi == 1:
        return CycloScalar._raw(a.order, (1 / a.coeffs[0],))
    # column j of the matrix is a * x**j
    cols = []
    for j in range(phi):
        basis = [mpq(0)] * phi
        basis[j] = mpq(1)
        cols.append(cyclo_mul(a, CycloScalar._raw(a.order, tuple(basis))).coeffs)
    mat = [[cols[j][i] for j in range(phi)] + [mpq(1 if i == 0 else 0)]
           for i in range(phi)]
    for col in range(phi):
        pivot = next(r for r in range(col, phi) if mat[r][col])
        mat[col], mat[pivot] = mat[pivot], mat[col]
        p = mat[col][col]
        mat[col] = [v / p for v in mat[col]]
        for r in range(phi):
            if r != col and mat[r][col]:
                f = mat[r][col]
                mat[r] = [v - f * w for v, w in zip(mat[r], mat[col])]
    return CycloScalar._raw(a.order, tuple(mat[i][phi] for i in range(phi)))


class HbarSeries:
    """Laurent series in hbar truncated above order ``trunc``."""

    __slots__ = ("order", "trunc", "coeffs")

    def __init__(self, order: int, trunc: int, coeffs: Dict[int, CycloScalar] | None = None):
        self.order = order
        self.trunc = trunc
        clean = {}
        for e, c in (coeffs or {}).items():
            if not isinstance(c, CycloScalar):
                c = CycloScalar.rational(order, c)
            elif c.order != order:
                raise ValueError("coefficient order mismatch")
            if e <= trunc and not c.is_zero():
                clean[e] = c
        self.coeffs = clean

    @classmethod
    def constant(cls, order: int, trunc: int, value=1) -> "HbarSeries":
        return cls(order, trunc, {0: value})

    @classmethod
    def monomial(cls, order: int, trunc: int, exp: int, value=1) -> "HbarSeries":
        return cls(order, trunc, {exp: value})

    @property
    def lowest(self):
        return min(self.coeffs) if self.coeffs else None

    def is_zero(self) -> bool:
        return not self.coeffs

    def _coerce(self, other) -> "HbarSeries":
        if isinstance(other, HbarSeries):
            if other.order != self.order:
                raise ValueError("mismatched cyclotomic orders")
            return other
        return HbarSeries.constant(self.order, self.trunc, other)

    def __add__(self, other):
        other = self._coerce(other)
        trunc = min(self.trunc, other.trunc)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return HbarSeries(self.order, trunc, out)

    __radd__ = __add__

    def __neg__(self):
        return HbarSeries(self.order, self.trunc, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, HbarSeries):
            if isinstance(other, CycloScalar):
                return HbarSeries(self.order, self.trunc,
                                  {e: c * other for e, c in self.coeffs.items()})
            return self * self._coerce(other)
        return series_mul(self, other)

    __rmul__ = __mul__

    def shift(self, amount: int) -> "HbarSeries":
        """Multiply by hbar**amount; the valid order moves with it."""
        return HbarSeries(self.order, self.trunc + amount,
                          {e + amount: c for e, c in self.coeffs.items()})

    def retruncate(self, trunc: int) -> "HbarSeries":
        return HbarSeries(self.order, min(trunc, self.trunc), self.coeffs)

    def hbar_derivative_euler(self) -> "HbarSeries":
        """hbar d/dhbar."""
        return HbarSeries(self.order, self.trunc,
                          {e: c * e for e, c in self.coeffs.items()})

    def agrees(self, other: "HbarSeries") -> bool:
        """Equality on every exponent valid in both operands."""
        other = self._coerce(other)
        t = min(self.trunc, other.trunc)
        keys = {e for e in self.coeffs if e <= t} | {e for e in other.coeffs if e <= t}
        zero = CycloScalar.rational(self.order, 0)
        return all(self.coeffs.get(e, zero) == other.coeffs.get(e, zero) for e in keys)

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.agrees(other)

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def items(self):
        return sorted(self.coeffs.items())

    def render(self) -> str:
        pairs = []
        for e, c in self.items():
            for j, q in enumerate(c.coeffs):
                if q:
                    mono = "*".join(p for p in (
                        f"z{self.order}^{j}" if j else "",
                        f"h^{e}" if e else "") if p)
                    pairs.append((q, mono))
        return _join_terms(pairs)

    def __repr__(self):
        return f"HbarSeries({self.render()}; T={self.trunc})"


def series_mul(a: HbarSeries, b: HbarSeries) -> HbarSeries:
    """Cauchy product truncated at min(T_a, T_b)."""
    if a.order != b.order:
        raise ValueError("mismatched cyclotomic orders")
    trunc = min(a.trunc, b.trunc)
    out: Dict[int, CycloScalar] = {}
    for e1, c1 in a.coeffs.items():
        for e2, c2 in b.coeffs.items():
            e = e1 + e2
            if e > trunc:
                continue
            p = c1 * c2
            out[e] = out[e] + p if e in out else p
    return HbarSeries(a.order, trunc, out)


class ScalarK:
    """Laurent polynomial in u with ``HbarSeries`` coefficients."""

    __slots__ = ("order", "trunc", "terms")

    def __init__(self, order: int, trunc: int, terms: Dict[int, HbarSeries] | None = None):
        self.order = order
        self.trunc = trunc
        clean = {}
        for p, s in (terms or {}).items():
            s = s.retruncate(trunc)
            if not s.is_zero():
                clean[p] = s
        self.terms = clean

    @classmethod
    def from_flat(cls, order: int, trunc: int,
                  flat: Dict[Tuple[int, int], CycloScalar]) -> "ScalarK":
        """Build from {(u power, hbar power): coefficient}."""
        grouped: Dict[int, Dict[int, CycloScalar]] = {}
        for (p, e), c in flat.items():
            grouped.setdefault(p, {})[e] = c
        return cls(order, trunc, {p: HbarSeries(order, trunc, d) for p, d in grouped.items()})

    @classmethod
    def constant(cls, order: int, trunc: int, value=1, upow: int = 0, hpow: int = 0):
        return cls(order, trunc, {upow: HbarSeries.monomial(order, trunc, hpow, value)})

    def flat(self) -> Dict[Tuple[int, int], CycloScalar]:
        return {(p, e): c for p, s in self.terms.items() for e, c in s.coeffs.items()}

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "ScalarK":
        if isinstance(other, ScalarK):
            return other
        if isinstance(other, HbarSeries):
            return ScalarK(self.order, other.trunc, {0: other})
        return ScalarK.constant(self.order, self.trunc, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for p, s in other.terms.items():
            out[p] = out[p] + s if p in out else s
        return ScalarK(self.order, min(self.trunc, other.trunc), out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarK(self.order, self.trunc, {p: -s for p, s in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        trunc = min(self.trunc, other.trunc)
        out: Dict[int, HbarSeries] = {}
        for p1, s1 in self.terms.items():
            for p2, s2 in other.terms.items():
                s = s1 * s2
                p = p1 + p2
                out[p] = out[p] + s if p in out else s
        return ScalarK(self.order, trunc, out)

    __rmul__ = __mul__

    def u_shift(self, amount: int) -> "ScalarK":
        return ScalarK(self.order, self.trunc, {p + amount: s for p, s in self.terms.items()})

    def hbar_shift(self, amount: int) -> "ScalarK":
        return ScalarK(self.order, self.trunc + amount,
                       {p: s.shift(amount) for p, s in self.terms.items()})

    def hbar_euler(self) -> "ScalarK":
        return ScalarK(self.order, self.trunc,
                       {p: s.hbar_derivative_euler() for p, s in self.terms.items()})

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.flat().items()))

    def coefficient(self, upow: int, hpow: int) -> CycloScalar:
        s = self.terms.get(upow)
        if s is None or hpow not in s.coeffs:
            return CycloScalar.rational(self.order, 0)
        return s.coeffs[hpow]

    def render(self) -> str:
        return render_flat(self.order, self.flat())

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"ScalarK({self.render()}; T={self.trunc})"


def render_flat(order: int, flat: Dict[Tuple[int, int], CycloScalar]) -> str:
    """Canonical text such as ``(3/2)*z3^1*h^-1*u^2``.

    Terms are sorted by u power, then hbar power, then cyclotomic power.
    """
    pairs = []
    for (p, e) in sorted(flat, key=lambda t: (t[0], t[1])):
        c = flat[(p, e)]
        for j, q in enumerate(c.coeffs):
            if q:
                parts = [f"z{order}^{j}" if j else "", f"h^{e}" if e else "",
                         f"u^{p}" if p else ""]
                pairs.append((q, "*".join(x for x in parts if x)))
    return _join_terms(pairs)


def iter_nonzero(mapping: dict) -> Iterator:
    for key, value in mapping.items():
        if not value.is_zero():
            yield key, value
