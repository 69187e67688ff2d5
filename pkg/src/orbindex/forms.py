"""Formal differential forms with Grassmann generators dx^v.

Terms are keyed by ``(exponents, odd, hbar_power, u_power)`` where ``odd``
is a strictly increasing tuple of variable indices naming the Grassmann
generators dy^1 < ... < dy^{2k} < dz^{2k+1} < ... < dz^{2n}.  Signs come
from sorting by adjacent transpositions.
"""

from __future__ import annotations

from math import factorial
from typing import Dict, Iterable, Tuple

from gmpy2 import mpq

from .exactnum import CycloScalar, ScalarK
from .model import ModelData
from .weyl import WeylElement

FormKey = Tuple[Tuple[int, ...], Tuple[int, ...], int, int]


def merge_sign(a: Tuple[int, ...], b: Tuple[int, ...]):
    """Sign and sorted union of two Grassmann words, or (0, None) on overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return 0, None
    inversions = 0
    for x in a:
        for y in b:
            if y < x:
                inversions += 1
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


def _add(out: Dict, key, val) -> None:
    cur = out.get(key)
    if cur is None:
        out[key] = val
    else:
        s = cur + val
        if s.is_zero():
            del out[key]
        else:
            out[key] = s


class FormElement:
    """Immutable formal form; coefficients live in Q(zeta_N)[hbar, u]."""

    __slots__ = ("model", "terms", "W", "T")

    def __init__(self, model: ModelData, terms: Dict[FormKey, CycloScalar] | None = None,
                 W: int | None = None, T: int | None = None):
        self.model = model
        self.W = model.weight_trunc if W is None else W
        self.T = model.hbar_trunc if T is None else T
        clean: Dict[FormKey, CycloScalar] = {}
        for (e, odd, h, u), c in (terms or {}).items():
            if not isinstance(c, CycloScalar):
                c = model.scalar(c)
            if c.is_zero() or h > self.T or sum(e) + 2 * h > self.W:
                continue
            if list(odd) != sorted(set(odd)):
                sign, odd2 = 1, tuple(sorted(odd))
                if len(set(odd)) != len(odd):
                    continue
                # permutation sign of the sort
                perm = sorted(range(len(odd)), key=lambda i: odd[i])
                seen, sgn = [False] * len(perm), 1
                for i in range(len(perm)):
                    if not seen[i]:
                        j, length = i, 0
                        while not seen[j]:
                            seen[j] = True
                            j = perm[j]
                            length += 1
                        if length % 2 == 0:
                            sgn = -sgn
                c, odd = c * sgn, odd2
            _add(clean, (tuple(e), tuple(odd), h, u), c)
        self.terms = clean

    @classmethod
    def _raw(cls, model, terms, W, T):
        obj = object.__new__(cls)
        obj.model, obj.terms, obj.W, obj.T = model, terms, W, T
        return obj

    @classmethod
    def from_weyl(cls, a: WeylElement) -> "FormElement":
        return cls._raw(a.model, {(e, (), h, 0): c for (e, h), c in a.terms.items()}, a.W, a.T)

    @classmethod
    def zero(cls, model, W=None, T=None):
        return cls(model, {}, W, T)

    @classmethod
    def constant(cls, model, value=1, W=None, T=None):
        return cls(model, {((0,) * model.nvars, (), 0, 0): value}, W, T)

    @classmethod
    def differential(cls, model, v: int, W=None, T=None):
        return cls(model, {((0,) * model.nvars, (v,), 0, 0): 1}, W, T)

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other):
        if isinstance(other, FormElement):
            return other
        if isinstance(other, WeylElement):
            return FormElement.from_weyl(other)
        return FormElement.constant(self.model, other, self.W, self.T)

    def __add__(self, other):
        other = self._coerce(other)
        W, T = min(self.W, other.W), min(self.T, other.T)
        out = {}
        for src in (self.terms, other.terms):
            for k, v in src.items():
                if k[2] <= T and sum(k[0]) + 2 * k[2] <= W:
                    _add(out, k, v)
        return FormElement._raw(self.model, out, W, T)

    __radd__ = __add__

    def __neg__(self):
        return FormElement._raw(self.model, {k: -v for k, v in self.terms.items()},
                                self.W, self.T)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def scale(self, c) -> "FormElement":
        if not isinstance(c, CycloScalar):
            c = self.model.scalar(c)
        if c.is_zero():
            return FormElement._raw(self.model, {}, self.W, self.T)
        return FormElement._raw(self.model, {k: v * c for k, v in self.terms.items()},
                                self.W, self.T)

    def wedge(self, other: "FormElement") -> "FormElement":
        """Graded-commutative product (polynomial part commutes)."""
        other = self._coerce(other)
        W, T = min(self.W, other.W), min(self.T, other.T)
        out = {}
        for (e1, o1, h1, u1), c1 in self.terms.items():
            w1 = sum(e1) + 2 * h1
            for (e2, o2, h2, u2), c2 in other.terms.items():
                h = h1 + h2
                if h > T or w1 + sum(e2) + 2 * h2 > W:
                    continue
                sign, odd = merge_sign(o1, o2)
                if not sign:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2))
                val = c1 * c2
                _add(out, (e, odd, h, u1 + u2), val if sign > 0 else -val)
        return FormElement._raw(self.model, out, W, T)

    __mul__ = wedge

    def hbar_shift(self, amount: int) -> "FormElement":
        return FormElement._raw(self.model, {(e, o, h + amount, u): c
                                             for (e, o, h, u), c in self.terms.items()},
                                self.W + 2 * amount, self.T + amount)

    def u_shift(self, amount: int) -> "FormElement":
        return FormElement._raw(self.model, {(e, o, h, u + amount): c
                                             for (e, o, h, u), c in self.terms.items()},
                                self.W, self.T)

    def agrees(self, other) -> bool:
        other = self._coerce(other)
        W, T = min(self.W, other.W), min(self.T, other.T)
        zero = self.model.scalar(0)
        for k in set(self.terms) | set(other.terms):
            if k[2] <= T and sum(k[0]) + 2 * k[2] <= W:
                if self.terms.get(k, zero) != other.terms.get(k, zero):
                    return False
        return True

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.agrees(other)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def has_perp_content(self) -> bool:
        ny = self.model.ny
        return any(any(e[ny:]) or any(v >= ny for v in o) for (e, o, _h, _u) in self.terms)

    def form_degrees(self):
        return {len(o) for (_e, o, _h, _u) in self.terms}

    def render(self) -> str:
        from .parsing import render_form
        return render_form(self)

    def __repr__(self):
        return f"FormElement({self.render()})"


def d_2k(a: FormElement) -> FormElement:
    """sum_i dy^i d/dy^i over the fixed directions only."""
    out = {}
    for (e, o, h, u), c in a.terms.items():
        for i in range(a.model.ny):
            if not e[i] or i in o:
                continue
            less = sum(1 for v in o if v < i)
            e2 = list(e)
            e2[i] -= 1
            odd = tuple(sorted(o + (i,)))
            val = c * e[i]
            _add(out, (tuple(e2), odd, h, u), -val if less & 1 else val)
    return FormElement._raw(a.model, out, a.W - 1, a.T)


def iota(a: FormElement, v: int) -> FormElement:
    """Interior product with d/dx^v (odd derivation from the left)."""
    out = {}
    for (e, o, h, u), c in a.terms.items():
        if v in o:
            pos = o.index(v)
            odd = o[:pos] + o[pos + 1:]
            _add(out, (e, odd, h, u), -c if pos & 1 else c)
    return FormElement._raw(a.model, out, a.W, a.T)


def iota_pi1(a: FormElement) -> FormElement:
    """1/2 omega^{ij} iota_i iota_j over the fixed directions."""
    acc = FormElement.zero(a.model, a.W, a.T)
    half = a.model.scalar(mpq(1, 2))
    for i, j in a.model.pairs[:a.model.k]:
        # omega^{ij} = 1 and omega^{ji} = -1
        acc = acc + iota(iota(a, j), i).scale(half) - iota(iota(a, i), j).scale(half)
    return acc


def bv_delta(a: FormElement) -> FormElement:
    """The graded commutator [d, iota_Pi1] = d iota - iota d."""
    return d_2k(iota_pi1(a)) - iota_pi1(d_2k(a))


def euler_lie(a: FormElement) -> FormElement:
    """L_E with generators dx counted with degree one."""
    return FormElement._raw(a.model, {k: c * mpq(sum(k[0]) + len(k[1]), 2)
                                      for k, c in a.terms.items() if sum(k[0]) + len(k[1])},
                            a.W, a.T)


def gm_nabla(a):
    """hbar d/dhbar + L_E on forms, Weyl elements, matrices and scalars."""
    from .weyl import MatrixWeyl, gm_nabla_scalar
    if isinstance(a, FormElement):
        out = {}
        for k, c in a.terms.items():
            w = mpq(sum(k[0]) + len(k[1]), 2) + k[2]
            if w:
                out[k] = c * w
        return FormElement._raw(a.model, out, a.W, a.T)
    if isinstance(a, WeylElement):
        return gm_nabla_scalar(a)
    if isinstance(a, MatrixWeyl):
        return a.map(gm_nabla_scalar)
    if isinstance(a, ScalarK):
        return a.hbar_euler()
    raise TypeError(f"gm_nabla is not defined on {type(a).__name__}")


def sigma_z_form(a: FormElement) -> FormElement:
    ny = a.model.ny
    return FormElement._raw(a.model, {k: c for k, c in a.terms.items()
                                      if not any(k[0][ny:]) and all(v < ny for v in k[1])},
                            a.W, a.T)


def sigma_y_form(a: FormElement) -> FormElement:
    ny = a.model.ny
    return FormElement._raw(a.model, {k: c for k, c in a.terms.items()
                                      if not any(k[0][:ny]) and all(v >= ny for v in k[1])},
                            a.W, a.T)


def berezin(a: FormElement, k: int | None = None) -> ScalarK:
    """u^k sigma_y(exp(hbar iota_Pi1 / u) a)."""
    model = a.model
    k = model.k if k is None else k
    if a.has_perp_content():
        raise ValueError("berezin integral needs input without z or dz content; "
                         "apply sigma_z first")
    flat: Dict[Tuple[int, int], CycloScalar] = {}
    term = a
    j = 0
    while not term.is_zero():
        for (e, o, h, u), c in term.terms.items():
            if o or any(e):
                continue
            key = (u - j + k, h + j)
            val = c * mpq(1, factorial(j))
            flat[key] = flat[key] + val if key in flat else val
        term = iota_pi1(term)
        j += 1
    T = a.T
    flat = {key: c for key, c in flat.items() if key[1] <= T and not c.is_zero()}
    return ScalarK.from_flat(model.N, T, flat)
