"""Normalized twisted Hochschild chains, b_g, B_g, shuffles and tr_g.

A chain is stored canonically: every tensor factor is expanded in the basis
{Id} u {E_ii x^0 : i >= 1} u {E_ij x^e : otherwise}, hbar powers are pulled
out to a global coefficient (tensors are over C((hbar))), and tensors with
the identity basis element in a position >= 1 are dropped.  Two chains are
equal exactly when their canonical dictionaries agree.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from .exactnum import CycloScalar
from .model import ModelData
from .weyl import MatrixWeyl, WeylElement, as_matrix, g_act, matrix_moyal_mul

IDENTITY = ("I",)
BasisKey = tuple
ChainKey = Tuple[int, int, Tuple[BasisKey, ...]]


def _decompose(model: ModelData, mat: MatrixWeyl) -> Dict[Tuple[BasisKey, int], CycloScalar]:
    """Coordinates of a matrix observable: {(basis key, hbar power): coefficient}."""
    out: Dict[Tuple[BasisKey, int], CycloScalar] = {}
    zero_e = (0,) * model.nvars

    def add(key, val):
        cur = out.get(key)
        val = val if cur is None else cur + val
        if val.is_zero():
            out.pop(key, None)
        else:
            out[key] = val

    r = mat.r
    for i in range(r):
        for j in range(r):
            for (e, h), c in mat.entries[i][j].terms.items():
                if i == j == 0 and e == zero_e:
                    # E_00 = Id - sum_{t>0} E_tt
                    add((IDENTITY, h), c)
                    for t in range(1, r):
                        add(((t, t, e), h), -c)
                else:
                    add(((i, j, e), h), c)
    return out


def basis_matrix(model: ModelData, key: BasisKey, W=None, T=None) -> MatrixWeyl:
    r = model.r
    zero = WeylElement.zero(model, W, T)
    if key == IDENTITY:
        return MatrixWeyl.identity(model, W, T)
    i, j, e = key
    rows = [[zero] * r for _ in range(r)]
    rows[i][j] = WeylElement.monomial(model, e, 0, 1, W, T)
    return MatrixWeyl(model, rows)


class Chain:
    """Formal sum of tensors O_0 (x) ... (x) O_m with coefficients in Q(zeta)[u, u^-1]."""

    __slots__ = ("model", "terms")

    def __init__(self, model: ModelData, terms: Dict[ChainKey, CycloScalar] | None = None):
        self.model = model
        self.terms = {k: v for k, v in (terms or {}).items()
                      if not v.is_zero() and k[1] <= model.hbar_trunc}

    @classmethod
    def from_tensor(cls, model: ModelData, factors: Sequence, coef=1, upow: int = 0) -> "Chain":
        out: Dict[ChainKey, CycloScalar] = {}
        if not isinstance(coef, CycloScalar):
            coef = model.scalar(coef)
        _accumulate(model, out, [as_matrix(model, f) for f in factors], coef, upow)
        return cls(model, out)

    @classmethod
    def from_tensors(cls, model: ModelData, items: Iterable) -> "Chain":
        """Items are (coefficient, u power, factors)."""
        out: Dict[ChainKey, CycloScalar] = {}
        for coef, upow, factors in items:
            _accumulate(model, out, [as_matrix(model, f) for f in factors], coef, upow)
        return cls(model, out)

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({len(k[2]) - 1 for k in self.terms})

    def __add__(self, other: "Chain") -> "Chain":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return Chain(self.model, out)

    def __neg__(self):
        return Chain(self.model, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Chain":
        if not isinstance(c, CycloScalar):
            c = self.model.scalar(c)
        return Chain(self.model, {k: v * c for k, v in self.terms.items()})

    def u_shift(self, amount: int) -> "Chain":
        return Chain(self.model, {(u + amount, h, t): v for (u, h, t), v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def tensors(self) -> Iterator[Tuple[CycloScalar, int, Tuple[MatrixWeyl, ...]]]:
        """Yield (coefficient, u power, factors) with hbar folded into slot 0."""
        model = self.model
        for (u, h, basis), c in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            factors = [basis_matrix(model, b) for b in basis]
            factors[0] = factors[0].hbar_shift(h) if h else factors[0]
            yield c, u, tuple(factors)

    def __repr__(self):
        return f"Chain({len(self.terms)} terms, degrees {self.degrees()})"


def _accumulate(model, out, factors: List[MatrixWeyl], coef: CycloScalar, upow: int) -> None:
    parts = []
    for pos, f in enumerate(factors):
        d = _decompose(model, f)
        if pos > 0:
            d = {k: v for k, v in d.items() if k[0] != IDENTITY}
        if not d:
            return
        parts.append(list(d.items()))
    for combo in product(*parts):
        h = sum(k[1] for k, _ in combo)
        if h > model.hbar_trunc:
            continue
        c = coef
        for _, v in combo:
            c = c * v
        key = (upow, h, tuple(k[0] for k, _ in combo))
        cur = out.get(key)
        c = c if cur is None else cur + c
        if c.is_zero():
            out.pop(key, None)
        else:
            out[key] = c


def g_act_chain(chain: Chain, power: int = 1) -> Chain:
    model = chain.model
    items = [(c, u, [g_act(model, f, power) for f in fs]) for c, u, fs in chain.tensors()]
    return Chain.from_tensors(model, items)


def is_invariant_chain(chain: Chain) -> bool:
    return g_act_chain(chain) == chain


def invariant_project_chain(chain: Chain) -> Chain:
    acc = chain
    for p in range(1, chain.model.N):
        acc = acc + g_act_chain(chain, p)
    return acc.scale(chain.model.scalar(1) / chain.model.N)


def b_g(chain: Chain, model: ModelData | None = None) -> Chain:
    """Twisted Hochschild differential on normalized chains."""
    model = model or chain.model
    items = []
    for c, u, a in chain.tensors():
        m = len(a) - 1
        if m == 0:
            continue
        sign = -1 if m % 2 else 1
        items.append((c * sign, u, [matrix_moyal_mul(a[m], a[0])] + list(a[1:m])))
        items.append((c, u, [matrix_moyal_mul(a[0], g_act(model, a[1]))] + list(a[2:])))
        for i in range(1, m):
            s = -1 if i % 2 else 1
            items.append((c * s, u, list(a[:i]) + [matrix_moyal_mul(a[i], a[i + 1])]
                          + list(a[i + 2:])))
    return Chain.from_tensors(model, items)


class NonInvariantChainError(ValueError):
    pass


def B_g(chain: Chain, model: ModelData | None = None, check: bool = True) -> Chain:
    """Twisted Connes operator; defined on g-invariant chains only."""
    model = model or chain.model
    if check and not is_invariant_chain(chain):
        raise NonInvariantChainError("B_g is only defined on g-invariant chains")
    one = MatrixWeyl.identity(model)
    items = []
    for c, u, a in chain.tensors():
        m = len(a) - 1
        # the twist stays between slot 0 and slot 1, so every entry carried
        # across it picks up g^-1
        first = g_act(model, a[0], -1)
        items.append((c, u, [one, first] + list(a[1:])))
        for i in range(1, m + 1):
            s = -1 if (m * i) % 2 else 1
            moved = [g_act(model, x, -1) for x in a[m - i + 1:]]
            items.append((c * s, u, [one] + moved + [first] + list(a[1:m - i + 1])))
    return Chain.from_tensors(model, items)


def gm_nabla_chain(chain: Chain) -> Chain:
    """hbar d/dhbar + L_E acting as a derivation on every tensor factor."""
    from gmpy2 import mpq
    out = {}
    for (u, h, basis), c in chain.terms.items():
        weight = mpq(h) + sum(mpq(sum(b[2]), 2) for b in basis if b != IDENTITY)
        if weight:
            out[(u, h, basis)] = c * weight
    return Chain(chain.model, out)


def periodic_differential(chain: Chain) -> Chain:
    """b_g + u B_g."""
    return b_g(chain) + B_g(chain).u_shift(1)


def shuffle(s: Sequence, t: Sequence, degrees_s: Sequence[int] | None = None,
            degrees_t: Sequence[int] | None = None) -> List[Tuple[int, tuple]]:
    """All (p, q)-shuffles of two words as (Koszul sign, word).

    The sign counts transpositions of odd entries of ``t`` past odd entries
    of ``s``; with no degrees given every entry is even.
    """
    p, q = len(s), len(t)
    ds = list(degrees_s) if degrees_s is not None else [0] * p
    dt = list(degrees_t) if degrees_t is not None else [0] * q
    out = []
    for positions in combinations(range(p + q), p):
        word, si, ti, sign = [], 0, 0, 1
        pos = set(positions)
        for slot in range(p + q):
            if slot in pos:
                word.append(s[si])
                si += 1
            else:
                # t[ti] jumps over the remaining s entries
                if dt[ti] % 2 and sum(ds[si:]) % 2:
                    sign = -sign
                word.append(t[ti])
                ti += 1
        out.append((sign, tuple(word)))
    return out


def tr_g(mats: Sequence, model: ModelData):
    """tr(M_0 g M_1 ... M_m) for constant matrices given as nested sequences."""
    r = len(mats[0])
    if model.r != r or any(len(M) != r for M in mats):
        raise ValueError(f"rank mismatch: model has r={model.r}")
    from .model import matrix_mul
    acc = matrix_mul(mats[0], model.twist)
    for M in mats[1:]:
        acc = matrix_mul(acc, M)
    total = acc[0][0] * 0
    for i in range(r):
        total = total + acc[i][i]
    return total
