"""Free and interactive g-twisted correlation maps and the universal trace.

A basis tensor of a chain factorizes into a y-monomial, a z-monomial and a
matrix unit in every slot, so the free correlation is the product of three
pieces computed and cached separately: ``tau0`` (y-lines weighted by simplex
integrals, with d applied to slots >= 1), ``tau1`` (constant z-lines and
self loops, times the vacuum factor) and ``tr_g``.

Slot 0 sits right before the twist, so on the fundamental domain of the
circle the slots are met in the order 1, 2, ..., m, 0.  A line between an
earlier slot E and a later slot L carries the propagator with its first
factor at L, valid for t_L - t_E in (0, 1).

Propagator components are omega-valued, i.e. twice the Moyal bivector used
by the products; see ``LINE_SCALE``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product
from math import factorial
from typing import Dict, List, Sequence, Tuple

from gmpy2 import mpq

from .chains import IDENTITY, Chain, NonInvariantChainError, is_invariant_chain, shuffle, tr_g
from .exactnum import CycloScalar, HbarSeries, ScalarK
from .forms import FormElement, berezin
from .model import ModelData, vacuum_factor
from .simplex import pairing_weight
from .weyl import (MatrixWeyl, WeylElement, _pair_expansion, as_matrix, hat_star,
                   invariant_project, is_invariant, kernel_entries, perp_star)

# ratio between propagator tensor components and the Moyal bivector entries
LINE_SCALE = 2

Exps = Tuple[int, ...]


def _time_order(m: int) -> List[int]:
    return list(range(1, m + 1)) + [0]


def _ordered_pairs(m: int) -> List[Tuple[int, int]]:
    """(earlier, later) slot pairs on the fundamental domain."""
    order = _time_order(m)
    return [(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))]


# ---------------------------------------------------------------- y-part

@lru_cache(maxsize=None)
def _y_line_entries(model: ModelData):
    return kernel_entries(model.kernels.pi1, LINE_SCALE)


def _d_expand(exps: Exps, ny: int):
    """d applied to a y-monomial: [(coefficient, exponents, dy index)]."""
    out = []
    for i in range(ny):
        if exps[i]:
            e = list(exps)
            e[i] -= 1
            out.append((exps[i], tuple(e), i))
    return out


@lru_cache(maxsize=200000)
def tau0_terms(model: ModelData, slots: Tuple[Exps, ...], max_hbar: int):
    """tau0 on y-monomials (full-length exponent vectors, y-part only).

    Returns {(exponents, odd tuple, hbar): rational coefficient}.
    """
    m = len(slots) - 1
    ny = model.ny
    entries = _y_line_entries(model)
    pairs = _ordered_pairs(m)
    choices = [[(1, slots[0], None)]] + [_d_expand(s, ny) for s in slots[1:]]
    out: Dict = {}
    for combo in product(*choices):
        base = mpq(1)
        for c, _e, _o in combo:
            base *= c
        odd = tuple(o for _c, _e, o in combo if o is not None)
        if len(set(odd)) != len(odd):
            continue
        # states: (exps per slot, edge multiplicities, hbar, coefficient)
        states = [(tuple(e for _c, e, _o in combo), (), 0, None)]
        for early, late in pairs:
            new = []
            for ex, mult, h, co in states:
                for xl, xe, s, c2 in _pair_expansion(ex[late], ex[early], entries, max_hbar - h):
                    ex2 = list(ex)
                    ex2[late], ex2[early] = xl, xe
                    if c2 is None:
                        coef = co
                    else:
                        coef = c2 if co is None else co * c2
                    new.append((tuple(ex2), mult + ((early, late, s),) if s else mult,
                                h + s, coef))
            states = new
        for ex, mult, h, co in states:
            edges = [(a, b) for a, b, s in mult for _ in range(s)]
            w = pairing_weight(m + 1, edges)
            if not w:
                continue
            total = tuple(sum(col) for col in zip(*ex))
            val = (co if co is not None else model.scalar(1)) * (w * base)
            key = (total, odd, h)
            cur = out.get(key)
            out[key] = val if cur is None else cur + val
    return {k: v for k, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------- z-part

@lru_cache(maxsize=None)
def _z_line_entries(model: ModelData, kernel_name: str):
    return kernel_entries(getattr(model.kernels, kernel_name), LINE_SCALE)


@lru_cache(maxsize=None)
def _self_loop(model: ModelData, kernel_name: str):
    """Pair coefficients c with the self loop acting as sum c d_a d_b.

    (1/2) sum_ij b^ij d_i d_j with b = LINE_SCALE * kernel.
    """
    kern = getattr(model.kernels, kernel_name)
    half = mpq(LINE_SCALE, 2)
    out = []
    for a, b in model.pairs[model.k:]:
        c = (kern.get((a, b), model.scalar(0)) + kern.get((b, a), model.scalar(0))) * half
        out.append((a, b, c))
    return tuple(out)


def _close_self_loops(model: ModelData, exps: Exps, loops) -> Tuple[int, CycloScalar] | None:
    """sigma_z(exp(hbar L) x^exps) for a z-monomial: (hbar power, coefficient) or None."""
    h = 0
    coef = model.scalar(1)
    for a, b, c in loops:
        if exps[a] != exps[b]:
            return None
        s = exps[a]
        if s:
            if c.is_zero():
                return None
            coef = coef * (c ** s) * factorial(s)
            h += s
    return h, coef


def _sigma_z_close(model: ModelData, exps: Exps, loops):
    if any(exps[v] for v in range(model.ny)):
        return None
    return _close_self_loops(model, exps, loops)


@lru_cache(maxsize=200000)
def tau1_terms(model: ModelData, slots: Tuple[Exps, ...], max_hbar: int) -> Dict[int, CycloScalar]:
    """Direct line expansion: P12 lines between slots, P2 self loops, times the vacuum factor."""
    m = len(slots) - 1
    entries = _z_line_entries(model, "p12")
    loops = _self_loop(model, "p2")
    states = [(slots, 0, None)]
    for early, late in _ordered_pairs(m):
        new = []
        for ex, h, co in states:
            for xl, xe, s, c2 in _pair_expansion(ex[late], ex[early], entries, max_hbar - h):
                ex2 = list(ex)
                ex2[late], ex2[early] = xl, xe
                coef = co if c2 is None else (c2 if co is None else co * c2)
                new.append((tuple(ex2), h + s, coef))
        states = new
    out: Dict[int, CycloScalar] = {}
    vac = vacuum_factor(model)
    for ex, h, co in states:
        total_h, total_c = h, (co if co is not None else model.scalar(1)) * vac
        for e in ex:
            closed = _close_self_loops(model, e, loops)
            if closed is None:
                total_c = None
                break
            total_h += closed[0]
            total_c = total_c * closed[1]
        if total_c is None or total_h > max_hbar:
            continue
        out[total_h] = out[total_h] + total_c if total_h in out else total_c
    return {h: c for h, c in out.items() if not c.is_zero()}


def _z_operand(model: ModelData, b) -> WeylElement:
    b = b if isinstance(b, WeylElement) else WeylElement.constant(model, b)
    if any(e[v] for (e, _h) in b.terms for v in range(model.ny)):
        raise ValueError("tau1 operands must not contain y-variables")
    return b


def _as_series(model: ModelData, terms: Dict[int, CycloScalar]) -> HbarSeries:
    return HbarSeries(model.N, model.hbar_trunc, dict(terms))


def _trace_functional(model: ModelData, x: WeylElement, kernel_name: str = "p3") -> HbarSeries:
    """det^-1 sigma_z(exp(hbar d_P) x) with P acting as a self loop on one slot."""
    loops = _self_loop(model, kernel_name)
    vac = vacuum_factor(model)
    out: Dict[int, CycloScalar] = {}
    for (e, h), c in x.terms.items():
        closed = _sigma_z_close(model, e, loops)
        if closed is None:
            continue
        hh = h + closed[0]
        if hh > model.hbar_trunc:
            continue
        val = c * closed[1] * vac
        out[hh] = out[hh] + val if hh in out else val
    return _as_series(model, out)


def tau1(model: ModelData, operands: Sequence) -> HbarSeries:
    """tau1 on z-observables by the direct P12/P2 expansion."""
    ops = [_z_operand(model, b) for b in operands]
    acc: Dict[int, CycloScalar] = {}
    for combo in product(*[list(b.terms.items()) for b in ops]):
        h0 = sum(h for (_e, h), _c in combo)
        if h0 > model.hbar_trunc:
            continue
        coef = model.scalar(1)
        for _k, c in combo:
            coef = coef * c
        for h, c in tau1_terms(model, tuple(e for (e, _h), _c in combo),
                               model.hbar_trunc - h0).items():
            acc[h + h0] = acc[h + h0] + c * coef if h + h0 in acc else c * coef
    return _as_series(model, acc)


def tau1_hat(model: ModelData, operands: Sequence) -> HbarSeries:
    """det^-1 sigma_z(exp(hbar d_P3)(b_0 hat-star ... hat-star b_m))."""
    ops = [_z_operand(model, b) for b in operands]
    prod_ = ops[0]
    for b in ops[1:]:
        prod_ = hat_star(prod_, b)
    return _trace_functional(model, prod_)


def tau1_prime(model: ModelData, operands: Sequence) -> HbarSeries:
    """det^-1 sigma_z(exp(hbar d_P3)(b_0 star ... star b_m))."""
    ops = [_z_operand(model, b) for b in operands]
    prod_ = ops[0]
    for b in ops[1:]:
        prod_ = perp_star(prod_, b)
    return _trace_functional(model, prod_)


def tau0(model: ModelData, operands: Sequence) -> FormElement:
    """tau0 on y-observables: y-lines integrated over the cyclic simplex."""
    ops = [b if isinstance(b, WeylElement) else WeylElement.constant(model, b) for b in operands]
    for b in ops:
        if any(e[v] for (e, _h) in b.terms for v in range(model.ny, model.nvars)):
            raise ValueError("tau0 operands must not contain z-variables")
    out: Dict = {}
    for combo in product(*[list(b.terms.items()) for b in ops]):
        h0 = sum(h for (_e, h), _c in combo)
        if h0 > model.hbar_trunc:
            continue
        coef = model.scalar(1)
        for _k, c in combo:
            coef = coef * c
        for (e, odd, h), c in tau0_terms(model, tuple(e for (e, _h), _c in combo),
                                         model.hbar_trunc - h0).items():
            key = (e, odd, h + h0, 0)
            out[key] = out[key] + c * coef if key in out else c * coef
    return FormElement(model, out)


# ---------------------------------------------------------------- free correlation

def _split(model: ModelData, exps: Exps) -> Tuple[Exps, Exps]:
    ny = model.ny
    y = tuple(v if i < ny else 0 for i, v in enumerate(exps))
    z = tuple(0 if i < ny else v for i, v in enumerate(exps))
    return y, z


def _unit_matrix(model: ModelData, key):
    r = model.r
    one, zero = model.scalar(1), model.scalar(0)
    if key == IDENTITY:
        return [[one if i == j else zero for j in range(r)] for i in range(r)]
    i, j, _e = key
    return [[one if (s, t) == (i, j) else zero for t in range(r)] for s in range(r)]


def free_correlation(chain: Chain, check: bool = True) -> FormElement:
    """<c>_free with values in forms on the fixed directions."""
    model = chain.model
    if check and not is_invariant_chain(chain):
        raise NonInvariantChainError("the free correlation is defined on g-invariant chains")
    zero_e = (0,) * model.nvars
    out: Dict = {}
    T = model.hbar_trunc
    for (u, h, basis), coef in chain.terms.items():
        if h > T:
            continue
        trace = tr_g([_unit_matrix(model, b) for b in basis], model)
        if trace.is_zero():
            continue
        exps = [zero_e if b == IDENTITY else b[2] for b in basis]
        ys, zs = zip(*[_split(model, e) for e in exps])
        z_part = tau1_terms(model, tuple(zs), T - h)
        if not z_part:
            continue
        y_part = tau0_terms(model, tuple(ys), T - h)
        base = coef * trace
        for hz, cz in z_part.items():
            for (e, odd, hy), cy in y_part.items():
                hh = h + hz + hy
                if hh > T:
                    continue
                key = (e, odd, hh, u)
                val = base * cz * cy
                out[key] = out[key] + val if key in out else val
    return FormElement(model, out)


# ---------------------------------------------------------------- Lie algebra and insertions

class InvalidLieElement(ValueError):
    pass


class LieElement:
    """An element f*Id + hbar*A of the Lie algebra of invariant observables."""

    __slots__ = ("model", "value")

    def __init__(self, model: ModelData, value):
        value = as_matrix(model, value)
        if value.r != model.r:
            value = MatrixWeyl.scalar_matrix(value.entries[0][0], model.r)
        self.model = model
        self.value = value
        self._validate()

    def _validate(self):
        model, v = self.model, self.value
        if not is_invariant(model, v):
            raise InvalidLieElement("Lie algebra elements must be g-invariant")
        for row in v.entries:
            for x in row:
                if any(h < 0 for (_e, h) in x.terms):
                    raise InvalidLieElement("negative hbar powers are not allowed")
        # off the scalar part every entry must carry at least one hbar
        f = v.entries[0][0]
        for i in range(model.r):
            for j in range(model.r):
                rest = v.entries[i][j] - (f if i == j else 0)
                if any(h < 1 for (_e, h) in rest.terms):
                    raise InvalidLieElement("the non-scalar part must be divisible by hbar")

    @property
    def scalar_part(self) -> WeylElement:
        return self.value.entries[0][0].hbar_part(0)

    def h_member(self) -> bool:
        """Membership in sp_2k + sp^g_2n-2k + hbar gl_r + C + sum_{i>1} hbar^i C."""
        model, v = self.model, self.value
        ny = model.ny
        for i in range(model.r):
            for j in range(model.r):
                for (e, h), _c in v.entries[i][j].terms.items():
                    deg = sum(e)
                    if h == 0:
                        if i != j:
                            return False
                        if deg == 2:
                            ys = sum(e[:ny])
                            if ys not in (0, 2):
                                return False
                        elif deg != 0:
                            return False
                    elif h == 1:
                        if deg:
                            return False
                    elif deg:
                        return False
        # the hbar^0 and hbar^(>1) parts must be scalar multiples of Id
        f = v.entries[0][0]
        for i in range(model.r):
            for j in range(model.r):
                rest = v.entries[i][j] - (f if i == j else 0)
                if any(h != 1 for (_e, h) in rest.terms):
                    return False
        return True

    def __repr__(self):
        return f"LieElement({self.value.render()})"


def _cochain_sign(j: int) -> int:
    """Koszul sign of evaluating (Theta)^(x j) on xi_1 ... xi_j."""
    return -1 if (j * (j - 1) // 2) % 2 else 1


def _permutation_sign(p) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def insert_arguments(chain: Chain, args: Sequence[LieElement]) -> Chain:
    """sum over orderings and shuffles of c_0 (x) (c_1..c_m x_sh xi/hbar ...)."""
    model = chain.model
    j = len(args)
    if j == 0:
        return chain
    vals = [a.value.hbar_shift(-1) for a in args]
    items = []
    sign0 = _cochain_sign(j)
    for perm in permutations(range(j)):
        s = sign0 * _permutation_sign(perm)
        inserted = [vals[p] for p in perm]
        for c, u, fs in chain.tensors():
            for sh_sign, word in shuffle(tuple(fs[1:]), tuple(inserted)):
                items.append((c * (s * sh_sign), u, [fs[0]] + list(word)))
    return Chain.from_tensors(model, items)


def interactive_correlation(chain: Chain, args: Sequence[LieElement] = ()) -> FormElement:
    """Degree-j component of the interactive correlation evaluated on ``args``."""
    for a in args:
        if not isinstance(a, LieElement):
            raise InvalidLieElement("arguments must be LieElement instances")
    if args:
        # each inserted argument is invariant, so so is every inserted chain
        return free_correlation(insert_arguments(chain, args), check=False)
    return free_correlation(chain)


def universal_trace(chain: Chain, args: Sequence[LieElement] = ()) -> ScalarK:
    """berezin of the interactive correlation."""
    return berezin(interactive_correlation(chain, args), chain.model.k)
