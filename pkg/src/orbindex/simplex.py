"""Exact integrals of propagator products over the cyclic configuration space.

Points sit at 0 = t_0 <= t_1 <= ... <= t_m <= 1.  An edge (a, b) contributes
the factor d(t_a, t_b) - 1/2 where d is the oriented distance from a to b
going around the circle in the positive direction.
"""

from __future__ import annotations

import threading
from collections import Counter
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Dict, Iterable, Tuple

from gmpy2 import mpq
from sympy import bernoulli

Edge = Tuple[int, int]
Poly = Dict[Tuple[int, ...], mpq]

_lock = threading.Lock()
_cache: Dict[Tuple[int, Tuple[Tuple[Edge, int], ...]], mpq] = {}


def _mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            v = out.get(e, 0) + c1 * c2
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _edge_factor(size: int, a: int, b: int) -> Poly:
    """d(t_a, t_b) - 1/2 as a linear polynomial in t_1..t_m (t_0 = 0)."""
    lin = [mpq(0)] * size
    const = mpq(-1, 2) + (0 if b > a else 1)
    if b:
        lin[b] += 1
    if a:
        lin[a] -= 1
    out: Poly = {}
    zero = (0,) * size
    if const:
        out[zero] = const
    for v in range(1, size):
        if lin[v]:
            e = list(zero)
            e[v] = 1
            out[tuple(e)] = lin[v]
    return out


def _integrate_ordered(p: Poly, size: int) -> mpq:
    """Integrate over 0 <= t_1 <= ... <= t_{size-1} <= 1, innermost last variable first."""
    for v in range(size - 1, 0, -1):
        out: Poly = {}
        for e, c in p.items():
            k = e[v] + 1
            base = list(e)
            base[v] = 0
            coef = c / k
            # upper limit 1
            key = tuple(base)
            out[key] = out.get(key, 0) + coef
            # lower limit t_{v-1} (or 0 when v == 1)
            if v > 1:
                low = list(base)
                low[v - 1] += k
                key = tuple(low)
                out[key] = out.get(key, 0) - coef
        p = {e: c for e, c in out.items() if c}
    return p.get((0,) * size, mpq(0))


def _canonical(size: int, edges: Counter) -> Tuple[Tuple[Edge, int], ...]:
    """Lexicographically least rotation of the labelled edge multiset."""
    best = None
    for shift in range(size):
        rot = tuple(sorted((((a + shift) % size, (b + shift) % size), mult)
                           for (a, b), mult in edges.items()))
        if best is None or rot < best:
            best = rot
    return best


def pairing_weight(size: int, edges: Iterable[Edge]) -> mpq:
    """Exact integral over the cyclic simplex of prod (d(t_a, t_b) - 1/2).

    ``size`` is the number of positions m + 1.  The empty product gives 1/m!.
    """
    counts = Counter()
    for a, b in edges:
        if not (0 <= a < size and 0 <= b < size) or a == b:
            raise ValueError(f"invalid edge ({a}, {b}) for {size} positions")
        counts[(a, b)] += 1
    key = (size, _canonical(size, counts))
    cached = _cache.get(key)
    if cached is not None:
        return cached
    p: Poly = {(0,) * size: mpq(1)}
    for (a, b), mult in key[1]:
        f = _edge_factor(size, a, b)
        for _ in range(mult):
            p = _mul(p, f)
    value = _integrate_ordered(p, size)
    with _lock:
        _cache.setdefault(key, value)
    return value


def wheel_coefficient(k: int) -> mpq:
    """(1/k) times the integral of the k-cycle over all configurations of k points.

    The first point is pinned at 0 and the others run over every cyclic
    ordering.  The accompanying power u^-k is left to the caller.
    """
    if k < 1:
        raise ValueError("wheel length must be positive")
    if k == 1:
        # a single vertex carries a self loop, not a line
        return mpq(0)
    total = mpq(0)
    for order in permutations(range(1, k)):
        place = {0: 0}
        place.update({v: i + 1 for i, v in enumerate(order)})
        total += pairing_weight(k, [(place[i], place[(i + 1) % k]) for i in range(k)])
    return total / k


@lru_cache(maxsize=None)
def bernoulli_wheel(k: int) -> mpq:
    """-B_k / (k * k!) for even k and 0 for odd k, the closed form of C(k)."""
    if k % 2:
        return mpq(0)
    b = bernoulli(k)
    return -mpq(int(b.p), int(b.q)) / (k * factorial(k))
