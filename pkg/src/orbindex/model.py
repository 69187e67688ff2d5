"""Linear symplectic orbifold models and their propagator kernels.

Variables are indexed 0..2n-1: indices below 2k are the fixed coordinates
y^1..y^{2k}; the rest are the complex perpendicular coordinates
z^{2k+1}..z^{2n}.  The generator g acts diagonally, z^j -> zeta^{l_j} z^j on
the first half of each perpendicular pair and by the inverse eigenvalue on
its partner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .exactnum import CycloScalar, Q, cyclo_inv

Kernel = Dict[Tuple[int, int], CycloScalar]

# g acts on the vector d_t by zeta^(VECTOR_EIGEN_SIGN * e_t) where e_t is the
# exponent on the coordinate x^t.
VECTOR_EIGEN_SIGN = 1


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelData:
    n: int
    k: int
    r: int
    N: int
    perp_eigs: Tuple[int, ...]
    e_twist: Optional[Tuple[Tuple[CycloScalar, ...], ...]] = None
    hbar_trunc: int = 6
    weight_trunc: int = 8
    extra_generators: Tuple = field(default=(), compare=False)

    @property
    def nvars(self) -> int:
        return 2 * self.n

    @property
    def ny(self) -> int:
        return 2 * self.k

    def var_name(self, v: int) -> str:
        return f"{'y' if v < self.ny else 'z'}{v + 1}"

    def is_y(self, v: int) -> bool:
        return v < self.ny

    @cached_property
    def eig_powers(self) -> Tuple[int, ...]:
        """Exponent e_v with g(x^v) = zeta^e_v x^v."""
        out = [0] * self.nvars
        m = self.n - self.k
        for i, l in enumerate(self.perp_eigs):
            out[self.ny + i] = l % self.N
            out[self.ny + m + i] = (-l) % self.N
        return tuple(out)

    @cached_property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Darboux pairs (a, b) with Pi[a][b] = 1/2."""
        m = self.n - self.k
        ys = tuple((i, i + self.k) for i in range(self.k))
        zs = tuple((self.ny + i, self.ny + m + i) for i in range(m))
        return ys + zs

    @cached_property
    def partner(self) -> Tuple[Tuple[int, int], ...]:
        """For each variable: (partner index, sign of omega^{v, partner})."""
        out = [None] * self.nvars
        for a, b in self.pairs:
            out[a] = (b, 1)
            out[b] = (a, -1)
        return tuple(out)

    def zeta(self, power: int = 1) -> CycloScalar:
        return CycloScalar.zeta(self.N, power)

    def scalar(self, value) -> CycloScalar:
        return CycloScalar.rational(self.N, value)

    @cached_property
    def twist(self) -> Tuple[Tuple[CycloScalar, ...], ...]:
        if self.e_twist is not None:
            return self.e_twist
        return tuple(tuple(self.scalar(1 if i == j else 0) for j in range(self.r))
                     for i in range(self.r))

    @cached_property
    def twist_inverse(self):
        return matrix_inverse(self.twist)

    @cached_property
    def kernels(self) -> "PropagatorKernels":
        return kernels(self)

    def with_truncation(self, hbar_trunc: int | None = None,
                        weight_trunc: int | None = None) -> "ModelData":
        return ModelData(self.n, self.k, self.r, self.N, self.perp_eigs, self.e_twist,
                         self.hbar_trunc if hbar_trunc is None else hbar_trunc,
                         self.weight_trunc if weight_trunc is None else weight_trunc,
                         self.extra_generators)

    def describe(self) -> str:
        return f"(n={self.n},k={self.k},N={self.N},r={self.r},l={list(self.perp_eigs)})"


def matrix_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(tuple(sum((a[i][t] * b[t][j] for t in range(m)), a[0][0] * 0)
                       for j in range(p)) for i in range(n))


def matrix_inverse(a):
    """Gauss-Jordan inverse over the cyclotomic field."""
    r = len(a)
    zero, one = a[0][0] * 0, a[0][0] * 0 + 1
    mat = [list(a[i]) + [one if i == j else zero for j in range(r)] for i in range(r)]
    for col in range(r):
        pivot = next((i for i in range(col, r) if not mat[i][col].is_zero()), None)
        if pivot is None:
            raise ModelError("twist matrix is singular")
        mat[col], mat[pivot] = mat[pivot], mat[col]
        inv = cyclo_inv(mat[col][col])
        mat[col] = [v * inv for v in mat[col]]
        for i in range(r):
            if i != col and not mat[i][col].is_zero():
                f = mat[i][col]
                mat[i] = [v - f * w for v, w in zip(mat[i], mat[col])]
    return tuple(tuple(row[r:]) for row in mat)


def _is_identity(mat) -> bool:
    return all(mat[i][j] == (1 if i == j else 0)
               for i in range(len(mat)) for j in range(len(mat)))


def symplectic_matrices(model: ModelData):
    """(omega, g) as explicit matrices over the cyclotomic field."""
    nv = model.nvars
    zero = model.scalar(0)
    omega = [[zero] * nv for _ in range(nv)]
    for a, b in model.pairs:
        omega[a][b] = model.scalar(1)
        omega[b][a] = model.scalar(-1)
    g = [[model.zeta(model.eig_powers[i]) if i == j else zero for j in range(nv)]
         for i in range(nv)]
    return omega, g


def build_model(n: int, k: int, r: int = 1, N: int = 1, perp_eigs: Sequence[int] = (),
                e_twist=None, hbar_trunc: int = 6, weight_trunc: int = 8,
                extra_generators: Sequence = ()) -> ModelData:
    """Validate the data and return an immutable model."""
    if n < 0 or not 0 <= k <= n:
        raise ModelError(f"need 0 <= k <= n, got n={n}, k={k}")
    if r < 1:
        raise ModelError(f"matrix rank must be positive, got {r}")
    if N < 1:
        raise ModelError(f"group order must be positive, got {N}")
    perp_eigs = tuple(int(l) for l in perp_eigs)
    if len(perp_eigs) != n - k:
        raise ModelError(f"expected {n - k} perpendicular eigenvalue exponents, "
                         f"got {len(perp_eigs)}")
    for l in perp_eigs:
        if l % N == 0:
            raise ModelError(f"perpendicular exponent {l} is 0 mod {N}; "
                             "that direction belongs to the fixed block")
    twist = None
    if e_twist is not None:
        twist = tuple(tuple(c if isinstance(c, CycloScalar) else CycloScalar.rational(N, c)
                            for c in row) for row in e_twist)
        if len(twist) != r or any(len(row) != r for row in twist):
            raise ModelError(f"e_twist must be {r}x{r}")
        power = twist
        for _ in range(N - 1):
            power = matrix_mul(power, twist)
        if not _is_identity(power):
            raise ModelError(f"e_twist does not satisfy e^{N} = 1")
    model = ModelData(n, k, r, N, perp_eigs, twist, hbar_trunc, weight_trunc,
                      tuple(extra_generators))
    omega, g = symplectic_matrices(model)
    nv = model.nvars
    for i in range(nv):
        for j in range(nv):
            lhs = sum((g[a][i] * omega[a][b] * g[b][j] for a in range(nv) for b in range(nv)),
                      model.scalar(0))
            if lhs != omega[i][j]:
                raise ModelError("g does not preserve the symplectic form")
    return model


def vacuum_factor(model: ModelData) -> CycloScalar:
    """prod_j (1 - zeta^-l_j)^-1 (1 - zeta^l_j)^-1."""
    out = model.scalar(1)
    for l in model.perp_eigs:
        out = out * cyclo_inv(1 - model.zeta(-l)) * cyclo_inv(1 - model.zeta(l))
    return out


@dataclass(frozen=True)
class PropagatorKernels:
    """Bivector and propagator constants as {(a, b): coefficient of d_a (x) d_b}.

    ``swap`` returns the partner kernel acting with the slots exchanged, so
    that ``K[(a, b)]`` on slots (alpha, beta) equals ``swap(K)[(b, a)]`` on
    slots (beta, alpha).
    """

    pi1: Kernel
    pi2: Kernel
    p12: Kernel
    p2: Kernel
    p3: Kernel

    @staticmethod
    def swap(kernel: Kernel) -> Kernel:
        return {(b, a): c for (a, b), c in kernel.items()}


def _second_factor(model: ModelData, fn) -> Kernel:
    """(1 (x) fn(g^-1)) Pi_2 with g^-1 acting on the vector d_b."""
    out = {}
    for a, b in model.pairs[model.k:]:
        for (s, t, sign) in ((a, b, 1), (b, a, -1)):
            mu = model.zeta(-VECTOR_EIGEN_SIGN * model.eig_powers[t])
            val = fn(mu) * Q(sign, 2)
            if not val.is_zero():
                out[(s, t)] = val
    return out


def _combine(model: ModelData, *parts) -> Kernel:
    out: Kernel = {}
    for coef, kern in parts:
        for key, val in kern.items():
            out[key] = out.get(key, model.scalar(0)) + val * coef
    return {key: val for key, val in out.items() if not val.is_zero()}


def kernels(model: ModelData) -> PropagatorKernels:
    pi1 = {}
    for a, b in model.pairs[:model.k]:
        pi1[(a, b)] = model.scalar(Q(1, 2))
        pi1[(b, a)] = model.scalar(Q(-1, 2))
    pi2 = _second_factor(model, lambda mu: mu * 0 + 1)
    p12 = _second_factor(model, lambda mu: -cyclo_inv(1 - mu))
    p3 = _second_factor(model, lambda mu: -mu * cyclo_inv(1 - mu))
    p2 = _combine(model, (1, p3), (Q(-1, 2), pi2))
    return PropagatorKernels(pi1, pi2, p12, p2, p3)


def model_from_dict(data: dict) -> ModelData:
    """Build a model from the JSON schema used by the command line."""
    required = ("n", "k", "N", "perp_eigs")
    for key in required:
        if key not in data:
            raise ModelError(f"model file is missing required key '{key}'")
    known = set(required) | {"r", "e_twist", "hbar_trunc", "weight_trunc"}
    unknown = set(data) - known
    if unknown:
        raise ModelError(f"unknown model keys: {sorted(unknown)}")
    for key in ("n", "k", "N", "r", "hbar_trunc", "weight_trunc"):
        if key in data and not isinstance(data[key], int):
            raise ModelError(f"model key '{key}' must be an integer")
    if not isinstance(data["perp_eigs"], list):
        raise ModelError("model key 'perp_eigs' must be a list of integers")
    twist = data.get("e_twist")
    if twist is not None:
        from .parsing import parse_scalar_literal
        twist = [[parse_scalar_literal(str(c), data["N"]) for c in row] for row in twist]
    return build_model(data["n"], data["k"], data.get("r", 1), data["N"], data["perp_eigs"],
                       twist, data.get("hbar_trunc", 6), data.get("weight_trunc", 8))


def load_model(path: str) -> ModelData:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")
    return model_from_dict(data)


REFERENCE_MODELS: List[Tuple[int, int, int, Tuple[int, ...]]] = [
    (1, 0, 2, (1,)),
    (1, 1, 1, ()),
    (2, 1, 2, (1,)),
    (2, 1, 3, (1,)),
]
