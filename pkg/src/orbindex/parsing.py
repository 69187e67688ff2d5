"""Text grammar for observables and scalars, and the canonical renderers.

Observables (matrices are bracketed rows separated by ';')::

    observable = matrix | sum ;
    matrix     = "[" row { ";" row } "]" ;
    row        = sum { "," sum } ;
    sum        = [ sign ] term { sign term } ;
    sign       = "+" | "-" ;
    term       = factor { "*" factor } ;
    factor     = rational | "(" sum ")" [ "^" natural ]
               | variable [ "^" natural ]
               | "h" [ "^" integer ]
               | "zeta" natural [ "^" integer ] ;
    rational   = natural [ "/" natural ] ;
    variable   = ( "y" | "z" ) natural ;

Scalars use the same sum/term shape over the factors ``rational``,
``z<N>^j`` or ``zeta<N>^j`` (a power of the primitive root), ``h^e`` and
``u^p``.  Inside observables ``z<i>`` is always a coordinate, so roots of
unity are written ``zeta<N>`` there.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Dict, List, Tuple

from gmpy2 import mpq

from .exactnum import CycloScalar, ScalarK, _join_terms, format_rational
from .model import ModelData


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TruncationWarning(UserWarning):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_]+)(?P<idx>\d*)|(?P<op>[-+*/^()\[\];,]))")


@dataclass
class _Tok:
    kind: str
    text: str
    index: str
    pos: int


def _tokenize(src: str) -> List[_Tok]:
    toks, pos = [], 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos:].lstrip()[:1]!r}",
                             *_line_col(src, len(src) - len(src[pos:].lstrip())))
        start = m.start(m.lastgroup) if m.lastgroup else pos
        if m.group("num") is not None:
            toks.append(_Tok("num", m.group("num"), "", m.start("num")))
        elif m.group("name") is not None:
            toks.append(_Tok("name", m.group("name"), m.group("idx"), m.start("name")))
        else:
            toks.append(_Tok("op", m.group("op"), "", start))
        pos = m.end()
    toks.append(_Tok("end", "", "", len(src)))
    return toks


def _line_col(src: str, pos: int) -> Tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


# a polynomial is {(exponent tuple, hbar power, u power): CycloScalar}
Poly = Dict[Tuple[Tuple[int, ...], int, int], CycloScalar]


def _poly_add(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for k, v in b.items():
        v = v if sign > 0 else -v
        s = out[k] + v if k in out else v
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for (e1, h1, u1), c1 in a.items():
        for (e2, h2, u2), c2 in b.items():
            key = (tuple(x + y for x, y in zip(e1, e2)), h1 + h2, u1 + u2)
            v = c1 * c2
            s = out[key] + v if key in out else v
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return out


class _Parser:
    def __init__(self, src: str, order: int, nvars: int, mode: str, model: ModelData | None):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.order = order
        self.nvars = nvars
        self.mode = mode  # "observable" or "scalar"
        self.model = model

    # helpers
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, *_line_col(self.src, tok.pos))

    def expect(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            self.error(f"expected {op!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def is_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == op

    def const(self, value) -> Poly:
        c = value if isinstance(value, CycloScalar) else CycloScalar.rational(self.order, value)
        return {((0,) * self.nvars, 0, 0): c} if not c.is_zero() else {}

    def integer(self, signed: bool) -> int:
        neg = False
        if signed and self.is_op("-"):
            self.take()
            neg = True
        tok = self.peek()
        if tok.kind != "num":
            self.error(f"expected an integer exponent, found {tok.text or 'end of input'!r}")
        self.take()
        return -int(tok.text) if neg else int(tok.text)

    # grammar
    def sum(self) -> Poly:
        acc: Poly = {}
        sign = 1
        if self.is_op("+") or self.is_op("-"):
            sign = -1 if self.take().text == "-" else 1
        acc = _poly_add(acc, self.term(), sign)
        while self.is_op("+") or self.is_op("-"):
            sign = -1 if self.take().text == "-" else 1
            acc = _poly_add(acc, self.term(), sign)
        return acc

    def term(self) -> Poly:
        acc = self.factor()
        while self.is_op("*"):
            self.take()
            acc = _poly_mul(acc, self.factor())
        return acc

    def power_of(self, base: Poly, exp: int, tok: _Tok) -> Poly:
        if exp < 0:
            self.error("negative powers are only allowed for h, u and roots of unity", tok)
        out = self.const(1)
        for _ in range(exp):
            out = _poly_mul(out, base)
        return out

    def factor(self) -> Poly:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            num = int(tok.text)
            if self.is_op("/"):
                self.take()
                den_tok = self.peek()
                if den_tok.kind != "num":
                    self.error("expected a denominator")
                self.take()
                if int(den_tok.text) == 0:
                    self.error("division by zero", den_tok)
                return self.const(mpq(num, int(den_tok.text)))
            return self.const(num)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            inner = self.sum()
            self.expect(")")
            if self.is_op("^"):
                self.take()
                return self.power_of(inner, self.integer(False), tok)
            return inner
        if tok.kind == "name":
            self.take()
            return self.named(tok)
        self.error(f"unexpected {tok.text or 'end of input'!r}")

    def exponent(self, signed: bool) -> int:
        if self.is_op("^"):
            self.take()
            return self.integer(signed)
        return 1

    def root_of_unity(self, tok: _Tok) -> Poly:
        if not tok.index:
            self.error("a root of unity needs its order, e.g. zeta3", tok)
        if int(tok.index) != self.order:
            self.error(f"root of unity of order {tok.index} in a model with N={self.order}", tok)
        return self.const(CycloScalar.zeta(self.order, self.exponent(True)))

    def named(self, tok: _Tok) -> Poly:
        name = tok.text
        zero = (0,) * self.nvars
        if name == "h" and not tok.index:
            return {(zero, self.exponent(True), 0): CycloScalar.rational(self.order, 1)}
        if name == "u" and not tok.index and self.mode == "scalar":
            return {(zero, 0, self.exponent(True)): CycloScalar.rational(self.order, 1)}
        if name == "zeta":
            return self.root_of_unity(tok)
        if self.mode == "scalar" and name == "z":
            return self.root_of_unity(tok)
        if self.mode == "observable" and name in ("y", "z") and tok.index:
            return self.variable(tok)
        self.error(f"unknown symbol {name + tok.index!r}", tok)

    def variable(self, tok: _Tok) -> Poly:
        model = self.model
        idx = int(tok.index)
        if idx < 1 or idx > model.nvars:
            self.error(f"variable index {tok.text}{idx} is outside 1..{model.nvars}", tok)
        v = idx - 1
        if tok.text == "y" and not model.is_y(v):
            self.error(f"y{idx} is not a fixed coordinate; y-indices run 1..{model.ny}", tok)
        if tok.text == "z" and model.is_y(v):
            self.error(f"z{idx} is not a perpendicular coordinate; z-indices run "
                       f"{model.ny + 1}..{model.nvars}", tok)
        exp = self.exponent(False)
        e = [0] * self.nvars
        e[v] = exp
        return {(tuple(e), 0, 0): CycloScalar.rational(self.order, 1)}

    def matrix(self) -> List[List[Poly]]:
        self.expect("[")
        rows = [[self.sum()]]
        while True:
            if self.is_op(","):
                self.take()
                rows[-1].append(self.sum())
            elif self.is_op(";"):
                self.take()
                rows.append([self.sum()])
            else:
                break
        self.expect("]")
        width = len(rows[0])
        if any(len(r) != width for r in rows) or width != len(rows):
            self.error("matrix rows must form a square array")
        return rows

    def finish(self):
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected trailing input {tok.text!r}", tok)


def _to_weyl(model: ModelData, poly: Poly, src: str):
    from .weyl import WeylElement
    terms = {}
    for (e, h, u), c in poly.items():
        if u:
            raise ParseError("u is not allowed in observables", 1, 1)
        if sum(e) + 2 * h > model.weight_trunc or h > model.hbar_trunc:
            warnings.warn(f"term of weight {sum(e) + 2 * h} in {src!r} exceeds the truncation "
                          f"and was dropped", TruncationWarning, stacklevel=3)
            continue
        terms[(e, h)] = c
    return WeylElement(model, terms)


def parse_observable(src: str, model: ModelData):
    """Parse text into a ``MatrixWeyl`` (r x r) for the given model."""
    from .weyl import MatrixWeyl
    p = _Parser(src, model.N, model.nvars, "observable", model)
    if p.is_op("["):
        rows = p.matrix()
        p.finish()
        if len(rows) != model.r:
            p.error(f"matrix observable is {len(rows)}x{len(rows)} but the model has r={model.r}",
                    p.toks[0])
        return MatrixWeyl(model, [[_to_weyl(model, x, src) for x in row] for row in rows])
    poly = p.sum()
    p.finish()
    return MatrixWeyl.scalar_matrix(_to_weyl(model, poly, src), model.r)


def parse_scalar(src: str, order: int, trunc: int = 6) -> ScalarK:
    """Parse canonical scalar text such as ``(3/2)*z3^1*h^-1*u^2``."""
    p = _Parser(src, order, 0, "scalar", None)
    poly = p.sum()
    p.finish()
    flat = {}
    for (_e, h, u), c in poly.items():
        flat[(u, h)] = flat[(u, h)] + c if (u, h) in flat else c
    return ScalarK.from_flat(order, trunc, flat)


def parse_scalar_literal(src: str, order: int) -> CycloScalar:
    """A plain element of Q(zeta_N), no h or u."""
    value = parse_scalar(src, order)
    flat = value.flat()
    if any(key != (0, 0) for key in flat):
        raise ParseError(f"expected a number in Q(zeta_{order}), got {src!r}", 1, 1)
    return flat.get((0, 0), CycloScalar.rational(order, 0))


# ---------------------------------------------------------------- rendering

def _monomial_text(model: ModelData, exps, h: int, odd=(), upow: int = 0) -> str:
    parts = []
    for v, k in enumerate(exps):
        if k:
            name = model.var_name(v)
            parts.append(name if k == 1 else f"{name}^{k}")
    if h:
        parts.append(f"h^{h}")
    if upow:
        parts.append(f"u^{upow}")
    parts.extend(f"d{model.var_name(v)}" for v in odd)
    return "*".join(parts)


def _sort_key(exps, h, odd=(), upow=0):
    return (upow, h, len(odd), odd, sum(exps), tuple(-x for x in exps))


def weyl_term_pairs(a) -> List[Tuple[mpq, str]]:
    model = a.model
    pairs = []
    for (e, h) in sorted(a.terms, key=lambda k: _sort_key(k[0], k[1])):
        c = a.terms[(e, h)]
        mono = _monomial_text(model, e, h)
        for j, q in enumerate(c.coeffs):
            if q:
                root = f"zeta{model.N}^{j}" if j else ""
                pairs.append((q, "*".join(x for x in (root, mono) if x)))
    return pairs


def render_weyl(a) -> str:
    return _join_terms(weyl_term_pairs(a))


def render_matrix(m) -> str:
    if m.r == 1:
        return render_weyl(m.entries[0][0])
    return "[" + "; ".join(", ".join(render_weyl(x) for x in row) for row in m.entries) + "]"


def form_term_pairs(f) -> List[Tuple[mpq, str]]:
    model = f.model
    pairs = []
    for key in sorted(f.terms, key=lambda k: _sort_key(k[0], k[2], k[1], k[3])):
        e, odd, h, u = key
        c = f.terms[key]
        mono = _monomial_text(model, e, h, odd, u)
        for j, q in enumerate(c.coeffs):
            if q:
                root = f"zeta{model.N}^{j}" if j else ""
                pairs.append((q, "*".join(x for x in (root, mono) if x)))
    return pairs


def render_form(f) -> str:
    """Forms print with their Grassmann generators last, in canonical order."""
    return _join_terms(form_term_pairs(f))


def pairs_to_json(pairs) -> List[Dict[str, str]]:
    return [{"coefficient": format_rational(q).strip("()"), "monomial": mono or "1"}
            for q, mono in pairs]


def scalar_term_pairs(value) -> List[Tuple[mpq, str]]:
    """Pairs for a ScalarK in the order used by its canonical text."""
    flat = value.flat()
    pairs = []
    for (p, e) in sorted(flat):
        for j, q in enumerate(flat[(p, e)].coeffs):
            if q:
                parts = [f"z{value.order}^{j}" if j else "", f"h^{e}" if e else "",
                         f"u^{p}" if p else ""]
                pairs.append((q, "*".join(x for x in parts if x)))
    return pairs
