"""Command line front end.

Input files are JSON:

* model: ``{"n": 2, "k": 1, "N": 3, "perp_eigs": [1], "r": 1,
  "e_twist": [["1"]], "hbar_trunc": 4, "weight_trunc": 8}``
* chain: a list of tensors; a tensor is a list of observable strings, or an
  object ``{"coef": "1/2", "u": 0, "factors": [...]}``
* args: a list of observable strings (Lie algebra elements)
"""

from __future__ import annotations

import json
import sys
import warnings
from typing import List

import click

from . import __version__
from .chains import Chain
from .charclass import (UnsupportedDegree, a_hat_eval, ch_g_glr_eval, ch_g_star_eval, curvature,
                        omega0_eval, oneloop_compare, pr)
from .correlate import InvalidLieElement, LieElement, free_correlation, interactive_correlation, universal_trace
from .model import ModelData, ModelError, load_model
from .parsing import (ParseError, form_term_pairs, pairs_to_json, parse_observable, parse_scalar_literal,
                      render_form, render_matrix, scalar_term_pairs, weyl_term_pairs)
from .simplex import pairing_weight, wheel_coefficient
from .verify import SUITES, run_verify
from .weyl import matrix_moyal_mul


class _Context:
    def __init__(self, fmt: str, hbar_trunc, weight_trunc, seed: int):
        self.fmt = fmt
        self.hbar_trunc = hbar_trunc
        self.weight_trunc = weight_trunc
        self.seed = seed


def _emit(ctx: _Context, text: str, payload) -> None:
    if ctx.fmt == "json":
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(text)


def _load_model(ctx: _Context, path: str) -> ModelData:
    try:
        model = load_model(path)
    except (ModelError, ParseError) as exc:
        raise click.ClickException(f"{path}: {exc}")
    if ctx.hbar_trunc is not None or ctx.weight_trunc is not None:
        model = model.with_truncation(ctx.hbar_trunc, ctx.weight_trunc)
    return model


def _read_json(path: str):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise click.ClickException(f"{path}: invalid JSON at line {exc.lineno} "
                                       f"column {exc.colno}")


def _observable(model: ModelData, src: str, where: str):
    try:
        return parse_observable(src, model)
    except ParseError as exc:
        raise click.ClickException(f"{where}: {exc}")


def _load_chain(model: ModelData, path: str) -> Chain:
    data = _read_json(path)
    if not isinstance(data, list):
        raise click.ClickException(f"{path}: a chain file holds a list of tensors")
    items = []
    for i, tensor in enumerate(data):
        coef, upow = model.scalar(1), 0
        if isinstance(tensor, dict):
            try:
                coef = parse_scalar_literal(str(tensor.get("coef", "1")), model.N)
            except ParseError as exc:
                raise click.ClickException(f"{path}: tensor {i}: {exc}")
            upow = int(tensor.get("u", 0))
            tensor = tensor.get("factors")
        if not isinstance(tensor, list) or not tensor:
            raise click.ClickException(f"{path}: tensor {i} needs a nonempty list of factors")
        factors = [_observable(model, str(src), f"{path}: tensor {i} factor {j}")
                   for j, src in enumerate(tensor)]
        items.append((coef, upow, factors))
    return Chain.from_tensors(model, items)


def _load_args(model: ModelData, path: str | None) -> List[LieElement]:
    if path is None:
        return []
    data = _read_json(path)
    if not isinstance(data, list):
        raise click.ClickException(f"{path}: an argument file holds a list of observables")
    out = []
    for i, src in enumerate(data):
        value = _observable(model, str(src), f"{path}: argument {i}")
        try:
            out.append(LieElement(model, value))
        except InvalidLieElement as exc:
            raise click.ClickException(f"{path}: argument {i}: {exc}")
    return out


@click.group()
@click.version_option(__version__)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              show_default=True)
@click.option("--hbar-trunc", type=click.IntRange(min=1), default=None,
              help="Override the model's hbar truncation.")
@click.option("--weight-trunc", type=click.IntRange(min=1), default=None,
              help="Override the model's weight truncation.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def main(ctx, fmt, hbar_trunc, weight_trunc, seed):
    """Exact twisted correlation maps and the universal trace."""
    ctx.obj = _Context(fmt, hbar_trunc, weight_trunc, seed)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.argument("left")
@click.argument("right")
@click.pass_obj
def moyal(ctx, model_path, left, right):
    """Moyal product LEFT * RIGHT of two observables."""
    model = _load_model(ctx, model_path)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = _observable(model, left, "LEFT")
        b = _observable(model, right, "RIGHT")
    out = matrix_moyal_mul(a, b)
    payload = [[pairs_to_json(weyl_term_pairs(x)) for x in row] for row in out.entries]
    _emit(ctx, render_matrix(out), {"product": payload, "text": render_matrix(out)})


@main.command("correlate-free")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def correlate_free(ctx, model_path, chain_path):
    """Free correlation of an invariant chain."""
    model = _load_model(ctx, model_path)
    chain = _load_chain(model, chain_path)
    try:
        form = free_correlation(chain)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(ctx, render_form(form), {"form": pairs_to_json(form_term_pairs(form)),
                                   "text": render_form(form)})


@main.command("correlate-int")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--args", "args_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def correlate_int(ctx, model_path, chain_path, args_path):
    """Interactive correlation evaluated on the given Lie algebra elements."""
    model = _load_model(ctx, model_path)
    chain = _load_chain(model, chain_path)
    args = _load_args(model, args_path)
    try:
        form = interactive_correlation(chain, args)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(ctx, render_form(form), {"degree": len(args),
                                   "form": pairs_to_json(form_term_pairs(form)),
                                   "text": render_form(form)})


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_path", type=click.Path(exists=True, dir_okay=False),
              help="Defaults to the unit chain (1).")
@click.option("--args", "args_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def trace(ctx, model_path, chain_path, args_path):
    """Universal trace: Berezin integral of the interactive correlation."""
    model = _load_model(ctx, model_path)
    if chain_path:
        chain = _load_chain(model, chain_path)
    else:
        chain = Chain.from_tensor(model, [1])
    args = _load_args(model, args_path)
    try:
        value = universal_trace(chain, args)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit(ctx, value.render(), {"degree": len(args), "value": pairs_to_json(scalar_term_pairs(value)),
                                "text": value.render()})


@main.command()
@click.argument("k", type=click.IntRange(min=1))
@click.pass_obj
def wheel(ctx, k):
    """Wheel coefficient C(K) by exact simplex integration."""
    value = wheel_coefficient(k)
    _emit(ctx, str(value), {"k": k, "value": str(value)})


def _constant_matrix(mat) -> str:
    if len(mat) == 1:
        return mat[0][0].render()
    return "[" + "; ".join(", ".join(c.render() for c in row) for row in mat) + "]"


def _parse_edge(text: str):
    parts = text.replace("-", ",").split(",")
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise click.BadParameter(f"edge {text!r} is not of the form a,b")
    return int(parts[0]), int(parts[1])


@main.command()
@click.option("--size", type=click.IntRange(min=1), default=None,
              help="Number of positions; defaults to the largest index plus one.")
@click.argument("edges", nargs=-1)
@click.pass_obj
def weight(ctx, size, edges):
    """Simplex integral of prod (d(t_a, t_b) - 1/2) over EDGES written a,b."""
    pairs = [_parse_edge(e) for e in edges]
    if size is None:
        size = max((max(a, b) for a, b in pairs), default=0) + 1
    try:
        value = pairing_weight(size, pairs)
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    _emit(ctx, str(value), {"size": size, "edges": [list(p) for p in pairs], "value": str(value)})


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--args", "args_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def charclass(ctx, model_path, args_path):
    """Projections, curvatures, class values and the one-loop comparison."""
    model = _load_model(ctx, model_path)
    args = _load_args(model, args_path)
    report = {"projections": [], "curvatures": []}
    lines = []
    for i, a in enumerate(args):
        p = pr(a)
        entry = {"pr1": p.sp_fixed.render(), "pr2": p.sp_perp.render(),
                 "pr3": _constant_matrix(p.gl), "pr4": p.central.render()}
        report["projections"].append(entry)
        lines.append(f"pr(arg{i}): pr1 = {entry['pr1']}; pr2 = {entry['pr2']}; "
                     f"pr3 = h*({entry['pr3']}); pr4 = {entry['pr4']}")
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            c = curvature(args[i], args[j])
            entry = {"pair": [i, j], "R1": c.R1.render(), "R2": c.R2.render(),
                     "R3": _constant_matrix(c.gl), "R4": c.R4.render()}
            report["curvatures"].append(entry)
            lines.append(f"R(arg{i}, arg{j}): R1 = {entry['R1']}; R2 = {entry['R2']}; "
                         f"R3 = h*({entry['R3']}); R4 = {entry['R4']}")
    if len(args) % 2 == 0:
        classes = {"a_hat": a_hat_eval(model, args), "ch_star": ch_g_star_eval(model, args),
                   "ch_glr": ch_g_glr_eval(model, args)}
        for name, value in classes.items():
            report[name] = value.render()
            lines.append(f"{name} = {value.render()}")
    if len(args) == 2:
        report["omega0"] = omega0_eval(args).render()
        lines.append(f"omega0 = {report['omega0']}")
    try:
        rep = oneloop_compare(model, args)
    except UnsupportedDegree as exc:
        report["oneloop"] = {"skipped": str(exc)}
        lines.append(f"one-loop: skipped ({exc})")
    else:
        report["oneloop"] = rep.as_dict()
        lines.append(f"one-loop lhs = {rep.lhs.render()}")
        lines.append(f"one-loop rhs = {rep.rhs.render()}")
        lines.append(f"one-loop difference mod hbar = {rep.difference.render()} "
                     f"({'agrees' if rep.agrees else 'DISAGREES'})")
    _emit(ctx, "\n".join(lines), report)


@main.command()
@click.argument("suite")
@click.option("--count", type=click.IntRange(min=1), default=None,
              help="Random cases per model where a suite draws a corpus.")
@click.pass_obj
def verify(ctx, suite, count):
    """Run an identity suite: arith, chains, intertwine, trace, wheels, oneloop or all."""
    if suite != "all" and suite not in SUITES:
        raise click.UsageError(f"unknown suite {suite!r}; choose from "
                               f"{', '.join(SUITES + ('all',))}")
    report = run_verify(suite, ctx.seed, count)
    lines = [f"suite {suite} seed {ctx.seed}"]
    for chk in report["checks"]:
        status = "PASS" if chk["passed"] else "FAIL"
        lines.append(f"{status} {chk['name']} ({chk['cases']} cases, {chk['seconds']}s)")
        if chk["notes"]:
            lines.append(f"     {chk['notes']}")
        if chk["witness"]:
            lines.append(f"     witness: {chk['witness']}")
    _emit(ctx, "\n".join(lines), report)
    if not report["passed"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
