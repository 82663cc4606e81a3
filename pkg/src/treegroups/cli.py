"""Command-line front end: ``treegroups <experiment> [options]``.

Exit status is 0 when every verdict in the report passes, 2 when some
verdict fails, and 1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .generation import (
    RankDeficitWarning,
    generation_probability_formula,
    generation_probability_monte_carlo,
)
from .haar import (
    SeededRng,
    check_section_measure_preserving,
    cone_measure,
    fpp_curve_exact,
    fpp_exact,
    fpp_monte_carlo,
    fpp_wreath_curve,
    independence_chi_square,
    independence_exact,
    kernel_size_check,
)
from .haar.fpp import CSV_HEADER, FppReport
from .reports import Report
from .tree import TruncatedAutomorphism, Vertex, vertices_at_level
from .words import (
    ReducedWord,
    cousins_along_trajectory,
    free_action_experiment,
    freeness_experiment,
    sample_tuple,
)
from .zoo import (
    CyclicWreath,
    FullWreath,
    GroupModel,
    QuotientTooLarge,
    check_branching_witness,
    check_fractal,
    check_level_transitive,
    check_pattern_closure,
    check_super_strongly_fractal,
    model_from_config,
    parse_group_tag,
)

CATALOG: dict[str, tuple[str, ...]] = {
    "enumerate": (),
    "check": ("transitive", "fractal", "ssf", "pattern", "branching"),
    "sample": (),
    "cone": (),
    "section-mp": (),
    "kernel": (),
    "independence": ("exact", "chi2"),
    "fpp": ("exact", "mc", "curve", "recursion"),
    "freeness": (),
    "free-action": (),
    "cousins": (),
    "formula": (),
    "formula-mc": (),
}

STOCHASTIC = {"sample", "independence:chi2", "fpp:mc", "freeness", "free-action", "cousins", "formula-mc"}

# config keys that do not influence the report contents
NOT_CONFIG = {"threads", "out", "format", "handler"}

# exact reference values are only computed for quotients up to this size
EXACT_REFERENCE_LIMIT = 200_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def list_experiments() -> list[str]:
    out = []
    for name, modes in CATALOG.items():
        out.extend(f"{name} --{m}" for m in modes) if modes else out.append(name)
    return out


# -- argument helpers -----------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--group", help="built-in tag, e.g. full-wreath:2, affine:3, grigorchuk")
    p.add_argument("--group-file", help="JSON group definition")
    p.add_argument("-n", "--depth", type=int)
    p.add_argument("-m", "--section-depth", type=int)
    p.add_argument("-D", "--pattern-depth", type=int)
    p.add_argument("-k", "--rank", type=int)
    p.add_argument("-L", "--max-word-len", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--seed", type=int)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--ci", action="store_true", help="strict mode: stochastic experiments need --seed")
    return p


def _modes(sub: argparse.ArgumentParser, modes: Sequence[str]) -> None:
    group = sub.add_mutually_exclusive_group()
    for m in modes:
        group.add_argument(f"--{m}", dest="mode", action="store_const", const=m)


def build_parser() -> _Parser:
    parser = _Parser(prog="treegroups", description="Experiments on random subgroups of tree groups.")
    parser.add_argument("--version", action="version", version=f"treegroups {__version__}")
    subs = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    common = _common()
    subs.add_parser("list", help="list the experiment catalog")
    for name, modes in CATALOG.items():
        sub = subs.add_parser(name, parents=[common])
        if modes:
            _modes(sub, modes)
        if name == "cone":
            sub.add_argument("--element", action="append", default=[], help="portrait encoding, repeatable")
        if name in ("section-mp", "cousins"):
            sub.add_argument("--vertex")
        if name in ("kernel", "independence"):
            sub.add_argument("--vertices", default="", help="comma separated, e.g. 11,21")
        if name == "kernel":
            sub.add_argument("--allow-cousins", action="store_true", help="report instead of rejecting")
        if name == "cousins":
            sub.add_argument("--word", required=True, help='e.g. "x1 x2^-1"')
        if name in ("formula", "formula-mc", "fpp"):
            sub.add_argument("--p", type=int)
        if name in ("formula", "formula-mc"):
            sub.add_argument("--d", type=int, required=True)
            sub.add_argument("--k", type=int, required=True)
        if name == "formula-mc":
            sub.add_argument("--transpose", action="store_true")
        if name == "freeness":
            sub.add_argument("--max-failure-rate", type=float, default=0.05)
    return parser


def _model(args) -> GroupModel:
    if args.group and args.group_file:
        raise UsageError("give either --group or --group-file")
    if args.group_file:
        path = Path(args.group_file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
        config = json.loads(text)
        return model_from_config(config)
    if not args.group:
        raise UsageError("this experiment needs --group or --group-file")
    return parse_group_tag(args.group)


def _need(args, name: str, default=None):
    value = getattr(args, name)
    if value is None:
        if default is None:
            raise UsageError(f"missing --{name.replace('_', '-')}")
        setattr(args, name, default)
        return default
    return value


def _vertex_list(text: str) -> list[Vertex]:
    return [Vertex.parse(t) for t in text.split(",") if t.strip()]


def _rng(args) -> SeededRng:
    return SeededRng(args.seed, args.stream)


def _exact_or_none(model: GroupModel, level: int) -> Fraction | None:
    try:
        if model.order(level) > EXACT_REFERENCE_LIMIT:
            return None
        return fpp_exact(model, level)
    except QuotientTooLarge:
        return None


# -- experiments ---------------------------------------------------------------


def run_enumerate(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    rows = model.quotient(n)
    values: dict = {"order": len(rows)}
    if len(rows) <= 1000:
        values["elements"] = [TruncatedAutomorphism(model.d, n, r, check=False).encode() for r in rows]
    return Report("enumerate", model.name, {"n": n}, values=values)


def run_check(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    params = {"n": n, "mode": args.mode}
    if args.mode == "transitive":
        ok = check_level_transitive(model, n)
    elif args.mode == "fractal":
        ok = check_fractal(model, n)
    elif args.mode == "ssf":
        m = _need(args, "section_depth")
        params["m"] = m
        ok = check_super_strongly_fractal(model, n, m)
    else:
        D = args.pattern_depth or model.declared_depth
        if D is None:
            raise UsageError(f"{model.name} has no declared pattern depth; pass -D")
        params["D"] = D
        ok = (check_pattern_closure if args.mode == "pattern" else check_branching_witness)(model, D, n)
    return Report(f"check:{args.mode}", model.name, params, values={args.mode: ok}, verdicts={args.mode: ok})


def run_sample(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    count = _need(args, "samples", 1)
    rng = _rng(args)
    rows = model.sample(n, count, rng.generator())
    elements = [TruncatedAutomorphism(model.d, n, r, check=False).encode() for r in rows]
    return Report("sample", model.name, {"n": n, "samples": count}, seed=args.seed,
                  streams={"seed": rng.seed, "first_stream": rng.stream, "blocks": 1},
                  values={"elements": elements})


def run_cone(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    A = [TruncatedAutomorphism.parse(text, model.d) for text in args.element]
    measure = cone_measure(model, n, A)
    return Report("cone", model.name, {"n": n, "A": sorted(g.encode() for g in set(A))},
                  values={"measure": measure, "order": model.order(n)})


def run_section_mp(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    m = _need(args, "section_depth")
    verts = [Vertex.parse(args.vertex)] if args.vertex else vertices_at_level(model.d, n)
    result = {str(v): check_section_measure_preserving(model, n, m, v) for v in verts}
    return Report("section-mp", model.name, {"n": n, "m": m, "vertices": list(result)},
                  values={"uniform": result}, verdicts={"measure_preserving": all(result.values())})


def run_kernel(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    m = _need(args, "section_depth")
    V = _vertex_list(args.vertices)
    check = kernel_size_check(model, n, m, V, strict=not args.allow_cousins)
    return Report("kernel", model.name, {"n": n, "m": m, "V": [str(v) for v in V]},
                  values=check.to_dict(), verdicts={"match": check.match})


def run_independence(args) -> Report:
    model = _model(args)
    n = _need(args, "depth")
    m = _need(args, "section_depth")
    V = _vertex_list(args.vertices)
    params = {"n": n, "m": m, "V": [str(v) for v in V], "mode": args.mode}
    if args.mode == "exact":
        rep = independence_exact(model, n, m, V)
        values = {"independent": rep.verdict, "joint_with_level": rep.vertical, "cells": rep.cells,
                  "joint": rep.joint}
        return Report("independence:exact", model.name, params, values=values,
                      verdicts={"independent": rep.verdict})
    samples = _need(args, "samples", 10_000)
    rng = _rng(args)
    rep = independence_chi_square(model, n, m, V, samples, args.alpha, rng, threads=args.threads)
    params.update(samples=samples, alpha=args.alpha)
    values = {"statistic": rep.statistic, "df": rep.df, "p_value": rep.p_value, "cells": rep.cells}
    return Report("independence:chi2", model.name, params, seed=args.seed, streams=rep.streams,
                  values=values, verdicts={"independent": rep.verdict})


def _fpp_curve_report(kind: str, rep: FppReport, params: dict, **kw) -> Report:
    return Report(f"fpp:{kind}", rep.group, params, values=rep.to_dict(), curve=rep.rows(),
                  curve_header=CSV_HEADER, **kw)


def run_fpp(args) -> Report:
    n = _need(args, "depth")
    if args.mode == "recursion":
        model = None
        if args.group or args.group_file:
            model = _model(args)
        p = args.p or (model.d if model else None)
        if p is None:
            raise UsageError("fpp --recursion needs --p or a group")
        curve = fpp_wreath_curve(p, n)
        rep = FppReport(group=model.name if model else f"cyclic-wreath:{p}", levels=list(range(1, n + 1)),
                        exact=dict(zip(range(1, n + 1), curve)))
        verdicts = {}
        if model is not None:
            exact = {l: _exact_or_none(model, l) for l in rep.levels}
            verdicts["matches_exact"] = all(e is None or e == rep.exact[l] for l, e in exact.items())
        return _fpp_curve_report("recursion", rep, {"n": n, "p": p}, verdicts=verdicts)
    model = _model(args)
    if args.mode == "exact":
        value = fpp_exact(model, n)
        return Report("fpp:exact", model.name, {"n": n}, values={"fpp": value, "fpp_float": float(value)})
    if args.mode == "curve":
        rep = fpp_curve_exact(model, n)
        vals = [rep.exact[l] for l in rep.levels]
        monotone = all(a >= b for a, b in zip(vals, vals[1:]))
        return _fpp_curve_report("curve", rep, {"n": n}, verdicts={"non_increasing": monotone})
    samples = _need(args, "samples", 100_000)
    rng = _rng(args)
    exact_levels = [l for l in range(1, n + 1) if _exact_or_none(model, l) is not None]
    rep = fpp_monte_carlo(model, n, samples, rng, threads=args.threads, exact_levels=exact_levels)
    intervals = {str(l): e.to_dict() for l, e in rep.estimates.items()}
    return Report("fpp:mc", model.name, {"n": n, "samples": samples}, seed=args.seed, streams=rep.streams,
                  values=rep.to_dict(), intervals=intervals, curve=rep.rows(), curve_header=CSV_HEADER)


def _word_params(args, L_default: int) -> tuple[int, int, int, int]:
    return (_need(args, "rank", 2), _need(args, "max_word_len", L_default),
            _need(args, "depth", 12), _need(args, "samples", 100))


def run_freeness(args) -> Report:
    model = _model(args)
    k, L, n, samples = _word_params(args, 6)
    rep = freeness_experiment(model, k, L, n, samples, _rng(args), threads=args.threads)
    verdict = rep.values["failure_rate"] <= args.max_failure_rate
    params = {"k": k, "L": L, "n": n, "samples": samples, "max_failure_rate": args.max_failure_rate}
    return Report("freeness", model.name, params, seed=args.seed,
                  streams={"seed": args.seed, "first_stream": args.stream, "tuples": samples},
                  values=rep.values, intervals=rep.intervals, verdicts={"failure_rate_within_bound": verdict},
                  extra={"words": rep.per_word, "tuples": rep.per_tuple})


def _fpp_reference(model: GroupModel, n: int) -> Fraction | None:
    if isinstance(model, CyclicWreath) or (isinstance(model, FullWreath) and model.d == 2):
        return fpp_wreath_curve(model.d, n)[-1]
    return _exact_or_none(model, n)


def run_free_action(args) -> Report:
    model = _model(args)
    k, L, n, samples = _word_params(args, 4)
    rep = free_action_experiment(model, k, L, n, samples, _rng(args), threads=args.threads)
    values = dict(rep.values)
    verdicts = {}
    ref = _fpp_reference(model, n)
    if ref is not None:
        iv = rep.intervals["single_letter_proportion"]
        values["fpp_reference"] = float(ref)
        verdicts["single_letter_matches_fpp"] = iv["ci_lo"] <= float(ref) <= iv["ci_hi"]
    curve = [(level, repr(x)) for level, x in enumerate(rep.fixed_curve, start=1)]
    return Report("free-action", model.name, {"k": k, "L": L, "n": n, "samples": samples}, seed=args.seed,
                  streams={"seed": args.seed, "first_stream": args.stream, "tuples": samples},
                  values=values, intervals=rep.intervals, verdicts=verdicts,
                  extra={"words": rep.per_word, "tuples": rep.per_tuple, "fixed_curve": rep.fixed_curve},
                  curve=curve, curve_header=("level", "fixed_proportion"))


def run_cousins(args) -> Report:
    model = _model(args)
    if not args.vertex:
        raise UsageError("cousins needs --vertex")
    v = Vertex.parse(args.vertex)
    k = _need(args, "rank", 2)
    n = _need(args, "depth", v.level)
    D = args.pattern_depth or model.declared_depth or 1
    word = ReducedWord.parse(args.word, k)
    tup = sample_tuple(model, k, n, _rng(args))
    rep = cousins_along_trajectory(word, tup, v, D)
    values = rep.to_dict()
    values["tuple"] = [g.encode() for g in tup.elements]
    verdict = (not rep.subwords_move) or rep.pairwise_non_cousins
    return Report("cousins", model.name, {"word": str(word), "k": k, "n": n, "D": D, "vertex": str(v)},
                  seed=args.seed, streams={"seed": args.seed, "first_stream": args.stream, "blocks": 1},
                  values=values, verdicts={"non_cousins_when_subwords_move": verdict})


def run_formula(args) -> Report:
    p = _need(args, "p")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RankDeficitWarning)
        value = generation_probability_formula(p, args.d, args.k)
    flagged = any(issubclass(w.category, RankDeficitWarning) for w in caught)
    return Report("formula", None, {"p": p, "d": args.d, "k": args.k},
                  values={"probability": value, "probability_float": float(value), "k_below_d": flagged})


def run_formula_mc(args) -> Report:
    p = _need(args, "p")
    samples = _need(args, "samples", 100_000)
    rng = _rng(args)
    est, streams = generation_probability_monte_carlo(p, args.d, args.k, samples, rng,
                                                      transpose=args.transpose, threads=args.threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficitWarning)
        exact = generation_probability_formula(p, args.d, args.k)
    return Report("formula-mc", None, {"p": p, "d": args.d, "k": args.k, "samples": samples,
                                       "transpose": args.transpose},
                  seed=args.seed, streams=streams, values={"estimate": est.estimate, "formula": exact},
                  intervals={"estimate": est.to_dict()}, verdicts={"covers_formula": est.covers(exact)})


HANDLERS: dict[str, Callable] = {
    "enumerate": run_enumerate,
    "check": run_check,
    "sample": run_sample,
    "cone": run_cone,
    "section-mp": run_section_mp,
    "kernel": run_kernel,
    "independence": run_independence,
    "fpp": run_fpp,
    "freeness": run_freeness,
    "free-action": run_free_action,
    "cousins": run_cousins,
    "formula": run_formula,
    "formula-mc": run_formula_mc,
}


def _resolve_seed(args, config: dict) -> None:
    name = args.experiment + (f":{args.mode}" if getattr(args, "mode", None) else "")
    if name not in STOCHASTIC:
        return
    if args.seed is None:
        if args.ci:
            raise UsageError(f"{name} needs an explicit --seed in --ci mode")
        args.seed = 0
        config["seed_defaulted"] = True
    config["seed"] = args.seed


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.experiment == "list":
            stdout.write("\n".join(list_experiments()) + "\n")
            return 0
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        if getattr(args, "group", None) and not args.group_file:
            parse_group_tag(args.group)
        modes = CATALOG[args.experiment]
        if modes and args.mode is None:
            raise UsageError(f"{args.experiment} needs one of " + ", ".join(f"--{m}" for m in modes))
        config = {k: v for k, v in vars(args).items() if k not in NOT_CONFIG}
        _resolve_seed(args, config)
        start = time.perf_counter()
        report = HANDLERS[args.experiment](args)
        report.runtime_ms = round((time.perf_counter() - start) * 1000, 3)
        report.config = {k: v for k, v in sorted(config.items()) if v is not None}
        text = report.to_csv() if args.format == "csv" else report.to_json()
    except UsageError as exc:
        print(f"treegroups: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"treegroups: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return 0 if report.passed else 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
