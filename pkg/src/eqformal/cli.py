"""Command-line front end: ``eqformal {check,catalog,poincare,oracle}``.

Exit status: 0 when every verdict is yes/yes (or the oracle confirms), 2 when
something is inconclusive or unconfirmed, 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import cartanmodel as cm
from .cartanmodel import YES, format_series
from .catalog import (Bounds, CatalogError, default_catalog_path, find_instance, generate_instances,
                      load_catalog, reduce_entry, run_catalog, run_instance, run_space)
from .liegroups import EmbeddingError, GroupLabelError, make_group

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
UNBOUNDED_RANK = 10 ** 6


class UsageError(Exception):
    """An input problem reported with a one-line message and exit status 1."""


def parse_embedding(text):
    """Embedding from text: a kind, a comma-separated chain ``kind:INTO,...``, or JSON.

    A chain step may carry factor kinds as ``factorwise[block+diagonal]:INTO``.
    JSON input is a kind string or a list of recipe steps.
    """
    if text is None:
        return None
    text = text.strip()
    if not text:
        raise UsageError("malformed embedding: empty text")
    if text[0] in "[{\"":
        try:
            value = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed embedding: invalid JSON ({exc.msg})") from None
        if isinstance(value, dict):
            value = [value]
        if isinstance(value, str):
            return value
        if not isinstance(value, list) or not all(isinstance(s, (str, dict)) for s in value):
            raise UsageError("malformed embedding: JSON must be a kind or a list of steps")
        for s in value:
            if isinstance(s, dict) and "kind" not in s:
                raise UsageError("malformed embedding: every step needs a 'kind'")
        return value
    steps = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        kind, _, into = chunk.partition(":")
        parts = None
        if "[" in kind:
            if not kind.endswith("]"):
                raise UsageError(f"malformed embedding: unbalanced brackets in {chunk!r}")
            kind, _, inner = kind[:-1].partition("[")
            parts = [p.strip() for p in inner.split("+")]
            if not all(parts):
                raise UsageError(f"malformed embedding: empty factor kind in {chunk!r}")
        if not kind:
            raise UsageError(f"malformed embedding: missing kind in {chunk!r}")
        step = {"kind": kind}
        if into:
            step["into"] = into
        if parts is not None:
            step["parts"] = parts
        steps.append(step)
    if len(steps) == 1 and set(steps[0]) == {"kind"}:
        return steps[0]["kind"]
    return steps


def parse_fact(text):
    """Degree fact ``hit,E,D``: the degree-E generator of H*(BK) is hit by the degree-D generator of H*(BG)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3 or parts[0] != "hit" or not all(p.isdigit() for p in parts[1:]):
        raise UsageError(f"malformed fact: {text!r} (expected hit,E,D)")
    return ("hit", int(parts[1]), int(parts[2]))


def _bounds(args) -> Bounds:
    if args.max_rank < 1:
        raise UsageError(f"bound violation: --max-rank must be positive, got {args.max_rank}")
    if args.time_budget <= 0:
        raise UsageError(f"bound violation: --time-budget must be positive, got {args.time_budget}")
    max_dim = getattr(args, "oracle_max_dimension", None) or Bounds().oracle_max_dimension
    if max_dim < 1:
        raise UsageError(f"bound violation: --oracle-max-dimension must be positive, got {max_dim}")
    return Bounds(max_rank=args.max_rank, time_budget=args.time_budget, oracle=getattr(args, "oracle", False),
                  oracle_max_dimension=max_dim)


def _group(label, max_rank):
    try:
        g = make_group(label, max_rank=UNBOUNDED_RANK)
    except GroupLabelError as exc:
        msg = str(exc)
        raise UsageError(msg if msg.startswith("unknown group label") else f"unknown group label {label!r}: {msg}") from None
    if g.rank > max_rank:
        raise UsageError(f"bound violation: {g.label} has rank {g.rank}, above --max-rank {max_rank}")
    return g


def _catalog(args):
    try:
        return load_catalog(args.catalog)
    except CatalogError as exc:
        raise UsageError(f"catalog error: {exc}") from None


def _space(args):
    """(group, subgroup, embedding, facts) from --label or --group/--subgroup/--embedding."""
    if args.label:
        if args.group or args.subgroup:
            raise UsageError("give either --label or --group/--subgroup, not both")
        inst = find_instance(_catalog(args), args.label, args.max_rank)
        if inst is None:
            raise UsageError(f"unknown catalog label: {args.label!r} (at --max-rank {args.max_rank})")
        return inst
    if not args.group or not args.subgroup:
        raise UsageError("--group and --subgroup are required (or --label)")
    g = _group(args.group, args.max_rank)
    k = _group(args.subgroup, args.max_rank)
    return g, k, parse_embedding(args.embedding), tuple(parse_fact(f) for f in args.fact or ())


def _emit(args, text):
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdict_table(v: dict) -> str:
    lines = [f"space: {v['space']}",
             f"formal: {v['formal']}",
             f"equivariantly formal: {v['equivariantly_formal']}",
             f"route: {v['route'] or '-'}",
             f"Poincare: {format_series(v['poincare']) if v['poincare'] is not None else '-'}"]
    w = v.get("witness")
    if isinstance(w, dict):
        for key in sorted(w):
            if key in ("images", "membership_certificates"):
                continue
            lines.append(f"witness.{key}: {json.dumps(w[key], sort_keys=True)}")
    if v.get("oracle"):
        lines.append(f"oracle: {json.dumps(v['oracle'], sort_keys=True)}")
    for note in v.get("notes", ()):
        lines.append(f"note: {note}")
    if v.get("timing_ms") is not None:
        lines.append(f"time: {v['timing_ms']} ms")
    return "\n".join(lines) + "\n"


def _status(formal, eq):
    if formal == YES and eq == YES:
        return EXIT_OK
    if "error" in (formal, eq):
        return EXIT_ERROR
    return EXIT_INCONCLUSIVE


def _verdict_for(args):
    bounds = _bounds(args)
    space = _space(args)
    if not isinstance(space, tuple):
        record = run_instance(space, bounds)
        v = record["verdict"]
        if v.formal == "error":
            raise UsageError(f"invalid space: {'; '.join(v.notes)}")
        return v
    g, k, emb, facts = space
    try:
        return run_space(g.label, k.label, emb, facts, bounds)
    except EmbeddingError as exc:
        raise UsageError(f"malformed embedding: {exc}") from None
    except GroupLabelError as exc:
        raise UsageError(f"unknown group label: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"invalid space: {exc}") from None


def cmd_check(args):
    v = _verdict_for(args).to_dict(include_timing=not args.no_timing)
    if args.format == "structured":
        _emit(args, json.dumps({"format": "eqformal-verdict", "version": 1, "verdict": v},
                               sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    else:
        _emit(args, _verdict_table(v))
    return _status(v["formal"], v["equivariantly_formal"])


def cmd_poincare(args):
    v = _verdict_for(args)
    if v.poincare is None:
        sys.stderr.write(f"no Poincare polynomial: {v.space} is {v.formal}\n")
        return EXIT_INCONCLUSIVE
    if args.format == "structured":
        _emit(args, json.dumps({"space": v.space, "poincare": list(v.poincare)}, sort_keys=True) + "\n")
    else:
        _emit(args, json.dumps(list(v.poincare)) + "\n")
    return EXIT_OK


def cmd_oracle(args):
    from .oracle import (DEFAULT_MAX_DEGREE, ResourceBoundExceeded, build_borel_model, dga_cohomology_upto,
                         fiber_surjectivity_report, model_complex)

    _bounds(args)
    if args.max_degree is not None and not 0 <= args.max_degree <= DEFAULT_MAX_DEGREE:
        raise UsageError(f"bound violation: --max-degree must lie in 0..{DEFAULT_MAX_DEGREE}, "
                         f"got {args.max_degree}")
    space = _space(args)
    if isinstance(space, tuple):
        g, k, emb, _ = space
    else:
        checks = [c for c in reduce_entry(space) if c.kind == "space" and c.role in ("main", "direct")]
        if not checks or checks[0].embedding is None:
            raise UsageError(f"no explicit model for catalog label {args.label!r}")
        g, k, emb = make_group(checks[0].group), make_group(checks[0].subgroup), checks[0].embedding
    if not g.explicit or not k.explicit:
        raise UsageError(f"invalid space: the oracle needs explicit groups, {g.label}/{k.label} is degree-only")
    try:
        m = cm.build_model(g, k, emb)
    except EmbeddingError as exc:
        raise UsageError(f"malformed embedding: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"invalid space: {exc}") from None
    n = m.formal_dimension if args.max_degree is None else args.max_degree
    if n > DEFAULT_MAX_DEGREE:
        raise UsageError(f"bound violation: formal dimension {n} exceeds {DEFAULT_MAX_DEGREE}; pass --max-degree")
    cx = model_complex(m)
    borel = build_borel_model(m)
    try:
        dims = dga_cohomology_upto(cx, n)
        report = fiber_surjectivity_report(borel, n, fiber=cx)
    except ResourceBoundExceeded as exc:
        raise UsageError(f"bound violation: {exc}") from None
    surjective = all(h == got for h, got in report.values())
    out = {"space": m.label, "max_degree": n, "d_squared_zero": borel.d_squared_vanishes(),
           "cohomology": dims, "fiber_surjective": surjective}
    if args.format == "structured":
        _emit(args, json.dumps(out, sort_keys=True, indent=2) + "\n")
    else:
        _emit(args, "\n".join([f"space: {m.label}", f"degrees 0..{n}",
                               f"cohomology dimensions: {dims}",
                               f"d^2 = 0: {out['d_squared_zero']}",
                               f"fiber restriction surjective: {surjective}"]) + "\n")
    return EXIT_OK if surjective and out["d_squared_zero"] else EXIT_INCONCLUSIVE


def _print_progress(r):
    v = r["verdict"]
    sys.stderr.write(f"{r['label']}: {v['formal']}/{v['equivariantly_formal']} {v['route']}\n")


def cmd_catalog_run(args):
    bounds = _bounds(args)
    entries = _catalog(args)
    known = {e.id for e in entries}
    unknown = [f for f in args.family or () if f not in known]
    if unknown:
        raise UsageError(f"unknown catalog family: {', '.join(unknown)}")
    report = run_catalog(entries, bounds, families=set(args.family) if args.family else None,
                         progress=_print_progress if args.progress else None)
    if args.format == "structured":
        _emit(args, report.to_json(include_timing=not args.no_timing))
    else:
        _emit(args, report.to_table())
    c = report.counts
    if c["errors"]:
        return EXIT_ERROR
    return EXIT_OK if report.all_yes else EXIT_INCONCLUSIVE


def cmd_catalog_list(args):
    if args.max_rank < 1:
        raise UsageError(f"bound violation: --max-rank must be positive, got {args.max_rank}")
    lines = []
    for e in _catalog(args):
        if args.family and e.id not in args.family:
            continue
        for inst in generate_instances(e, args.max_rank):
            lines.append(f"{e.id}\t{inst.label}\t{inst.tag}")
    _emit(args, "\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


def _add_bounds(p, oracle=True):
    p.add_argument("--max-rank", type=int, default=8, help="largest admitted group rank (default 8)")
    p.add_argument("--time-budget", type=float, default=cm.DEFAULT_TIME_BUDGET,
                   help="seconds per splitting search (default 60)")
    if oracle:
        p.add_argument("--oracle", action="store_true", help="attach the brute-force oracle report")
        p.add_argument("--oracle-max-dimension", type=int, default=None,
                       help="skip the oracle above this formal dimension (default 40)")


def _add_space(p):
    p.add_argument("--label", help="a catalog instance label such as 'SU(3)/SO(3)'")
    p.add_argument("--group", help="big group label, e.g. 'Sp(4)'")
    p.add_argument("--subgroup", help="subgroup label, e.g. 'Sp(2)'")
    p.add_argument("--embedding", help="embedding kind, chain 'kind:INTO,kind' or JSON recipe")
    p.add_argument("--fact", action="append", help="degree fact hit,E,D for degree-only groups (repeatable)")
    p.add_argument("--catalog", default=None, help=f"catalog file (default {default_catalog_path()})")


def _add_output(p):
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--output", help="write to this file instead of standard output")
    p.add_argument("--no-timing", action="store_true", help="omit timings (byte-stable output)")


def build_parser():
    parser = argparse.ArgumentParser(prog="eqformal",
                                     description="Formality and equivariant formality of homogeneous spaces.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("check", help="decide formality and equivariant formality of one space")
    _add_space(p)
    _add_bounds(p)
    _add_output(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("poincare", help="print the Poincare coefficient list of one space")
    _add_space(p)
    _add_bounds(p, oracle=False)
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--output")
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("oracle", help="brute-force cohomology and fiber-surjectivity check")
    _add_space(p)
    _add_bounds(p, oracle=False)
    p.add_argument("--max-degree", type=int, default=None, help="degree bound (default: formal dimension)")
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("catalog", help="run or list the family catalog")
    csub = p.add_subparsers(dest="action", required=True)
    r = csub.add_parser("run", help="check every catalog instance within the bounds")
    r.add_argument("--catalog", default=None)
    r.add_argument("--family", action="append", help="restrict to a family id (repeatable)")
    r.add_argument("--progress", action="store_true", help="one line per instance on standard error")
    _add_bounds(r)
    _add_output(r)
    r.set_defaults(func=cmd_catalog_run)
    ls = csub.add_parser("list", help="list catalog instances")
    ls.add_argument("--catalog", default=None)
    ls.add_argument("--family", action="append")
    ls.add_argument("--max-rank", type=int, default=8)
    ls.add_argument("--output")
    ls.set_defaults(func=cmd_catalog_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"eqformal: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"eqformal: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
