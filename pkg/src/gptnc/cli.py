"""Command-line interface: ``gptnc <subcommand> ...``.

Exit codes: 0 classical/embeddable (or success), 3 nonclassical/not
embeddable, 4 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import app, embed, linalg as la, quasiprob, quotient
from .errors import GptncError, MalformedInput
from .gpt import CATALOG, Gpt, catalog, validate
from .models import OntologicalModel

EXIT_OK, EXIT_ERROR, EXIT_NO, EXIT_INCONCLUSIVE = 0, 1, 3, 4


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


def _mode(args) -> float | None:
    """``None`` for exact arithmetic, else the float tolerance."""
    if args.tol is not None:
        return args.tol
    return None


def _load_gpt(path: str, args) -> Gpt:
    g = Gpt.from_json(_load_json(path), args.tol)
    if args.tol is not None and g.exact:
        return g.as_float(args.tol)
    if args.exact and not g.exact:
        return Gpt.build(la.exact(g.states.vertices), la.exact(g.effects.vertices), la.exact(g.unit),
                         meta=g.meta, add_trivial=False)
    return g


def _parse_param(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise MalformedInput(f"parameter {text!r} is not key=value")
    k, v = text.split("=", 1)
    try:
        return k, json.loads(v)
    except json.JSONDecodeError:
        return k, v


def _flatten(obj: Any, prefix: str = "") -> list[list[Any]]:
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(obj, list) and obj and isinstance(obj[0], list):
        return [[f"{prefix}[{i}]", *row] for i, row in enumerate(obj)]
    if isinstance(obj, list):
        return [[prefix, *obj]]
    return [[prefix, obj]]


def _emit(obj: Any, args) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(_flatten(obj))
        text = buf.getvalue()
    else:
        text = json.dumps(obj, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_catalog(args) -> int:
    if args.list or not args.name:
        _emit({"catalog": list(CATALOG)}, args)
        return EXIT_OK
    g = catalog(args.name, **dict(_parse_param(p) for p in args.param))
    if args.tol is not None:
        g = g.as_float(args.tol)
    _emit(g.to_json(), args)
    return EXIT_OK


def cmd_validate(args) -> int:
    g = _load_gpt(args.gpt, args)
    report = validate(g)
    _emit(report.to_json(), args)
    return EXIT_OK if report.ok else EXIT_ERROR


def cmd_quotient(args) -> int:
    t = quotient.read_table_csv(args.table, args.relations, _mode(args))
    g, maps = quotient.quotient_to_gpt(t)
    out = g.to_json()
    out["maps"] = maps.to_json()
    prep_cls, eff_cls = quotient.equivalence_classes(t)
    out["classes"] = {"preparations": prep_cls, "effects": eff_cls}
    _emit(out, args)
    return EXIT_OK


def cmd_embed(args) -> int:
    g = _load_gpt(args.gpt, args)
    v = embed.decide(g, minimize=args.minimize)
    out = v.to_json()
    out["lower_bound"] = embed.min_d_lower_bound(g)
    if v.warnings:
        out["warnings"] = v.warnings
    if isinstance(v, embed.Embeddable):
        out["model"] = v.model.to_json()
    if args.search_d:
        m = embed.bilinear_search(g, args.search_d, args.restarts, args.seed, jobs=args.jobs)
        out["search"] = {"d": args.search_d, "restarts": args.restarts, "found": m is not None}
        if m is not None:
            out["search"]["model"] = m.to_json()
    if args.certificate and isinstance(v, embed.NotEmbeddable):
        Path(args.certificate).write_text(json.dumps({"farkas": la.to_jsonable(v.certificate),
                                                      "r": v.decomposition.reduction.r}, indent=2))
    _emit(out, args)
    return EXIT_OK if v.embeddable else EXIT_NO


def _load_pairs(path: str) -> list[tuple[Any, Any]]:
    data = _load_json(path)
    items = data["pairs"] if isinstance(data, dict) else data
    out = []
    for p in items:
        if isinstance(p, dict):
            out.append((la.from_jsonable(p["v"]), la.from_jsonable(p["h"])))
        else:
            out.append((la.from_jsonable(p[0]), la.from_jsonable(p[1])))
    return out


def cmd_quasiprob(args) -> int:
    g = _load_gpt(args.gpt, args)
    if args.from_model:
        q = quasiprob.from_model(OntologicalModel.from_json(_load_json(args.from_model)), g)
    elif args.pairs:
        q = quasiprob.from_decomposition(g, _load_pairs(args.pairs))
    else:
        q, _ = quasiprob.minimize_negativity(g, args.d or g.dim ** 2, seed=args.seed)
    neg = quasiprob.negativity(q)
    out = q.to_json()
    out.update(
        positive=quasiprob.is_positive(q),
        negativity={"state": la.scalar_to_json(neg.state), "effect": la.scalar_to_json(neg.effect)},
        violations=q.violations(),
    )
    if not (args.pairs or args.from_model):
        out["heuristic"] = True
    _emit(out, args)
    return EXIT_OK if out["positive"] else EXIT_NO


def cmd_robustness(args) -> int:
    g = _load_gpt(args.gpt, args)
    r = app.robustness_radius(g, args.precision)
    _emit({"r_star": r, "precision": args.precision}, args)
    return EXIT_OK


def cmd_verdict(args) -> int:
    _, nt = app.ingest(args.table, args.relations, args.epsilon, args.tol)
    v = app.verdict(nt, tol=args.tol, precision=args.precision)
    _emit(v.to_json(), args)
    return v.exit_code


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact rational arithmetic (default for exact inputs)")
    mode.add_argument("--tol", type=float, default=None, help="float arithmetic with this tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="gptnc", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("catalog", parents=[common], help="print a catalog GPT")
    s.add_argument("name", nargs="?")
    s.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("validate", parents=[common], help="check GPT validity")
    s.add_argument("--gpt", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("quotient", parents=[common], help="quotient a probability table to a GPT")
    s.add_argument("--table", required=True)
    s.add_argument("--relations")
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("embed", parents=[common], help="decide simplex-embeddability")
    s.add_argument("--gpt", required=True)
    s.add_argument("--min-d", action="store_true", help="(the lower bound is always reported)")
    s.add_argument("--minimize", action="store_true", help="greedily shrink the model")
    s.add_argument("--certificate", help="write the Farkas certificate here")
    s.add_argument("--search-d", type=int, help="also run the fixed-cardinality search")
    s.add_argument("--restarts", type=int, default=100)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("quasiprob", parents=[common], help="quasiprobability representations")
    s.add_argument("--gpt", required=True)
    src = s.add_mutually_exclusive_group()
    src.add_argument("--pairs")
    src.add_argument("--from-model")
    s.add_argument("--d", type=int, help="ontic size for the heuristic minimizer")
    s.set_defaults(func=cmd_quasiprob)

    s = sub.add_parser("robustness", parents=[common], help="depolarizing robustness radius")
    s.add_argument("--gpt", required=True)
    s.add_argument("--precision", type=float, default=1e-3)
    s.set_defaults(func=cmd_robustness)

    s = sub.add_parser("verdict", parents=[common], help="noise-robust verdict for a table")
    s.add_argument("--table", required=True)
    s.add_argument("--relations")
    s.add_argument("--epsilon", type=float, default=0.0)
    s.add_argument("--precision", type=float, default=1e-3)
    s.set_defaults(func=cmd_verdict)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (GptncError, ValueError, KeyError, OSError) as exc:
        print(f"gptnc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
