"""Command line front end: ``knnindex gen|build|verify|tradeoff-table|expander``.

Exit codes: 0 when every verification passes, 1 on a verification failure,
2 on usage or I/O errors.  Randomized commands require ``--seed``.
"""
from __future__ import annotations

import argparse
import dataclasses
import csv
import io
import itertools
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import expander as expander_mod
from . import formats, general, hamming, hard, oracle, tradeoff
from .expander import ExpanderError
from .hamming import AnswerNotGuaranteed, HammingBuildError
from .metrics import METRICS, PointSet, random_points, random_query
from .model import cover_set_exact

log = logging.getLogger("knnindex")


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _ratio_str(x: Fraction | None) -> str:
    return "inf" if x is None else str(x)


def _out_dir(path: str) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} {getattr(args, 'kind', '') or getattr(args, 'scheme', '')} "
                         "is randomized and needs --seed")


# -- gen --------------------------------------------------------------------

def cmd_gen(args) -> int:
    out = _out_dir(args.out)
    kind = args.kind
    if kind == "random":
        _need_seed(args)
        rng = np.random.default_rng(args.seed)
        P = random_points(rng, args.n, args.d, args.metric)
        Q = PointSet(np.stack([random_query(rng, P) for _ in range(args.queries)]), P.scale, P.bits)
        formats.write_text(out / "instance.txt", formats.dump_points(P, args.metric))
        formats.write_text(out / "query_points.txt", formats.dump_points(Q, args.metric))
        print(formats.dump_json({"kind": kind, "n": P.n, "d": P.d, "metric": args.metric,
                                 "queries": Q.n}), end="")
        return 0
    if args.k is None:
        raise UsageError(f"gen {kind} needs --k")
    log_doc = {"kind": kind, "n": args.n, "k": args.k}
    G = None
    if kind in ("linf-low", "hamming-low"):
        _need_seed(args)
        eps = args.eps if args.eps is not None else (Fraction(1, 3) if kind == "linf-low" else Fraction(1, 4))
        delta = args.delta or expander_mod.default_delta(args.n, args.k)
        G = expander_mod.build_expander(args.n, args.k, delta, eps, args.seed,
                                        max_retries=args.max_retries, d_right=args.d_right)
        formats.write_text(out / "expander.txt", formats.dump_expander(G))
        log_doc["expander"] = {"d_right": G.d_right, "delta": G.delta, "eps": str(G.eps),
                               "certification": expander_mod.verify_expander(G).as_dict()}
    W = hard.build_workload(kind, args.n, args.k, G)
    if args.seed is None:
        queries = list(hard.query_sets(W, exhaustive=True))
    else:
        queries = list(hard.query_sets(W, samples=args.queries, seed=args.seed))
    formats.write_text(out / "instance.txt", formats.dump_points(W.points, W.metric))
    formats.write_text(out / "queries.txt", formats.dump_query_sets(queries))
    Q = PointSet(np.stack([W.query(I) for I in queries]), W.points.scale, W.points.bits)
    formats.write_text(out / "query_points.txt", formats.dump_points(Q, W.metric))
    report = hard.verify_workload(W, queries=queries)
    log_doc["verification"] = report
    formats.write_text(out / "gen_log.json", formats.dump_json(log_doc))
    print(formats.dump_json({"kind": kind, "n": W.n, "d": W.points.d, "queries": len(queries),
                             "pass": report["pass"]}), end="")
    return 0 if report["pass"] else 1


# -- build ------------------------------------------------------------------

def _load_instance(path) -> tuple[PointSet, str]:
    with open(path, encoding="utf-8") as fh:
        return formats.load_points(fh)


def cmd_build(args) -> int:
    out = _out_dir(args.out)
    if args.scheme == "alpha-subset":
        n = args.n if args.n is not None else (_load_instance(args.instance)[0].n if args.instance else None)
        if n is None:
            raise UsageError("build alpha-subset needs --n or --instance")
        B = args.B if args.B is not None else args.alpha
        scheme = tradeoff.build_alpha_subset_scheme(n, args.alpha, B)
        manifest = {"scheme": "alpha-subset", "n": n, "alpha": args.alpha, "B": B,
                    "blocks": scheme.space_usage}
        formats.write_text(out / "scheme.txt", formats.dump_scheme(scheme))
    else:
        if not args.instance:
            raise UsageError(f"build {args.scheme} needs --instance")
        P, metric = _load_instance(args.instance)
        if args.k is None:
            raise UsageError(f"build {args.scheme} needs --k")
        B = args.B if args.B is not None else 1
        if args.scheme == "general3apx":
            index = general.build_general_3apx(P, args.k, B, metric)
            formats.write_text(out / "scheme.txt", formats.dump_scheme(index.scheme))
            manifest = general.sidecar(index)
        else:
            _need_seed(args)
            if metric != "hamming":
                raise UsageError("the hamming scheme needs a hamming instance")
            queries = None
            if args.certify == "sampled":
                if not args.queries:
                    raise UsageError("sampled certification needs --queries")
                Q, _ = _load_instance(args.queries)
                queries = list(Q.coords)
            index = hamming.build_hamming_index(
                P, args.k, args.c if args.c is not None else Fraction(2), B, D=args.D, R=args.R,
                seed=args.seed, certify=args.certify, queries=queries,
                max_retries=args.max_retries, criterion=args.criterion)
            scheme, where = hamming.materialized_scheme(index)
            formats.write_text(out / "scheme.txt", formats.dump_scheme(scheme))
            manifest = hamming.manifest(index)
            manifest["entries"] = where
    formats.write_text(out / "manifest.json", formats.dump_json(manifest))
    summary = {k: v for k, v in manifest.items() if k not in ("groups", "lists", "entries",
                                                               "designation", "map_seeds")}
    print(formats.dump_json(summary), end="")
    return 0


# -- verify -----------------------------------------------------------------

def _load_query_points(path, P: PointSet) -> tuple[PointSet, PointSet | None]:
    """Query points on the instance's grid; ``None`` for an empty query file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or (len(lines) == 1 and " n=0 " in f"{lines[0]} "):
        return P, None
    Q, _ = formats.load_points(text)
    if Q.d != P.d:
        raise formats.FormatError(f"queries have dimension {Q.d}, instance has {P.d}")
    P2, Q = formats.common_scale(P, Q)
    return P2, Q


def _instance_arg(args) -> tuple[PointSet, str]:
    if not args.instance:
        raise UsageError("verify needs --instance for this scheme")
    return _load_instance(args.instance)


def _verify_general(manifest, index_dir, args):
    P, metric = _instance_arg(args)
    with open(index_dir / "scheme.txt", encoding="utf-8") as fh:
        scheme = formats.load_scheme(fh)
    index = general.from_sidecar(P, scheme, manifest)
    c = args.c if args.c is not None else Fraction(3)
    P2, Q = _load_query_points(args.queries, P)
    if P2.scale != P.scale:
        index = dataclasses.replace(index, points=P2)
    rows = []
    for j, q in enumerate(Q.coords if Q is not None else []):
        reported, io_cost = general.answer_general_3apx(index, q)
        cert = oracle.certify_ck_answer(index.points, q, index.k, c, reported, metric)
        rows.append({"query": j + 1, "io_cost": io_cost, "ratio": _ratio_str(cert.worst_ratio),
                     "pass": cert.ok and io_cost == index.blocks_per_point})
    return rows, c, metric == "l2"


def _verify_hamming(manifest, index_dir, args):
    P, metric = _instance_arg(args)
    index = hamming.from_manifest(P, manifest)
    c = args.c if args.c is not None else index.c
    with open(index_dir / "scheme.txt", encoding="utf-8") as fh:
        stored = formats.load_scheme(fh)
    for e in manifest.get("entries", []):
        got = set().union(*(stored.blocks[b] for b in e["blocks"])) if e["blocks"] else set()
        if got != set(index.table(e["radius"], e["map"]).entry(int(e["image"]))):
            raise formats.FormatError("stored table entry disagrees with its map")
    _, Q = _load_query_points(args.queries, P)
    rows = []
    for j, q in enumerate(Q.coords if Q is not None else []):
        try:
            reported, io_cost = hamming.answer_hamming(index, q)
        except AnswerNotGuaranteed as exc:
            rows.append({"query": j + 1, "io_cost": None, "ratio": None, "pass": False,
                         "error": str(exc)})
            continue
        cert = oracle.certify_ck_answer(P, q, index.k, c, reported, "hamming")
        rows.append({"query": j + 1, "io_cost": io_cost, "ratio": _ratio_str(cert.worst_ratio),
                     "pass": cert.ok and io_cost == index.blocks_per_entry})
    return rows, c, False


def _verify_alpha(manifest, index_dir, args):
    with open(index_dir / "scheme.txt", encoding="utf-8") as fh:
        scheme = formats.load_scheme(fh)
    with open(args.queries, encoding="utf-8") as fh:
        queries = formats.load_query_sets(fh)
    alpha = manifest["alpha"]
    rows = []
    for j, I in enumerate(queries):
        cover = cover_set_exact(scheme, I)
        ok = I <= cover.items(scheme) and cover.cost <= math.ceil(len(I) / alpha)
        rows.append({"query": j + 1, "io_cost": cover.cost, "bound": math.ceil(len(I) / alpha),
                     "pass": ok})
    return rows, None, False


def cmd_verify(args) -> int:
    index_dir = Path(args.index)
    with open(index_dir / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    kind = manifest.get("scheme")
    if kind == "general3apx":
        rows, c, squared = _verify_general(manifest, index_dir, args)
    elif kind == "hamming":
        rows, c, squared = _verify_hamming(manifest, index_dir, args)
    elif kind == "alpha-subset":
        rows, c, squared = _verify_alpha(manifest, index_dir, args)
    else:
        raise formats.FormatError(f"unknown scheme {kind!r} in manifest")
    ratios = [Fraction(r["ratio"]) for r in rows if r.get("ratio") not in (None, "inf")]
    doc = {
        "scheme": kind,
        "queries": len(rows),
        "passed": sum(r["pass"] for r in rows),
        "pass": all(r["pass"] for r in rows),
        "results": rows,
    }
    if c is not None:
        doc["c"] = str(c)
        doc["ratio_squared"] = squared
        doc["worst_ratio"] = ("inf" if any(r.get("ratio") == "inf" for r in rows)
                              else str(max(ratios)) if ratios else None)
    text = formats.dump_json(doc)
    if args.report:
        formats.write_text(args.report, text)
    print(text, end="")
    return 0 if doc["pass"] else 1


# -- tradeoff-table ---------------------------------------------------------

def cmd_tradeoff_table(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(tradeoff.CSV_COLUMNS)
    for n, lam, B, s, alpha in itertools.product(args.n, args.lam, args.B, args.s, args.alpha):
        if lam > n or alpha > B:
            continue
        w.writerow(tradeoff.TradeoffReport.evaluate(n, lam, B, s, alpha).row())
    if args.out:
        formats.write_text(args.out, buf.getvalue())
    print(buf.getvalue(), end="")
    return 0


# -- expander ---------------------------------------------------------------

def cmd_expander(args) -> int:
    if args.action == "build":
        _need_seed(args)
        G = expander_mod.build_expander(args.n, args.m, args.delta, args.eps, args.seed,
                                        max_retries=args.max_retries, d_right=args.d_right,
                                        beta=args.beta)
        formats.write_text(args.out, formats.dump_expander(G))
        report = expander_mod.verify_expander(G)
    else:
        with open(args.file, encoding="utf-8") as fh:
            G = formats.load_expander(fh)
        report = expander_mod.verify_expander(G)
    print(formats.dump_json({"n": G.n_left, "d_right": G.d_right, "m": G.m, "delta": G.delta,
                             "eps": str(G.eps), **report.as_dict()}), end="")
    return 0 if report.ok else 1


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="knnindex", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate instances and query files")
    g.add_argument("kind", choices=["linf-high", "linf-low", "hamming-high", "hamming-low", "random"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--d", type=int, default=16)
    g.add_argument("--metric", choices=METRICS, default="hamming")
    g.add_argument("--seed", type=int)
    g.add_argument("--queries", type=int, default=100, help="number of sampled queries")
    g.add_argument("--delta", type=int)
    g.add_argument("--eps", type=_fraction)
    g.add_argument("--d-right", type=int)
    g.add_argument("--max-retries", type=int, default=expander_mod.DEFAULT_MAX_RETRIES)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build an indexing scheme")
    b.add_argument("scheme", choices=["general3apx", "hamming", "alpha-subset"])
    b.add_argument("--instance")
    b.add_argument("--k", type=int)
    b.add_argument("--B", type=int)
    b.add_argument("--c", type=_fraction)
    b.add_argument("--D", type=int)
    b.add_argument("--R", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--certify", choices=["full", "sampled"], default="full")
    b.add_argument("--criterion", choices=list(hamming.CRITERIA), default="answer")
    b.add_argument("--queries", help="query points file for sampled certification")
    b.add_argument("--max-retries", type=int, default=hamming.DEFAULT_MAX_RETRIES)
    b.add_argument("--alpha", type=int, default=1)
    b.add_argument("--n", type=int)
    b.add_argument("--out", default=".")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="answer queries with an index and certify them")
    v.add_argument("--index", required=True, help="directory written by build")
    v.add_argument("--instance", help="points file the index was built on")
    v.add_argument("--queries", required=True, help="query points file (query sets for alpha-subset)")
    v.add_argument("--c", type=_fraction, help="approximation factor to certify against")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tradeoff-table", help="CSV of counting bounds over a parameter grid")
    t.add_argument("--n", type=_int_list, required=True)
    t.add_argument("--lam", type=_int_list, required=True)
    t.add_argument("--B", type=_int_list, required=True)
    t.add_argument("--s", type=_int_list, required=True)
    t.add_argument("--alpha", type=_int_list, default=[1])
    t.add_argument("--out")
    t.set_defaults(func=cmd_tradeoff_table)

    e = sub.add_parser("expander", help="build or verify bipartite expanders")
    esub = e.add_subparsers(dest="action", required=True)
    eb = esub.add_parser("build")
    eb.add_argument("--n", type=int, required=True)
    eb.add_argument("--m", type=int, required=True)
    eb.add_argument("--delta", type=int, required=True)
    eb.add_argument("--eps", type=_fraction, default=Fraction(1, 3))
    eb.add_argument("--seed", type=int)
    eb.add_argument("--d-right", type=int)
    eb.add_argument("--beta", type=float, default=expander_mod.DEFAULT_BETA)
    eb.add_argument("--max-retries", type=int, default=expander_mod.DEFAULT_MAX_RETRIES)
    eb.add_argument("--out", required=True)
    ev = esub.add_parser("verify")
    ev.add_argument("file")
    e.set_defaults(func=cmd_expander)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"knnindex: {exc}", file=sys.stderr)
        return 2
    except (OSError, formats.FormatError, ValueError) as exc:
        print(f"knnindex: {exc}", file=sys.stderr)
        return 2
    except (HammingBuildError, ExpanderError) as exc:
        print(f"knnindex: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
