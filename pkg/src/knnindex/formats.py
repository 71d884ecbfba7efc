"""Line-oriented text formats for schemes, point sets, query sets and expanders.

Scheme files start with ``scheme n=<n> B=<B> blocks=<s>`` followed by one
block per line (space-separated item ids).  Point files start with
``points n=<n> d=<d> metric=<m>`` followed by one point per line.  Each
coordinate is written as an exact rational (``-1/2``, ``3/2``, ``0``).
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .expander import BipartiteExpander
from .metrics import PointSet, check_metric, from_rationals, rescale
from .model import IndexingScheme, Instance


class FormatError(ValueError):
    pass


def _header(line: str, tag: str) -> dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != tag:
        raise FormatError(f"expected a {tag!r} header, got {line!r}")
    fields = {}
    for p in parts[1:]:
        key, sep, value = p.partition("=")
        if not sep:
            raise FormatError(f"malformed header field {p!r}")
        fields[key] = value
    return fields


def _lines(src: str | TextIO) -> list[str]:
    text = src if isinstance(src, str) else src.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def dump_scheme(scheme: IndexingScheme) -> str:
    out = [f"scheme n={scheme.n} B={scheme.block_size} blocks={scheme.space_usage}"]
    out += [" ".join(str(x) for x in sorted(b)) for b in scheme.blocks]
    return "\n".join(out) + "\n"


def load_scheme(src: str | TextIO, points: PointSet | None = None) -> IndexingScheme:
    lines = _lines(src)
    if not lines:
        raise FormatError("empty scheme file")
    h = _header(lines[0], "scheme")
    try:
        n, B, s = int(h["n"]), int(h["B"]), int(h["blocks"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad scheme header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != s:
        raise FormatError(f"header announces {s} blocks, file has {len(body)}")
    blocks = [[int(x) for x in ln.split()] for ln in body]
    return IndexingScheme(Instance(n, points), B, blocks)


def dump_points(P: PointSet, metric: str) -> str:
    check_metric(metric)
    out = [f"points n={P.n} d={P.d} metric={metric}"]
    for row in P.coords:
        out.append(" ".join(str(int(v)) if P.bits else str(Fraction(int(v), P.scale)) for v in row))
    return "\n".join(out) + "\n"


def load_points(src: str | TextIO) -> tuple[PointSet, str]:
    lines = _lines(src)
    if not lines:
        raise FormatError("empty points file")
    h = _header(lines[0], "points")
    try:
        n, d, metric = int(h["n"]), int(h["d"]), check_metric(h["metric"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad points header: {lines[0]!r}") from exc
    rows = [ln.split() for ln in lines[1:]]
    if len(rows) != n or any(len(r) != d for r in rows):
        raise FormatError(f"expected {n} rows of {d} coordinates")
    if n == 0:
        raise FormatError("point files need at least one point")
    try:
        P = from_rationals(rows, bits=metric == "hamming")
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return P, metric


def common_scale(*sets: PointSet) -> list[PointSet]:
    """Rescale dense point sets onto one integer grid so their distances compare."""
    if all(s.bits for s in sets):
        return list(sets)
    if any(s.bits for s in sets):
        raise FormatError("cannot mix bit and dense point files")
    scale = lcm(*(s.scale for s in sets))
    return [rescale(s, scale) for s in sets]


def dump_query_sets(queries: Iterable[Iterable[int]]) -> str:
    return "".join(" ".join(str(x) for x in sorted(I)) + "\n" for I in queries)


def load_query_sets(src: str | TextIO) -> list[frozenset[int]]:
    return [frozenset(int(x) for x in ln.split()) for ln in _lines(src) if ln.strip()]


def dump_expander(G: BipartiteExpander) -> str:
    out = [f"expander n={G.n_left} d_right={G.d_right} m={G.m} delta={G.delta} "
           f"eps={G.eps} certified={int(G.certified)}"]
    out += [" ".join(str(v) for v in nb) for nb in G.adjacency]
    return "\n".join(out) + "\n"


def load_expander(src: str | TextIO) -> BipartiteExpander:
    lines = _lines(src)
    if not lines:
        raise FormatError("empty expander file")
    h = _header(lines[0], "expander")
    try:
        n = int(h["n"])
        G = BipartiteExpander(n, int(h["d_right"]),
                              tuple(tuple(int(v) for v in ln.split()) for ln in lines[1:]),
                              int(h["m"]), int(h["delta"]), Fraction(h["eps"]),
                              bool(int(h.get("certified", "0"))))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad expander file: {exc}") from exc
    if len(G.adjacency) != n:
        raise FormatError(f"expected {n} adjacency lines, got {len(G.adjacency)}")
    return G


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
