"""Text formats for groups, modules and output records.

Every file starts with ``format: 1``.  Lines are ``key: value``; blank lines
and lines starting with ``#`` are ignored.  Block values (``table``,
``action``) put ``key:`` alone on a line and continue with rows of integers.

Group file::

    format: 1
    name: C4            # optional
    p: 2
    order: 4
    generators: 1
    table:
    0 1 2 3
    1 2 3 0
    2 3 0 1
    3 0 1 2

Row i, column j of ``table`` is the index of element i*j; element 0 is the
identity.

Module file::

    format: 1
    p: 2
    e: 5
    group: C2           # catalog label, or @path/to/group.txt (relative to the module file)
    torsion: 1
    free_rank: 1
    action:
    1 1
    0 1

``action`` holds one dim x dim matrix per group generator, stacked
row-major; coordinates are the torsion coordinates (in the listed order)
followed by the free ones.  Entries are reduced mod p^n_i in torsion rows
and mod p^e in free rows.  :func:`dump_module` writes this layout exactly,
with an inline ``group:`` block (the group file fields indented by two
spaces) when the group has no catalog label.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .arith import PadicContext
from .group import GroupError, PGroup, from_cayley_table, from_label
from .module import FgModule, validate

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else (f"{source}: " if source else "")
        super().__init__(where + msg)


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield no, line


def _fields(text: str, source: str, blocks=("table", "action")) -> dict:
    """key -> (line, value) with block keys mapped to a list of (line, row)."""
    out = {}
    current = None
    for no, line in _lines(text):
        indented = line.startswith(" ")
        if current is not None and (indented or ":" not in line):
            out[current][1].append((no, line.strip()))
            continue
        if ":" not in line:
            raise ParseError(f"expected 'key: value', got {line.strip()!r}", no, source)
        key, val = line.split(":", 1)
        key, val = key.strip(), val.strip()
        if key in out:
            raise ParseError(f"duplicate field {key!r}", no, source)
        if key in blocks or (key == "group" and val == ""):
            out[key] = (no, [])
            current = key
            if val:
                raise ParseError(f"{key!r} takes a block on the following lines", no, source)
        else:
            out[key] = (no, val)
            current = None
    if "format" not in out:
        raise ParseError("missing 'format: 1' line", 1, source)
    if out["format"][1] != str(FORMAT_VERSION):
        raise ParseError(f"unsupported format {out['format'][1]!r}", out["format"][0], source)
    return out


def _int(field, name, source) -> int:
    no, val = field
    try:
        return int(val)
    except ValueError:
        raise ParseError(f"{name} must be an integer, got {val!r}", no, source) from None


def _ints(no, val, source) -> list:
    try:
        return [int(x) for x in val.replace(",", " ").split()]
    except ValueError:
        raise ParseError(f"expected integers, got {val!r}", no, source) from None


def _need(f, key, source):
    if key not in f:
        raise ParseError(f"missing field {key!r}", None, source)
    return f[key]


def parse_group(text: str, source: str = "<group>") -> PGroup:
    f = _fields(text, source)
    p = _int(_need(f, "p", source), "p", source)
    order = _int(_need(f, "order", source), "order", source)
    no_t, rows = _need(f, "table", source)
    if len(rows) != order:
        raise ParseError(f"table has {len(rows)} rows, expected {order}", no_t, source)
    table = []
    for no, row in rows:
        vals = _ints(no, row, source)
        if len(vals) != order:
            raise ParseError(f"row has {len(vals)} entries, expected {order}", no, source)
        table.append(vals)
    gens = None
    if "generators" in f:
        gens = tuple(_ints(f["generators"][0], f["generators"][1], source))
    name = f["name"][1] if "name" in f else ""
    try:
        G = from_cayley_table(np.array(table, dtype=np.int64), gens, name=name)
    except GroupError as exc:
        raise ParseError(str(exc), no_t, source) from None
    if G.p != p:
        raise ParseError(f"group order {order} is not a power of p={p}", f["p"][0], source)
    return G


def dump_group(G: PGroup, indent: str = "", header: bool = True) -> str:
    lines = [f"format: {FORMAT_VERSION}"] if header else []
    if G.name:
        lines.append(f"name: {G.name}")
    lines += [f"p: {G.p}", f"order: {G.order}",
              "generators: " + " ".join(str(g) for g in G.generators), "table:"]
    lines += [" ".join(str(G.mul(i, j)) for j in G.elements) for i in G.elements]
    return "\n".join(indent + x for x in lines) + "\n"


def load_group(spec: str) -> PGroup:
    """A catalog label or a path to a group file."""
    path = Path(spec)
    if path.exists():
        return parse_group(path.read_text(), str(path))
    try:
        return from_label(spec)
    except GroupError as exc:
        raise ParseError(f"{spec!r} is neither a group file nor a catalog label ({exc})") from None


def parse_module(text: str, source: str = "<module>", base: Path | None = None) -> FgModule:
    f = _fields(text, source)
    p = _int(_need(f, "p", source), "p", source)
    e = _int(_need(f, "e", source), "e", source)
    no_g, gval = _need(f, "group", source)
    if isinstance(gval, list):
        inner = "\n".join(["format: 1"] + [r for _, r in gval])
        G = parse_group(inner, f"{source}:{no_g}")
    elif gval.startswith("@"):
        gpath = (base or Path(".")) / gval[1:]
        if not gpath.exists():
            raise ParseError(f"group file {gpath} not found", no_g, source)
        G = parse_group(gpath.read_text(), str(gpath))
    else:
        try:
            G = from_label(gval)
        except GroupError as exc:
            raise ParseError(str(exc), no_g, source) from None
    if G.p != p:
        raise ParseError(f"group is a {G.p}-group but p={p}", no_g, source)
    no_t, tval = _need(f, "torsion", source)
    torsion = tuple(_ints(no_t, tval, source)) if tval else ()
    free = _int(_need(f, "free_rank", source), "free_rank", source)
    dim = len(torsion) + free
    no_a, rows = _need(f, "action", source)
    ngen = len(G.generators)
    if len(rows) != dim * ngen:
        raise ParseError(f"action has {len(rows)} rows, expected {dim * ngen} "
                         f"({ngen} matrices of size {dim})", no_a, source)
    mats = []
    for k in range(ngen):
        M = []
        for no, row in rows[k * dim:(k + 1) * dim]:
            vals = _ints(no, row, source)
            if len(vals) != dim:
                raise ParseError(f"matrix row has {len(vals)} entries, expected {dim}", no, source)
            M.append(vals)
        mats.append(np.array(M, dtype=object).reshape(dim, dim))
    try:
        ctx = PadicContext(p, e)
        A = FgModule(ctx, G, torsion, free, tuple(mats))
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None
    problems = validate(A)
    if problems:
        raise ParseError("invalid module: " + "; ".join(problems), no_a, source)
    return A


def _is_catalog(G: PGroup) -> bool:
    """Does the group's label rebuild exactly this table and generator list?"""
    if not G.name:
        return False
    try:
        H = from_label(G.name)
    except GroupError:
        return False
    return np.array_equal(H.table, G.table) and tuple(H.generators) == tuple(G.generators)


def dump_module(A: FgModule) -> str:
    lines = [f"format: {FORMAT_VERSION}", f"p: {A.p}", f"e: {A.ctx.e}"]
    if _is_catalog(A.group):
        lines.append(f"group: {A.group.name}")
    else:
        lines.append("group:")
        lines.append(dump_group(A.group, indent="  ", header=False).rstrip("\n"))
    lines.append(("torsion: " + " ".join(str(n) for n in A.torsion)).rstrip())
    lines.append(f"free_rank: {A.free_rank}")
    lines.append("action:")
    for M in A.action:
        for row in M:
            lines.append(" ".join(str(int(x)) for x in row))
    return "\n".join(lines) + "\n"


def load_module(path) -> FgModule:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"module file {path} not found")
    return parse_module(path.read_text(), str(path), path.parent)


def record(fields) -> str:
    """Line-oriented ``key: value`` record, in the given order."""
    out = []
    for k, v in fields:
        if "\n" in str(v):
            raise ValueError(f"record value for {k!r} spans lines")
        out.append(f"{k}: {v}")
    return "\n".join(out) + "\n"
