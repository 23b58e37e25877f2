"""Command-line interface: ``ctkit <command> [options]``.

Commands: invariants, cohomology, split, theorem2, tensor, zeta, schmid,
selftest.  Group and module files use the layouts documented in
:mod:`ctkit.formats`.  Output goes to standard output, or to ``--out``.

Exit codes: 0 success, 1 usage or parse error, 2 budget exceeded,
3 precision exhausted, 4 a proved theorem failed (InternalContradiction).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, arith
from .cohomology import (DEGREES, PrecisionExhausted, UnsupportedDegree, ct_definition_scan,
                         is_ct_finite, tate)
from .errors import BudgetExceeded, InternalContradiction
from .formats import ParseError, digest, load_group, load_module, record
from .group import GroupError, subgroups
from .module import ModuleError, ranks

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_PRECISION, EXIT_CONTRADICTION = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


@dataclass
class Report:
    command: str
    meta: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    header: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    extra: list = field(default_factory=list)  # (suffix, text) side outputs
    code: int = EXIT_OK


def render(rep: Report, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rep.header:
            w.writerow(rep.header)
            w.writerows(rep.rows)
        else:
            w.writerow([k for k, _ in rep.fields])
            w.writerow([v for _, v in rep.fields])
        return buf.getvalue()
    if fmt == "record":
        items = [("tool", f"ctkit {__version__}"), ("command", rep.command)] + rep.meta + rep.fields
        for row in rep.rows:
            items.append(("row", ",".join(str(x) for x in row)))
        return record(items)
    meta = " ".join(f"{k}={v}" for k, v in rep.meta)
    lines = [f"# ctkit {__version__} {rep.command} {meta}".rstrip()]
    lines += [f"{k}: {v}" for k, v in rep.fields]
    if rep.header:
        table = [[str(h) for h in rep.header]] + [[str(x) for x in r] for r in rep.rows]
        widths = [max(len(r[i]) for r in table) for i in range(len(rep.header))]
        lines.append("")
        for k, r in enumerate(table):
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ helpers


def _file_digest(spec: str) -> str:
    path = Path(spec)
    if path.exists():
        return digest(path.read_bytes())
    return digest(f"label:{spec}".encode())


def _module(args):
    if not args.module:
        raise UsageError("--module FILE is required")
    A = load_module(args.module)
    if args.p is not None and args.p != A.p:
        raise UsageError(f"--p {args.p} disagrees with the module file (p={A.p})")
    if args.e is not None and args.e != A.ctx.e:
        A = A.at_precision(args.e)
    return A


def _meta(args, p, e, inputs) -> list:
    out = [("p", p), ("e", e), ("seed", args.seed)]
    for name, spec in inputs:
        out.append((f"input.{name}", f"{Path(spec).name if Path(spec).exists() else spec} "
                                     f"sha256:{_file_digest(spec)}"))
    return out


def _sub_label(S) -> str:
    return f"{S.order}<{','.join(str(g) for g in S.generators)}>"


def parse_degrees(text: str) -> tuple:
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--degrees expects LO..HI, got {text!r}") from None
    if lo > hi:
        raise UsageError(f"empty degree window {text!r}")
    for n in (lo, hi):
        if n not in DEGREES:
            raise UnsupportedDegree(f"degree {n} outside [-2, 2]")
    return tuple(range(lo, hi + 1))


def _mat(M) -> str:
    return ";".join(" ".join(str(int(x)) for x in row) for row in M)


# ----------------------------------------------------------------- commands


def cmd_invariants(args) -> Report:
    A = _module(args)
    r = ranks(A)
    rep = Report("invariants", _meta(args, A.p, A.ctx.e, [("module", args.module)]))
    rep.fields = [("group_order", A.group.order), ("torsion", " ".join(map(str, A.torsion)) or "-"),
                  ("free_rank", A.free_rank), ("d_R", r.d_R), ("r_R", r.r_R), ("d_K", r.d_K)]
    return rep


def cmd_cohomology(args) -> Report:
    A = _module(args)
    degrees = parse_degrees(args.degrees)
    subs = subgroups(A.group) if args.all_subgroups else [A.group.whole]
    rep = Report("cohomology", _meta(args, A.p, A.ctx.e, [("module", args.module)]))
    rep.header = ["subgroup", "degree", "group", "orders"]
    nonzero = 0
    for S in subs:
        for n in degrees:
            H = tate(A, S, n, args.method)
            nonzero += not H.is_zero
            rep.rows.append([_sub_label(S), n, str(H), "+".join(map(str, H.orders)) or "1"])
    rep.fields = [("method", args.method), ("subgroups", len(subs)),
                  ("degrees", f"{degrees[0]}..{degrees[-1]}"), ("nonzero_cells", nonzero),
                  ("all_zero", "yes" if nonzero == 0 else "no")]
    return rep


def cmd_split(args) -> Report:
    from .structure import NotCT, split_theorem_a
    A = _module(args)
    rep = Report("split", _meta(args, A.p, A.ctx.e, [("module", args.module)]))
    res = split_theorem_a(A)
    if isinstance(res, NotCT):
        S, n = res.witness
        H = tate(A, S, n)
        rep.fields = [("verdict", "not-CT"), ("witness_subgroup", _sub_label(S)),
                      ("witness_degree", n), ("witness_group", str(H)), ("split", "refused")]
        return rep
    rep.fields = [("verdict", "CT"), ("split", "yes"),
                  ("T_torsion", " ".join(map(str, res.T.torsion)) or "-"),
                  ("F_rank_over_RG", len(res.basis)), ("F_rank_over_R", res.F.dim),
                  ("basis", _mat(np.array(res.basis).reshape(len(res.basis), -1)) or "-"),
                  ("section", _mat(res.section) or "-"), ("checked", "yes" if res.checked else "no")]
    return rep


def cmd_theorem2(args) -> Report:
    from .structure import minimal_presentation, verify_theorem2
    A = _module(args)
    if not A.is_finite:
        raise UsageError("theorem2 needs a finite module (free_rank 0)")
    pres = minimal_presentation(A, budget=args.budget or 2**12)
    t = verify_theorem2(A, pres)
    ct = is_ct_finite(A).is_ct
    rep = Report("theorem2", _meta(args, A.p, A.ctx.e, [("module", args.module)]))
    rep.fields = [("r_R(M)", t.r_M), ("r_R(L)", t.r_L), ("d_K(A_G)", t.dK_coinvariants),
                  ("d_R(H_1)", t.dR_h1), ("formula", t.formula), ("match", "yes" if t.match else "no"),
                  ("ct", "yes" if ct else "no"),
                  ("corollary", "holds" if ct == (t.r_M == t.r_L) else "FAILS")]
    if not t.match or ct != (t.r_M == t.r_L):
        rep.code = EXIT_CONTRADICTION
    return rep


def cmd_tensor(args) -> Report:
    from .jordan import tensor_decompose
    p = args.p if args.p is not None else 2
    if not arith.is_prime(p):
        raise UsageError(f"--p {p} is not prime")
    top = p**args.n
    rs = [args.r] if args.r else list(range(1, top + 1))
    ss = [args.s] if args.s else list(range(1, top + 1))
    rep = Report("tensor", [("p", p), ("n", args.n), ("seed", args.seed)])
    rep.header = ["p", "n", "r", "s", "parts"]
    for r in rs:
        for s in ss:
            rep.rows.append([p, args.n, r, s, tensor_decompose(r, s, p, args.n).joined()])
    return rep


def cmd_zeta(args) -> Report:
    from .zeta import cached_coefficients, fit_rational, predict_next
    if not args.group:
        raise UsageError("--group is required")
    G = load_group(args.group)
    s = cached_coefficients(G, args.rank, args.window, args.cache, args.budget)
    f = fit_rational(s, args.fit_degree)
    rep = Report("zeta", _meta(args, G.p, "-", [("group", args.group)]))
    rep.header = ["n", "c_n"]
    rep.rows = [[n, c] for n, c in enumerate(s.coefficients)]
    fit = [("group", G.name or G.order), ("d", args.rank), ("window", args.window),
           ("fitted", str(f.fitted) if f.fitted else "none"),
           ("next_predicted", str(predict_next(f)) if f.fitted else "-")]
    if args.format == "csv":
        rep.extra.append((".fit", record([("tool", f"ctkit {__version__}"), ("command", "zeta")]
                                         + rep.meta + fit)))
    else:
        rep.fields = fit
    return rep


def cmd_schmid(args) -> Report:
    from .module import build_schmid_module
    if not args.group:
        raise UsageError("--group is required")
    G = load_group(args.group)
    A = build_schmid_module(G)
    gu = is_ct_finite(A)
    scan = ct_definition_scan(A)
    if gu.is_ct != scan.all_zero:
        raise InternalContradiction("degree-0 test and full scan disagree on the Schmid module")
    rep = Report("schmid", _meta(args, G.p, A.ctx.e, [("group", args.group)]))
    rep.fields = [("group_order", G.order), ("quotient_order", A.group.order),
                  ("module", " ".join(f"Z/{G.p}^{n}" for n in A.torsion) or "0"),
                  ("verdict", "CT" if gu.is_ct else "not-CT"),
                  ("nonzero_cells", len(scan.nonzero())),
                  ("conjecture", "counter-example" if gu.is_ct else "holds")]
    return rep


def cmd_selftest(args) -> Report:
    from .selftest import run_selftest
    rep = Report("selftest", [("seed", args.seed)])
    rep.header = ["check", "result", "detail"]
    ok = True
    for name, passed, detail in run_selftest(args.seed):
        ok &= passed
        rep.rows.append([name, "pass" if passed else "FAIL", detail])
    rep.fields = [("checks", len(rep.rows)), ("all_pass", "yes" if ok else "no")]
    if not ok:
        rep.code = EXIT_CONTRADICTION
    return rep


COMMANDS = {
    "invariants": cmd_invariants, "cohomology": cmd_cohomology, "split": cmd_split,
    "theorem2": cmd_theorem2, "tensor": cmd_tensor, "zeta": cmd_zeta, "schmid": cmd_schmid,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--group", help="catalog label or group file")
    common.add_argument("--module", help="module file")
    common.add_argument("--p", type=int)
    common.add_argument("--e", type=int)
    common.add_argument("--degrees", default="-2..2", help="degree window LO..HI")
    common.add_argument("--all-subgroups", action="store_true")
    common.add_argument("--method", default="shift", choices=["shift", "ladder", "bar", "periodic"])
    common.add_argument("--window", type=int, default=3, help="zeta window N")
    common.add_argument("--rank", type=int, default=1, help="zeta rank d of L = (RG)^d")
    common.add_argument("--fit-degree", type=int, default=4)
    common.add_argument("--cache", help="zeta coefficient cache file")
    common.add_argument("--n", type=int, default=1, help="tensor: cyclic group of order p^n")
    common.add_argument("--r", type=int)
    common.add_argument("--s", type=int)
    common.add_argument("--budget", type=int, help="enumeration cap (default $CTKIT_BUDGET or 2^14)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of standard output")
    common.add_argument("--format", default="table", choices=["table", "csv", "record"])
    ap = _Parser(prog="ctkit", description="Cohomological triviality toolkit for Z_p[G]-modules.")
    ap.add_argument("--version", action="version", version=f"ctkit {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().split("\n")[0])
    return ap


def run(argv=None) -> tuple:
    """(exit code, standard output text, standard error text)."""
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        rep = COMMANDS[args.command](args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0), "", ""
    except (UsageError, ParseError, GroupError, ModuleError, UnsupportedDegree) as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    except BudgetExceeded as exc:
        return EXIT_BUDGET, "", f"budget exceeded: {exc}\n"
    except (PrecisionExhausted, arith.PrecisionError) as exc:
        return EXIT_PRECISION, "", f"precision exhausted: {exc}\n"
    except InternalContradiction as exc:
        return EXIT_CONTRADICTION, "", f"INTERNAL CONTRADICTION: {exc}\n"
    text = render(rep, args.format)
    if args.out:
        Path(args.out).write_text(text)
        for suffix, body in rep.extra:
            Path(args.out + suffix).write_text(body)
        return rep.code, "", ""
    for _, body in rep.extra:
        text += "\n" + body
    return rep.code, text, ""


def main(argv=None) -> int:
    code, out, err = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
