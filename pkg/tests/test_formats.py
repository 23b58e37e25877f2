from pathlib import Path

import numpy as np
import pytest

from ctkit.formats import (ParseError, digest, dump_group, dump_module, load_group, load_module,
                           parse_group, parse_module, record)
from ctkit.group import frattini, from_label, quotient
from ctkit.module import (build_schmid_module, direct_sum, random_finite_module, regular_module,
                          twist)

DATA = Path(__file__).resolve().parent.parent / "data"

GOOD = """format: 1
p: 2
e: 5
group: C2
torsion: 1
free_rank: 1
action:
1 1
0 1
"""


def same_module(A, B):
    return (A.p == B.p and A.ctx.e == B.ctx.e and A.torsion == B.torsion
            and A.free_rank == B.free_rank and np.array_equal(A.group.table, B.group.table)
            and all(np.array_equal(x, y) for x, y in zip(A.action, B.action)))


def test_parse_good_module():
    A = parse_module(GOOD)
    assert A.torsion == (1,) and A.free_rank == 1 and A.group.order == 2


@pytest.mark.parametrize("path", sorted(p.name for p in DATA.glob("*.txt") if ".group." not in p.name))
def test_fixtures_round_trip(path):
    A = load_module(DATA / path)
    assert same_module(parse_module(dump_module(A)), A)


def test_group_files():
    G = load_group(str(DATA / "q8_unnamed.group.txt"))
    assert G.order == 8 and not G.is_abelian()
    assert load_group("D8").order == 8
    H = parse_group(dump_group(from_label("Heis3")))
    assert np.array_equal(H.table, from_label("Heis3").table)
    with pytest.raises(ParseError):
        load_group("no-such-group")


def test_group_from_relative_path():
    A = load_module(DATA / "trivial_z2_c2_fromfile.txt")
    assert A.group.order == 2 and A.torsion == (1,)


def test_inline_group_round_trip():
    G = from_label("D16")
    Q, _ = quotient(G, frattini(G))
    A = build_schmid_module(G)
    text = dump_module(A)
    assert "group:\n  " in text
    assert same_module(parse_module(text), A)
    assert Q.order == A.group.order


def test_random_and_twisted_round_trip():
    G = from_label("C2xC2")
    T = random_finite_module(G, seed=5)
    A = twist(direct_sum(T, regular_module(G, ctx=T.ctx)), 5)
    assert same_module(parse_module(dump_module(A)), A)


@pytest.mark.parametrize("text,line,fragment", [
    (GOOD.replace("format: 1", "format: 2"), 1, "unsupported format"),
    (GOOD.replace("format: 1\n", ""), 1, "format"),
    (GOOD.replace("e: 5", "e: five"), 3, "integer"),
    (GOOD.replace("group: C2", "group: C6"), 4, ""),
    (GOOD.replace("group: C2", "group: C3"), 4, "3-group"),
    (GOOD.replace("0 1\n", "0 1 1\n"), 9, "entries"),
    (GOOD.replace("0 1\n", ""), 7, "rows"),
    (GOOD.replace("1 1\n0 1", "1 0\n1 1"), 7, "well-definedness"),
    (GOOD.replace("free_rank: 1", "free_rank: 1\nfree_rank: 1"), 7, "duplicate"),
    (GOOD + "garbage\n", 7, "rows"),
])
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_module(text, "m.txt")
    assert info.value.line == line
    assert str(info.value).startswith(f"m.txt:{line}:")
    assert fragment in str(info.value)


def test_homomorphism_violation_reported():
    # C4 acting on Z/4: the generator by 3 is fine, by 2 is not invertible
    text = GOOD.replace("e: 5", "e: 6").replace("torsion: 1", "torsion: 2") \
        .replace("free_rank: 1", "free_rank: 0").replace("1 1\n0 1", "3").replace("group: C2", "group: C4")
    assert parse_module(text).group.order == 4
    with pytest.raises(ParseError, match="homomorphism"):
        parse_module(text.replace("action:\n3", "action:\n2"))


def test_missing_file():
    with pytest.raises(ParseError):
        load_module(DATA / "missing.txt")


def test_record_and_digest():
    assert record([("a", 1), ("b", "x y")]) == "a: 1\nb: x y\n"
    with pytest.raises(ValueError):
        record([("a", "1\n2")])
    assert digest(b"abc") == digest(b"abc") and len(digest(b"abc")) == 16
