"""Counting free submodules of L = (RG)^d by index: the cohomological zeta series.

Submodules M with p^N L <= M <= L correspond to submodules of L/p^N L.  They
are reached from L by chains of maximal submodules; a maximal submodule of
M is the preimage of a hyperplane of M/mM, m = (p, g - 1).  Each lattice is
stored as its upper-triangular Hermite form with p-power diagonal, which is
unique, so a set of those forms deduplicates the search.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from . import arith
from .arith import PadicContext
from .cohomology import is_ct_finite
from .errors import BudgetExceeded, InternalContradiction
from .group import PGroup
from .module import default_context, permutation_matrices, quotient_lattice, sublattice_module
from .structure import free_basis_certificate

DEFAULT_BUDGET = 2**14


def default_budget() -> int:
    return int(os.environ.get("CTKIT_BUDGET", DEFAULT_BUDGET))


def check_budget(G: PGroup, d: int, N: int, budget: int | None = None) -> None:
    budget = default_budget() if budget is None else budget
    size = G.p ** (N * d * G.order)
    if size > budget:
        raise BudgetExceeded(f"|L/p^{N}L| = {G.p}^{N * d * G.order} exceeds budget {budget}")


# ------------------------------------------------------------------ lattices


def hermite_form(cols, p: int, N: int) -> tuple:
    """Canonical upper-triangular basis of span(cols) + p^N Z_p^m.

    Diagonal entries are p^a (a <= N); entry (i, j), j > i, lies in
    [0, p^a_i).  Returned as a tuple of column tuples.
    """
    q = p**N
    cols = [[int(x) % q for x in c] for c in cols]
    m = len(cols[0]) if cols else 0
    piv = [None] * m
    for i in range(m - 1, -1, -1):
        best, bv = None, N
        for k, c in enumerate(cols):
            if c[i]:
                v = arith.vp(c[i], p)
                if v < bv:
                    best, bv = k, v
        if best is None:
            col = [0] * m
            col[i] = q
            piv[i] = (col, N)
            continue
        c = cols.pop(best)
        unit = c[i] // p**bv
        inv = pow(unit, -1, q)
        c = [(x * inv) % q for x in c]
        for k, o in enumerate(cols):
            if o[i]:
                f = o[i] // p**bv
                cols[k] = [(a - f * b) % q for a, b in zip(o, c)]
        # p^(N - bv) c vanishes in row i mod p^N but not necessarily above it
        tail = [(x * p ** (N - bv)) % q for x in c]
        if any(tail):
            cols.append(tail)
        piv[i] = (c, bv)
    basis = [list(pc[0]) for pc in piv]
    exps = [pc[1] for pc in piv]
    for j in range(m):
        basis[j][j] = p ** exps[j]
        for i in range(j - 1, -1, -1):
            f = basis[j][i] // p ** exps[i]
            if f:
                basis[j] = [a - f * b for a, b in zip(basis[j], basis[i])]
        # rows below j are zero, rows above reduced into [0, p^a_i)
        for i in range(j + 1, m):
            basis[j][i] = 0
    return tuple(tuple(c) for c in basis)


def lattice_index(H: tuple, p: int) -> int:
    """log_p of |L : M| for a Hermite form."""
    return sum(arith.vp(H[j][j], p) for j in range(len(H)))


def _basis_matrix(H: tuple) -> np.ndarray:
    return np.array(H, dtype=object).T


def _maximal_submodules(H: tuple, gens: list, p: int, N: int):
    """Hermite forms of the maximal submodules of the lattice H."""
    m = len(H)
    B = [list(c) for c in H]
    # G acts on the residue space M/pM via coordinates in the basis B; compute
    # images g.b_j and express them in B by back substitution (B is triangular).
    diffs = []
    for Mg in gens:
        for j in range(m):
            img = [sum(int(Mg[r, c]) * B[j][c] for c in range(m)) for r in range(m)]
            x = _solve_upper(B, img, p)
            x[j] -= 1
            diffs.append([v % p for v in x])
    D = np.array(diffs, dtype=np.int64).T if diffs else np.zeros((m, 0), dtype=np.int64)
    # functionals vanishing on the image of g - 1
    fs = arith.kernel_basis_fp(D.T, p) if D.size else [np.eye(m, dtype=np.int64)[k] for k in range(m)]
    k = len(fs)
    seen = []
    for coeffs in product(range(p), repeat=k):
        if not any(coeffs):
            continue
        lead = next(c for c in coeffs if c)
        if lead != 1:
            continue  # one functional per line
        f = np.mod(sum(c * v for c, v in zip(coeffs, fs)), p)
        j0 = int(np.nonzero(f)[0][-1])
        finv = pow(int(f[j0]), -1, p)
        cols = []
        for i in range(m):
            if i == j0:
                cols.append([p * x for x in B[j0]])
            else:
                t = (int(f[i]) * finv) % p
                cols.append([a - t * b for a, b in zip(B[i], B[j0])])
        seen.append(hermite_form(cols, p, N))
    return seen


def _solve_upper(B: list, y: list, p: int) -> list:
    """x with sum_j x_j B[j] = y, B upper triangular with p-power diagonal."""
    m = len(B)
    y = list(y)
    x = [0] * m
    for j in range(m - 1, -1, -1):
        d = B[j][j]
        if y[j] % d:
            raise arith.PrecisionError("vector is not in the lattice")
        x[j] = y[j] // d
        if x[j]:
            y = [a - x[j] * b for a, b in zip(y, B[j])]
    return x


def invariant_submodules(G: PGroup, d: int, N: int, max_level: int | None = None,
                         budget: int | None = None):
    """Yield (level, Hermite form) for every submodule of L/p^N L, L = (RG)^d.

    Level n means index p^n.  Each submodule appears exactly once.  With
    ``max_level`` the search stops after that index.
    """
    check_budget(G, d, N, budget)
    p = G.p
    m = d * G.order
    perms = permutation_matrices(G, d)
    gens = [perms[g] for g in G.generators]
    top = N * m if max_level is None else min(max_level, N * m)
    level = {hermite_form([[int(i == j) for i in range(m)] for j in range(m)], p, N)}
    for n in range(top + 1):
        for H in sorted(level):
            yield n, H
        if n == top:
            break
        nxt = set()
        for H in level:
            for K in _maximal_submodules(H, gens, p, N):
                if lattice_index(K, p) == n + 1:
                    nxt.add(K)
        level = nxt


def naive_submodules(G: PGroup, d: int, N: int, cap: int = 2**8) -> set:
    """All G-invariant subgroups of (Z/p^N)^m by subset closure (test oracle)."""
    p = G.p
    m = d * G.order
    q = p**N
    if q**m > cap:
        raise BudgetExceeded("naive enumeration capped at 2^8 elements")
    perms = permutation_matrices(G, d)
    acts = [perms[g] for g in G.generators]
    elements = list(product(range(q), repeat=m))

    def orbit(v):
        seen, todo = {v}, [v]
        while todo:
            w = todo.pop()
            for M in acts:
                u = tuple(int(x) % q for x in M @ np.array(w))
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        return seen

    def close(S, v):
        # S is already invariant, so adding the Z-span of the orbit of v suffices
        T = set(S)
        for u in orbit(v):
            if u in T:
                continue
            T = {tuple((a + k * b) % q for a, b in zip(t, u)) for t in T for k in range(q)}
        return frozenset(T)

    zero = tuple([0] * m)
    found = {frozenset([zero])}
    frontier = list(found)
    while frontier:
        nxt = []
        for S in frontier:
            done = set(S)
            for v in elements:
                if v not in done:
                    T = close(S, v)
                    done.add(v)
                    if T not in found:
                        found.add(T)
                        nxt.append(T)
        frontier = nxt
    return found


def lattice_elements(H: tuple, p: int, N: int) -> frozenset:
    """Image of the lattice H in (Z/p^N)^m, as a set of tuples."""
    q = p**N
    m = len(H)
    ranges = [range(q // H[j][j]) for j in range(m)]
    out = set()
    for c in product(*ranges):
        v = [0] * m
        for j, x in enumerate(c):
            if x:
                v = [a + x * b for a, b in zip(v, H[j])]
        out.add(tuple(a % q for a in v))
    return frozenset(out)


# ---------------------------------------------------------------- freeness


def quotient_module(G: PGroup, d: int, H: tuple, N: int):
    """L/M as a finite module."""
    perms = permutation_matrices(G, d)
    ctx = default_context(G, N)
    return quotient_lattice(G, ctx, [perms[g] for g in G.generators], _basis_matrix(H))


def submodule_as_module(G: PGroup, d: int, H: tuple, N: int):
    """M itself as a torsion-free module (free over Z_p of rank d|G|)."""
    perms = permutation_matrices(G, d)
    ctx = PadicContext(G.p, 2 * N + G.log_order + 3)
    return sublattice_module(G, ctx, [perms[g] for g in G.generators], _basis_matrix(H))


def is_free_by_ct(G, d, H, N) -> bool:
    return is_ct_finite(quotient_module(G, d, H, N)).is_ct


def is_free_by_basis(G, d, H, N) -> bool:
    return free_basis_certificate(submodule_as_module(G, d, H, N), require_ct=False) is not None


# ------------------------------------------------------------------- series


@dataclass
class RationalForm:
    numerator: tuple      # Fractions, coefficients of t^0, t^1, ...
    denominator: tuple    # starts with 1

    def coefficients(self, count: int) -> list:
        """Power-series expansion of numerator / denominator."""
        out = []
        for k in range(count):
            a = self.numerator[k] if k < len(self.numerator) else Fraction(0)
            for i in range(1, min(k, len(self.denominator) - 1) + 1):
                a -= self.denominator[i] * out[k - i]
            out.append(a)
        return out

    def __str__(self):
        return f"({_poly(self.numerator)}) / ({_poly(self.denominator)})"


def _poly(cs) -> str:
    terms = []
    for k, c in enumerate(cs):
        if c == 0:
            continue
        mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
        if k == 0:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append(f"-{mono}")
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


@dataclass
class ZetaSeries:
    p: int
    group: str
    d: int
    coefficients: tuple
    fitted: RationalForm | None = None
    basis_counts: tuple | None = field(default=None, repr=False)

    @property
    def window(self) -> int:
        return len(self.coefficients) - 1


def zeta_coefficients(G: PGroup, d: int, N: int, budget: int | None = None,
                      cross_check: bool = False) -> ZetaSeries:
    """c_n for n <= N: submodules of index p^n whose quotient is CT.

    With ``cross_check`` every candidate is also tested by the free-basis
    search and the two verdicts must agree; the basis-search counts are kept.
    """
    if N < 1:
        raise ValueError("window N must be at least 1")
    counts = [0] * (N + 1)
    bcounts = [0] * (N + 1)
    for n, H in invariant_submodules(G, d, N, max_level=N, budget=budget):
        ct = is_free_by_ct(G, d, H, N)
        counts[n] += ct
        if cross_check:
            fb = is_free_by_basis(G, d, H, N)
            if fb != ct:
                raise InternalContradiction(f"freeness verdicts disagree on {H}")
            bcounts[n] += fb
    return ZetaSeries(G.p, G.name, d, tuple(counts), None, tuple(bcounts) if cross_check else None)


def berlekamp_massey(seq) -> list:
    """Shortest connection polynomial [1, c_1, ..., c_L] over Q for ``seq``."""
    s = [Fraction(x) for x in seq]
    C, B = [Fraction(1)], [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(s)):
        disc = s[n] + sum(C[i] * s[n - i] for i in range(1, L + 1))
        if disc == 0:
            m += 1
            continue
        coef = disc / b
        T = list(C)
        shifted = [Fraction(0)] * m + [coef * x for x in B]
        C = [(C[i] if i < len(C) else 0) - (shifted[i] if i < len(shifted) else 0)
             for i in range(max(len(C), len(shifted)))]
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, disc, 1
        else:
            m += 1
    C = C[:L + 1] + [Fraction(0)] * max(0, L + 1 - len(C))
    return C


def fit_rational(series: ZetaSeries, max_degree: int = 4) -> ZetaSeries:
    """Attach the minimal recurrence as numerator/denominator in t = p^-s.

    Left unfitted when the minimal recurrence has order above ``max_degree``.
    """
    c = list(series.coefficients)
    C = berlekamp_massey(c)
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    if len(C) - 1 > max_degree:
        return ZetaSeries(series.p, series.group, series.d, series.coefficients, None, series.basis_counts)
    num = []
    for k in range(len(c)):
        num.append(sum(C[i] * c[k - i] for i in range(0, min(k, len(C) - 1) + 1)))
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    form = RationalForm(tuple(num), tuple(C))
    if form.coefficients(len(c)) != [Fraction(x) for x in c]:
        return ZetaSeries(series.p, series.group, series.d, series.coefficients, None, series.basis_counts)
    return ZetaSeries(series.p, series.group, series.d, series.coefficients, form, series.basis_counts)


def predict_next(series: ZetaSeries) -> Fraction:
    """Next coefficient from the fitted recurrence."""
    if series.fitted is None:
        raise ValueError("series has no fitted form")
    C = series.fitted.denominator
    c = series.coefficients
    k = len(c)
    return -sum(C[i] * c[k - i] for i in range(1, len(C)))


# -------------------------------------------------------------------- cache

CACHE_FORMAT = 1


def write_cache(path, series: ZetaSeries) -> None:
    lines = [f"format: {CACHE_FORMAT}", f"p: {series.p}", f"group: {series.group}",
             f"d: {series.d}", f"N: {series.window}", "n,c_n"]
    lines += [f"{n},{c}" for n, c in enumerate(series.coefficients)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_cache(path) -> ZetaSeries:
    text = Path(path).read_text().splitlines()
    head = {}
    rows = []
    for i, line in enumerate(text, 1):
        if ":" in line and not rows:
            k, v = line.split(":", 1)
            head[k.strip()] = v.strip()
        elif line.strip() == "n,c_n" or not line.strip():
            continue
        else:
            n, cn = line.split(",")
            if int(n) != len(rows):
                raise ValueError(f"line {i}: coefficient index {n} out of order")
            rows.append(int(cn))
    if head.get("format") != str(CACHE_FORMAT):
        raise ValueError("unsupported cache format")
    if int(head["N"]) != len(rows) - 1:
        raise ValueError("cache header window does not match coefficient lines")
    return ZetaSeries(int(head["p"]), head["group"], int(head["d"]), tuple(rows))


def cached_coefficients(G: PGroup, d: int, N: int, path=None, budget: int | None = None) -> ZetaSeries:
    """zeta_coefficients, resuming from a cache file when it covers the window."""
    if path is not None and Path(path).exists():
        s = read_cache(path)
        if (s.p, s.group, s.d) == (G.p, G.name, d) and s.window >= N:
            return ZetaSeries(s.p, s.group, s.d, s.coefficients[:N + 1])
    s = zeta_coefficients(G, d, N, budget)
    if path is not None:
        write_cache(path, s)
    return s
