"""Tate cohomology in degrees -2..2 and cohomological-triviality tests.

Four routes compute the same groups:

``shift``
    Degrees 0 and -1 from their definitions, degree 1 from crossed
    homomorphisms on the generators, and degrees 2 and -2 by one dimension
    shift along ``A >-> Z[S] (x) A ->> J (x) A`` or
    ``I (x) A >-> Z[S] (x) A ->> A`` (induced middle terms).  The default.
``ladder``
    Dimension shifting all the way to degrees 0 and -1; matrices grow like
    |S|^2 dim A in degree 2.
``bar``
    Inhomogeneous cochains for degrees 1 and 2 and bar chains for H_1.
    Large (|S|^3 dim A rows in degree 2); used as an oracle on small cases.
``periodic``
    Cyclic S only: the 2-periodic resolution with the norm and g - 1.

All quotients are computed over Z_p with :func:`arith.subquotient`, so free
parts of the module are handled exactly rather than modulo p^e.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import arith
from .arith import CokernelStructure, PadicContext, lattice_kernel, subquotient
from .group import PGroup, Subgroup, subgroups
from .module import FgModule, restrict

DEGREES = (-2, -1, 0, 1, 2)
MAX_RETRIES = 3
BAR_DEGREE2_CAP = 16


class CohomologyError(ArithmeticError):
    pass


class PrecisionExhausted(CohomologyError):
    pass


class UnsupportedDegree(ValueError):
    pass


@dataclass(frozen=True)
class CohomologyGroup:
    """Finite abelian p-group as cyclic orders p^a (empty tuple: zero group)."""

    exponents: tuple
    degree: int
    subgroup: tuple
    p: int

    @property
    def orders(self) -> list:
        return [self.p**a for a in self.exponents]

    @property
    def size(self) -> int:
        out = 1
        for o in self.orders:
            out *= o
        return out

    @property
    def is_zero(self) -> bool:
        return not self.exponents

    @property
    def d_R(self) -> int:
        return len(self.exponents)

    def __str__(self):
        return " x ".join(f"Z/{o}" for o in self.orders) or "0"


# ------------------------------------------------------------------ internals


@dataclass
class _Rep:
    """A module over a concrete group with a matrix for every element."""

    ctx: PadicContext
    group: PGroup
    row_exps: list
    mats: list

    @property
    def dim(self) -> int:
        return len(self.row_exps)

    def moduli(self):
        q = self.ctx.modulus
        return np.array([q if u is None else self.ctx.p**u for u in self.row_exps],
                        dtype=self.ctx.dtype).reshape(-1, 1)

    def relations(self) -> np.ndarray:
        tors = [i for i, u in enumerate(self.row_exps) if u is not None]
        R = self.ctx.zeros(self.dim, len(tors))
        for c, i in enumerate(tors):
            R[i, c] = self.ctx.p ** self.row_exps[i]
        return R

    def norm(self) -> np.ndarray:
        total = self.ctx.zeros(self.dim, self.dim)
        for M in self.mats:
            total = np.mod(total + M, self.ctx.modulus)
        return total


def _rep(A: FgModule) -> _Rep:
    return _Rep(A.ctx, A.group, A.row_exps, list(A.element_matrices))


def _kron(ctx, a, b):
    return np.mod(np.kron(a.astype(object), b.astype(object)), ctx.modulus).astype(ctx.dtype)


def _j_matrices(G: PGroup) -> list:
    """Action on J = Z[S]/Z.N, basis: classes of s != 1."""
    others = [s for s in G.elements if s != G.identity]
    pos = {s: i for i, s in enumerate(others)}
    out = []
    for g in G.elements:
        M = np.zeros((len(others), len(others)), dtype=np.int64)
        for s in others:
            t = G.mul(g, s)
            if t == G.identity:
                M[:, pos[s]] -= 1
            else:
                M[pos[t], pos[s]] += 1
        out.append(M)
    return out


def _i_matrices(G: PGroup) -> list:
    """Action on the augmentation ideal, basis s - 1 (s != 1)."""
    others = [s for s in G.elements if s != G.identity]
    pos = {s: i for i, s in enumerate(others)}
    out = []
    for g in G.elements:
        M = np.zeros((len(others), len(others)), dtype=np.int64)
        for s in others:
            t = G.mul(g, s)
            if t != G.identity:
                M[pos[t], pos[s]] += 1
            if g != G.identity:
                M[pos[g], pos[s]] -= 1
        out.append(M)
    return out


def _tensor(X: _Rep, left: list) -> _Rep:
    k = left[0].shape[0]
    mats = [_kron(X.ctx, left[g], X.mats[g]) for g in X.group.elements]
    return _Rep(X.ctx, X.group, list(X.row_exps) * k, mats)


def _quot(X: _Rep, F, row_exps, Im) -> CokernelStructure:
    """ker(F) / span(Im) at the precision the kernel is actually known to."""
    K, loss = lattice_kernel(F, row_exps, X.ctx, with_loss=True)
    if X.ctx.e - loss < 1:
        raise arith.PrecisionError("kernel pivots exhaust the working precision")
    return subquotient(K, Im, X.ctx.with_precision(X.ctx.e - loss))


def _h0(X: _Rep) -> CokernelStructure:
    G = X.group
    if X.dim == 0:
        return CokernelStructure((), 0, X.ctx.p)
    Im = np.concatenate([X.norm(), X.relations()], axis=1)
    if not G.generators:
        return subquotient(X.ctx.eye(X.dim), Im, X.ctx)
    I = X.ctx.eye(X.dim)
    F = np.concatenate([np.mod(X.mats[g] - I, X.ctx.modulus) for g in G.generators], axis=0)
    return _quot(X, F, list(X.row_exps) * len(G.generators), Im)


def _hm1(X: _Rep) -> CokernelStructure:
    G = X.group
    if X.dim == 0:
        return CokernelStructure((), 0, X.ctx.p)
    I = X.ctx.eye(X.dim)
    cols = [np.mod(X.mats[g] - I, X.ctx.modulus) for g in G.generators] + [X.relations()]
    return _quot(X, X.norm(), X.row_exps, np.concatenate(cols, axis=1))


def _h1(X: _Rep) -> CokernelStructure:
    """Crossed homomorphisms, given by their values on the generators, modulo principal ones."""
    G = X.group
    gens = G.generators
    k, d = len(gens), X.dim
    if k == 0 or d == 0:
        return CokernelStructure((), 0, X.ctx.p)
    ctx, q = X.ctx, X.ctx.modulus
    # F[x] expresses f(x) linearly in the unknowns (f(g_1), ..., f(g_k))
    F = [None] * G.order
    F[G.identity] = ctx.zeros(d, k * d)
    E = []
    for i in range(k):
        Ei = ctx.zeros(d, k * d)
        Ei[:, i * d:(i + 1) * d] = ctx.eye(d)
        E.append(Ei)
    frontier = [G.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for i, g in enumerate(gens):
                y = G.mul(g, x)
                if F[y] is None:
                    F[y] = np.mod(E[i] + ctx.matmul(X.mats[g], F[x]), q)
                    nxt.append(y)
        frontier = nxt
    rows = [np.mod(F[G.mul(g, x)] - E[i] - ctx.matmul(X.mats[g], F[x]), q)
            for x in G.elements for i, g in enumerate(gens)]
    C = np.concatenate(rows, axis=0)
    I = ctx.eye(d)
    B = np.concatenate([np.mod(X.mats[g] - I, q) for g in gens], axis=0)
    rel = np.kron(np.eye(k, dtype=np.int64), X.relations())
    return _quot(X, C, list(X.row_exps) * (G.order * k), np.concatenate([B, ctx.array(rel)], axis=1))


def _shift(X: _Rep, n: int) -> CokernelStructure:
    if n == 0:
        return _h0(X)
    if n == -1:
        return _hm1(X)
    if X.group.order == 1:
        return CokernelStructure((), 0, X.ctx.p)
    if n == 1:
        return _h1(X)
    if n > 1:
        return _shift(_tensor(X, _j_matrices(X.group)), n - 1)
    return _shift(_tensor(X, _i_matrices(X.group)), n + 1)


def _ladder(X: _Rep, n: int) -> CokernelStructure:
    """Dimension shifting all the way down to degrees 0 and -1."""
    if n in (0, -1) or X.group.order == 1:
        return _shift(X, n)
    if n > 0:
        return _ladder(_tensor(X, _j_matrices(X.group)), n - 1)
    return _ladder(_tensor(X, _i_matrices(X.group)), n + 1)


def _periodic(X: _Rep, n: int) -> CokernelStructure:
    G = X.group
    if G.order > 1 and not G.is_cyclic():
        raise ValueError("periodic route needs a cyclic subgroup")
    if G.order == 1 or X.dim == 0:
        return CokernelStructure((), 0, X.ctx.p)
    g = next(x for x in G.elements if G.element_order(x) == G.order)
    I = X.ctx.eye(X.dim)
    D = np.mod(X.mats[g] - I, X.ctx.modulus)
    Nm = X.norm()
    R = X.relations()
    if n % 2 == 0:
        return _quot(X, D, X.row_exps, np.concatenate([Nm, R], axis=1))
    return _quot(X, Nm, X.row_exps, np.concatenate([D, R], axis=1))


def _bar(X: _Rep, n: int) -> CokernelStructure:
    G = X.group
    if n in (0, -1):
        return _h0(X) if n == 0 else _hm1(X)
    if G.order == 1 or X.dim == 0:
        return CokernelStructure((), 0, X.ctx.p)
    if n == 2 and G.order > BAR_DEGREE2_CAP:
        raise ValueError(f"bar complex in degree 2 capped at order {BAR_DEGREE2_CAP}")
    ctx = X.ctx
    m = G.order
    d = X.dim
    I = ctx.eye(d)
    els = list(G.elements)
    q = ctx.modulus
    if n == 1:
        # C^0 -> C^1 -> C^2
        d0 = np.concatenate([np.mod(X.mats[s] - I, q) for s in els], axis=0)
        d1 = np.zeros((m * m * d, m * d), dtype=object)
        for s in els:
            for t in els:
                r = (s * m + t) * d
                d1[r:r + d, t * d:(t + 1) * d] += X.mats[s]
                st = G.mul(s, t)
                d1[r:r + d, st * d:(st + 1) * d] -= I
                d1[r:r + d, s * d:(s + 1) * d] += I
        rel = np.kron(np.eye(m, dtype=np.int64), X.relations())
        return _quot(X, ctx.array(d1), list(X.row_exps) * (m * m), np.concatenate([d0, ctx.array(rel)], axis=1))
    if n == 2:
        d1 = np.zeros((m * m * d, m * d), dtype=object)
        for s in els:
            for t in els:
                r = (s * m + t) * d
                d1[r:r + d, t * d:(t + 1) * d] += X.mats[s]
                st = G.mul(s, t)
                d1[r:r + d, st * d:(st + 1) * d] -= I
                d1[r:r + d, s * d:(s + 1) * d] += I
        d2 = np.zeros((m**3 * d, m * m * d), dtype=object)
        for s in els:
            for t in els:
                st = G.mul(s, t)
                for u in els:
                    tu = G.mul(t, u)
                    r = ((s * m + t) * m + u) * d
                    d2[r:r + d, (t * m + u) * d:(t * m + u + 1) * d] += X.mats[s]
                    d2[r:r + d, (st * m + u) * d:(st * m + u + 1) * d] -= I
                    d2[r:r + d, (s * m + tu) * d:(s * m + tu + 1) * d] += I
                    d2[r:r + d, (s * m + t) * d:(s * m + t + 1) * d] -= I
        rel = np.kron(np.eye(m * m, dtype=np.int64), X.relations())
        return _quot(X, ctx.array(d2), list(X.row_exps) * (m**3),
                     np.concatenate([ctx.array(d1), ctx.array(rel)], axis=1))
    if n == -2:
        # H_1 from bar chains: d2(a[s|t]) = s^-1 a [t] - a[st] + a[s],  d1(a[s]) = s^-1 a - a
        d1 = np.concatenate([np.mod(X.mats[G.inv(s)] - I, q) for s in els], axis=1)
        d2 = np.zeros((m * d, m * m * d), dtype=object)
        for s in els:
            si = X.mats[G.inv(s)]
            for t in els:
                c = (s * m + t) * d
                d2[t * d:(t + 1) * d, c:c + d] += si
                st = G.mul(s, t)
                d2[st * d:(st + 1) * d, c:c + d] -= I
                d2[s * d:(s + 1) * d, c:c + d] += I
        rel = np.kron(np.eye(m, dtype=np.int64), X.relations())
        return _quot(X, ctx.array(d1), list(X.row_exps), np.concatenate([ctx.array(d2), ctx.array(rel)], axis=1))
    raise UnsupportedDegree(n)


_ROUTES = {"shift": _shift, "ladder": _ladder, "bar": _bar, "periodic": _periodic}


def required_precision(A: FgModule) -> int:
    """Precision with room for two rounds of pivot losses."""
    top = max(A.torsion, default=0)
    return 2 * (top + A.group.log_order) + 3


def working_precision(A: FgModule) -> int:
    return max(A.ctx.e, required_precision(A))


def _once(A: FgModule, S: Subgroup, n: int, method: str) -> CokernelStructure:
    if A.ctx.e < working_precision(A):
        A = A.at_precision(working_precision(A))
    B = restrict(A, S) if S.order < A.group.order else A
    try:
        return _ROUTES[method](_rep(B), n)
    except arith.PrecisionError as exc:
        raise PrecisionExhausted(str(exc)) from None


def _stable(A: FgModule, S: Subgroup, n: int, method: str) -> CokernelStructure:
    """Recompute one digit apart until two answers agree.

    Integral data lifts to any precision; otherwise the module's own
    precision is the ceiling and the comparison is between e - 1 and e.
    """
    wp = working_precision(A)
    if A.lifts_to(wp + MAX_RETRIES + 1):
        for extra in range(MAX_RETRIES + 1):
            lo = _once(A.at_precision(wp + extra), S, n, method)
            hi = _once(A.at_precision(wp + extra + 1), S, n, method)
            if lo == hi and not lo.precision_exhausted:
                return lo
        raise PrecisionExhausted(f"degree {n} not stable up to e={wp + MAX_RETRIES + 1}")
    need = required_precision(A) + 1
    if A.ctx.e < need:
        raise PrecisionExhausted(f"module given at e={A.ctx.e} does not lift; need e >= {need}")
    lo = _once(A.at_precision(A.ctx.e - 1), S, n, method)
    hi = _once(A, S, n, method)
    if lo != hi or lo.precision_exhausted:
        raise PrecisionExhausted(f"degree {n} differs between e={A.ctx.e - 1} and e={A.ctx.e}")
    return hi


def tate(A: FgModule, S: Subgroup | None = None, n: int = 0, method: str = "shift") -> CohomologyGroup:
    """The Tate cohomology group of A restricted to S in degree n (-2 <= n <= 2).

    Modules with a free part are recomputed one digit higher and must agree;
    on disagreement the precision is raised a few times before giving up.
    Finite modules are exact at any admissible precision.
    """
    if n not in DEGREES:
        raise UnsupportedDegree(f"degree {n} outside [-2, 2]")
    if method not in _ROUTES:
        raise ValueError(f"unknown method {method!r}")
    S = S if S is not None else A.group.whole
    if A.is_finite:
        res = _once(A, S, n, method)
    else:
        res = _stable(A, S, n, method)
    if res.precision_exhausted:
        raise PrecisionExhausted(f"degree {n}: infinite part at precision e={A.ctx.e}")
    top = S.parent.log_order if S.order == S.parent.order else _vp_order(S)
    if any(a > top for a in res.exponents):
        raise CohomologyError(f"cohomology not annihilated by |S| (exponents {res.exponents})")
    return CohomologyGroup(tuple(res.exponents), n, S.elements, A.p)


def _vp_order(S: Subgroup) -> int:
    n, m = S.order, 0
    while n > 1:
        n //= S.parent.p
        m += 1
    return m


def homology_h1(A: FgModule, method: str = "shift") -> CohomologyGroup:
    """H_1(G, A), i.e. Tate cohomology in degree -2."""
    return tate(A, A.group.whole, -2, method)


# ------------------------------------------------------------------ CT tests


@dataclass(frozen=True)
class CtCertificate:
    verdict: str
    witness: tuple | None
    method: str
    module: FgModule = None

    @property
    def is_ct(self) -> bool:
        return self.verdict == "CT"

    def verify(self) -> bool:
        """A not-CT witness must still give nonzero cohomology."""
        if self.is_ct:
            return True
        S, n = self.witness
        return not tate(self.module, S, n).is_zero


def is_ct_finite(A: FgModule) -> CtCertificate:
    """CT test for finite modules: vanishing in degree 0 suffices."""
    if not A.is_finite:
        raise ValueError("is_ct_finite needs a finite module")
    G = A.group.whole
    if tate(A, G, 0).is_zero:
        return CtCertificate("CT", None, "gaschutz-uchida", A)
    return CtCertificate("not-CT", (G, 0), "gaschutz-uchida", A)


def is_ct(A: FgModule) -> CtCertificate:
    """CT test for any f.g. module: vanishing in two consecutive degrees."""
    G = A.group.whole
    for n in (0, 1):
        if not tate(A, G, n).is_zero:
            return CtCertificate("not-CT", (G, n), "nakayama", A)
    return CtCertificate("CT", None, "nakayama", A)


def is_free_fpG(V: FgModule) -> bool:
    """Is a module killed by p free over F_p G?"""
    if not V.is_finite or any(n != 1 for n in V.torsion):
        raise ValueError("is_free_fpG needs a module killed by p")
    free = tate(V, V.group.whole, 0).is_zero
    if free and V.dim % V.group.order:
        raise CohomologyError("free over F_pG but dimension not divisible by |G|")
    return free


@dataclass
class ScanTable:
    cells: dict

    @property
    def all_zero(self) -> bool:
        return all(not v for v in self.cells.values())

    def nonzero(self) -> list:
        return [(S, n) for (S, n), v in self.cells.items() if v]

    def rows(self):
        for (S, n), v in self.cells.items():
            yield S, n, v


def ct_definition_scan(A: FgModule, degrees=DEGREES, subs=None, method: str = "shift",
                       stop_early: bool = False) -> ScanTable:
    """Cohomology exponents over every subgroup and degree.

    Cells are keyed by (Subgroup, degree); values are exponent tuples.
    """
    subs = subgroups(A.group) if subs is None else subs
    cells = {}
    for S in subs:
        for n in degrees:
            if n not in DEGREES:
                raise UnsupportedDegree(f"degree {n} outside [-2, 2]")
            cells[(S, n)] = tate(A, S, n, method).exponents
            if stop_early and cells[(S, n)]:
                return ScanTable(cells)
    return ScanTable(cells)
