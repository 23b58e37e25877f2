"""Jordan types of modules over F_p[C_{p^n}] = F_p[X]/(X^{p^n}), X = g - 1."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import arith
from .module import FgModule


class NotNilpotent(ValueError):
    pass


@dataclass(frozen=True)
class JordanType:
    parts: tuple  # nonincreasing
    p: int
    n: int = 1

    @property
    def dim(self) -> int:
        return sum(self.parts)

    @property
    def is_free(self) -> bool:
        return all(r == self.p**self.n for r in self.parts)

    def joined(self) -> str:
        return "+".join(str(r) for r in self.parts)


def _matpow_ranks(N: np.ndarray, p: int, upto: int) -> list:
    """[rank N^0, rank N^1, ..., rank N^upto] over F_p."""
    d = N.shape[0]
    out = [d]
    P = np.eye(d, dtype=np.int64)
    for _ in range(upto):
        P = np.mod(P @ N, p)
        out.append(arith.rank_fp(P, p) if d else 0)
    return out


def jordan_type(N, p: int, n: int = 1) -> JordanType:
    """Partition of the nilpotent operator N = g - 1 from the ranks of its powers."""
    N = np.mod(np.asarray(N, dtype=np.int64), p)
    top = p**n
    rk = _matpow_ranks(N, p, top + 1)
    if rk[top] != 0:
        raise NotNilpotent(f"(g-1)^{top} is not zero")
    parts = []
    for r in range(top, 0, -1):
        mult = rk[r - 1] - 2 * rk[r] + rk[r + 1]
        parts.extend([r] * mult)
    if sum(parts) != N.shape[0]:
        raise arith.PrecisionError("rank sequence inconsistent with dimension")
    return JordanType(tuple(parts), p, n)


def jordan_type_of_module(V: FgModule) -> JordanType:
    """Jordan type of an F_p-module over a cyclic group (killed by p)."""
    G = V.group
    if not G.is_cyclic() or G.order == 1:
        raise ValueError("Jordan types need a nontrivial cyclic group")
    if any(t != 1 for t in V.torsion) or V.free_rank:
        raise ValueError("module must be killed by p")
    g = next(x for x in G.elements if G.element_order(x) == G.order)
    N = V.matrix_of(g) - np.eye(V.dim, dtype=np.int64)
    return jordan_type(N, V.p, G.log_order)


def block(r: int, p: int) -> np.ndarray:
    """Action of a generator on V_r: the unipotent Jordan block I + J_r."""
    B = np.eye(r, dtype=np.int64)
    for i in range(r - 1):
        B[i, i + 1] = 1
    return B


def action_of(parts, p: int) -> np.ndarray:
    d = sum(parts)
    g = np.zeros((d, d), dtype=np.int64)
    k = 0
    for r in parts:
        g[k:k + r, k:k + r] = block(r, p)
        k += r
    return g


@lru_cache(maxsize=None)
def tensor_decompose(r: int, s: int, p: int, n: int = 1) -> JordanType:
    """Jordan type of g (x) g on V_r (x) V_s."""
    top = p**n
    if not (1 <= r <= top and 1 <= s <= top):
        raise ValueError(f"parts must lie in [1, {top}]")
    g = np.kron(block(r, p), block(s, p))
    return jordan_type(g - np.eye(r * s, dtype=np.int64), p, n)


def _inverse_mod_p(g: np.ndarray, p: int) -> np.ndarray:
    return arith.inverse(g, arith.PadicContext(p, 1)).astype(np.int64)


def hom_decompose(parts, p: int, n: int = 1) -> JordanType:
    """Jordan type of Hom(V, V) under f -> g f g^-1, computed directly."""
    g = action_of(parts, p)
    d = g.shape[0]
    if d == 0:
        return JordanType((), p, n)
    # vec(g X g^-1) = (g^-T kron g) vec(X) for column-major vec
    H = np.mod(np.kron(_inverse_mod_p(g, p).T, g), p)
    return jordan_type(H - np.eye(d * d, dtype=np.int64), p, n)


def hom_from_tensors(parts, p: int, n: int = 1) -> JordanType:
    """Hom(V, V) assembled from pairwise tensor products, using V_r* = V_r."""
    out = []
    for a in parts:
        for b in parts:
            out.extend(tensor_decompose(a, b, p, n).parts)
    return JordanType(tuple(sorted(out, reverse=True)), p, n)


def dual_type(parts, p: int, n: int = 1) -> JordanType:
    """Jordan type of the contragredient action g^-T."""
    g = action_of(parts, p)
    gi = _inverse_mod_p(g, p).T
    return jordan_type(gi - np.eye(g.shape[0], dtype=np.int64), p, n)


def verify_lemma44(parts, p: int) -> bool:
    """For C_p: Hom(V,V) free implies V free, and p | r_i r_j for all pairs."""
    H = hom_decompose(parts, p, 1)
    if not H.is_free:
        return True
    divis = all((a * b) % p == 0 for a in parts for b in parts)
    return divis and JordanType(tuple(parts), p, 1).is_free


def partitions(d: int, largest: int):
    """Partitions of d into parts <= largest, nonincreasing."""
    if d == 0:
        yield ()
        return
    for k in range(min(d, largest), 0, -1):
        for rest in partitions(d - k, k):
            yield (k,) + rest


@dataclass
class SweepReport:
    p: int
    checked: int
    hom_free: int
    failures: list


def sweep_lemma44(p: int, max_dim: int = 12) -> SweepReport:
    """Every F_p[C_p]-module of dimension <= max_dim, up to isomorphism."""
    checked = hom_free = 0
    fails = []
    for d in range(1, max_dim + 1):
        for parts in partitions(d, p):
            checked += 1
            if hom_decompose(parts, p).is_free:
                hom_free += 1
            if not verify_lemma44(parts, p):
                fails.append(parts)
    return SweepReport(p, checked, hom_free, fails)


def tensor_rows(p: int, n: int = 1, rs=None):
    top = p**n
    rs = rs or range(1, top + 1)
    for r in rs:
        for s in rs:
            yield p, n, r, s, tensor_decompose(r, s, p, n)


def tensor_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "n", "r", "s", "parts"])
    for p, n, r, s, jt in rows:
        w.writerow([p, n, r, s, jt.joined()])
    return buf.getvalue()
