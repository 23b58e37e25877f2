"""Finite p-groups as validated Cayley tables.

Orders stay small (at most 64), so every question about a group is answered by
scanning its multiplication table.  Element indices are plain ints and the
table is a numpy array with ``table[a, b] = a * b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .arith import is_prime

MAX_SUBGROUP_ORDER = 64


class GroupError(ValueError):
    pass


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NoInverse(GroupError):
    pass


class NotPPower(GroupError):
    pass


class UnknownName(GroupError):
    pass


class TooLarge(GroupError):
    pass


class NotNormal(GroupError):
    pass


class NotClosed(GroupError):
    pass


def prime_power(n: int):
    """Return (p, m) with n = p^m, or None.  n = 1 gives (None, 0)."""
    if n == 1:
        return None, 0
    p = 2
    while n % p:
        p += 1
    m = 0
    while n % p == 0:
        n //= p
        m += 1
    return (p, m) if n == 1 else None


@dataclass(eq=False)
class PGroup:
    """A finite p-group.  Build through :func:`from_cayley_table` or :func:`catalog`."""

    table: np.ndarray
    p: int
    identity: int
    generators: tuple
    name: str = ""
    _inv: np.ndarray = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def elements(self) -> range:
        return range(self.order)

    @property
    def log_order(self) -> int:
        n, m = self.order, 0
        while n > 1:
            n //= self.p
            m += 1
        return m

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self._inv[a])

    def power(self, a: int, k: int) -> int:
        x = self.identity
        for _ in range(k):
            x = self.mul(x, a)
        return x

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def conj(self, g: int, x: int) -> int:
        """g x g^-1"""
        return self.mul(self.mul(g, x), self.inv(g))

    def commutator(self, a: int, b: int) -> int:
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def is_cyclic(self) -> bool:
        return any(self.element_order(g) == self.order for g in self.elements)

    def closure(self, gens) -> frozenset:
        """Subgroup generated by ``gens``."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = [int(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    def words(self) -> list:
        """For each element, a word in the generators (list of generator positions)."""
        w = {self.identity: ()}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for i, g in enumerate(self.generators):
                    y = int(self.table[g, x])
                    if y not in w:
                        w[y] = (i,) + w[x]
                        nxt.append(y)
            frontier = nxt
        return [w[x] for x in self.elements]

    def __repr__(self):
        return f"PGroup({self.name or 'order ' + str(self.order)}, p={self.p})"

    @cached_property
    def whole(self) -> "Subgroup":
        return Subgroup(self, tuple(self.elements))

    @cached_property
    def trivial(self) -> "Subgroup":
        return Subgroup(self, (self.identity,))


def _greedy_generators(table: np.ndarray, identity: int) -> tuple:
    n = table.shape[0]
    tmp = PGroup(table, 0, identity, ())
    orders = sorted(range(n), key=lambda g: (-tmp.element_order(g), g))
    gens = []
    span = frozenset([identity])
    for g in orders:
        if len(span) == n:
            break
        if g not in span:
            gens.append(g)
            span = tmp.closure(gens)
    return tuple(gens)


def from_cayley_table(table, generators=None, name: str = "") -> PGroup:
    """Validate a Cayley table and wrap it as a :class:`PGroup`.

    Raises the :class:`GroupError` subclass naming the first violated axiom.
    """
    T = np.array(table, dtype=np.int64)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise GroupError("Cayley table must be a nonempty square")
    n = T.shape[0]
    if T.min() < 0 or T.max() >= n:
        raise GroupError("table entries must be element indices in [0, order)")
    idx = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(T[e], idx) and np.array_equal(T[:, e], idx)]
    if not ids:
        raise NoIdentity("no two-sided identity element")
    identity = ids[0]
    inv = np.full(n, -1)
    for a in range(n):
        hits = np.nonzero((T[a] == identity) & (T[:, a] == identity))[0]
        if len(hits) == 0:
            raise NoInverse(f"element {a} has no two-sided inverse")
        inv[a] = hits[0]
    if not np.array_equal(T[T], T[:, T]):
        a, b, c = (int(v[0]) for v in np.nonzero(T[T] != T[:, T]))
        raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")
    pp = prime_power(n)
    if pp is None:
        raise NotPPower(f"order {n} is not a prime power")
    p = pp[0] if pp[0] is not None else 2
    if generators is None:
        generators = _greedy_generators(T, identity)
    G = PGroup(T, p, identity, tuple(int(g) for g in generators), name, inv)
    if len(G.closure(G.generators)) != n:
        raise GroupError("generators do not generate the group")
    return G


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: PGroup
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(int(x) for x in self.elements)))

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def __contains__(self, x) -> bool:
        return int(x) in self.element_set

    def __eq__(self, other) -> bool:
        return isinstance(other, Subgroup) and other.parent is self.parent and other.elements == self.elements

    def __hash__(self):
        return hash(self.elements)

    def __le__(self, other: "Subgroup") -> bool:
        return self.element_set <= other.element_set

    @cached_property
    def is_normal(self) -> bool:
        G = self.parent
        return all(G.conj(g, x) in self.element_set for g in G.generators for x in self.elements)

    @cached_property
    def is_central(self) -> bool:
        G = self.parent
        return all(G.mul(g, x) == G.mul(x, g) for g in G.generators for x in self.elements)

    @cached_property
    def generators(self) -> tuple:
        return _greedy_generators_in(self.parent, self.elements)

    def as_group(self) -> tuple:
        """(PGroup on indices 0..|S|-1, embedding list new index -> parent element)."""
        G = self.parent
        emb = [G.identity] + [x for x in self.elements if x != G.identity]
        pos = {x: i for i, x in enumerate(emb)}
        T = np.array([[pos[G.mul(a, b)] for b in emb] for a in emb], dtype=np.int64)
        gens = tuple(pos[g] for g in self.generators)
        H = from_cayley_table(T, gens, name=f"subgroup of order {self.order}")
        if H.order == 1:
            H.p = G.p
        return H, emb

    def __repr__(self):
        return f"Subgroup(order={self.order}, elements={list(self.elements)})"


def _greedy_generators_in(G: PGroup, elements) -> tuple:
    elems = sorted(elements, key=lambda g: (-G.element_order(g), g))
    gens, span = [], frozenset([G.identity])
    for g in elems:
        if len(span) == len(elements):
            break
        if g not in span:
            gens.append(g)
            span = G.closure(gens)
    return tuple(gens)


def subgroup(G: PGroup, elements) -> Subgroup:
    """Checked subgroup from an element set."""
    s = frozenset(int(x) for x in elements)
    if G.identity not in s or any(G.mul(a, b) not in s for a in s for b in s):
        raise NotClosed("element set is not closed under the product")
    if G.order % len(s):
        raise NotClosed("size does not divide the group order")
    return Subgroup(G, tuple(s))


def subgroups(G: PGroup) -> list:
    """Every subgroup exactly once, sorted by (size, elements).

    Joins of subgroups with cyclic subgroups, starting from the cyclic ones.
    """
    if G.order > MAX_SUBGROUP_ORDER:
        raise TooLarge(f"subgroup enumeration capped at order {MAX_SUBGROUP_ORDER}")
    cyclic = {}
    for g in G.elements:
        c = G.closure([g])
        cyclic.setdefault(c, g)
    found = {c: (g,) for c, g in cyclic.items()}
    frontier = list(found)
    while frontier:
        nxt = []
        for H in frontier:
            if len(H) == G.order:
                continue
            for c, g in cyclic.items():
                if c <= H:
                    continue
                gens = found[H] + (g,)
                K = G.closure(gens)
                if K not in found and G.order % len(K) == 0:
                    found[K] = gens
                    nxt.append(K)
        frontier = nxt
    subs = [Subgroup(G, tuple(k)) for k in found]
    subs.sort(key=lambda s: (s.order, s.elements))
    return subs


def center(G: PGroup) -> Subgroup:
    T = G.table
    return Subgroup(G, tuple(int(z) for z in G.elements if np.array_equal(T[z], T[:, z])))


def commutator_subgroup(G: PGroup) -> Subgroup:
    comms = {G.commutator(a, b) for a in G.elements for b in G.elements}
    return Subgroup(G, tuple(G.closure(comms)))


def power_subgroup(G: PGroup) -> Subgroup:
    """G^p: the subgroup generated by p-th powers."""
    return Subgroup(G, tuple(G.closure({G.power(g, G.p) for g in G.elements})))


def maximal_subgroups(G: PGroup) -> list:
    return [S for S in subgroups(G) if S.order * G.p == G.order]


def frattini(G: PGroup) -> Subgroup:
    """Intersection of the maximal subgroups."""
    if G.order == 1:
        return G.trivial
    sets = [S.element_set for S in maximal_subgroups(G)]
    return Subgroup(G, tuple(reduce(lambda a, b: a & b, sets)))


def product_subgroup(G: PGroup, A: Subgroup, B: Subgroup) -> Subgroup:
    return Subgroup(G, tuple(G.closure(set(A.elements) | set(B.elements))))


def quotient(G: PGroup, N: Subgroup):
    """(G/N, projection list) with cosets ordered by their least element."""
    if not N.is_normal:
        raise NotNormal("quotient by a non-normal subgroup")
    coset_of = {}
    reps = []
    for g in G.elements:
        if g in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for n in N.elements:
            coset_of[G.mul(g, n)] = idx
    ident = coset_of[G.identity]
    T = np.array([[coset_of[G.mul(a, b)] for b in reps] for a in reps], dtype=np.int64)
    proj = [coset_of[g] for g in G.elements]
    gens = sorted({proj[g] for g in G.generators} - {ident})
    Q = from_cayley_table(T, tuple(gens) if gens else None, name=f"{G.name}/N" if G.name else "")
    if Q.order == 1:
        Q.p = G.p
    return Q, proj


def abelian_invariants(G: PGroup) -> list:
    """Invariants p^a_1 <= ... of an abelian p-group (from element-order counts)."""
    if not G.is_abelian():
        raise GroupError("abelian_invariants needs an abelian group")
    return _invariants_from_orders([G.element_order(g) for g in G.elements], G.p)


def _invariants_from_orders(orders, p) -> list:
    # number of elements killed by p^k is prod_i p^min(a_i, k)
    if len(orders) == 1:
        return []
    top = max(orders)
    K = 0
    while p**K < top:
        K += 1
    logs = []
    for k in range(K + 1):
        c = sum(1 for o in orders if (p**k) % o == 0)
        n, m = c, 0
        while n > 1:
            n //= p
            m += 1
        logs.append(m)
    # logs[k] - logs[k-1] = #{i : a_i >= k}
    ge = [logs[k] - logs[k - 1] for k in range(1, K + 1)]
    inv = []
    for k in range(1, K + 1):
        nxt = ge[k] if k < K else 0
        inv.extend([p**k] * (ge[k - 1] - nxt))
    return sorted(inv)


def abelianization_invariants(G: PGroup) -> list:
    Q, _ = quotient(G, commutator_subgroup(G))
    return abelian_invariants(Q)


def rank(G: PGroup) -> int:
    """d(G): minimal number of generators, log_p |G/Phi(G)|."""
    F = frattini(G)
    n, m = G.order // F.order, 0
    while n > 1:
        n //= G.p
        m += 1
    return m


# ---------------------------------------------------------------- catalog


def _metacyclic(m: int, k: int, r: int, s: int, name: str) -> PGroup:
    """<a, b | a^m, b^k = a^s, b a b^-1 = a^r>, elements a^i b^j at index i + m j."""
    n = m * k
    T = np.zeros((n, n), dtype=np.int64)
    rp = [pow(r, j, m) for j in range(2 * k)]
    for x in range(n):
        i, j = x % m, x // m
        for y in range(n):
            l, t = y % m, y // m
            e = i + rp[j] * l
            jt = j + t
            if jt >= k:
                e += rp[jt - k] * s
                jt -= k
            T[x, y] = (e % m) + m * jt
    gens = (1, m) if k > 1 else (1,)
    return from_cayley_table(T, gens if m > 1 else None, name=name)


def cyclic(p: int, n: int) -> PGroup:
    if not is_prime(p):
        raise UnknownName(f"p={p} is not prime")
    m = p**n
    T = np.add.outer(np.arange(m), np.arange(m)) % m
    G = from_cayley_table(T, (1,) if m > 1 else (), name=f"C{m}")
    G.p = p
    return G


def direct_product(A: PGroup, B: PGroup, name: str = "") -> PGroup:
    na, nb = A.order, B.order
    T = np.zeros((na * nb, na * nb), dtype=np.int64)
    for a1 in range(na):
        for b1 in range(nb):
            for a2 in range(na):
                T[a1 * nb + b1, a2 * nb:(a2 + 1) * nb] = A.table[a1, a2] * nb + B.table[b1]
    gens = tuple(g * nb + B.identity for g in A.generators) + tuple(A.identity * nb + g for g in B.generators)
    G = from_cayley_table(T, gens, name=name or f"{A.name}x{B.name}")
    G.p = A.p if A.order > 1 else B.p
    return G


def elementary_abelian(p: int, k: int) -> PGroup:
    G = cyclic(p, 1)
    out = cyclic(p, 0)
    for _ in range(k):
        out = direct_product(out, G)
    out.name = "x".join([f"C{p}"] * k) if k else "C1"
    out.p = p
    return out


def dihedral(order: int) -> PGroup:
    m = order // 2
    return _metacyclic(m, 2, -1 % m, 0, f"D{order}")


def quaternion(order: int) -> PGroup:
    m = order // 2
    return _metacyclic(m, 2, -1 % m, m // 2, f"Q{order}")


def semidihedral(order: int) -> PGroup:
    m = order // 2
    return _metacyclic(m, 2, m // 2 - 1, 0, f"SD{order}")


def modular(order: int) -> PGroup:
    m = order // 2
    return _metacyclic(m, 2, m // 2 + 1, 0, f"M{order}")


def heisenberg(p: int) -> PGroup:
    """Unitriangular 3x3 matrices over F_p (order p^3)."""
    els = [(x, y, z) for x in range(p) for y in range(p) for z in range(p)]
    pos = {e: i for i, e in enumerate(els)}
    T = np.zeros((p**3, p**3), dtype=np.int64)
    for i, (a, b, c) in enumerate(els):
        for j, (x, y, z) in enumerate(els):
            T[i, j] = pos[((a + x) % p, (b + y) % p, (c + z + a * y) % p)]
    return from_cayley_table(T, (pos[(1, 0, 0)], pos[(0, 1, 0)]), name=f"Heis{p}")


def catalog(name: str, **params) -> PGroup:
    """Named fixture groups.

    ``cyclic(p, n)``, ``elementary_abelian(p, k)``, ``dihedral(order)``,
    ``quaternion(order)``, ``semidihedral(order)``, ``modular(order)``,
    ``heisenberg(p)``.  Short labels such as ``"C4"``, ``"C2xC2"``, ``"D8"``,
    ``"Q8"`` are also accepted with no parameters (``D8`` is the dihedral
    group of order 8).
    """
    builders = {
        "cyclic": lambda p, n: cyclic(p, n),
        "elementary_abelian": lambda p, k: elementary_abelian(p, k),
        "dihedral": lambda order: dihedral(order),
        "quaternion": lambda order: quaternion(order),
        "semidihedral": lambda order: semidihedral(order),
        "modular": lambda order: modular(order),
        "heisenberg": lambda p: heisenberg(p),
    }
    if name in builders:
        try:
            return builders[name](**params)
        except TypeError as exc:
            raise UnknownName(f"bad parameters for {name}: {exc}") from None
    if params:
        raise UnknownName(f"unknown group family {name!r}")
    return from_label(name)


def from_label(label: str) -> PGroup:
    parts = label.split("x")
    if len(parts) > 1:
        gs = [from_label(s) for s in parts]
        out = gs[0]
        for g in gs[1:]:
            out = direct_product(out, g)
        out.name = label
        return out
    for prefix, fn in (("SD", semidihedral), ("Heis", None), ("D", dihedral), ("Q", quaternion),
                       ("M", modular), ("C", None)):
        if label.startswith(prefix) and label[len(prefix):].isdigit():
            k = int(label[len(prefix):])
            if prefix == "Heis":
                return heisenberg(k)
            if prefix == "C":
                pp = prime_power(k)
                if pp is None or pp[0] is None:
                    if k == 1:
                        return cyclic(2, 0)
                    raise UnknownName(f"C{k}: order is not a prime power")
                return cyclic(*pp)
            pp = prime_power(k)
            if pp is None or pp[0] != 2 or pp[1] < 3:
                raise UnknownName(f"{label}: needs a power of 2 at least 8")
            return fn(k)
    raise UnknownName(f"unknown group label {label!r}")


ACCEPTANCE_GROUPS = ("C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3")
NONABELIAN_CATALOG = ("D8", "Q8", "D16", "Q16", "SD16", "M16", "Heis3", "D32", "Q32", "SD32")
