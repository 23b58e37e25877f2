"""Finitely generated Z_p[G]-modules at finite p-adic precision.

A module is stored in R-canonical form::

    A = Z/p^{n_1} + ... + Z/p^{n_k} + Z_p^r

with ``n_1 <= ... <= n_k`` and one integer matrix per group generator giving
the action on the standard generators (torsion first).  Entries of torsion
rows only matter modulo ``p^{n_j}``; entries of free rows modulo ``p^e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from . import arith
from .arith import PadicContext, lattice_kernel, smith
from .group import PGroup, Subgroup, TooLarge, frattini, quotient


class ModuleError(ValueError):
    pass


class GenerationFailed(ModuleError):
    pass


class Abelian(ModuleError):
    pass


@dataclass(frozen=True)
class RankReport:
    d_R: int
    r_R: int
    d_K: int


@dataclass(eq=False)
class FgModule:
    ctx: PadicContext
    group: PGroup
    torsion: tuple
    free_rank: int
    action: tuple

    def __post_init__(self):
        self.torsion = tuple(int(n) for n in self.torsion)
        self.action = tuple(self.reduce(self.ctx.array(M).reshape(self.dim, self.dim))
                            for M in self.action)
        if len(self.action) != len(self.group.generators):
            raise ModuleError("need one action matrix per group generator")

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def dim(self) -> int:
        return len(self.torsion) + self.free_rank

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def row_exps(self) -> list:
        """Relation exponent per coordinate, None for free coordinates."""
        return list(self.torsion) + [None] * self.free_rank

    @cached_property
    def moduli(self) -> np.ndarray:
        q = self.ctx.modulus
        vals = [self.p**n for n in self.torsion] + [q] * self.free_rank
        return np.array(vals, dtype=self.ctx.dtype).reshape(-1, 1)

    def reduce(self, M: np.ndarray) -> np.ndarray:
        if M.size == 0:
            return M
        return np.mod(M, self.moduli)

    @cached_property
    def element_matrices(self) -> list:
        """Action matrix of every group element, expanded along the table."""
        G = self.group
        mats = [None] * G.order
        mats[G.identity] = self.ctx.eye(self.dim)
        frontier = [G.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for gi, g in enumerate(G.generators):
                    y = G.mul(g, x)
                    if mats[y] is None:
                        mats[y] = self.reduce(self.ctx.matmul(self.action[gi], mats[x]))
                        nxt.append(y)
            frontier = nxt
        return mats

    def matrix_of(self, g: int) -> np.ndarray:
        return self.element_matrices[g]

    @cached_property
    def norm_matrix(self) -> np.ndarray:
        total = self.ctx.zeros(self.dim, self.dim)
        for M in self.element_matrices:
            total = total + M
        return self.reduce(np.mod(total, self.ctx.modulus))

    def relation_matrix(self) -> np.ndarray:
        """Columns p^{n_i} e_i spanning the R-relations."""
        R = self.ctx.zeros(self.dim, len(self.torsion))
        for i, n in enumerate(self.torsion):
            R[i, i] = self.p**n
        return R

    def at_precision(self, e: int) -> "FgModule":
        """Same module data at precision e, free rows lifted symmetrically."""
        q = self.ctx.modulus
        k = len(self.torsion)
        mats = []
        for M in self.action:
            L = M.astype(object).copy()
            L[k:, :] = np.where(L[k:, :] > q // 2, L[k:, :] - q, L[k:, :])
            mats.append(L)
        return FgModule(self.ctx.with_precision(e), self.group, self.torsion, self.free_rank, tuple(mats))

    def lifts_to(self, e: int) -> bool:
        """Is the symmetric lift to precision e still a module?"""
        if e <= self.ctx.e or self.is_finite:
            return True
        memo = self.__dict__.setdefault("_lift_memo", {})
        if e not in memo:
            memo[e] = is_valid(self.at_precision(e))
        return memo[e]

    def __repr__(self):
        tors = "+".join(f"Z/{self.p}^{n}" for n in self.torsion) or "0"
        return f"FgModule({tors} + Z_{self.p}^{self.free_rank} over {self.group!r}, e={self.ctx.e})"


@dataclass(frozen=True)
class Element:
    module: FgModule
    coords: tuple

    def __post_init__(self):
        red = np.mod(np.array(self.coords, dtype=object), self.module.moduli.reshape(-1).astype(object))
        object.__setattr__(self, "coords", tuple(int(c) for c in red))

    def act(self, g: int) -> "Element":
        v = self.module.matrix_of(g).astype(object) @ np.array(self.coords, dtype=object)
        return Element(self.module, tuple(v))


def from_element_matrices(ctx: PadicContext, G: PGroup, torsion, free_rank: int, mats) -> FgModule:
    """Module given by a matrix for every group element (validate checks them all)."""
    A = FgModule(ctx, G, torsion, free_rank, tuple(mats[g] for g in G.generators))
    A.__dict__["element_matrices"] = [A.reduce(ctx.array(m).reshape(A.dim, A.dim)) for m in mats]
    return A


def headroom_ok(ctx: PadicContext, torsion, G: PGroup) -> bool:
    top = max(torsion, default=0)
    return ctx.e > top + G.log_order + 1


def validate(A: FgModule) -> list:
    """Every violated module invariant, as readable strings; empty when valid."""
    out = []
    p, e = A.p, A.ctx.e
    k = len(A.torsion)
    if list(A.torsion) != sorted(A.torsion):
        out.append("torsion exponents not in nondecreasing order")
    if any(n < 1 or n >= e for n in A.torsion):
        out.append("torsion exponent outside [1, e)")
    if not headroom_ok(A.ctx, A.torsion, A.group):
        out.append(f"precision headroom: need e > max n_i + v_p|G| + 1 = "
                   f"{max(A.torsion, default=0) + A.group.log_order + 1}")
    for gi, M in enumerate(A.action):
        for i, ni in enumerate(A.torsion):
            for j in range(A.dim):
                x = int(M[j, i]) * p**ni
                mod = p ** A.torsion[j] if j < k else A.ctx.modulus
                if x % mod:
                    kind = "torsion" if j < k else "free"
                    out.append(f"well-definedness: generator {gi} maps torsion coordinate {i} "
                               f"badly into {kind} coordinate {j}")
    if out:
        return out
    G = A.group
    mats = A.element_matrices
    if any(m is None for m in mats):
        return ["generators do not reach every group element"]
    if not np.array_equal(mats[G.identity], A.reduce(A.ctx.eye(A.dim))):
        return ["homomorphism: the identity does not act as the identity"]
    for gi, g in enumerate(G.generators):
        if not np.array_equal(mats[g], A.action[gi]):
            return [f"homomorphism: generator {g} matrix disagrees with its table entry"]
        for x in G.elements:
            lhs = A.reduce(A.ctx.matmul(A.action[gi], mats[x]))
            if not np.array_equal(lhs, mats[G.mul(g, x)]):
                out.append(f"homomorphism: M_g M_x != M_(gx) for g={g}, x={x}")
                return out
    return out


def is_valid(A: FgModule) -> bool:
    return not validate(A)


# --------------------------------------------------------------- builders


def default_context(G: PGroup, max_torsion: int = 0, extra: int = 2) -> PadicContext:
    return PadicContext(G.p, max_torsion + G.log_order + extra)


def trivial_module(G: PGroup, torsion=(), free_rank: int = 0, ctx: PadicContext | None = None) -> FgModule:
    """Direct sum of cyclic R-modules with trivial G-action."""
    torsion = tuple(sorted(torsion))
    ctx = ctx or default_context(G, max(torsion, default=0))
    n = len(torsion) + free_rank
    return FgModule(ctx, G, torsion, free_rank, tuple(ctx.eye(n) for _ in G.generators))


def regular_module(G: PGroup, d: int = 1, ctx: PadicContext | None = None) -> FgModule:
    """The free module (RG)^d; coordinate b*|G| + h is the basis element h of block b."""
    ctx = ctx or default_context(G)
    n = G.order
    mats = []
    for g in G.generators:
        M = ctx.zeros(d * n, d * n)
        for b in range(d):
            for h in G.elements:
                M[b * n + G.mul(g, h), b * n + h] = 1
        mats.append(M)
    return FgModule(ctx, G, (), d * n, tuple(mats))


def permutation_matrices(G: PGroup, d: int = 1) -> list:
    """Integer matrices of every element on (Z G)^d."""
    n = G.order
    out = []
    for g in G.elements:
        M = np.zeros((d * n, d * n), dtype=np.int64)
        for b in range(d):
            for h in G.elements:
                M[b * n + G.mul(g, h), b * n + h] = 1
        out.append(M)
    return out


def _canonical_order(exps) -> list:
    """Permutation putting torsion coordinates first by exponent, then free."""
    return sorted(range(len(exps)), key=lambda i: (exps[i] is None, exps[i] or 0, i))


def _from_coordinates(ctx, G, exps, gen_mats) -> FgModule:
    perm = _canonical_order(exps)
    tors = tuple(exps[i] for i in perm if exps[i] is not None)
    free = sum(1 for x in exps if x is None)
    mats = tuple(M[np.ix_(perm, perm)] for M in gen_mats)
    return FgModule(ctx, G, tors, free, mats)


def direct_sum(A: FgModule, B: FgModule) -> FgModule:
    if A.group is not B.group:
        raise ModuleError("direct sum over different groups")
    ctx = A.ctx if A.ctx.e >= B.ctx.e else B.ctx
    n = A.dim + B.dim
    mats = []
    for Ma, Mb in zip(A.action, B.action):
        M = ctx.zeros(n, n)
        M[:A.dim, :A.dim] = Ma
        M[A.dim:, A.dim:] = Mb
        mats.append(M)
    return _from_coordinates(ctx, A.group, A.row_exps + B.row_exps, mats)


def quotient_lattice(G: PGroup, ctx: PadicContext, gen_mats, relations) -> FgModule:
    """The module Z_p^m / span(relations) with the induced action.

    ``gen_mats`` act on Z_p^m (one per generator of G) and must preserve the
    span of the relation columns.  Relation pivots of full precision are read
    as zero, so the corresponding coordinates become free.
    """
    R = ctx.array(relations)
    m = R.shape[0]
    if R.shape[1] == 0:
        return FgModule(ctx, G, (), m, tuple(ctx.array(M) for M in gen_mats))
    sf = smith(R, ctx, want_q=False)
    diag = list(sf.diag) + [ctx.e] * (m - len(sf.diag))
    Pinv = arith.inverse(sf.P, ctx)
    keep = [i for i, a in enumerate(diag) if a > 0]
    exps = [diag[i] if diag[i] < ctx.e else None for i in keep]
    if None in exps:
        # the complement of a relation of valuation a is only known mod p^(e-a)
        loss = max((a for a in exps if a is not None), default=0)
        ctx_out = ctx.with_precision(ctx.e - loss)
    else:
        ctx_out = ctx
    mats = []
    for M in gen_mats:
        N = ctx.matmul(ctx.matmul(sf.P, ctx.array(M)), Pinv)
        mats.append(N[np.ix_(keep, keep)])
    return _from_coordinates(ctx_out, G, exps, mats)


def sublattice_module(G: PGroup, ctx: PadicContext, gen_mats, basis) -> FgModule:
    """Free module on the G-invariant lattice spanned by the columns of ``basis``.

    The basis need not be saturated; dividing by its Smith pivots costs that
    many digits, and the result lives at the reduced precision.
    """
    B = ctx.array(basis)
    m, s = B.shape
    sf = smith(B, ctx)
    if any(a >= ctx.e for a in sf.diag[:s]) or len(sf.diag) < s:
        raise arith.PrecisionError("basis columns are dependent at this precision")
    loss = max(sf.diag[:s], default=0)
    inner = ctx.with_precision(ctx.e - loss)
    mats = []
    for M in gen_mats:
        V = ctx.matmul(sf.P, ctx.matmul(ctx.array(M), B))
        if m > s and np.any(V[s:, :]):
            raise ModuleError("lattice is not invariant under the action")
        Y = np.zeros((s, s), dtype=object)
        for i in range(s):
            pa = ctx.p ** sf.diag[i]
            if np.any(np.mod(V[i, :], pa)):
                raise ModuleError("lattice is not invariant under the action")
            Y[i, :] = V[i, :] // pa
        C = np.mod(sf.Q[:s, :s].astype(object) @ Y, inner.modulus)
        mats.append(C)
    return FgModule(inner, G, (), s, tuple(mats))


def augmentation_ideal(G: PGroup, ctx: PadicContext | None = None) -> FgModule:
    """The augmentation ideal of RG, on the basis x - 1 (x != 1)."""
    ctx = ctx or default_context(G)
    n = G.order
    basis = np.zeros((n, n - 1), dtype=np.int64)
    others = [x for x in G.elements if x != G.identity]
    for c, x in enumerate(others):
        basis[x, c] = 1
        basis[G.identity, c] = -1
    perms = permutation_matrices(G)
    return sublattice_module(G, ctx, [perms[g] for g in G.generators], basis)


def augmentation_power_generators(G: PGroup, n: int, ctx: PadicContext) -> np.ndarray:
    """Z_p-generators of the n-th power of the augmentation ideal, inside RG."""
    order = G.order
    others = [x for x in G.elements if x != G.identity]

    def times_diff(v, g):
        # v * (g - 1) in the group ring
        out = np.zeros(order, dtype=object)
        for h in G.elements:
            if v[h]:
                out[G.mul(h, g)] += v[h]
                out[h] -= v[h]
        return out

    gens = []
    for x in others:
        v = np.zeros(order, dtype=object)
        v[x] += 1
        v[G.identity] -= 1
        gens.append(v)
    for _ in range(n - 1):
        new = [times_diff(v, g) for v in gens for g in others]
        gens = _prune(np.array(new, dtype=object).T, ctx)
    return ctx.array(np.array(gens, dtype=object).T)


def _prune(cols: np.ndarray, ctx: PadicContext) -> list:
    """A basis-sized generating set of the lattice spanned by ``cols``."""
    A = ctx.array(cols)
    sf = smith(A, ctx, want_q=False)
    Pinv = arith.inverse(sf.P, ctx)
    out = []
    for i, a in enumerate(sf.diag):
        if a < ctx.e:
            out.append(np.mod(Pinv[:, i].astype(object) * ctx.p**a, ctx.modulus))
    return out


def group_ring_quotient(G: PGroup, n: int, ctx: PadicContext | None = None) -> FgModule:
    """RG / I^n for the augmentation ideal I (n >= 1)."""
    ctx = ctx or default_context(G, n * G.log_order + 1)
    rel = augmentation_power_generators(G, n, ctx)
    perms = permutation_matrices(G)
    return quotient_lattice(G, ctx, [perms[g] for g in G.generators], rel)


def free_group_ring_mod(G: PGroup, k: int, d: int = 1, ctx: PadicContext | None = None) -> FgModule:
    """(RG / p^k RG)^d, a free (Z/p^k)G-module."""
    ctx = ctx or default_context(G, k)
    perms = permutation_matrices(G, d)
    rel = np.eye(d * G.order, dtype=np.int64) * G.p**k
    return quotient_lattice(G, ctx, [perms[g] for g in G.generators], rel)


# --------------------------------------------------------------- operations


def torsion_submodule(A: FgModule):
    """(T, inclusion) with inclusion the dim(A) x k coordinate embedding."""
    k = len(A.torsion)
    T = FgModule(A.ctx, A.group, A.torsion, 0, tuple(M[:k, :k] for M in A.action))
    inc = A.ctx.zeros(A.dim, k)
    for i in range(k):
        inc[i, i] = 1
    return T, inc


def quotient_by_torsion(A: FgModule) -> FgModule:
    k = len(A.torsion)
    return FgModule(A.ctx, A.group, (), A.free_rank, tuple(M[k:, k:] for M in A.action))


def _diff_columns(A: FgModule, elements=None) -> np.ndarray:
    elements = A.group.generators if elements is None else elements
    I = A.ctx.eye(A.dim)
    cols = [np.mod(A.matrix_of(g) - I, A.ctx.modulus) for g in elements]
    return np.concatenate(cols, axis=1) if cols else A.ctx.zeros(A.dim, 0)


def ranks(A: FgModule) -> RankReport:
    d = A.dim
    D = _diff_columns(A)
    r = d - arith.rank_fp(D, A.p) if D.size else d
    return RankReport(d, r, A.free_rank)


def commutator_submodule(A: FgModule) -> np.ndarray:
    """Generators of the preimage of [A,G] in the coordinate lattice."""
    return np.concatenate([_diff_columns(A), A.relation_matrix()], axis=1)


def fixed_points(A: FgModule) -> np.ndarray:
    """Generators of the preimage of A^G in the coordinate lattice."""
    gens = A.group.generators
    if not gens:
        return A.ctx.eye(A.dim)
    I = A.ctx.eye(A.dim)
    F = np.concatenate([np.mod(A.matrix_of(g) - I, A.ctx.modulus) for g in gens], axis=0)
    return lattice_kernel(F, A.row_exps * len(gens), A.ctx)


def norm_image(A: FgModule) -> np.ndarray:
    return np.concatenate([A.norm_matrix, A.relation_matrix()], axis=1)


def norm_kernel(A: FgModule) -> np.ndarray:
    return lattice_kernel(A.norm_matrix, A.row_exps, A.ctx)


def coinvariants(A: FgModule) -> FgModule:
    """A_G = A / [A,G], with trivial action."""
    rel = commutator_submodule(A)
    return quotient_lattice(A.group, A.ctx, list(A.action), rel)


def restrict(A: FgModule, S: Subgroup) -> FgModule:
    """A viewed as a module over the subgroup S (re-indexed as a group)."""
    if S.parent is not A.group:
        raise ModuleError("subgroup of a different group")
    H, emb = S.as_group()
    mats = tuple(A.matrix_of(emb[h]) for h in H.generators)
    B = FgModule(A.ctx, H, A.torsion, A.free_rank, mats)
    # element matrices come straight from A, no re-expansion needed
    B.__dict__["element_matrices"] = [A.matrix_of(emb[h]) for h in H.elements]
    return B


def lattice_order(gens: np.ndarray, A: FgModule):
    """Structure of the sub-lattice quotient ``A / span(gens)`` (helper for tests)."""
    return arith.cokernel_structure(np.concatenate([gens, A.relation_matrix()], axis=1), A.ctx)


def random_finite_module(G: PGroup, ctx: PadicContext | None = None, max_rank: int = 1,
                         max_exp: int = 2, max_relations: int = 3, max_dim: int | None = None,
                         seed: int = 0, retries: int = 50) -> FgModule:
    """Seeded random finite module: (RG)^r modulo p^N and a few random cyclic submodules.

    Each relation is the RG-span of a random vector, sometimes scaled by p so
    that free quotients such as F_pG show up.  Deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    ctx = ctx or default_context(G, max_exp)
    if not headroom_ok(ctx, [max_exp], G):
        raise ModuleError("context precision too small for the requested exponents")
    perms = permutation_matrices(G, max_rank)
    for _ in range(retries):
        r = int(rng.integers(1, max_rank + 1))
        N = int(rng.integers(1, max_exp + 1))
        m = r * G.order
        ps = [P[:m, :m] for P in perms]
        cols = [np.eye(m, dtype=np.int64) * G.p**N]
        for _ in range(int(rng.integers(0, max_relations + 1))):
            v = rng.integers(0, G.p**N, size=m)
            if rng.random() < 0.35:
                v = v * G.p ** int(rng.integers(1, N + 1))
            cols.append(np.stack([P @ v for P in ps], axis=1))
        A = quotient_lattice(G, ctx, [ps[g] for g in G.generators], np.concatenate(cols, axis=1))
        if A.dim >= 1 and (max_dim is None or A.dim <= max_dim):
            return A
    raise GenerationFailed(f"no module of dimension <= {max_dim} after {retries} tries")


def _abelian_basis(Amb: PGroup, Z: list):
    """Basis (b_j, exponent a_j) of the abelian p-group Z inside Amb, and a log table."""
    gens = list(Subgroup(Amb, tuple(Z)).generators)
    orders = [Amb.element_order(g) for g in gens]
    p = Amb.p
    # relation lattice by enumeration of exponent tuples
    rels = []
    for i, o in enumerate(orders):
        v = [0] * len(gens)
        v[i] = o
        rels.append(v)
    for c in product(*[range(o) for o in orders]):
        x = Amb.identity
        for g, k in zip(gens, c):
            x = Amb.mul(x, Amb.power(g, k))
        if x == Amb.identity and any(c):
            rels.append(list(c))
    top = 1
    while p**top <= len(Z):
        top += 1
    ctx = PadicContext(p, top + 2)
    R = np.array(rels, dtype=np.int64).T
    sf = smith(R, ctx, want_q=False)
    Pinv = arith.inverse(sf.P, ctx)
    basis = []
    for j, a in enumerate(sf.diag):
        if 0 < a < ctx.e:
            col = [int(c) for c in Pinv[:, j]]
            x = Amb.identity
            for g, k in zip(gens, col):
                x = Amb.mul(x, Amb.power(g, k % Amb.element_order(g)))
            basis.append((x, a))
    basis.sort(key=lambda t: t[1])
    log = {}
    for c in product(*[range(p**a) for _, a in basis]):
        x = Amb.identity
        for (b, _), k in zip(basis, c):
            x = Amb.mul(x, Amb.power(b, k))
        log[x] = c
    if len(log) != len(Z):
        raise ModuleError("abelian basis does not reach every element")
    return basis, log


def build_schmid_module(G: PGroup) -> FgModule:
    """Z(Phi(G)) as a module over G/Phi(G), acted on by conjugation."""
    if G.is_abelian():
        raise Abelian("the conjecture concerns non-abelian groups")
    if G.order > 64:
        raise TooLarge("Schmid workflow capped at order 64")
    Phi = frattini(G)
    # centre of Phi itself, not Z(G) cap Phi
    Zphi = [z for z in Phi.elements if all(G.mul(z, y) == G.mul(y, z) for y in Phi.elements)]
    Q, proj = quotient(G, Phi)
    basis, log = _abelian_basis(G, Zphi)
    rep = {}
    for g in G.elements:
        rep.setdefault(proj[g], g)
    exps = tuple(a for _, a in basis)
    ctx = default_context(Q, max(exps, default=0))
    mats = []
    for qg in Q.generators:
        g = rep[qg]
        M = np.zeros((len(basis), len(basis)), dtype=np.int64)
        for j, (b, _) in enumerate(basis):
            M[:, j] = log[G.conj(g, b)]
        mats.append(M)
    return FgModule(ctx, Q, exps, 0, tuple(mats))


def twist(A: FgModule, seed: int = 0) -> FgModule:
    """The same module in a random basis x' = P x, P = [[I, X], [0, U]].

    X sends free coordinates into torsion coordinates and U is a product of
    elementary integer matrices, so P^-1 is integral and free rows of the
    new action are exact integers.  A split direct sum comes out with
    nonzero off-diagonal blocks.
    """
    rng = np.random.default_rng(seed)
    k, f = len(A.torsion), A.free_rank
    n = A.dim
    P = np.eye(n, dtype=object)
    Pinv = np.eye(n, dtype=object)

    def elementary(i, j, c):
        # row_i += c row_j on P, column_j -= c column_i on the inverse
        nonlocal P, Pinv
        E = np.eye(n, dtype=object)
        E[i, j] = c
        Einv = np.eye(n, dtype=object)
        Einv[i, j] = -c
        P = E.dot(P)
        Pinv = Pinv.dot(Einv)

    for i in range(k):
        for j in range(k, n):
            elementary(i, j, int(rng.integers(0, A.p ** A.torsion[i])))
    for _ in range(2 * f):
        i, j = (int(x) for x in rng.choice(np.arange(k, n), size=2, replace=False)) if f > 1 else (k, k)
        if i != j:
            elementary(i, j, int(rng.integers(-1, 2)))
    mats = []
    for M in A.action:
        L = M.astype(object).copy()
        q = A.ctx.modulus
        L[k:, :] = np.where(L[k:, :] > q // 2, L[k:, :] - q, L[k:, :])
        mats.append(P.dot(L).dot(Pinv))
    return FgModule(A.ctx, A.group, A.torsion, A.free_rank, tuple(mats))
