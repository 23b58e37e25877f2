"""Torsion splitting of CT modules and minimal presentations of finite modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import arith
from .arith import PadicContext
from .cohomology import homology_h1, is_ct, is_ct_finite, tate
from .errors import BudgetExceeded, InternalContradiction
from .group import PGroup, rank as group_rank
from .module import (FgModule, augmentation_ideal, coinvariants, permutation_matrices,
                     quotient_by_torsion, ranks, regular_module, sublattice_module,
                     torsion_submodule, trivial_module, _prune)

PRESENTATION_BUDGET = 2**12


def _residue_basis(A: FgModule) -> list:
    """Coordinate indices whose classes form an F_p-basis of A / mA.

    mA = pA + [A,G]; greedy over standard vectors, which always works since
    the standard vectors span A.
    """
    p = A.p
    D = [np.mod(A.matrix_of(g) - A.ctx.eye(A.dim), p) for g in A.group.generators]
    span = np.concatenate(D, axis=1) if D else np.zeros((A.dim, 0), dtype=np.int64)
    chosen = []
    rk = arith.rank_fp(span, p) if span.size else 0
    for j in range(A.dim):
        v = np.zeros((A.dim, 1), dtype=np.int64)
        v[j, 0] = 1
        trial = np.concatenate([span, v], axis=1)
        r = arith.rank_fp(trial, p)
        if r > rk:
            span, rk = trial, r
            chosen.append(j)
    return chosen


def _orbit_matrix(A: FgModule, vectors) -> np.ndarray:
    """Columns M_h v_b ordered b*|G| + h, i.e. the map (RG)^r -> A."""
    G = A.group
    cols = []
    for v in vectors:
        v = A.ctx.array(np.asarray(v).reshape(-1, 1))
        for h in G.elements:
            cols.append(A.reduce(A.ctx.matmul(A.matrix_of(h), v)))
    if not cols:
        return A.ctx.zeros(A.dim, 0)
    return np.concatenate(cols, axis=1)


def free_basis_certificate(B: FgModule, require_ct: bool = True):
    """An RG-basis of a torsion-free module, or None when B is not free.

    Freeness is read off the ranks: lifts of a basis of B/mB generate B by
    Nakayama, so B is free exactly when r_R(B)|G| = d_K(B), and then the
    orbit matrix of those lifts is invertible.  With ``require_ct`` the
    cohomological criterion is also evaluated and must agree.
    """
    if B.torsion:
        raise ValueError("free_basis_certificate needs a torsion-free module")
    G = B.group
    rep = ranks(B)
    free = rep.r_R * G.order == rep.d_K
    if require_ct:
        ct = is_ct(B).is_ct
        if ct != free:
            raise InternalContradiction(
                f"torsion-free module with CT={ct} but rank test says free={free}")
    if not free:
        return None
    basis = []
    for j in _residue_basis(B):
        v = np.zeros(B.dim, dtype=np.int64)
        v[j] = 1
        basis.append(v)
    X = _orbit_matrix(B, basis)
    try:
        arith.inverse(X, B.ctx)
    except ValueError:
        raise InternalContradiction("residue basis does not lift to an RG-basis") from None
    return basis


@dataclass
class Splitting:
    """A = T (+) F with F = A/T free; ``section`` maps F-coordinates into A."""

    A: FgModule
    T: FgModule
    F: FgModule
    basis: list
    inclusion: np.ndarray
    section: np.ndarray
    checked: bool


@dataclass
class NotCT:
    witness: tuple
    certificate: object

    def __str__(self):
        S, n = self.witness
        return f"not CT: H^{n} over subgroup of order {S.order} is nonzero"


def _check_split(A: FgModule, F: FgModule, inc: np.ndarray, S: np.ndarray) -> list:
    """Direct-sum identities; returns the list of failures."""
    bad = []
    k = len(A.torsion)
    q = A.ctx.modulus
    if np.any(np.mod(S[k:, :] - A.ctx.eye(F.dim), q)):
        bad.append("projection after section is not the identity")
    for g, Ma in enumerate(A.action):
        lhs = A.reduce(A.ctx.matmul(Ma, S))
        rhs = A.reduce(A.ctx.matmul(S, F.action[g]))
        if np.any(lhs != rhs):
            bad.append(f"section not equivariant for generator {g}")
    block = np.concatenate([inc, S], axis=1) if inc.size else S
    if block.shape[0] and arith.rank_fp(block, A.p) != A.dim:
        bad.append("inclusion and section do not span A with trivial intersection")
    return bad


def split_theorem_a(A: FgModule):
    """Split a CT module as T (+) A/T with an explicit RG-basis of A/T.

    Returns :class:`NotCT` with a witness when A is not CT.  A CT module that
    fails to split raises :class:`InternalContradiction`.
    """
    cert = is_ct(A)
    if not cert.is_ct:
        return NotCT(cert.witness, cert)
    T, inc = torsion_submodule(A)
    F = quotient_by_torsion(A)
    if T.dim and not is_ct_finite(T).is_ct:
        raise InternalContradiction("CT module with non-CT torsion submodule")
    if F.dim == 0:
        return Splitting(A, T, F, [], inc, A.ctx.zeros(A.dim, 0), True)
    basis = free_basis_certificate(F, require_ct=False)
    if basis is None:
        raise InternalContradiction("CT module whose torsion-free quotient is not free")
    k = len(A.torsion)
    lifts = []
    for b in basis:
        v = np.zeros(A.dim, dtype=np.int64)
        v[k:] = b
        lifts.append(v)
    Amat = _orbit_matrix(A, lifts)
    Bmat = _orbit_matrix(F, basis)
    S = A.reduce(A.ctx.matmul(Amat, arith.inverse(Bmat, A.ctx)))
    bad = _check_split(A, F, inc, S)
    if bad:
        raise InternalContradiction("; ".join(bad))
    return Splitting(A, T, F, basis, inc, S, True)


@dataclass
class Presentation:
    """M >-> L ->> A with L = (RG)^r, r = r_R(A) and p^N L inside M."""

    A: FgModule
    L: FgModule
    images: np.ndarray
    phi: np.ndarray
    kernel_basis: np.ndarray
    N: int
    M: FgModule


def presentation_context(A: FgModule) -> PadicContext:
    N = max(A.torsion, default=0)
    return PadicContext(A.p, 3 * N + 2 * A.group.log_order + 4)


def minimal_presentation(A: FgModule, budget: int = PRESENTATION_BUDGET) -> Presentation:
    """Minimal free presentation of a finite module.

    The kernel is computed modulo p^N L, which it contains; the working
    precision leaves room for the kernel and sublattice pivot losses.
    """
    if not A.is_finite:
        raise ValueError("minimal_presentation needs a finite module")
    G = A.group
    r = ranks(A).r_R
    N = max(A.torsion, default=0)
    if G.order * r * sum(A.torsion) > budget:
        raise BudgetExceeded(f"presentation size {G.order * r * sum(A.torsion)} over budget {budget}")
    ctx = presentation_context(A)
    Ahi = A.at_precision(ctx.e)
    L = regular_module(G, r, ctx)
    idx = _residue_basis(Ahi)
    images = Ahi.ctx.zeros(A.dim, r)
    for b, j in enumerate(idx):
        images[j, b] = 1
    phi = _orbit_matrix(Ahi, [images[:, b] for b in range(r)])
    if r == 0:
        M = FgModule(ctx, G, (), 0, tuple(ctx.zeros(0, 0) for _ in G.generators))
        return Presentation(A, L, images, phi, ctx.zeros(0, 0), N, M)
    if arith.cokernel_structure(np.concatenate([phi, Ahi.relation_matrix()], axis=1), ctx).exponents:
        raise InternalContradiction("lifts of a residue basis do not generate A")
    K = arith.lattice_kernel(phi, Ahi.row_exps, ctx)
    gens = np.concatenate([K, ctx.array(np.eye(L.dim, dtype=np.int64) * A.p**N)], axis=1)
    basis = np.stack(_prune(gens, ctx), axis=1)
    perms = permutation_matrices(G, r)
    M = sublattice_module(G, ctx, [perms[g] for g in G.generators], basis)
    return Presentation(A, L, images, phi, basis, N, M)


@dataclass(frozen=True)
class Theorem2Report:
    r_M: int
    r_L: int
    dK_coinvariants: int
    dR_h1: int

    @property
    def formula(self) -> int:
        return self.r_L - self.dK_coinvariants + self.dR_h1

    @property
    def match(self) -> bool:
        return self.r_M == self.formula


def verify_theorem2(A: FgModule, pres: Presentation | None = None) -> Theorem2Report:
    """Relation count r_R(M) against r_R(L) - d_K(A_G) + d_R(H_1(G,A))."""
    pres = pres or minimal_presentation(A)
    dK = coinvariants(A).free_rank
    if dK != 0:
        raise InternalContradiction("finite module with infinite coinvariants")
    h1 = homology_h1(A)
    return Theorem2Report(ranks(pres.M).r_R, ranks(pres.L).r_R, dK, h1.d_R)


def verify_corollary(A: FgModule, pres: Presentation | None = None) -> bool:
    """Does [A is CT] agree with [r_R(M) = r_R(L)]?"""
    pres = pres or minimal_presentation(A)
    return is_ct_finite(A).is_ct == (ranks(pres.M).r_R == ranks(pres.L).r_R)


def augmentation_ideal_rank(G: PGroup) -> int:
    """r_R of the augmentation ideal, checked against d(G) and against H_1(G, R)."""
    if G.order > 64:
        raise ValueError("augmentation_ideal_rank capped at order 64")
    if G.order == 1:
        return 0
    r = ranks(augmentation_ideal(G)).r_R
    h1 = homology_h1(trivial_module(G, free_rank=1)).d_R
    d = group_rank(G)
    if not r == d == 1 - 1 + h1:
        raise InternalContradiction(f"r_R(I)={r}, d(G)={d}, d_R(H_1)={h1}")
    return r


def dimension_shift_orders(pres: Presentation, n: int) -> tuple:
    """(|H^n(G,A)|, |H^(n+1)(G,M)|), equal by the presentation's long exact sequence."""
    return tate(pres.A, None, n).size, tate(pres.M, None, n + 1).size
