"""Dense linear algebra over the chain ring Z/p^e and over F_p.

Matrices are plain numpy integer arrays holding canonical residues in
``[0, p^e)``.  When ``p^(2e)`` would overflow int64 the arrays switch to
``dtype=object`` and Python integers take over.

Smith forms are computed by valuation pivoting: at every step the entry of
least p-adic valuation in the remaining block is moved to the diagonal,
normalised to an exact power of p and used to clear its row and column.
Because Z/p^e is a local principal ideal ring this always terminates with a
unique list of exponents.  An exponent equal to ``e`` means "zero at this
precision"; callers decide what that means for them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_INT64_SAFE = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PadicContext:
    """Prime ``p`` and working precision ``e``: arithmetic is in Z/p^e."""

    p: int
    e: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.e < 1:
            raise ValueError(f"precision e={self.e} must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p**self.e

    @property
    def dtype(self):
        return np.int64 if self.modulus < _INT64_SAFE else object

    def with_precision(self, e: int) -> "PadicContext":
        return PadicContext(self.p, e)

    def residue_field(self) -> "PadicContext":
        return PadicContext(self.p, 1)

    def array(self, data) -> np.ndarray:
        """Reduce ``data`` to a canonical residue matrix."""
        m = self.modulus
        if isinstance(data, np.ndarray) and data.dtype != object and self.dtype is not object:
            return np.mod(data.astype(np.int64), m)
        a = np.mod(np.array(data, dtype=object), m)
        return a if self.dtype is object else a.astype(np.int64)

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=self.dtype)

    def eye(self, n: int) -> np.ndarray:
        z = np.zeros((n, n), dtype=self.dtype)
        for i in range(n):
            z[i, i] = 1
        return z

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        q = self.modulus
        if self.dtype is object or a.shape[-1] * (q - 1) ** 2 >= 2**63:
            out = np.mod(np.dot(a.astype(object), b.astype(object)), q)
            return out if self.dtype is object else out.astype(np.int64)
        return np.mod(a @ b, q)


@dataclass(frozen=True)
class SmithForm:
    """``P @ M @ Q`` equals ``diag(p**a for a in diag)`` modulo p^e.

    ``diag`` has ``min(rows, cols)`` entries, nondecreasing; an entry equal to
    ``e`` stands for zero.
    """

    diag: tuple
    P: np.ndarray | None = field(repr=False, default=None)
    Q: np.ndarray | None = field(repr=False, default=None)
    e: int = 0

    @property
    def rank(self) -> int:
        """Number of diagonal entries that are nonzero at precision."""
        return sum(1 for a in self.diag if a < self.e)


def smith(M, ctx: PadicContext, transforms: bool = True, want_p: bool = True,
          want_q: bool = True) -> SmithForm:
    """Smith normal form of ``M`` over Z/p^e by valuation pivoting."""
    p, e, q = ctx.p, ctx.e, ctx.modulus
    A = ctx.array(M)
    if A.ndim != 2:
        A = A.reshape(len(A), -1)
    m, n = A.shape
    A = A.copy()
    P = ctx.eye(m) if transforms and want_p else None
    Q = ctx.eye(n) if transforms and want_q else None
    diag = []
    level = 0
    k = 0
    pw = [p**i for i in range(e + 1)]
    while k < min(m, n):
        sub = A[k:, k:]
        found = None
        while level < e:
            mask = np.mod(sub, pw[level + 1]) != 0
            if mask.any():
                flat = int(np.argmax(mask))
                found = divmod(flat, sub.shape[1])
                break
            level += 1
        if found is None:
            break
        i, j = found[0] + k, found[1] + k
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            if P is not None:
                P[[k, i], :] = P[[i, k], :]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            if Q is not None:
                Q[:, [k, j]] = Q[:, [j, k]]
        unit = int(A[k, k]) // pw[level]
        uinv = pow(unit, -1, q)
        if uinv != 1:
            A[k, k:] = np.mod(A[k, k:] * uinv, q)
            if P is not None:
                P[k, :] = np.mod(P[k, :] * uinv, q)
        # rows below: entries divisible by p^level
        col = A[k + 1:, k] // pw[level]
        nz = np.nonzero(col)[0]
        if len(nz):
            rows = nz + k + 1
            f = col[nz].reshape(-1, 1)
            A[rows, k:] = np.mod(A[rows, k:] - f * A[k, k:].reshape(1, -1), q)
            if P is not None:
                P[rows, :] = np.mod(P[rows, :] - f * P[k, :].reshape(1, -1), q)
        # columns to the right only touch row k (rows below are already zero in column k)
        rowf = A[k, k + 1:] // pw[level]
        nzc = np.nonzero(rowf)[0]
        if len(nzc):
            A[k, k + 1:] = 0
            if Q is not None:
                cols = nzc + k + 1
                Q[:, cols] = np.mod(Q[:, cols] - Q[:, k].reshape(-1, 1) * rowf[nzc].reshape(1, -1), q)
        diag.append(level)
        k += 1
    diag.extend([e] * (min(m, n) - len(diag)))
    return SmithForm(tuple(diag), P, Q, e)


@dataclass(frozen=True)
class CokernelStructure:
    """Finite part of a cokernel, as exponents a_i with order p^{a_i}."""

    exponents: tuple
    free_at_precision: int
    p: int

    @property
    def orders(self) -> list:
        return [self.p**a for a in self.exponents]

    @property
    def precision_exhausted(self) -> bool:
        return self.free_at_precision > 0


def cokernel_structure(M, ctx: PadicContext) -> CokernelStructure:
    """Structure of (Z/p^e)^rows / image(M).

    Full-precision classes (where the image is zero in a coordinate) are not
    reported as orders but counted in ``free_at_precision``.
    """
    A = ctx.array(M)
    rows = A.shape[0]
    sf = smith(A, ctx, transforms=False)
    exps = sorted(a for a in sf.diag if 0 < a < ctx.e)
    free = sum(1 for a in sf.diag if a >= ctx.e) + max(0, rows - len(sf.diag))
    return CokernelStructure(tuple(exps), free, ctx.p)


def solve(M, b, ctx: PadicContext):
    """Some ``x`` with ``M x = b`` mod p^e, or None."""
    A = ctx.array(M)
    m, n = A.shape
    bb = ctx.array(b).reshape(-1)
    sf = smith(A, ctx)
    c = ctx.matmul(sf.P, bb.reshape(-1, 1)).reshape(-1)
    y = np.zeros(n, dtype=ctx.dtype)
    for i in range(m):
        a = sf.diag[i] if i < len(sf.diag) else ctx.e
        ci = int(c[i])
        if a >= ctx.e:
            if ci != 0:
                return None
            continue
        pa = ctx.p**a
        if ci % pa:
            return None
        y[i] = ci // pa
    return ctx.matmul(sf.Q, y.reshape(-1, 1)).reshape(-1)


def inverse(M, ctx: PadicContext) -> np.ndarray:
    """Inverse of a square matrix over Z/p^e; raises if not invertible."""
    A = ctx.array(M)
    if A.shape[0] != A.shape[1]:
        raise ValueError("inverse of a non-square matrix")
    sf = smith(A, ctx)
    if any(a != 0 for a in sf.diag):
        raise ValueError("matrix is not invertible mod p^e")
    return ctx.matmul(sf.Q, sf.P)


def kernel_basis_fp(M, p: int) -> list:
    """F_p-basis of the right kernel of M."""
    ctx = PadicContext(p, 1)
    A = ctx.array(M)
    n = A.shape[1]
    sf = smith(A, ctx, want_p=False)
    return [sf.Q[:, j].copy() for j in range(n) if j >= len(sf.diag) or sf.diag[j] >= 1]


def rank_fp(M, p: int) -> int:
    A = np.asarray(M)
    if A.size == 0:
        return 0
    return smith(np.mod(A, p), PadicContext(p, 1), transforms=False).rank


def lattice_kernel(F, row_exps, ctx: PadicContext, with_loss: bool = False):
    """Generators of ``{x in Z_p^n : F x in span(p^u_i e_i)}``.

    ``row_exps[i]`` is the relation exponent of target coordinate i, or None
    for a free coordinate.  Rows are processed one exponent class at a time,
    torsion classes first: a class with exponent u only asks for
    ``F_u x = 0 mod p^u``, which any change of rows preserves, so its Smith
    form gives the kernel exactly.  Free rows come last; there pivots at
    full precision are read as exact zeros, so the result is the kernel over
    Z_p and is only accurate modulo p^(e - loss), loss being the largest
    finite free-row pivot.  ``with_loss=True`` returns ``(K, loss)``.
    """
    F = ctx.array(F)
    m, n = F.shape
    K = ctx.eye(n)
    loss = 0
    classes = sorted(set(row_exps), key=lambda u: (u is None, u or 0))
    for u in classes:
        if K.shape[1] == 0:
            break
        rows = [i for i, x in enumerate(row_exps) if x == u]
        C = ctx.matmul(F[rows, :], K)
        sf = smith(C, ctx, want_p=False)
        cols = []
        for j in range(C.shape[1]):
            d = sf.diag[j] if j < len(sf.diag) else ctx.e
            if u is None:
                if d >= ctx.e:
                    cols.append(sf.Q[:, j])
                else:
                    loss = max(loss, d)
            else:
                cols.append(np.mod(sf.Q[:, j] * ctx.p ** max(0, u - d), ctx.modulus))
        Y = np.stack(cols, axis=1) if cols else ctx.zeros(K.shape[1], 0)
        K = ctx.matmul(K, Y) if cols else ctx.zeros(n, 0)
    return (K, loss) if with_loss else K


class PrecisionError(ArithmeticError):
    """A computation needed more p-adic precision than was available."""


def subquotient(K, I, ctx: PadicContext) -> CokernelStructure:
    """Structure of span(K) / span(I) for lattices I <= K inside Z_p^n.

    Generators are given as columns.  The quotient is computed in the
    coordinates of a basis of span(K); the division by the basis pivots
    costs precision, so the final Smith form runs at ``e - max pivot``.
    """
    K = ctx.array(K)
    I = ctx.array(I)
    n = K.shape[0]
    if K.shape[1] == 0:
        if I.size and np.any(I):
            raise PrecisionError("image not contained in zero lattice")
        return CokernelStructure((), 0, ctx.p)
    sf = smith(K, ctx, want_q=False)
    basis = [i for i, a in enumerate(sf.diag) if a < ctx.e]
    if not basis:
        return CokernelStructure((), 0, ctx.p)
    W = ctx.matmul(sf.P, I) if I.shape[1] else ctx.zeros(n, 0)
    others = [i for i in range(n) if i not in set(basis)]
    if others and W.shape[1] and np.any(W[others, :]):
        raise PrecisionError("image leaves the kernel lattice at this precision")
    loss = max(sf.diag[i] for i in basis)
    inner = ctx.with_precision(ctx.e - loss) if ctx.e - loss >= 1 else None
    if inner is None:
        raise PrecisionError("precision exhausted by kernel pivots")
    C = np.zeros((len(basis), W.shape[1]), dtype=inner.dtype)
    for r, i in enumerate(basis):
        pa = ctx.p ** sf.diag[i]
        row = W[i, :]
        if W.shape[1] and np.any(np.mod(row, pa)):
            raise PrecisionError("image not divisible by kernel pivot")
        C[r, :] = np.mod(row // pa, inner.modulus) if W.shape[1] else C[r, :]
    return cokernel_structure(C, inner)
