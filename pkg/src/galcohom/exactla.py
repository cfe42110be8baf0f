"""Exact linear algebra over the integers and over Z/n.

Matrices are dense.  Small matrices and matrices over Z or over Z/n with n
not a prime power go through a pure Python Smith normal form on Python
integers.  Large matrices over Z/p^k go through a vectorised elimination
over the local ring Z/p^k on int64 numpy arrays, which is exact because
every product is reduced before it can exceed 2^62.

A modulus of 0 stands for the ring Z throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Optional, Sequence

import numpy as np

# moduli up to this bound use int64 arithmetic (q^2 stays below 2^62)
_INT64_MODULUS_CAP = 1 << 24


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with g = s*a + t*b = gcd(a, b) and g >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def prime_power(n: int) -> Optional[tuple[int, int]]:
    """Return (p, k) when n = p^k with k >= 1, else None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n:
        if n % p == 0:
            break
        p += 1
    else:
        p = n
    k = 0
    m = n
    while m % p == 0:
        m //= p
        k += 1
    return (p, k) if m == 1 else None


def valuation(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _unit_factor(d: int, n: int) -> tuple[int, int]:
    """Write d = g*u mod n with g = gcd(d, n) and u a unit; return (g, u)."""
    g = gcd(d, n)
    if g == 0:
        return 0, 1
    d1, n1 = (d // g) % max(n // g, 1), n // g
    u = d1 if n1 > 1 else 1
    while gcd(u, n) != 1:
        u += n1
    return g, u % n


def dtype_for(modulus: int):
    return np.int64 if 0 < modulus <= _INT64_MODULUS_CAP else object


def as_array(rows, modulus: int = 0, shape=None) -> np.ndarray:
    """Convert nested lists to an exact numpy array reduced into [0, modulus)."""
    arr = np.array(rows, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    if modulus:
        arr = arr % modulus
    return arr.astype(dtype_for(modulus))


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# Smith normal form, pure Python


@dataclass(frozen=True)
class SmithDecomposition:
    """U*A*V = D with U, V invertible over the ring and D diagonal.

    Invariant factors are the diagonal entries of D; over Z/n they are
    normalised to divisors of n, so the divisibility chain is a chain of
    ideals.
    """

    U: list
    D: list
    V: list
    modulus: int
    U_inv: list
    V_inv: list

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def invariant_factors(self) -> list[int]:
        """Nonzero diagonal entries in order (rank many)."""
        return [d for d in self.diagonal if d != 0]

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


def _size(x: int, n: int) -> int:
    if n:
        x %= n
        return min(x, n - x)
    return abs(x)


def smith_normal_form(A: Sequence[Sequence[int]], modulus: int = 0) -> SmithDecomposition:
    """Smith normal form of an integer matrix over Z (modulus 0) or Z/modulus.

    The pivot is the nonzero entry of minimal absolute value (symmetric
    representative over Z/n), ties broken by smallest row then column.
    Over Z/n the integer algorithm runs on representatives with every row
    and column operation reduced mod n; the resulting diagonal entries are
    replaced by their gcd with n (a unit rescaling of the row).
    """
    n_mod = modulus
    M = [[(x % n_mod if n_mod else x) for x in row] for row in A]
    m = len(M)
    n = len(M[0]) if m else 0
    U, Ui, V, Vi = _identity(m), _identity(m), _identity(n), _identity(n)

    def red(x):
        return x % n_mod if n_mod else x

    def row_comb(i, j, a, b, c, d):
        # rows (i, j) <- (a*ri + b*rj, c*ri + d*rj), det = 1
        for X in (M, U):
            ri, rj = X[i], X[j]
            X[i] = [red(a * x + b * y) for x, y in zip(ri, rj)]
            X[j] = [red(c * x + d * y) for x, y in zip(ri, rj)]
        # inverse acts on columns of U^{-1}: inverse matrix [[d, -b], [-c, a]]
        for row in Ui:
            x, y = row[i], row[j]
            row[i], row[j] = red(d * x - c * y), red(-b * x + a * y)

    def col_comb(i, j, a, b, c, d):
        # columns (i, j) <- (a*ci + b*cj, c*ci + d*cj), det = 1
        for X in (M, V):
            for row in X:
                x, y = row[i], row[j]
                row[i], row[j] = red(a * x + b * y), red(c * x + d * y)
        ri, rj = Vi[i], Vi[j]
        Vi[i] = [red(d * x - c * y) for x, y in zip(ri, rj)]
        Vi[j] = [red(-b * x + a * y) for x, y in zip(ri, rj)]

    def swap_rows(i, j):
        if i == j:
            return
        for X in (M, U):
            X[i], X[j] = X[j], X[i]
        for row in Ui:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i == j:
            return
        for X in (M, V):
            for row in X:
                row[i], row[j] = row[j], row[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def scale_row(i, u):
        # multiply row i by the unit u (u = -1 over Z)
        uinv = pow(u, -1, n_mod) if n_mod else u
        for X in (M, U):
            X[i] = [red(u * x) for x in X[i]]
        for row in Ui:
            row[i] = red(row[i] * uinv)

    def normalise_pivot(t):
        a = M[t][t]
        if n_mod:
            g, u = _unit_factor(a, n_mod)
            if u != 1:
                scale_row(t, pow(u, -1, n_mod))
        elif a < 0:
            scale_row(t, -1)

    def divides(a, b):
        return b % a == 0 if a else b == 0

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = M[i][j]
                if x and (not n_mod or x % n_mod):
                    s = _size(x, n_mod)
                    if best is None or s < best[0]:
                        best = (s, i, j)
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        normalise_pivot(t)
        while True:
            for i in range(t + 1, m):
                b = M[i][t]
                if b == 0:
                    continue
                a = M[t][t]
                if divides(a, b):
                    row_comb(t, i, 1, 0, -(b // a), 1)
                else:
                    g, s, r = xgcd(a, b)
                    row_comb(t, i, s, r, -(b // g), a // g)
                    normalise_pivot(t)
            for j in range(t + 1, n):
                b = M[t][j]
                if b == 0:
                    continue
                a = M[t][t]
                if divides(a, b):
                    col_comb(t, j, 1, 0, -(b // a), 1)
                else:
                    g, s, r = xgcd(a, b)
                    col_comb(t, j, s, r, -(b // g), a // g)
                    normalise_pivot(t)
            if any(M[i][t] for i in range(t + 1, m)) or any(M[t][j] for j in range(t + 1, n)):
                continue
            a = M[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if not divides(a, M[i][j]):
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_comb(t, bad, 1, 1, 0, 1)
    return SmithDecomposition(U=U, D=M, V=V, modulus=modulus, U_inv=Ui, V_inv=Vi)


# ---------------------------------------------------------------------------
# local ring elimination on numpy arrays


@dataclass
class LocalReduction:
    """Result of eliminating A over Z/p^k: P*A*V = diag(p^vals) padded by zeros."""

    p: int
    k: int
    vals: list
    P: Optional[np.ndarray] = None
    P_inv: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    V_inv: Optional[np.ndarray] = None
    rhs: Optional[np.ndarray] = None
    ops: Optional[list] = None


def _val_array(x: np.ndarray, p: int, k: int) -> np.ndarray:
    out = np.full(x.shape, k, dtype=np.int64)
    nz = x != 0
    y = x.copy()
    v = np.zeros(x.shape, dtype=np.int64)
    for _ in range(k):
        mask = nz & (y % p == 0)
        if not mask.any():
            break
        v[mask] += 1
        y[mask] //= p
    out[nz] = v[nz]
    return out


def local_reduce(A: np.ndarray, p: int, k: int, rhs: Optional[np.ndarray] = None,
                 track_P: bool = False, track_V: bool = False, record: bool = False) -> LocalReduction:
    """Diagonalise A over Z/p^k by pivoting on an entry of minimal valuation.

    Row operations are applied to `rhs` when given.  P and V (with their
    inverses) are accumulated on request; with `record` the row operations
    are kept so they can be replayed on later right-hand sides.
    """
    q = p ** k
    M = np.array(A, dtype=np.int64) % q
    m, n = M.shape
    B = None if rhs is None else (np.array(rhs, dtype=np.int64) % q).reshape(m, -1)
    P = np.eye(m, dtype=np.int64) if track_P else None
    Pi = np.eye(m, dtype=np.int64) if track_P else None
    V = np.eye(n, dtype=np.int64) if track_V else None
    Vi = np.eye(n, dtype=np.int64) if track_V else None
    vals = []
    ops = [] if record else None
    t = 0
    while t < min(m, n):
        sub = M[t:, t:]
        units = (sub % p) != 0
        if units.any():
            flat = int(np.argmax(units))
            v = 0
        else:
            if not sub.any():
                break
            va = _val_array(sub, p, k)
            flat = int(np.argmin(va))
            v = int(va.flat[flat])
        i, j = divmod(flat, sub.shape[1])
        i += t
        j += t
        if i != t:
            M[[t, i]] = M[[i, t]]
            if B is not None:
                B[[t, i]] = B[[i, t]]
            if track_P:
                P[[t, i]] = P[[i, t]]
                Pi[:, [t, i]] = Pi[:, [i, t]]
        if j != t:
            M[:, [t, j]] = M[:, [j, t]]
            if track_V:
                V[:, [t, j]] = V[:, [j, t]]
                Vi[[t, j]] = Vi[[j, t]]
        pv = p ** v
        a = int(M[t, t])
        u = (a // pv) % q
        uinv = pow(u, -1, q)
        if u != 1:
            M[t, t:] = (M[t, t:] * uinv) % q
            if B is not None:
                B[t] = (B[t] * uinv) % q
            if track_P:
                P[t] = (P[t] * uinv) % q
                Pi[:, t] = (Pi[:, t] * u) % q
        col = M[t + 1:, t]
        nzr = np.nonzero(col)[0]
        if record:
            rows_r = nzr + t + 1
            ops.append((t, i, uinv if u != 1 else 1, rows_r, (M[rows_r, t] // pv) % q))
        if nzr.size:
            rows = nzr + t + 1
            f = (M[rows, t] // pv) % q
            M[rows, t:] = (M[rows, t:] - np.outer(f, M[t, t:])) % q
            if B is not None:
                B[rows] = (B[rows] - np.outer(f, B[t])) % q
            if track_P:
                P[rows] = (P[rows] - np.outer(f, P[t])) % q
                Pi[:, t] = (Pi[:, t] + Pi[:, rows] @ f) % q
        row = M[t, t + 1:]
        nzc = np.nonzero(row)[0]
        if nzc.size:
            cols = nzc + t + 1
            g = (M[t, cols] // pv) % q
            M[t, cols] = 0
            if track_V:
                V[:, cols] = (V[:, cols] - np.outer(V[:, t], g)) % q
                Vi[t] = (Vi[t] + g @ Vi[cols]) % q
        vals.append(v)
        t += 1
    return LocalReduction(p=p, k=k, vals=vals, P=P, P_inv=Pi, V=V, V_inv=Vi, rhs=B, ops=ops)


def replay_row_ops(red: LocalReduction, B: np.ndarray) -> np.ndarray:
    """Apply the recorded row operations of a reduction to a new right-hand side."""
    q = red.p ** red.k
    B = np.array(B, dtype=np.int64) % q
    for t, i, uinv, rows, f in red.ops:
        if i != t:
            B[[t, i]] = B[[i, t]]
        if uinv != 1:
            B[t] = (B[t] * uinv) % q
        if rows.size:
            B[rows] = (B[rows] - np.outer(f, B[t])) % q
    return B


# ---------------------------------------------------------------------------
# unified full decomposition


@dataclass
class FullSmith:
    """P*A*V = diag(d) with d normalised divisors of the modulus (0 over Z).

    `d` has length min(rows, cols); trailing entries may be 0.  P, P_inv,
    V, V_inv are numpy arrays (int64 for small moduli, object otherwise).
    """

    modulus: int
    d: list
    P: np.ndarray
    P_inv: np.ndarray
    V: np.ndarray
    V_inv: np.ndarray

    @property
    def rank(self) -> int:
        return sum(1 for x in self.d if x != 0 and x != self.modulus)


def full_smith(A, modulus: int) -> FullSmith:
    A = np.asarray(A, dtype=object) if not isinstance(A, np.ndarray) else A
    m, n = A.shape
    pp = prime_power(modulus) if modulus else None
    if pp is not None and modulus <= _INT64_MODULUS_CAP and m and n:
        p, k = pp
        red = local_reduce(A.astype(np.int64) if A.dtype != np.int64 else A, p, k,
                           track_P=True, track_V=True)
        d = [p ** v for v in red.vals] + [0] * (min(m, n) - len(red.vals))
        return FullSmith(modulus, d, red.P, red.P_inv, red.V, red.V_inv)
    rows = [[int(x) for x in r] for r in A.tolist()] if m and n else [[0] * n for _ in range(m)]
    if m == 0 or n == 0:
        dt = dtype_for(modulus)
        return FullSmith(modulus, [], np.eye(m, dtype=dt), np.eye(m, dtype=dt),
                         np.eye(n, dtype=dt), np.eye(n, dtype=dt))
    snf = smith_normal_form(rows, modulus)
    dt = dtype_for(modulus)
    d = snf.diagonal
    return FullSmith(modulus, d, as_array(snf.U, modulus).astype(dt), as_array(snf.U_inv, modulus).astype(dt),
                     as_array(snf.V, modulus).astype(dt), as_array(snf.V_inv, modulus).astype(dt))


def _matmul(A: np.ndarray, B: np.ndarray, modulus: int) -> np.ndarray:
    if A.dtype == object or B.dtype == object:
        C = np.dot(A.astype(object), B.astype(object))
    else:
        C = A @ B
    return C % modulus if modulus else C


# ---------------------------------------------------------------------------
# solving


def solve_linear(A, b, modulus: int = 0, row_moduli: Optional[Sequence[int]] = None):
    """Return some x with A*x = b over the ring, or None if none exists.

    `row_moduli` optionally gives a per-row modulus dividing `modulus`
    (equations then hold modulo that row's modulus).  A None answer is a
    proof of non-solvability: it comes from a diagonal system.
    """
    A = np.asarray(A, dtype=object)
    if A.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    b = np.asarray(b, dtype=object).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape[0]} rows, rhs length {b.shape[0]}")
    X = solve_many(A, b.reshape(-1, 1), modulus, row_moduli)
    if X is None:
        return None
    col = X[:, 0]
    return None if col is None else [int(v) for v in col]


def _scale_rows(A, b, modulus, row_moduli):
    """Turn per-row congruences into congruences modulo a single modulus."""
    if row_moduli is None:
        return A, b, modulus, 0
    rm = [int(r) for r in row_moduli]
    if modulus:
        s = np.array([modulus // r for r in rm], dtype=object).reshape(-1, 1)
        return A * s, b * s, modulus, 0
    # over Z: augment with the torsion relations
    extra = [i for i, r in enumerate(rm) if r]
    if not extra:
        return A, b, 0, 0
    aug = np.zeros((A.shape[0], len(extra)), dtype=object)
    for c, i in enumerate(extra):
        aug[i, c] = rm[i]
    return np.concatenate([A, aug], axis=1), b, 0, len(extra)


class LinearSolver:
    """Factorises A once and solves A*X = B for any number of right-hand sides.

    `row_moduli` optionally gives a per-row modulus (see solve_linear).
    """

    def __init__(self, A, modulus: int = 0, row_moduli=None):
        A = np.asarray(A, dtype=object)
        self.m, self.n = A.shape
        self.modulus = modulus
        self.row_moduli = None if row_moduli is None else [int(r) for r in row_moduli]
        As, _, mod, n_extra = _scale_rows(A, np.zeros((self.m, 1), dtype=object), modulus, self.row_moduli)
        if mod:
            As = As % mod
        self.mod = mod
        self.nn = As.shape[1]
        self.local = None
        self.snf = None
        if self.nn == 0:
            return
        pp = prime_power(mod) if mod else None
        if pp is not None and mod <= _INT64_MODULUS_CAP:
            self.local = local_reduce(As.astype(np.int64), pp[0], pp[1], track_V=True, record=True)
        else:
            self.snf = smith_normal_form([[int(x) for x in row] for row in As.tolist()], mod)

    def _scale_rhs(self, Bm):
        if self.row_moduli is not None and self.modulus:
            s = np.array([self.modulus // r for r in self.row_moduli], dtype=object).reshape(-1, 1)
            Bm = Bm * s
        return Bm % self.mod if self.mod else Bm

    def solve(self, Bm) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, ok): X[:, j] solves column j whenever ok[j]."""
        Bm = np.asarray(Bm, dtype=object)
        if Bm.ndim == 1:
            Bm = Bm.reshape(-1, 1)
        if Bm.shape[0] != self.m:
            raise ValueError(f"dimension mismatch: {self.m} rows, rhs has {Bm.shape[0]}")
        cols = Bm.shape[1]
        Bs = self._scale_rhs(Bm)
        mod = self.mod
        if self.nn == 0:
            ok = ~np.any((Bs % mod if mod else Bs) != 0, axis=0)
            return np.zeros((self.n, cols), dtype=object), np.asarray(ok).reshape(cols)
        if self.local is not None:
            red = self.local
            p = red.p
            R = replay_row_ops(red, Bs.astype(np.int64))
            r = len(red.vals)
            ok = ~np.any(R[r:] % mod != 0, axis=0)
            Y = np.zeros((self.nn, cols), dtype=np.int64)
            for t, v in enumerate(red.vals):
                pv = p ** v
                ok &= ~(R[t] % pv != 0)
                Y[t] = R[t] // pv
            X = (red.V @ Y) % mod
            return X[:self.n].astype(object), ok
        snf = self.snf
        U = np.array(snf.U, dtype=object)
        R = U.dot(Bs)
        if mod:
            R = R % mod
        d = snf.diagonal
        ok = np.ones(cols, dtype=bool)
        Y = np.zeros((self.nn, cols), dtype=object)
        for t in range(self.m):
            dt = d[t] if t < len(d) else 0
            row = R[t]
            if dt == 0 or (mod and dt == mod):
                ok &= np.array([(x % mod if mod else x) == 0 for x in row], dtype=bool)
                continue
            ok &= np.array([x % dt == 0 for x in row], dtype=bool)
            Y[t] = np.array([x // dt for x in row], dtype=object)
        X = np.array(snf.V, dtype=object).dot(Y)
        if mod:
            X = X % mod
        return X[:self.n], ok


def solve_many(A, Bm, modulus: int = 0, row_moduli=None):
    """Solve A*X = B column by column.

    Returns an object array X whose columns are solutions, or None when
    some column has no solution.
    """
    X, ok = LinearSolver(A, modulus, row_moduli).solve(Bm)
    return X if bool(np.all(ok)) else None


def kernel_basis(A, modulus: int = 0, row_moduli=None) -> np.ndarray:
    """Generators (as columns) of {x : A*x = 0} over the ring.

    Over Z the columns form a lattice basis; over Z/n they generate.
    """
    A = np.asarray(A, dtype=object)
    m, n = A.shape
    As, _, mod, n_extra = _scale_rows(A, np.zeros((m, 1), dtype=object), modulus, row_moduli)
    if mod:
        As = As % mod
    nn = As.shape[1]
    if nn == 0:
        return np.zeros((0, 0), dtype=object)
    if m == 0:
        return np.eye(n, dtype=object)
    fs = full_smith(As, mod)
    gens = []
    for t in range(nn):
        dt = fs.d[t] if t < len(fs.d) else 0
        col = fs.V[:, t].astype(object)
        if mod:
            if dt == mod or dt == 0:
                gens.append(col)
            elif dt != 1:
                gens.append((col * (mod // dt)) % mod)
        elif dt == 0:
            gens.append(col)
    if not gens:
        return np.zeros((n, 0), dtype=object)
    K = np.stack(gens, axis=1)[:n]
    return K


# ---------------------------------------------------------------------------
# presented modules


class PresentedModule:
    """The quotient R^a / (column span of `relations`) with R = Z or Z/n.

    Canonical coordinates: the invariant factors `orders` (divisors of n,
    or 0 for a free Z summand) with trivial factors dropped.  `reduce`
    maps an ambient vector to canonical coordinates and `lift` maps
    canonical coordinates back to an ambient vector.
    """

    def __init__(self, ambient_rank: int, relations, modulus: int = 0):
        self.ambient_rank = ambient_rank
        self.modulus = modulus
        R = np.asarray(relations, dtype=object).reshape(ambient_rank, -1) if ambient_rank else np.zeros((0, 0), dtype=object)
        self.relations = R
        if R.shape[1] == 0:
            R = np.zeros((ambient_rank, 1), dtype=object)
        if ambient_rank == 0:
            self.orders = ()
            self._to = np.zeros((0, 0), dtype=object)
            self._from = np.zeros((0, 0), dtype=object)
            return
        fs = full_smith(R % modulus if modulus else R, modulus)
        keep, orders = [], []
        for t in range(ambient_rank):
            dt = fs.d[t] if t < len(fs.d) else 0
            if dt == 1:
                continue
            if modulus and dt == 0:
                dt = modulus
            keep.append(t)
            orders.append(dt)
        self.orders = tuple(orders)
        self._to = fs.P[keep].astype(object) if keep else np.zeros((0, ambient_rank), dtype=object)
        self._from = fs.P_inv[:, keep].astype(object) if keep else np.zeros((ambient_rank, 0), dtype=object)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def invariant_factors(self) -> tuple:
        return self.orders

    def order(self) -> Optional[int]:
        """Number of elements, or None when infinite."""
        out = 1
        for o in self.orders:
            if o == 0:
                return None
            out *= o
        return out

    def reduce_matrix(self) -> np.ndarray:
        """Matrix sending ambient vectors to (unreduced) canonical coordinates."""
        return self._to

    def lift_matrix(self) -> np.ndarray:
        return self._from

    def canon(self, coords):
        c = np.asarray(coords, dtype=object).reshape(-1)
        return [int(x % o) if o else int(x) for x, o in zip(c, self.orders)]

    def reduce(self, element) -> list:
        x = np.asarray(element, dtype=object).reshape(-1)
        return self.canon(self._to.dot(x)) if self.rank else []

    def lift(self, coords) -> list:
        c = np.asarray(coords, dtype=object).reshape(-1)
        v = self._from.dot(c) if self.rank else np.zeros(self.ambient_rank, dtype=object)
        return [int(x % self.modulus) if self.modulus else int(x) for x in v]

    def is_zero(self, element) -> bool:
        return not any(self.reduce(element))

    def elements(self):
        """Enumerate canonical coordinate vectors (finite modules only)."""
        import itertools
        if any(o == 0 for o in self.orders):
            raise ValueError("infinite module")
        return itertools.product(*[range(o) for o in self.orders])


def quotient_presentation(ambient_rank: int, relations, modulus: int = 0) -> PresentedModule:
    return PresentedModule(ambient_rank, relations, modulus)


# ---------------------------------------------------------------------------
# subquotients: ker(D_out) / (im(D_in) + relations)


class Subquotient:
    """Homology of  C_in --D_in--> C --D_out--> C_out  at C.

    C is presented by its coordinate orders (divisors of the modulus, or 0
    over Z); the same for C_out.  Provides invariant factors, class
    coordinates of cycles and representative cycles of coordinate vectors.
    """

    def __init__(self, D_in, D_out, orders: Sequence[int], out_orders: Sequence[int], modulus: int):
        self.modulus = modulus
        N = len(orders)
        self.N = N
        D_in = np.asarray(D_in, dtype=object)
        D_out = np.asarray(D_out, dtype=object)
        D_in = D_in.reshape(N, D_in.size // N if N else (D_in.shape[-1] if D_in.ndim == 2 else 0))
        D_out = D_out.reshape(D_out.size // N if N else (D_out.shape[0] if D_out.ndim == 2 else 0), N)
        rel_cols = [j for j, o in enumerate(orders) if (o != modulus if modulus else o != 0)]
        rel = np.zeros((N, len(rel_cols)), dtype=object)
        for c, j in enumerate(rel_cols):
            rel[j, c] = orders[j]
        Bg = np.concatenate([D_in, rel], axis=1)
        if modulus:
            self._init_finite(Bg, D_out, out_orders)
        else:
            self._init_integral(Bg, D_out, out_orders)

    # finite ring Z/q
    def _init_finite(self, Bg, D_out, out_orders):
        q = self.modulus
        N = self.N
        if D_out.shape[0]:
            s = np.array([q // o for o in out_orders], dtype=object).reshape(-1, 1)
            Dbar = (D_out * s) % q
        else:
            Dbar = np.zeros((1, N), dtype=object)
        fs = full_smith(Dbar, q) if N else None
        gens_scale, gen_orders, keep = [], [], []
        for t in range(N):
            dt = fs.d[t] if t < len(fs.d) else 0
            order = q if dt in (0, q) else dt
            if order == 1:
                continue
            keep.append(t)
            gen_orders.append(order)
            gens_scale.append(q // order)
        self._keep = keep
        self._scale = gens_scale
        self._V = fs.V.astype(object) if N else np.zeros((0, 0), dtype=object)
        self._Vinv = fs.V_inv.astype(object) if N else np.zeros((0, 0), dtype=object)
        s = len(keep)
        if s:
            Y = self._Vinv[keep].dot(Bg) % q if Bg.shape[1] else np.zeros((s, 0), dtype=object)
            C = np.array([[int(x) // sc for x in row] for row, sc in zip(Y, gens_scale)], dtype=object).reshape(s, -1)
            R = np.concatenate([C, np.diag(np.array(gen_orders, dtype=object))], axis=1) % q
            fs2 = full_smith(R, q)
            korders, kidx = [], []
            for u in range(s):
                du = fs2.d[u] if u < len(fs2.d) else 0
                order = q if du in (0, q) else du
                if order == 1:
                    continue
                kidx.append(u)
                korders.append(order)
            self._P2 = fs2.P[kidx].astype(object)
            self._P2inv = fs2.P_inv[:, kidx].astype(object)
            self.orders = tuple(korders)
        else:
            self._P2 = np.zeros((0, 0), dtype=object)
            self._P2inv = np.zeros((0, 0), dtype=object)
            self.orders = ()

    def _init_integral(self, Bg, D_out, out_orders):
        N = self.N
        Z = kernel_basis(D_out, 0, row_moduli=list(out_orders)) if N else np.zeros((0, 0), dtype=object)
        if D_out.shape[0] == 0:
            Z = np.eye(N, dtype=object)
        self._Z = Z
        s = Z.shape[1]
        if s == 0:
            self.orders = ()
            self._P2 = np.zeros((0, 0), dtype=object)
            self._P2inv = np.zeros((0, 0), dtype=object)
            return
        C = solve_many(Z, Bg, 0) if Bg.shape[1] else np.zeros((s, 0), dtype=object)
        if C is None:
            raise ArithmeticError("boundaries are not cycles")
        R = C if C.shape[1] else np.zeros((s, 1), dtype=object)
        fs2 = full_smith(R, 0)
        korders, kidx = [], []
        for u in range(s):
            du = fs2.d[u] if u < len(fs2.d) else 0
            if du == 1:
                continue
            kidx.append(u)
            korders.append(du)
        self._P2 = fs2.P[kidx].astype(object)
        self._P2inv = fs2.P_inv[:, kidx].astype(object)
        self.orders = tuple(korders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    def order(self) -> Optional[int]:
        out = 1
        for o in self.orders:
            if o == 0:
                return None
            out *= o
        return out

    def _cycle_coords(self, Z):
        """Coordinates of cycles (columns of Z) on the cycle generators."""
        if self.modulus:
            q = self.modulus
            Y = self._Vinv[self._keep].dot(Z) % q
            return np.array([[int(x) // sc for x in row] for row, sc in zip(Y, self._scale)],
                            dtype=object).reshape(len(self._keep), -1)
        C = solve_many(self._Z, Z, 0)
        if C is None:
            raise ArithmeticError("not a cycle")
        return C

    def coordinates(self, cycles) -> np.ndarray:
        """Class coordinates (rows) of the given cycles (columns)."""
        Z = np.asarray(cycles, dtype=object)
        if Z.ndim == 1:
            Z = Z.reshape(-1, 1)
        if self.rank == 0:
            return np.zeros((0, Z.shape[1]), dtype=object)
        c = self._cycle_coords(Z)
        h = self._P2.dot(c)
        out = np.empty_like(h)
        for u, o in enumerate(self.orders):
            out[u] = h[u] % o if o else h[u]
        return out

    def representatives(self) -> np.ndarray:
        """One cycle (column) per generator of the subquotient."""
        if self.rank == 0:
            return np.zeros((self.N, 0), dtype=object)
        c = self._P2inv
        if self.modulus:
            q = self.modulus
            scaled = np.array([[int(x) * sc for x in row] for row, sc in zip(c, self._scale)], dtype=object)
            return self._V[:, self._keep].dot(scaled) % q
        return self._Z.dot(c)
