"""Group cohomology through the normalized bar complex.

Cochains are stored as full value tables: a p-cochain on G with values in
M is an array of shape (|G|,)*p + (rank,), zero whenever an argument is
the identity.  Coboundaries are computed on whole tables with numpy;
explicit coboundary matrices (on normalized coordinates) are built only
when a linear system has to be solved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import exactla
from .exactla import Subquotient, solve_many
from .gmod import Extension, FiniteGroup, GModule, ModuleError, reduce_vectors, tensor

# beyond this many unknowns a coboundary solve is refused
SOLVE_CAP = 60000


class CohomologyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cochains


def zero_cochain(G: FiniteGroup, M: GModule, p: int) -> np.ndarray:
    return np.zeros((G.order,) * p + (M.rank,), dtype=M.dtype)


def normalize_mask(G: FiniteGroup, p: int) -> np.ndarray:
    """Boolean array over p-tuples: True where no argument is the identity."""
    keep = np.ones(G.order, dtype=bool)
    keep[G.identity] = False
    mask = np.ones((G.order,) * p, dtype=bool)
    for ax in range(p):
        shape = [1] * p
        shape[ax] = G.order
        mask = mask & keep.reshape(shape)
    return mask


def _nonid(G: FiniteGroup) -> np.ndarray:
    return np.array(G.nonidentity(), dtype=np.int64)


def to_vector(G: FiniteGroup, f: np.ndarray) -> np.ndarray:
    """Normalized coordinates of a cochain table: tuples of non-identity
    elements in lexicographic order, module coordinates innermost."""
    p = f.ndim - 1
    idx = _nonid(G)
    sub = f
    for ax in range(p):
        sub = np.take(sub, idx, axis=ax)
    return sub.reshape(-1)


def from_vector(G: FiniteGroup, M: GModule, p: int, v) -> np.ndarray:
    idx = _nonid(G)
    n1 = len(idx)
    vals = np.asarray(v, dtype=object).reshape((n1,) * p + (M.rank,))
    out = np.zeros((G.order,) * p + (M.rank,), dtype=object)
    out[np.ix_(*([idx] * p + [np.arange(M.rank)]))] = vals
    return reduce_vectors(out, M.orders).astype(M.dtype)


def coboundary(G: FiniteGroup, M: GModule, f: np.ndarray) -> np.ndarray:
    """d f on full tables (inhomogeneous bar complex)."""
    p = f.ndim - 1
    T = G.table
    acts = M.actions
    work = f.astype(object) if M.dtype == object else f.astype(np.int64)
    # g1 . f(g2, ..., g_{p+1})
    t0 = np.tensordot(work, acts.astype(work.dtype), axes=([p], [2]))  # (...p, g, r)
    out = np.moveaxis(t0, p, 0)
    for i in range(1, p + 1):
        term = np.take(work, T, axis=i - 1)
        out = out + term if i % 2 == 0 else out - term
    last = np.expand_dims(work, axis=p)
    last = np.broadcast_to(last, (G.order,) * (p + 1) + (M.rank,))
    out = out + last if (p + 1) % 2 == 0 else out - last
    return reduce_vectors(out, M.orders).astype(M.dtype)


def is_cocycle(G: FiniteGroup, M: GModule, f: np.ndarray) -> bool:
    return not np.any(coboundary(G, M, f))


def _tuple_index(G: FiniteGroup, tuples: np.ndarray) -> np.ndarray:
    """Position of non-identity tuples in normalized lexicographic order."""
    n1 = G.order - 1
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[_nonid(G)] = np.arange(n1)
    P = pos[tuples]
    out = np.zeros(tuples.shape[0], dtype=np.int64)
    for c in range(tuples.shape[1]):
        out = out * n1 + P[:, c]
    return out


def coboundary_matrix(G: FiniteGroup, M: GModule, p: int) -> np.ndarray:
    """Matrix of d: C^p -> C^{p+1} on normalized coordinates."""
    n1 = G.order - 1
    r = M.rank
    rows = n1 ** (p + 1)
    cols = n1 ** p
    dt = np.int64 if M.dtype != object else object
    D = np.zeros((rows * r, cols * r), dtype=dt)
    if rows == 0 or r == 0:
        return D
    idx = _nonid(G)
    R = np.array(list(itertools.product(idx, repeat=p + 1)), dtype=np.int64).reshape(rows, p + 1)
    row_ids = np.arange(rows)
    ii = np.arange(r)
    acts = M.actions.astype(dt)

    def add_block(rsel, csel, block):
        # block: (k, r, r) or scalar identity coefficient
        if np.isscalar(block):
            rr = (rsel[:, None] * r + ii[None, :]).ravel()
            cc = (csel[:, None] * r + ii[None, :]).ravel()
            np.add.at(D, (rr, cc), block)
        else:
            rr = (rsel[:, None, None] * r + ii[None, :, None])
            cc = (csel[:, None, None] * r + ii[None, None, :])
            rr, cc = np.broadcast_arrays(rr, cc)
            np.add.at(D, (rr.ravel(), cc.ravel()), block.reshape(-1))

    # g1 . f(g2..)
    csel = _tuple_index(G, R[:, 1:]) if p else np.zeros(rows, dtype=np.int64)
    add_block(row_ids, csel, acts[R[:, 0]])
    for i in range(1, p + 1):
        merged = G.table[R[:, i - 1], R[:, i]]
        ok = merged != G.identity
        T2 = np.concatenate([R[:, :i - 1], merged[:, None], R[:, i + 1:]], axis=1)[ok]
        add_block(row_ids[ok], _tuple_index(G, T2), -1 if i % 2 else 1)
    csel = _tuple_index(G, R[:, :p]) if p else np.zeros(rows, dtype=np.int64)
    add_block(row_ids, csel, -1 if (p + 1) % 2 else 1)
    for k, o in enumerate(M.orders):
        if o:
            D[k::r] %= o
    return D


# ---------------------------------------------------------------------------
# cohomology groups


def _prime_power_parts(n: int) -> list:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            out.append((q, e))
        q += 1
    if n > 1:
        out.append((n, 1))
    return out


class Cohomology:
    """H^p(G, M) presented as ker d_p / im d_{p-1} on normalized cochains."""

    def __init__(self, G: FiniteGroup, M: GModule, p: int):
        if M.group is not G:
            raise ModuleError("module is over a different group")
        if p < 0:
            raise ValueError("degree must be non-negative")
        self.G, self.M, self.p = G, M, p
        n1 = G.order - 1
        size = (n1 ** p) * M.rank
        if size > SOLVE_CAP:
            raise CohomologyError(f"H^{p} would need {size} cochain coordinates (cap {SOLVE_CAP})")
        D_out = coboundary_matrix(G, M, p)
        if p == 0:
            D_in = np.zeros((M.rank, 0), dtype=object)
        else:
            D_in = coboundary_matrix(G, M, p - 1)
        n_in = n1 ** p
        n_out = n1 ** (p + 1)
        self.sq = Subquotient(D_in, D_out, list(M.orders) * n_in, list(M.orders) * n_out, M.modulus)

    @property
    def invariant_factors(self) -> tuple:
        return tuple(self.sq.orders)

    def order(self) -> Optional[int]:
        return self.sq.order()

    def is_zero(self) -> bool:
        return len(self.sq.orders) == 0

    def generators(self) -> list:
        R = self.sq.representatives()
        return [CohClass(self.G, self.M, self.p, from_vector(self.G, self.M, self.p, R[:, k]))
                for k in range(R.shape[1])]

    def coordinates(self, c: "CohClass") -> list:
        v = to_vector(self.G, c.cocycle)
        out = self.sq.coordinates(np.asarray(v, dtype=object).reshape(-1, 1))
        return [int(x) for x in np.asarray(out).reshape(-1)]

    def element(self, coords: Sequence[int]) -> "CohClass":
        gens = self.generators()
        f = zero_cochain(self.G, self.M, self.p).astype(object)
        for c, g in zip(coords, gens):
            f = f + int(c) * g.cocycle.astype(object)
        return CohClass(self.G, self.M, self.p, reduce_vectors(f, self.M.orders).astype(self.M.dtype))


def cohomology(G: FiniteGroup, M: GModule, p: int) -> Cohomology:
    return Cohomology(G, M, p)


def _generator_rows(G: FiniteGroup, p: int, r: int) -> np.ndarray:
    """Rows of C^p (normalized coordinates) whose first argument is a generator.

    A normalized p-cocycle is determined by these values: the cocycle
    identity expresses z(gh, ...) through z(g, ...), z(h, ...) and values
    with shorter first arguments.
    """
    n1 = G.order - 1
    nonid = _nonid(G)
    gens = set(int(s) for s in G.gens if s != G.identity)
    first = nonid[np.arange(n1 ** p) // (n1 ** (p - 1))]
    keep = np.array([int(g) in gens for g in first], dtype=bool)
    tuples = np.nonzero(keep)[0]
    return (tuples[:, None] * r + np.arange(r)[None, :]).reshape(-1)


def _solver(M: GModule, p: int):
    """Cached factorisation of d_{p-1} restricted to generator rows."""
    cache = M.__dict__.setdefault("_cob_solvers", {})
    if p not in cache:
        G = M.group
        unknowns = (G.order - 1) ** (p - 1) * M.rank
        if unknowns > SOLVE_CAP:
            raise CohomologyError(f"coboundary test needs {unknowns} unknowns (cap {SOLVE_CAP})")
        rows = _generator_rows(G, p, M.rank)
        D = coboundary_matrix(G, M, p - 1)[rows]
        rm = [M.orders[i % M.rank] for i in rows]
        cache[p] = (rows, exactla.LinearSolver(D, M.modulus, row_moduli=rm))
    return cache[p]


def _prime_power_models(M: GModule) -> list:
    cache = M.__dict__.setdefault("_pp_models", None)
    if cache is None:
        cache = []
        for q, e in _prime_power_parts(M.group.order):
            n = q ** e
            cache.append(GModule(M.group, n, [n] * M.rank, M.actions, check=False, label=f"{M.label}/{n}"))
        M.__dict__["_pp_models"] = cache
    return cache


def coboundary_flags(G: FiniteGroup, M: GModule, cocycles: Sequence[np.ndarray]) -> list:
    """For each cocycle (full table), whether it is a coboundary."""
    if not cocycles:
        return []
    p = cocycles[0].ndim - 1
    if p == 0:
        return [not np.any(reduce_vectors(f.astype(object), M.orders)) for f in cocycles]
    flags = [not np.any(f) for f in cocycles]
    todo = [k for k, fl in enumerate(flags) if not fl]
    if not todo:
        return flags
    if G.order == 1:
        return [True] * len(cocycles)
    if M.modulus == 0 and all(o == 0 for o in M.orders):
        # over a free Z-module a class of positive degree vanishes iff it
        # vanishes modulo each prime power exactly dividing |G|
        ok = np.ones(len(todo), dtype=bool)
        for Mn in _prime_power_models(M):
            n = Mn.modulus
            sub = coboundary_flags(G, Mn, [(cocycles[k].astype(object) % n).astype(Mn.dtype) for k in todo])
            ok &= np.array(sub, dtype=bool)
        for k, v in zip(todo, ok):
            flags[k] = bool(v)
        return flags
    rows, solver = _solver(M, p)
    rhs = np.stack([np.asarray(to_vector(G, cocycles[k]), dtype=object)[rows] for k in todo], axis=1)
    _, ok = solver.solve(rhs)
    for k, v in zip(todo, ok):
        flags[k] = bool(v)
    return flags


def is_coboundary(G: FiniteGroup, M: GModule, f: np.ndarray) -> bool:
    """Whether a cocycle is a coboundary, by solving d y = f."""
    return coboundary_flags(G, M, [f])[0]


@dataclass
class CohClass:
    """A cohomology class, stored by a representing cocycle."""

    G: FiniteGroup
    M: GModule
    p: int
    cocycle: np.ndarray

    def is_zero(self) -> bool:
        return is_coboundary(self.G, self.M, self.cocycle)

    def __add__(self, other: "CohClass") -> "CohClass":
        f = self.cocycle.astype(object) + other.cocycle.astype(object)
        return CohClass(self.G, self.M, self.p, reduce_vectors(f, self.M.orders).astype(self.M.dtype))

    def __sub__(self, other: "CohClass") -> "CohClass":
        f = self.cocycle.astype(object) - other.cocycle.astype(object)
        return CohClass(self.G, self.M, self.p, reduce_vectors(f, self.M.orders).astype(self.M.dtype))

    def scale(self, k: int) -> "CohClass":
        f = self.cocycle.astype(object) * k
        return CohClass(self.G, self.M, self.p, reduce_vectors(f, self.M.orders).astype(self.M.dtype))

    def equals(self, other: "CohClass") -> bool:
        if other.M is not self.M or other.p != self.p:
            raise ValueError("classes live in different groups")
        return (self - other).is_zero()

    def check_cocycle(self) -> bool:
        return is_cocycle(self.G, self.M, self.cocycle)


def push_forward(f, c: CohClass) -> CohClass:
    """Image of a class under a module map."""
    vals = f.apply_values(c.cocycle)
    return CohClass(c.G, f.target, c.p, vals)


def cochain_class(G: FiniteGroup, M: GModule, values: dict, p: int) -> CohClass:
    """Class of the cochain given on tuples of element indices (others zero)."""
    f = np.zeros((G.order,) * p + (M.rank,), dtype=object)
    for key, val in values.items():
        key = (key,) if isinstance(key, int) else tuple(key)
        f[key] = np.asarray(val, dtype=object)
    f = reduce_vectors(f, M.orders).astype(M.dtype)
    c = CohClass(G, M, p, f)
    if not c.check_cocycle():
        raise ValueError("cochain is not a cocycle")
    return c


# ---------------------------------------------------------------------------
# products


def _product_table(G: FiniteGroup, p: int) -> np.ndarray:
    """Array over p-tuples giving g1 g2 ... gp."""
    if p == 0:
        return np.array(G.identity)
    out = np.arange(G.order)
    for _ in range(p - 1):
        out = G.table[out[..., None], np.arange(G.order)]
    return out


def cup(x: CohClass, y: CohClass, target: Optional[GModule] = None) -> CohClass:
    """(x u y)(g1..g_{p+q}) = x(g1..gp) (x) (g1...gp) y(g_{p+1}..) in M (x) N."""
    G = x.G
    p, q = x.p, y.p
    M, N = x.M, y.M
    T = target or tensor(M, N)
    prod = _product_table(G, p)
    yv = y.cocycle.astype(object)
    ya = np.tensordot(yv, N.actions.astype(object), axes=([q], [2]))  # (...q, g, rN)
    yt = np.take(ya, prod, axis=q)  # (...q, ...p, rN)
    yt = np.moveaxis(yt, list(range(q)), list(range(p, p + q))) if q else yt
    xv = x.cocycle.astype(object).reshape((G.order,) * p + (1,) * q + (M.rank, 1))
    out = xv * yt.reshape(yt.shape[:-1] + (1, N.rank))
    out = out.reshape((G.order,) * (p + q) + (M.rank * N.rank,))
    return CohClass(G, T, p + q, reduce_vectors(out, T.orders).astype(T.dtype))


# ---------------------------------------------------------------------------
# connecting homomorphisms


class _Divider:
    """Solves inj(u) = w for many w at once."""

    def __init__(self, inj):
        self.inj = inj

    def divide(self, W: np.ndarray) -> np.ndarray:
        B = self.inj.target
        A = self.inj.source
        if A.rank == 0 or B.rank == 0:
            return np.zeros(W.shape[:-1] + (A.rank,), dtype=A.dtype)
        flat = W.reshape(-1, B.rank)
        nz = np.nonzero(np.any(flat != 0, axis=1))[0]
        out = np.zeros((flat.shape[0], A.rank), dtype=object)
        if len(nz):
            rows = flat[nz]
            if rows.dtype != object:
                uniq, inv = np.unique(rows, axis=0, return_inverse=True)
            else:
                uniq, inv = rows, np.arange(len(nz))
            X = solve_many(self.inj.matrix, uniq.T.astype(object), B.modulus, row_moduli=list(B.orders))
            if X is None:
                raise CohomologyError("coboundary of the lift does not come from the submodule")
            out[nz] = X.T[np.asarray(inv).reshape(-1)]
        out = reduce_vectors(out, A.orders)
        return out.reshape(W.shape[:-1] + (A.rank,)).astype(A.dtype)


def connecting(E: Extension, x: CohClass) -> CohClass:
    """delta: H^p(C) -> H^{p+1}(A) for 0 -> A -> B -> C -> 0."""
    if E.kind != "short":
        raise ValueError("connecting needs a short exact sequence")
    A, B, C = E.modules
    if x.M is not C:
        raise ValueError("class does not live in the quotient term")
    G = x.G
    S = np.asarray(E.section, dtype=object)
    z = reduce_vectors(x.cocycle.astype(object), C.orders)
    lift = np.tensordot(z, S.T, axes=([z.ndim - 1], [0])) if B.rank and C.rank else \
        np.zeros(z.shape[:-1] + (B.rank,), dtype=object)
    lift = reduce_vectors(lift, B.orders).astype(B.dtype)
    dl = coboundary(G, B, lift)
    if E._divider is None:
        E._divider = _Divider(E.maps[0])
    y = E._divider.divide(dl)
    return CohClass(G, A, x.p + 1, y)


def connecting2(E: Extension, x: CohClass) -> CohClass:
    """H^p(D) -> H^{p+2}(A) for a 4-term exact sequence, via its splice."""
    if E.kind != "yoneda2":
        raise ValueError("connecting2 needs a 4-term exact sequence")
    if getattr(E, "_spliced", None) is None:
        E._spliced = E.splice()
    e1, e2 = E._spliced
    return connecting(e1, connecting(e2, x))


# ---------------------------------------------------------------------------
# bounded complexes over a ring


@dataclass
class BoundedComplex:
    """C^0 -> C^1 -> ... with C^i = (Z/n)-module of given orders and
    differentials d[i]: C^i -> C^{i+1} (matrices)."""

    modulus: int
    orders: list
    d: list

    def __post_init__(self):
        self.orders = [tuple(o) for o in self.orders]
        self.d = [np.asarray(m, dtype=object).reshape(len(self.orders[i + 1]), len(self.orders[i]))
                  for i, m in enumerate(self.d)]
        if len(self.d) != len(self.orders) - 1:
            raise ValueError("need one differential between consecutive terms")
        for i in range(len(self.d) - 1):
            comp = self.d[i + 1].dot(self.d[i])
            if not _zero_in(comp, self.orders[i + 2]):
                raise ValueError(f"d^{i + 1} d^{i} != 0")

    @property
    def length(self) -> int:
        return len(self.orders)

    def cohomology(self, i: int) -> Subquotient:
        n = self.modulus
        D_in = self.d[i - 1] if i > 0 else np.zeros((len(self.orders[i]), 0), dtype=object)
        D_out = self.d[i] if i < len(self.d) else np.zeros((0, len(self.orders[i])), dtype=object)
        out_orders = self.orders[i + 1] if i < len(self.d) else ()
        return Subquotient(D_in, D_out, list(self.orders[i]), list(out_orders), n)


def _zero_in(M: np.ndarray, orders) -> bool:
    for i, o in enumerate(orders):
        row = M[i] % o if o else M[i]
        if np.any(row != 0):
            return False
    return True


def is_chain_map(C: BoundedComplex, f: Sequence) -> bool:
    for i in range(len(C.d)):
        lhs = C.d[i].dot(np.asarray(f[i], dtype=object))
        rhs = np.asarray(f[i + 1], dtype=object).dot(C.d[i])
        if not _zero_in(lhs - rhs, C.orders[i + 1]):
            return False
    return True


def induced_is_zero(C: BoundedComplex, f: Sequence, i: int) -> bool:
    H = C.cohomology(i)
    R = H.representatives()
    if R.shape[1] == 0:
        return True
    img = np.asarray(f[i], dtype=object).dot(R)
    D_in = C.d[i - 1] if i > 0 else np.zeros((len(C.orders[i]), 0), dtype=object)
    if D_in.shape[1] == 0:
        return _zero_in(img, C.orders[i])
    return solve_many(D_in, img, C.modulus, row_moduli=list(C.orders[i])) is not None


def compose_chain_maps(f: Sequence, g: Sequence) -> list:
    """f after g, degreewise."""
    return [np.asarray(a, dtype=object).dot(np.asarray(b, dtype=object)) for a, b in zip(f, g)]


def null_homotopy(C: BoundedComplex, f: Sequence) -> Optional[list]:
    """Maps h^i: C^i -> C^{i-1} with d h + h d = f, or None if none exist."""
    n = len(C.orders)
    ranks = [len(o) for o in C.orders]
    # unknown blocks h^i for i = 1..n-1, each ranks[i-1] x ranks[i], row-major
    offs = [0] * (n + 1)
    for i in range(1, n):
        offs[i + 1] = offs[i] + ranks[i - 1] * ranks[i]
    total = offs[n]
    rows, rhs, rmod = [], [], []
    for i in range(n):
        ri = ranks[i]
        F = np.asarray(f[i], dtype=object).reshape(ri, ri)
        for a in range(ri):
            for b in range(ri):
                row = np.zeros(total, dtype=object)
                # (d^{i-1} h^i)[a, b] = sum_k d^{i-1}[a, k] h^i[k, b]
                if i >= 1:
                    Dm = C.d[i - 1]
                    for k in range(ranks[i - 1]):
                        row[offs[i] + k * ri + b] += Dm[a, k]
                # (h^{i+1} d^i)[a, b] = sum_k h^{i+1}[a, k] d^i[k, b]
                if i + 1 < n:
                    Dp = C.d[i]
                    for k in range(ranks[i + 1]):
                        row[offs[i + 1] + a * ranks[i + 1] + k] += Dp[k, b]
                rows.append(row)
                rhs.append(F[a, b])
                rmod.append(C.orders[i][a])
    # well-definedness of h^i on torsion coordinates
    for i in range(1, n):
        for b, ob in enumerate(C.orders[i]):
            if ob == C.modulus:
                continue
            for a in range(ranks[i - 1]):
                row = np.zeros(total, dtype=object)
                row[offs[i] + a * ranks[i] + b] = ob
                rows.append(row)
                rhs.append(0)
                rmod.append(C.orders[i - 1][a])
    if total == 0:
        ok = all(_zero_in(np.asarray(f[i], dtype=object).reshape(ranks[i], ranks[i]), C.orders[i]) for i in range(n))
        return [] if ok else None
    A = np.stack(rows)
    x = exactla.solve_linear(A, rhs, C.modulus, row_moduli=rmod)
    if x is None:
        return None
    hs = [None]
    for i in range(1, n):
        blk = np.asarray(x[offs[i]:offs[i + 1]], dtype=object).reshape(ranks[i - 1], ranks[i])
        hs.append(blk % C.modulus if C.modulus else blk)
    return hs


@dataclass
class NilpotencyCertificate:
    exponent: int
    power: list
    homotopy: list


def nilpotency_certificate(C: BoundedComplex, f: Sequence) -> NilpotencyCertificate:
    """If f induces zero on every cohomology group, f^length is null-homotopic;
    returns the power and a homotopy witnessing it."""
    if not is_chain_map(C, f):
        raise ValueError("not a chain map")
    for i in range(C.length):
        if not induced_is_zero(C, f, i):
            raise ValueError(f"f is nonzero on cohomology in degree {i}")
    k = C.length
    power = [np.eye(len(o), dtype=object) for o in C.orders]
    for _ in range(k):
        power = compose_chain_maps(f, power)
    h = null_homotopy(C, power)
    if h is None:
        raise CohomologyError(f"f^{k} is not null-homotopic")
    return NilpotencyCertificate(exponent=k, power=power, homotopy=h)
