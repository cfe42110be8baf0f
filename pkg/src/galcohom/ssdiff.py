"""Spectral-sequence differentials as explicit maps on group cohomology.

Every differential is evaluated on the generators of its source
cohomology group, producing one output class per generator.  Class
equality is decided by coboundary tests; target presentations are only
computed on request (they can be much larger than the tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import exactla
from .cohom import (CohClass, Cohomology, CohomologyError, coboundary_flags, connecting, connecting2, cup,
                    push_forward, zero_cochain)
from .gmod import (Extension, FiniteGroup, GModule, GModuleMap, ModuleError, alpha_extension, as_ring,
                   bockstein_extension, derived_reduction, genius_extension, inverse_character, mat_mul,
                   pullback_extension, reduce_vectors, short_extension, signed_sym_coinv, tensor,
                   tensor_to_wedge, twist, wedge2, mu4_extension, dual)

# target presentations above this many cochain coordinates are skipped
PRESENTATION_CAP = 6000


# ---------------------------------------------------------------------------
# helpers


def same_module(A: GModule, B: GModule) -> bool:
    return A.group is B.group and A.orders == B.orders and np.array_equal(
        np.asarray(A.actions, dtype=object), np.asarray(B.actions, dtype=object))


def recast(c: CohClass, M: GModule) -> CohClass:
    """The same cocycle read in an identical module object."""
    if c.M is M:
        return c
    if not same_module(c.M, M):
        raise ModuleError(f"cannot identify {c.M} with {M}")
    return CohClass(c.G, M, c.p, c.cocycle.astype(M.dtype))


def zero_class(G: FiniteGroup, M: GModule, p: int) -> CohClass:
    return CohClass(G, M, p, zero_cochain(G, M, p))


def classes_zero(classes: Sequence[CohClass]) -> list:
    """Zero flags for classes, batching the coboundary tests per module."""
    flags = [None] * len(classes)
    groups = {}
    for k, c in enumerate(classes):
        groups.setdefault((id(c.M), c.p), []).append(k)
    for ks in groups.values():
        c0 = classes[ks[0]]
        res = coboundary_flags(c0.G, c0.M, [classes[k].cocycle for k in ks])
        for k, v in zip(ks, res):
            flags[k] = v
    return flags


def scale_map(M: GModule, N: GModule, k: int) -> GModuleMap:
    return GModuleMap(M, N, k * np.eye(M.rank, dtype=object), check=False)


# ---------------------------------------------------------------------------
# reports


@dataclass
class DifferentialReport:
    """A map H^p(G, source) -> H^{p+shift}(G, target) given on generators."""

    label: str
    group: FiniteGroup
    source: GModule
    target: GModule
    degree: int
    shift: int
    source_factors: tuple
    images: list
    notes: dict = field(default_factory=dict)
    generators: list = field(default_factory=list, repr=False)
    _zero: Optional[list] = field(default=None, repr=False)
    _matrix: Optional[tuple] = field(default=None, repr=False)

    def zero_flags(self) -> list:
        if self._zero is None:
            self._zero = classes_zero(self.images)
        return self._zero

    def is_zero(self) -> bool:
        return all(self.zero_flags())

    def annihilated_by(self, k: int) -> bool:
        return all(classes_zero([c.scale(k) for c in self.images]))

    def equals(self, other: "DifferentialReport") -> bool:
        if len(self.images) != len(other.images) or not same_module(self.source, other.source) or any(
                not np.array_equal(a.cocycle.astype(object), b.cocycle.astype(object))
                for a, b in zip(self.generators, other.generators)):
            raise ValueError("reports are evaluated on different source generators")
        diffs = [a - recast(b, a.M) for a, b in zip(self.images, other.images)]
        return all(classes_zero(diffs))

    def matrix(self, cap: int = PRESENTATION_CAP):
        """(target invariant factors, matrix with one column per source generator),
        or None when the target presentation is too large."""
        if self._matrix is None:
            tdeg = self.degree + self.shift
            size = (self.group.order - 1) ** (tdeg + 1) * self.target.rank
            if size > cap:
                return None
            H = Cohomology(self.group, self.target, tdeg)
            cols = [H.coordinates(c) for c in self.images]
            self._matrix = (H.invariant_factors, cols)
        return self._matrix

    def image_factors(self, cap: int = PRESENTATION_CAP):
        mt = self.matrix(cap)
        if mt is None:
            return None
        orders, cols = mt
        if not orders or not cols:
            return ()
        t = len(orders)
        C = np.array(cols, dtype=object).T.reshape(t, len(cols))
        # relations among the columns: c with C c in the lattice diag(orders)
        D = np.diag(np.array(orders, dtype=object))
        K = exactla.kernel_basis(np.concatenate([C, D], axis=1), 0)
        rel = K[:len(cols)] if K.size else np.zeros((len(cols), 0), dtype=object)
        pm = exactla.PresentedModule(len(cols), rel, 0)
        return tuple(pm.orders)

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "group": self.group.label or f"order {self.group.order}",
            "group_order": self.group.order,
            "source": self.source.label,
            "target": self.target.label,
            "degree": self.degree,
            "target_degree": self.degree + self.shift,
            "source_factors": list(self.source_factors),
            "zero": self.is_zero(),
            "zero_flags": list(self.zero_flags()),
        }
        mt = self.matrix()
        if mt is not None:
            out["target_factors"] = list(mt[0])
            out["matrix"] = [[int(x) for x in col] for col in mt[1]]
            out["image_factors"] = list(self.image_factors() or ())
        out.update({k: v for k, v in self.notes.items()})
        return out


def canonical(M: GModule) -> GModule:
    """M read over the ring given by its largest coordinate order.

    Reports whose sources are the same module in different rings are
    evaluated on the generators of this common presentation.
    """
    top = 0 if 0 in M.orders else max(M.orders, default=1)
    return GModule(M.group, top, M.orders, M.actions, label=M.label, check=False)


def evaluate(label: str, G: FiniteGroup, source: GModule, p: int, target: GModule, shift: int,
             fn: Callable[[CohClass], CohClass], notes: Optional[dict] = None) -> DifferentialReport:
    base = canonical(source)
    H = Cohomology(G, base, p)
    gens = H.generators()
    images = [recast(fn(recast(x, source)), target) for x in gens]
    rep = DifferentialReport(label, G, base, target, p, shift, H.invariant_factors, images, notes or {})
    rep.generators = gens
    return rep


def chain(x: CohClass, stages: Sequence[Callable[[CohClass], CohClass]], zero_checks: bool = True):
    """Apply stages in turn; once an intermediate class vanishes the rest
    of the composite is zero and None is returned."""
    for k, st in enumerate(stages):
        if zero_checks and k and x.is_zero():
            return None
        x = st(x)
    return x


# ---------------------------------------------------------------------------
# splitting of short extensions


@dataclass
class SplitResult:
    split: bool
    section: Optional[np.ndarray]
    retraction: Optional[np.ndarray]
    certificate: str


def _section_system(E: Extension):
    A, B, C = E.modules
    inj, surj = E.maps
    b, c = B.rank, C.rank
    Ic = np.eye(c, dtype=object)
    Ib = np.eye(b, dtype=object)
    rows, rhs, rmod = [], [], []
    # surj * S = identity
    rows.append(np.kron(np.asarray(surj.matrix, dtype=object), Ic))
    rhs.append(np.eye(c, dtype=object).reshape(-1))
    rmod += [C.orders[i] for i in range(c) for _ in range(c)]
    for s in B.group.gens:
        rb = np.asarray(B.actions[s], dtype=object)
        rc = np.asarray(C.actions[s], dtype=object)
        rows.append(np.kron(rb, Ic) - np.kron(Ib, rc.T))
        rhs.append(np.zeros(b * c, dtype=object))
        rmod += [B.orders[i] for i in range(b) for _ in range(c)]
    for j, oj in enumerate(C.orders):
        if oj == B.modulus:
            continue
        blk = np.zeros((b, b * c), dtype=object)
        for i in range(b):
            blk[i, i * c + j] = oj
        rows.append(blk)
        rhs.append(np.zeros(b, dtype=object))
        rmod += list(B.orders)
    return np.concatenate(rows, axis=0), np.concatenate(rhs), rmod


def is_equivariant_section(E: Extension, S) -> bool:
    A = _section_system(E)
    M, rhs, rmod = A
    vec = np.asarray(S, dtype=object).reshape(-1)
    res = M.dot(vec) - rhs
    return all((x % o if o else x) == 0 for x, o in zip(res, rmod))


def splitting_test(E: Extension) -> SplitResult:
    """Search for an equivariant section of the surjection of E."""
    if E.kind != "short":
        raise ValueError("splitting is tested on short extensions")
    A, B, C = E.modules
    if C.rank == 0:
        return SplitResult(True, np.zeros((B.rank, 0), dtype=object), None, "quotient is zero")
    M, rhs, rmod = _section_system(E)
    x = exactla.solve_linear(M, rhs, B.modulus, row_moduli=rmod)
    if x is None:
        return SplitResult(False, None, None, "equivariant section system has no solution")
    S = np.asarray(x, dtype=object).reshape(B.rank, C.rank)
    # retraction r(b) = inj^{-1}(b - S surj b)
    proj = np.eye(B.rank, dtype=object) - S.dot(np.asarray(E.maps[1].matrix, dtype=object))
    R = exactla.solve_many(E.maps[0].matrix, proj, B.modulus, row_moduli=list(B.orders))
    return SplitResult(True, S, R, "equivariant section found")


# ---------------------------------------------------------------------------
# alpha


@dataclass
class AlphaReport:
    extension: Extension
    maps: dict
    splitting: SplitResult


def alpha_class(V: GModule, degrees: Sequence[int] = (0, 1)) -> AlphaReport:
    """Connecting maps H^p(Lambda^2 V) -> H^{p+1}(V) of the alpha sequence."""
    E = alpha_extension(V)
    G = V.group
    maps = {}
    for p in degrees:
        maps[p] = evaluate(f"alpha[{p}]", G, E.quotient, p, E.sub, 1, lambda x: connecting(E, x))
    return AlphaReport(E, maps, splitting_test(E))


# ---------------------------------------------------------------------------
# second-page differential from the quadratic-function sequence


def _read(M: GModule, modulus: int, orders_exp: Optional[int] = None, p: int = 2, label: str = "") -> GModule:
    """M (free over Z/p^K or Z) read over Z/modulus with coordinate orders p^orders_exp."""
    o = modulus if orders_exp is None else p ** orders_exp
    return GModule(M.group, modulus, [o] * M.rank, M.actions, label=label or f"{M.label}/{o}", check=False)


def _prime_of(M: GModule) -> tuple:
    pp = exactla.prime_power(M.modulus) if M.modulus else None
    if pp is None:
        raise ModuleError("module must be free over Z/p^K")
    return pp


def delta2_genius(M: GModule, m: int, p: int = 0) -> DifferentialReport:
    """connecting2 of the quadratic-function sequence reduced to Z/l^m."""
    ell, K = _prime_of(M)
    need = m + 1 if ell == 2 else m
    if K < need:
        raise ModuleError(f"precision too low: need K >= {need}")
    E = genius_extension(M, precision=ell ** m)
    src = E.quotient
    tgt = E.sub
    return evaluate(f"genius[{p}]", M.group, src, p, tgt, 2, lambda x: connecting2(E, x),
                    notes={"prime": ell, "precision": m})


def genius1_model(M: GModule, m: int) -> Extension:
    """Finite model over Z/2^(m+1) of the mod-2^m reduction of
    0 -> M -(2)-> M -> (M (x) M)_{S2,sgn} -> Lambda^2 M -> 0."""
    ell, K = _prime_of(M)
    if ell != 2 or K < m + 1:
        raise ModuleError("needs M over Z/2^K with K >= m + 1")
    top = 2 ** (m + 1)
    X = _read(M, top, label=f"{M.label}/{top}")
    C, proj = signed_sym_coinv(X)
    r = M.rank
    psi = np.zeros((C.rank, r), dtype=object)
    for i in range(r):
        e = np.zeros(r * r, dtype=object)
        e[i * r + i] = 1
        psi[:, i] = proj.matrix.dot(e)
    psi_map = GModuleMap(X, C, psi, label="square")
    Wm = wedge2(_read(M, 2 ** m))
    Wm = GModule(M.group, top, Wm.orders, Wm.actions, label=f"wedge2({M.label}/{2 ** m})", check=False)
    # C -> Lambda^2(M/2^m): lift canonical coordinates to M (x) M, then wedge
    lift = exactla.solve_many(proj.matrix, np.eye(C.rank, dtype=object), top, row_moduli=list(C.orders))
    to_w = tensor_to_wedge(X, wedge2(X)).matrix
    c_map = GModuleMap(C, Wm, mat_mul(to_w, lift), label="wedge")
    return derived_reduction(X, C, psi_map, c_map, 2, m, label=f"genius1({M.label})/{2 ** m}")


def delta2_genius1(M: GModule, m: int, p: int = 0) -> DifferentialReport:
    E = genius1_model(M, m)
    return evaluate(f"genius1[{p}]", M.group, E.quotient, p, E.sub, 2, lambda x: connecting2(E, x),
                    notes={"prime": 2, "precision": m})


def delta2_integral(M: GModule, p: int = 0, check_oracle: bool = True) -> DifferentialReport:
    """The second-page differential H^p(Lambda^2 M) -> H^{p+2}(M) at
    precision K - 2, via the quadratic-function sequence; optionally
    recomputed through the signed-coinvariant sequence."""
    ell, K = _prime_of(M)
    if ell != 2 or K < 3:
        raise ModuleError("delta2_integral needs M free over Z/2^K with K >= 3")
    m = K - 2
    rep = delta2_genius(M, m, p)
    rep.label = f"delta2_integral[{p}]"
    if check_oracle:
        other = delta2_genius1(M, m, p)
        agree = rep.equals(other)
        rep.notes["oracle_agrees"] = agree
        if not agree:
            raise CohomologyError("the two 4-term sequences give different differentials")
    return rep


def _bock_maps(M: GModule, m: int, ell: int = 2):
    """Extensions 0 -> M/l^m -> M/l^(m+1) -> M/l -> 0 and
    0 -> M/l -> M/l^(m+1) -> M/l^m -> 0 over Z/l^(m+1)."""
    top = ell ** (m + 1)
    Mt = _read(M, top)
    up = bockstein_extension(Mt, 1, m, p=ell)
    down = bockstein_extension(Mt, m, 1, p=ell)
    return up, down


def delta2_mod(M: GModule, m: int, p: int = 0) -> DifferentialReport:
    """Bock o alpha o red - iota o alpha o Bock on H^p(Lambda^2(M/2^m))."""
    ell, K = _prime_of(M)
    if ell != 2 or K < m + 2:
        raise ModuleError("delta2_mod needs M free over Z/2^K with K >= m + 2")
    G = M.group
    top = 2 ** (m + 1)
    V = _read(M, 2, label=f"{M.label}/2")
    E_alpha = alpha_extension(V)
    W = wedge2(_read(M, top))
    bock_up, _ = _bock_maps(M, m)
    _, bock_down_w = _bock_maps(W, m)
    src = bock_down_w.quotient  # Lambda^2(M/2^m) over Z/2^(m+1)
    tgt = bock_up.sub           # M/2^m over Z/2^(m+1)
    red = GModuleMap(src, _read(W, top, 1), np.eye(W.rank, dtype=object), check=False)
    iota = GModuleMap(bock_up.quotient, tgt, (2 ** (m - 1)) * np.eye(M.rank, dtype=object), check=False)

    def first(x):
        y = chain(push_forward(red, x), [
            lambda c: connecting(E_alpha, recast(c, E_alpha.quotient)),
            lambda c: connecting(bock_up, recast(c, bock_up.quotient)),
        ])
        return y if y is not None else zero_class(G, tgt, p + 2)

    def second(x):
        y = chain(x, [
            lambda c: connecting(bock_down_w, c),
            lambda c: connecting(E_alpha, recast(c, E_alpha.quotient)),
            lambda c: push_forward(iota, recast(c, bock_up.quotient)),
        ])
        return y if y is not None else zero_class(G, tgt, p + 2)

    return evaluate(f"delta2_mod[{p}]", G, src, p, tgt, 2, lambda x: first(x) - second(x),
                    notes={"prime": 2, "precision": m})


def reduce_report(rep: DifferentialReport, k: int) -> list:
    """Images of a report pushed to coefficients mod k (same coordinates)."""
    out = []
    for c in rep.images:
        T = c.M
        Tk = GModule(T.group, T.modulus, [k if o else k for o in T.orders], T.actions, check=False,
                     label=f"{T.label}/{k}")
        out.append(push_forward(GModuleMap(T, Tk, np.eye(T.rank, dtype=object), check=False), c))
    return out


def reduction_agrees(fine: DifferentialReport, coarse: DifferentialReport, k: int = 2) -> bool:
    """red_k o fine == coarse o red_k on the generators of fine's source.

    The reductions act coordinatewise on cochain tables, so the sources
    and targets only need the same actions modulo k.
    """
    G = fine.group
    src_k = coarse.source
    H = Cohomology(G, src_k, coarse.degree)
    diffs = []
    for x, y in zip(fine.generators, fine.images):
        rx = CohClass(G, src_k, x.p, (x.cocycle.astype(object) % k).astype(src_k.dtype))
        coords = H.coordinates(rx)
        acc = zero_class(G, coarse.target, coarse.degree + coarse.shift)
        for a, img in zip(coords, coarse.images):
            if int(a) % k:
                acc = acc + img.scale(int(a))
        ry = CohClass(G, coarse.target, y.p, (y.cocycle.astype(object) % k).astype(coarse.target.dtype))
        diffs.append(ry - acc)
    return all(classes_zero(diffs))


# ---------------------------------------------------------------------------
# Bockstein reduction identity


@dataclass
class BockReductionResult:
    passed: bool
    degrees: dict
    notes: dict = field(default_factory=dict)


def extension_as_ring(E: Extension, modulus: int) -> Extension:
    mods = [as_ring(X, modulus) for X in E.modules]
    maps = [GModuleMap(mods[k], mods[k + 1], f.matrix, check=False, label=f.label) for k, f in enumerate(E.maps)]
    if E.kind == "short":
        out = Extension("short", mods, maps, label=E.label, section=E.section)
        return out
    return Extension("yoneda2", mods, maps, label=E.label)


def bock_reduction_check(X: GModule, Y: GModule, E: Extension, m: int, degrees: Sequence[int] = (0, 1, 2),
                         ell: Optional[int] = None) -> BockReductionResult:
    """Compare the mod p^m reduction of the 4-term sequence
    0 -> X -(p)-> X -> E~ -> Y -> 0 (E~ the pullback of E along Y -> Y/p)
    with the two composites Bock o delta_E o red and iota o delta_E o Bock.

    With connecting maps taken on cochains as in `connecting`, the
    reduction equals the Baer sum of the two composites; `passed` records
    that identity on every generator.  Whether the difference also
    matches is reported per degree (it does whenever either composite
    is 2-torsion).
    """
    pX, KX = _prime_of(X)
    pY, KY = _prime_of(Y)
    ell = ell or pX
    if pX != ell or pY != ell or min(KX, KY) < m + 1:
        raise ModuleError("X and Y must be free over Z/p^K with K >= m + 1")
    G = X.group
    top = ell ** (m + 1)
    Xt, Yt = _read(X, top, p=ell), _read(Y, top, p=ell)
    Er = extension_as_ring(E, top)
    Xp, Ep, Yp = Er.modules
    if not same_module(Xp, _read(X, top, 1, p=ell)) or not same_module(Yp, _read(Y, top, 1, p=ell)):
        raise ModuleError("E must be an extension of Y/p by X/p in the coordinates of X and Y")
    red_Y = GModuleMap(Yt, Yp, np.eye(Y.rank, dtype=object), check=False)
    Pb = pullback_extension(Er, red_Y)
    P = Pb.modules[1]
    psi = GModuleMap(Xt, P, Pb.maps[0].matrix, check=False, label="psi")
    Ym = _read(Y, top, m, p=ell)
    c_map = GModuleMap(P, Ym, Pb.maps[1].matrix, check=False)
    model = derived_reduction(Xt, P, psi, c_map, ell, m, label="derived reduction")
    bock_up, _ = _bock_maps(X, m, ell)
    _, bock_down = _bock_maps(Y, m, ell)
    src = model.quotient
    tgt = model.sub
    red = GModuleMap(src, Yp, np.eye(Y.rank, dtype=object), check=False)
    iota = GModuleMap(bock_up.quotient, tgt, (ell ** (m - 1)) * np.eye(X.rank, dtype=object), check=False)
    results = {}
    ok_all = True
    for i in degrees:
        H = Cohomology(G, canonical(src), i)
        gens = [recast(x, src) for x in H.generators()]
        sums, diffs = [], []
        for x in gens:
            lhs = recast(connecting2(model, x), tgt)
            d1 = connecting(Er, recast(push_forward(red, x), Yp))
            bd = recast(connecting(bock_up, recast(d1, bock_up.quotient)), tgt)
            d2 = connecting(Er, recast(connecting(bock_down, recast(x, bock_down.quotient)), Yp))
            db = recast(push_forward(iota, recast(d2, bock_up.quotient)), tgt)
            sums.append(lhs - (bd + db))
            diffs.append(lhs - (bd - db))
        f_sum = classes_zero(sums)
        f_diff = classes_zero(diffs)
        results[i] = {"generators": len(gens), "source_factors": list(H.invariant_factors),
                      "equal": all(f_sum), "difference_also_equal": all(f_diff)}
        ok_all &= all(f_sum)
    return BockReductionResult(ok_all, results, {"prime": ell, "m": m})


# ---------------------------------------------------------------------------
# annihilation bounds


def valuation(x: int, p: int) -> int:
    return exactla.valuation(x, p)


def annihilation_exponent(ell: int, i: int, q: int) -> int:
    """Exponent e with ell^e killing the i-th page differential from row q
    (0 means the differential vanishes)."""
    if i < 2 or q < i - 1:
        raise ValueError("need i >= 2 and q >= i - 1")
    if ell == 2:
        if i % 2 == 0:
            return min(q - i + 1, 1)
        return min(q - i + 1, valuation(i - 1, 2) + 2)
    if (i - 1) % (ell - 1):
        return 0
    n = valuation((i - 1) // (ell - 1), ell)
    return min(q - i + 1, n + 1)


def annihilation_check(report: DifferentialReport, ell: int, i: int, q: int) -> bool:
    e = annihilation_exponent(ell, i, q)
    if e == 0:
        return report.is_zero()
    return report.annihilated_by(ell ** e)


# ---------------------------------------------------------------------------
# torsors


@dataclass
class TorsorDatum:
    extension: Extension   # 0 -> A[n] -> A[nm] -> A[m] -> 0
    x: CohClass            # lift of the torsor class in H^1(G, A[m])
    n: int

    def __post_init__(self):
        if self.extension.kind != "short":
            raise ValueError("torsor data needs a short exact sequence")
        if self.x.p != 1:
            raise ValueError("the torsor lift lives in degree 1")
        self.x = recast(self.x, self.extension.quotient)


def evaluation_pairing(An: GModule, n: int):
    """dual(A[n]) (x) A[n] -> Z/n, e_i^* (x) e_j -> delta_ij."""
    if any(o != n for o in An.orders):
        raise ModuleError("A[n] must be free over Z/n")
    D = GModule(An.group, n, An.orders, [np.asarray(An.actions[An.group.inverse[g]], dtype=object).T
                                         for g in range(An.group.order)], label="dual", check=False)
    T = tensor(D, GModule(An.group, n, An.orders, An.actions, check=False))
    Z = GModule(An.group, n, [n], np.ones((An.group.order, 1, 1), dtype=object), label=f"Z/{n}")
    r = An.rank
    F = np.zeros((1, r * r), dtype=object)
    for i in range(r):
        F[0, i * r + i] = 1
    return D, T, Z, GModuleMap(T, Z, F, label="evaluation")


def torsor_beta(T: TorsorDatum) -> CohClass:
    return connecting(T.extension, T.x)


def torsor_delta(T: TorsorDatum, y: CohClass) -> CohClass:
    """cup(y, beta) followed by the evaluation pairing, in H^{p+2}(G, Z/n)."""
    An = T.extension.sub
    n = T.n
    D, Tn, Z, ev = evaluation_pairing(An, n)
    beta = torsor_beta(T)
    if not same_module(y.M, D):
        raise ModuleError("y must be a class in the dual of A[n]")
    y = recast(y, D)
    prod = cup(y, CohClass(beta.G, GModule(An.group, n, An.orders, An.actions, check=False), beta.p,
                            beta.cocycle), target=Tn)
    return push_forward(ev, prod)


def torsor_delta_map(T: TorsorDatum, p: int) -> DifferentialReport:
    An = T.extension.sub
    D, Tn, Z, ev = evaluation_pairing(An, T.n)
    return evaluate("torsor_delta", An.group, D, p, Z, 2, lambda y: torsor_delta(T, y))


# ---------------------------------------------------------------------------
# tori


@dataclass
class CharacterLattice:
    lattice: GModule       # free over Z
    character: GModule     # rank-1 cyclotomic character over Z

    def __post_init__(self):
        if self.lattice.modulus != 0 or not self.lattice.is_free:
            raise ModuleError("character lattice must be free over Z")
        if self.character.rank != 1:
            raise ModuleError("twist data must have rank one")


def torus_stages(L: CharacterLattice, s: int):
    T = L.lattice
    chi_inv = inverse_character(L.character)
    W = wedge2(T)
    Wt = twist(W, chi_inv)
    top = 2 ** (s + 1)
    Wt_top = _read(Wt, top)
    bock1 = bockstein_extension(Wt_top, s, 1)           # 0 -> W(-1)/2 -> W(-1)/2^(s+1) -> W(-1)/2^s -> 0
    V = _read(T, 2, label=f"{T.label}/2")
    E_alpha = alpha_extension(V)
    bock2 = bockstein_extension(T, 1, p=2)               # 0 -> T -2-> T -> T/2 -> 0
    return bock1, E_alpha, bock2


def torus_d3(L: CharacterLattice, s: int, p: int = 0) -> DifferentialReport:
    """Composite H^p(W(-1)/2^s) -> H^{p+1}(W/2) -> H^{p+2}(T/2) -> H^{p+3}(T)."""
    T = L.lattice
    G = T.group
    if T.rank < 2:
        W = wedge2(T)
        src = _read(twist(W, inverse_character(L.character)), 2 ** (s + 1), s)
        H = Cohomology(G, src, p)
        return DifferentialReport("torus_d3", G, src, T, p, 3, H.invariant_factors,
                                  [zero_class(G, T, p + 3) for _ in H.generators()], {"stage_zero": "rank"})
    bock1, E_alpha, bock2 = torus_stages(L, s)
    src = bock1.quotient
    tgt = bock2.sub

    def run(x):
        y = chain(x, [
            lambda c: connecting(bock1, c),
            lambda c: connecting(E_alpha, recast(c, E_alpha.quotient)),
            lambda c: connecting(bock2, recast(c, bock2.quotient)),
        ])
        return y if y is not None else zero_class(G, tgt, p + 3)

    return evaluate("torus_d3", G, src, p, tgt, 3, run, notes={"s": s})


def torus_stage_reports(L: CharacterLattice, s: int, p: int = 0) -> list:
    """The three stages as separate reports (for stage-by-stage recomposition)."""
    bock1, E_alpha, bock2 = torus_stages(L, s)
    G = L.lattice.group
    r1 = evaluate("stage1", G, bock1.quotient, p, bock1.sub, 1, lambda x: connecting(bock1, x))
    r2 = evaluate("stage2", G, E_alpha.quotient, p + 1, E_alpha.sub, 1, lambda x: connecting(E_alpha, x))
    r3 = evaluate("stage3", G, bock2.quotient, p + 2, bock2.sub, 1, lambda x: connecting(bock2, x))
    return [r1, r2, r3]


# ---------------------------------------------------------------------------
# mu_4 and the class of -1


def minus_one_class(mu4: GModule) -> CohClass:
    """Kummer class of -1 in H^1(G, Z/2): g -> 1 where g inverts mu_4."""
    G = mu4.group
    Z2 = GModule(G, 4, [2], np.ones((G.order, 1, 1), dtype=object), label="Z/2")
    f = np.zeros((G.order, 1), dtype=object)
    for g in range(G.order):
        a = int(mu4.actions[g, 0, 0]) % 4
        f[g, 0] = 0 if a == 1 else 1
    return CohClass(G, Z2, 1, reduce_vectors(f, Z2.orders).astype(Z2.dtype))


def mu4_cup_identity(mu4: GModule, p: int, minus_one: Optional[CohClass] = None) -> bool:
    """connecting of 0 -> Z/2 -> mu_4 -> Z/2 -> 0 equals cup with the class of -1 on H^p."""
    if p % 2:
        raise ValueError("the identity is stated for even degrees")
    E = mu4_extension(mu4)
    G = mu4.group
    m1 = minus_one if minus_one is not None else minus_one_class(mu4)
    m1 = recast(m1, E.sub)
    H = Cohomology(G, E.quotient, p)
    diffs = []
    for x in H.generators():
        lhs = connecting(E, x)
        prod = cup(x, m1)
        rhs = recast(CohClass(G, E.sub, prod.p, prod.cocycle), E.sub)
        diffs.append(lhs - rhs)
    return all(classes_zero(diffs))


# ---------------------------------------------------------------------------
# ladder naturality


@dataclass
class Ladder:
    top: Extension        # 0 -> A[2] -> A[4] -> A[2] -> 0
    bottom: Extension     # 0 -> T/2^(N-1) -> T/2^N -> T/2 -> 0
    left: GModuleMap      # bottom.sub -> top.sub
    middle: GModuleMap    # bottom middle -> top middle
    right: GModuleMap     # bottom.quotient -> top.quotient

    def check(self):
        t, b = self.top, self.bottom
        sq1 = mat_mul(t.maps[0].matrix, self.left.matrix) - mat_mul(self.middle.matrix, b.maps[0].matrix)
        sq2 = mat_mul(t.maps[1].matrix, self.middle.matrix) - mat_mul(self.right.matrix, b.maps[1].matrix)
        if not t.modules[1].equal_vectors(sq1, np.zeros_like(sq1)) or \
                not t.modules[2].equal_vectors(sq2, np.zeros_like(sq2)):
            raise ValueError("ladder squares do not commute")
        return self


def sunday_ladder(T: GModule, N: int) -> Ladder:
    """Ladder for a free Z/2^N-module T (the truncated dual Tate module):
    bottom 0 -> T/2^(N-1) -> T/2^N -> T/2 -> 0, top 0 -> T/2 -> T/4 -> T/2 -> 0."""
    if T.modulus != 2 ** N or N < 2:
        raise ModuleError("T must be free over Z/2^N with N >= 2")
    bottom = bockstein_extension(T, 1, N - 1)
    top = bockstein_extension(_read(T, 4), 1, 1)
    topN = extension_as_ring(top, 2 ** N)
    left = GModuleMap(bottom.sub, topN.sub, np.eye(T.rank, dtype=object), check=False)
    middle = GModuleMap(bottom.modules[1], topN.modules[1], np.eye(T.rank, dtype=object), check=False)
    right = GModuleMap(bottom.quotient, topN.quotient, np.eye(T.rank, dtype=object), check=False)
    for f in (left, middle, right):
        f.check()
    return Ladder(topN, bottom, left, middle, right).check()


def sunday_naturality(ladder: Ladder, c: CohClass) -> bool:
    """left_*(connecting_bottom(c)) equals connecting_top(right_*(c))."""
    ladder.check()
    c = recast(c, ladder.bottom.quotient)
    lhs = push_forward(ladder.left, connecting(ladder.bottom, c))
    rhs = connecting(ladder.top, push_forward(ladder.right, c))
    return (lhs - recast(rhs, lhs.M)).is_zero()


# ---------------------------------------------------------------------------
# random instances


def random_lattice_action(G: FiniteGroup, rank: int, rng, modulus: int) -> list:
    """Generator matrices of a random module: a sum of sign-twisted permutation
    pieces or an augmentation piece, conjugated by a random unimodular matrix."""
    blocks = []
    left = rank
    while left:
        size = int(rng.integers(1, left + 1))
        blocks.append(_random_block(G, size, rng))
        left -= size
    gens = []
    for k in range(len(G.gens)):
        A = np.zeros((rank, rank), dtype=object)
        o = 0
        for b in blocks:
            n = b[k].shape[0]
            A[o:o + n, o:o + n] = b[k]
            o += n
        gens.append(A)
    U = _random_unimodular(rank, rng)
    Ui = _unimodular_inverse(U)
    return [mat_mul(mat_mul(U, A), Ui) % modulus for A in gens]


def _random_block(G: FiniteGroup, size: int, rng) -> list:
    """Generator matrices of a rank-`size` integral representation."""
    subs = [H for H in G.subgroups() if G.order // len(H) in (size, size + 1)]
    H = subs[int(rng.integers(len(subs)))] if subs else None
    if H is None or G.order // len(H) not in (size, size + 1):
        return [np.eye(size, dtype=object) for _ in G.gens]
    cos = G.cosets(H)
    n = len(cos)
    where = {g: i for i, c in enumerate(cos) for g in c}

    def perm(g):
        P = np.zeros((n, n), dtype=object)
        for i, c in enumerate(cos):
            P[where[G.mul(g, c[0])], i] = 1
        return P

    sign = None
    if n == size and rng.integers(2):
        # twist by a sign character of G when one exists
        chars = _sign_characters(G)
        sign = chars[int(rng.integers(len(chars)))] if chars else None
    out = []
    for g in G.gens:
        P = perm(g)
        if n == size:
            out.append(P * (sign[g] if sign else 1))
        else:
            # augmentation: basis e_i - e_0
            C = np.zeros((size, size), dtype=object)
            for i in range(1, n):
                v = P[:, i] - P[:, 0]
                C[:, i - 1] = v[1:]
            out.append(C)
    return out


def _sign_characters(G: FiniteGroup) -> list:
    """Homomorphisms G -> {1, -1} as dicts, excluding the trivial one."""
    import itertools
    out = []
    for vals in itertools.product([1, -1], repeat=len(G.gens)):
        if all(v == 1 for v in vals):
            continue
        chi = {G.identity: 1}
        ok = True
        frontier = [G.identity]
        while frontier and ok:
            nxt = []
            for a in frontier:
                for s, v in zip(G.gens, vals):
                    b = G.mul(s, a)
                    val = v * chi[a]
                    if b in chi:
                        ok &= chi[b] == val
                    else:
                        chi[b] = val
                        nxt.append(b)
            frontier = nxt
        if ok:
            out.append(chi)
    return out


def _random_unimodular(n: int, rng) -> np.ndarray:
    U = np.eye(n, dtype=object)
    for _ in range(2 * n):
        i, j = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        if i == j:
            continue
        E = np.eye(n, dtype=object)
        E[i, j] = int(rng.integers(-2, 3))
        U = mat_mul(U, E)
    return U


def _unimodular_inverse(U) -> np.ndarray:
    n = U.shape[0]
    X = exactla.solve_many(U, np.eye(n, dtype=object), 0)
    return np.asarray(X, dtype=object)


@dataclass
class BockInstance:
    X: GModule
    Y: GModule
    E: Extension
    m: int
    p: int


def random_bock_instance(rng, G: FiniteGroup, p: int, m: int, rx: int, ry: int) -> BockInstance:
    """Free X, Y over Z/p^(m+1) and an extension of Y/p by X/p given by a
    random 1-cocycle with values in Hom(Y/p, X/p)."""
    from .gmod import build_module
    top = p ** (m + 1)
    X = build_module(G, top, rx, random_lattice_action(G, rx, rng, top), label="X")
    Y = build_module(G, top, ry, random_lattice_action(G, ry, rng, top), label="Y")
    Xp = _read(X, top, 1, p=p)
    Yp = _read(Y, top, 1, p=p)
    Xs = GModule(G, p, Xp.orders, Xp.actions, check=False)
    Ys = GModule(G, p, Yp.orders, Yp.actions, check=False)
    Hm = tensor(Xs, dual(Ys))
    H1 = Cohomology(G, Hm, 1)
    f = np.zeros((G.order, rx * ry), dtype=object)
    for c in H1.generators():
        f = f + int(rng.integers(p)) * c.cocycle.astype(object)
    # plus a random coboundary
    t = rng.integers(p, size=rx * ry).astype(object)
    for g in range(G.order):
        f[g] = f[g] + np.asarray(Hm.actions[g], dtype=object).dot(t) - t
    f = f % p
    acts = np.zeros((G.order, rx + ry, rx + ry), dtype=object)
    for g in range(G.order):
        rX = np.asarray(Xs.actions[g], dtype=object)
        rY = np.asarray(Ys.actions[g], dtype=object)
        acts[g, :rx, :rx] = rX
        acts[g, rx:, rx:] = rY
        acts[g, :rx, rx:] = mat_mul(f[g].reshape(rx, ry), rY)
    Mid = GModule(G, top, [p] * (rx + ry), acts, label="E")
    inj = GModuleMap(Xp, Mid, np.concatenate([np.eye(rx, dtype=object), np.zeros((ry, rx), dtype=object)]))
    surj = GModuleMap(Mid, Yp, np.concatenate([np.zeros((ry, rx), dtype=object), np.eye(ry, dtype=object)], axis=1))
    E = short_extension(inj, surj, label="random extension")
    return BockInstance(X, Y, E, m, p)
