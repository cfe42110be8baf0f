"""Finite groups, modules with a group action, functorial constructions and
exact sequences of such modules.

Every module is stored in canonical coordinates: a tuple of coordinate
orders (divisors of the ring modulus, or 0 for a free Z summand) together
with one action matrix per group element.  Column j of an action matrix is
the image of the j-th coordinate vector.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Optional, Sequence

import numpy as np

from . import exactla
from .exactla import PresentedModule, dtype_for, solve_many

GROUP_SIZE_CAP = 512


class GroupError(ValueError):
    pass


class ModuleError(ValueError):
    pass


class ExactnessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# groups


class FiniteGroup:
    """A finite group given by its multiplication table.

    Element 0 need not be the identity; `identity` records it.  `gens`
    are generator indices; `word[g]` is a word in generator positions
    with g equal to the left-to-right product of the word.
    """

    def __init__(self, table, gens: Sequence[int], label: str = "", check: bool = True,
                 elements: Optional[list] = None):
        T = np.asarray(table, dtype=np.int64)
        n = T.shape[0]
        if T.shape != (n, n):
            raise GroupError("multiplication table must be square")
        if n > GROUP_SIZE_CAP:
            raise GroupError(f"group of order {n} exceeds the cap {GROUP_SIZE_CAP}")
        self.table = T
        self.order = n
        self.label = label
        self.elements = elements
        ids = [e for e in range(n) if np.array_equal(T[e], np.arange(n)) and np.array_equal(T[:, e], np.arange(n))]
        if len(ids) != 1:
            raise GroupError("table has no two-sided identity")
        self.identity = ids[0]
        if check:
            self._check()
        inv = np.empty(n, dtype=np.int64)
        for a in range(n):
            inv[a] = int(np.nonzero(T[a] == self.identity)[0][0])
        self.inverse = inv
        self.gens = [int(g) for g in gens]
        self.word = self._words()

    def _check(self):
        T = self.table
        n = self.order
        if T.min() < 0 or T.max() >= n:
            raise GroupError("table entries out of range")
        for a in range(n):
            if len(set(T[a].tolist())) != n or len(set(T[:, a].tolist())) != n:
                raise GroupError("table is not a Latin square")
        for a in range(n):
            # (a*b)*c == a*(b*c) for all b, c
            lhs = T[T[a]]
            rhs = T[a][T]
            if not np.array_equal(lhs, rhs):
                b, c = np.argwhere(lhs != rhs)[0]
                raise GroupError(f"non-associative triple ({a}, {int(b)}, {int(c)})")

    def _words(self):
        word = {self.identity: ()}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for pos, s in enumerate(self.gens):
                y = int(self.table[s, x])
                if y not in word:
                    word[y] = (pos,) + word[x]
                    queue.append(y)
        if len(word) != self.order:
            raise GroupError("generators do not generate the group")
        return [word[g] for g in range(self.order)]

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def nonidentity(self) -> list:
        return [g for g in range(self.order) if g != self.identity]

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            k += 1
        return k

    def generated_subgroup(self, gens: Sequence[int]) -> list:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            new = []
            for x in frontier:
                for s in gens:
                    y = self.mul(x, s)
                    if y not in seen:
                        seen.add(y)
                        new.append(y)
            frontier = new
        return sorted(seen)

    def subgroup(self, gens: Sequence[int], label: str = "") -> tuple["FiniteGroup", list]:
        """The subgroup generated by `gens`, with its embedding (list of indices)."""
        elems = self.generated_subgroup(gens)
        pos = {g: i for i, g in enumerate(elems)}
        table = [[pos[self.mul(a, b)] for b in elems] for a in elems]
        sub_gens = [pos[g] for g in gens if g != self.identity] or [pos[self.identity]]
        sub = FiniteGroup(table, sub_gens, label=label, check=False,
                          elements=[self.elements[g] for g in elems] if self.elements else None)
        return sub, elems

    def subgroups(self) -> list:
        """All subgroups, as sorted tuples of element indices."""
        found = {tuple([self.identity])}
        frontier = [tuple([self.identity])]
        while frontier:
            new = []
            for H in frontier:
                for g in range(self.order):
                    if g in H:
                        continue
                    K = tuple(self.generated_subgroup(list(H) + [g]))
                    if K not in found:
                        found.add(K)
                        new.append(K)
            frontier = new
        return sorted(found, key=lambda h: (len(h), h))

    def cosets(self, H: Sequence[int]) -> list:
        """Left cosets gH as sorted tuples, ordered by smallest element."""
        seen, out = set(), []
        for g in range(self.order):
            c = tuple(sorted(self.mul(g, h) for h in H))
            if c not in seen:
                seen.add(c)
                out.append(c)
        return sorted(out)

    def conjugate_subgroup(self, H: Sequence[int], g: int) -> tuple:
        gi = int(self.inverse[g])
        return tuple(sorted(self.mul(self.mul(g, h), gi) for h in H))

    def __repr__(self):
        return f"FiniteGroup({self.label or 'order ' + str(self.order)})"


def _parse_cycles(text: str, degree: Optional[int]) -> list:
    cycles = re.findall(r"\(([^()]*)\)", text)
    pts = [int(x) for c in cycles for x in c.replace(",", " ").split()]
    n = max([degree or 0] + pts)
    perm = list(range(n))
    for c in cycles:
        items = [int(x) - 1 for x in c.replace(",", " ").split()]
        for a, b in zip(items, items[1:] + items[:1]):
            perm[a] = b
    return perm


def _normalise_perms(perms) -> list:
    parsed = []
    for p in perms:
        if isinstance(p, str):
            parsed.append(_parse_cycles(p, None))
        else:
            parsed.append([int(x) for x in p])
    n = max([len(p) for p in parsed] + [1])
    if n > 16:
        raise GroupError("permutations on more than 16 points are not supported")
    out = []
    for p in parsed:
        q = p + list(range(len(p), n))
        if sorted(q) != list(range(n)):
            raise GroupError(f"not a permutation: {p}")
        out.append(tuple(q))
    return out


def group_from_permutations(perms, label: str = "", cap: int = GROUP_SIZE_CAP) -> FiniteGroup:
    """Close a set of permutations under composition; (s*t)(x) = s(t(x))."""
    gens = _normalise_perms(perms)
    n = len(gens[0]) if gens else 1
    ident = tuple(range(n))
    elems = [ident]
    index = {ident: 0}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = tuple(s[x[i]] for i in range(n))
            if y not in index:
                if len(elems) >= cap:
                    raise GroupError(f"permutation group exceeds the size cap {cap}")
                index[y] = len(elems)
                elems.append(y)
                queue.append(y)
    table = [[index[tuple(a[b[i]] for i in range(n))] for b in elems] for a in elems]
    gen_idx = [index[s] for s in gens] or [0]
    return FiniteGroup(table, gen_idx, label=label, check=False, elements=elems)


def group_from_matrices(mats, modulus: int, label: str = "", cap: int = GROUP_SIZE_CAP) -> FiniteGroup:
    """Close a set of invertible matrices over Z/modulus under multiplication."""
    gens = [tuple(tuple(int(x) % modulus for x in row) for row in m) for m in mats]
    r = len(gens[0])
    ident = tuple(tuple(1 if i == j else 0 for j in range(r)) for i in range(r))

    def mm(a, b):
        return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(r)) % modulus for j in range(r)) for i in range(r))

    elems = [ident]
    index = {ident: 0}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = mm(s, x)
            if y not in index:
                if len(elems) >= cap:
                    raise GroupError(f"matrix group exceeds the size cap {cap}")
                index[y] = len(elems)
                elems.append(y)
                queue.append(y)
    table = [[index[mm(a, b)] for b in elems] for a in elems]
    return FiniteGroup(table, [index[s] for s in gens] or [0], label=label, check=False, elements=elems)


def build_group(spec) -> FiniteGroup:
    """Build a group from {"permutations": [...]} or {"table": [[...]], "generators": [...]}."""
    if isinstance(spec, FiniteGroup):
        return spec
    label = spec.get("label", "")
    if "permutations" in spec:
        return group_from_permutations(spec["permutations"], label=label,
                                       cap=int(spec.get("cap", GROUP_SIZE_CAP)))
    if "table" in spec:
        table = spec["table"]
        gens = spec.get("generators")
        if gens is None:
            gens = list(range(len(table)))
        return FiniteGroup(table, gens, label=label)
    raise GroupError("group spec needs 'permutations' or 'table'")


def cyclic_group(n: int) -> FiniteGroup:
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return FiniteGroup(table, [1 % n], label=f"C{n}", check=False)


def trivial_group() -> FiniteGroup:
    return cyclic_group(1)


def symmetric_group(n: int) -> FiniteGroup:
    if n == 1:
        return trivial_group()
    gens = [[1, 0] + list(range(2, n)), list(range(1, n)) + [0]]
    return group_from_permutations(gens, label=f"S{n}")


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon (order 2n) acting on n points."""
    rot = [(i + 1) % n for i in range(n)]
    ref = [(-i) % n for i in range(n)]
    return group_from_permutations([rot, ref], label=f"D{n}")


def abelian_group(orders: Sequence[int]) -> FiniteGroup:
    elems = list(itertools.product(*[range(o) for o in orders]))
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[tuple((x + y) % o for x, y, o in zip(a, b, orders))] for b in elems] for a in elems]
    gens = []
    for k in range(len(orders)):
        e = [0] * len(orders)
        e[k] = 1 % orders[k]
        gens.append(index[tuple(e)])
    return FiniteGroup(table, gens, label="x".join(f"C{o}" for o in orders), check=False, elements=elems)


def quaternion_group() -> FiniteGroup:
    # elements (s, k): (-1)^s * unit_k with units 1, i, j, k
    mult = {(0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
            (1, 0): (0, 1), (1, 1): (1, 0), (1, 2): (0, 3), (1, 3): (1, 2),
            (2, 0): (0, 2), (2, 1): (1, 3), (2, 2): (1, 0), (2, 3): (0, 1),
            (3, 0): (0, 3), (3, 1): (0, 2), (3, 2): (1, 1), (3, 3): (1, 0)}
    elems = [(s, k) for s in range(2) for k in range(4)]
    index = {e: i for i, e in enumerate(elems)}

    def mm(a, b):
        s, k = mult[(a[1], b[1])]
        return ((a[0] + b[0] + s) % 2, k)

    table = [[index[mm(a, b)] for b in elems] for a in elems]
    return FiniteGroup(table, [index[(0, 1)], index[(0, 2)]], label="Q8", check=False, elements=elems)


def small_groups(max_order: int = 8) -> list:
    """One representative of every isomorphism class of groups of order <= 8."""
    out = [trivial_group()]
    for n in range(2, max_order + 1):
        out.append(cyclic_group(n))
        if n == 4:
            out.append(abelian_group([2, 2]))
        if n == 6:
            out.append(symmetric_group(3))
        if n == 8:
            out.append(abelian_group([4, 2]))
            out.append(abelian_group([2, 2, 2]))
            out.append(dihedral_group(4))
            out.append(quaternion_group())
    return out


# ---------------------------------------------------------------------------
# modules


def _reduce_rows(mat: np.ndarray, orders: Sequence[int]) -> np.ndarray:
    """Reduce each row (last-but-one axis) modulo its coordinate order."""
    out = mat.copy()
    for i, o in enumerate(orders):
        if o:
            out[..., i, :] %= o
    return out


def reduce_vectors(vals: np.ndarray, orders: Sequence[int]) -> np.ndarray:
    """Reduce the last axis of a value array modulo the coordinate orders."""
    if vals.shape[-1] == 0:
        return vals
    if all(o == orders[0] for o in orders) and orders[0]:
        return vals % orders[0]
    out = vals.copy()
    for i, o in enumerate(orders):
        if o:
            out[..., i] %= o
    return out


class GModule:
    """A module over Z (modulus 0) or Z/modulus with a group action.

    `orders[i]` is the order of the i-th canonical coordinate (0 for a free
    Z coordinate).  `actions` has shape (|G|, rank, rank).
    """

    def __init__(self, group: FiniteGroup, modulus: int, orders: Sequence[int], actions, label: str = "",
                 check: bool = True):
        self.group = group
        self.modulus = int(modulus)
        self.orders = tuple(int(o) for o in orders)
        r = len(self.orders)
        dt = dtype_for(self.modulus)
        acts = np.asarray(actions, dtype=object).reshape(group.order, r, r)
        self.actions = _reduce_rows(acts, self.orders).astype(dt)
        self.label = label
        if check:
            self._check()

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def is_free(self) -> bool:
        return all(o == self.modulus for o in self.orders)

    @property
    def dtype(self):
        return dtype_for(self.modulus)

    def size(self) -> Optional[int]:
        out = 1
        for o in self.orders:
            if o == 0:
                return None
            out *= o
        return out

    def _check(self):
        G = self.group
        r = self.rank
        for o in self.orders:
            if self.modulus and (o == 0 or self.modulus % o):
                raise ModuleError(f"coordinate order {o} does not divide the modulus {self.modulus}")
        for g in range(G.order):
            if not respects_orders(self.actions[g], self.orders, self.orders):
                raise ModuleError(f"action of element {g} does not respect the coordinate orders")
        ident = np.eye(r, dtype=object)
        if not self.equal_vectors(self.actions[G.identity].astype(object), ident):
            raise ModuleError("identity does not act trivially")
        for s in G.gens:
            for b in range(G.order):
                lhs = mat_mul(self.actions[s], self.actions[b])
                if not self.equal_vectors(lhs, self.actions[G.mul(s, b)]):
                    raise ModuleError(f"relation violated: action({s})*action({b}) != action({G.mul(s, b)})")

    def equal_vectors(self, A, B) -> bool:
        """Compare arrays whose rows are indexed by module coordinates."""
        D = np.asarray(A, dtype=object) - np.asarray(B, dtype=object)
        for i, o in enumerate(self.orders):
            row = D[i]
            if o:
                row = row % o
            if np.any(row != 0):
                return False
        return True

    def reduce(self, v) -> np.ndarray:
        return reduce_vectors(np.asarray(v, dtype=object), self.orders)

    def act(self, g: int, v) -> list:
        w = np.asarray(self.actions[g], dtype=object).dot(np.asarray(v, dtype=object))
        return [int(x) for x in reduce_vectors(w, self.orders)]

    def elements(self):
        if any(o == 0 for o in self.orders):
            raise ModuleError("infinite module")
        return itertools.product(*[range(o) for o in self.orders])

    def fixed_points(self) -> np.ndarray:
        """Generators of the invariants M^G (columns)."""
        G = self.group
        blocks = [np.asarray(self.actions[s], dtype=object) - np.eye(self.rank, dtype=object) for s in G.gens]
        A = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, self.rank), dtype=object)
        rm = list(self.orders) * len(blocks)
        K = exactla.kernel_basis(A, self.modulus, row_moduli=rm if A.shape[0] else None)
        return K

    def __repr__(self):
        ring = "Z" if self.modulus == 0 else f"Z/{self.modulus}"
        return f"GModule({self.label or ''} over {ring}, orders={self.orders}, group={self.group.label})"


def mat_mul(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.dtype == object or B.dtype == object:
        return A.astype(object).dot(B.astype(object))
    return A @ B


def respects_orders(mat, src_orders, tgt_orders) -> bool:
    """A matrix defines a homomorphism between the presented groups."""
    M = np.asarray(mat, dtype=object)
    for j, oj in enumerate(src_orders):
        if oj == 0:
            continue
        for i, oi in enumerate(tgt_orders):
            v = M[i, j] * oj
            if (v % oi if oi else v) != 0:
                return False
    return True


def build_module(group: FiniteGroup, ring, rank: int, generator_actions, label: str = "") -> GModule:
    """Free module of the given rank with prescribed generator matrices.

    `ring` is "Z" (or 0) or a modulus n >= 2.  Actions of the remaining
    elements come from the word of each element in the generators; the
    relations of the group are then checked against the full table.
    """
    modulus = 0 if ring in ("Z", 0, None) else int(ring)
    if modulus == 1 or modulus < 0:
        raise ModuleError("ring modulus must be 0 (Z) or >= 2")
    gen_acts = [np.asarray(m, dtype=object).reshape(rank, rank) for m in generator_actions]
    if len(gen_acts) != len(group.gens):
        raise ModuleError(f"expected {len(group.gens)} generator matrices, got {len(gen_acts)}")
    for k, m in enumerate(gen_acts):
        det = _det(m.tolist())
        if modulus:
            if gcd(det % modulus, modulus) != 1:
                raise ModuleError(f"action matrix of generator {k} is not invertible over Z/{modulus}")
        elif det not in (1, -1):
            raise ModuleError(f"action matrix of generator {k} is not invertible over Z")
    acts = np.empty((group.order, rank, rank), dtype=object)
    for g in range(group.order):
        m = np.eye(rank, dtype=object)
        for pos in reversed(group.word[g]):
            m = gen_acts[pos].dot(m)
        acts[g] = m % modulus if modulus else m
    orders = [modulus] * rank
    return GModule(group, modulus, orders, acts, label=label)


def _det(m) -> int:
    n = len(m)
    if n == 0:
        return 1
    from fractions import Fraction
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for k in range(c, n):
                a[r][k] -= f * a[c][k]
    return int(det)


def trivial_module(group: FiniteGroup, ring, rank: int = 1, label: str = "") -> GModule:
    eye = np.eye(rank, dtype=object)
    return build_module(group, ring, rank, [eye] * len(group.gens), label=label or "trivial")


def permutation_module(group: FiniteGroup, ring, perm_of_element, degree: int, label: str = "") -> GModule:
    """Module with basis permuted by the group: perm_of_element(g)[i] = image of point i."""
    modulus = 0 if ring in ("Z", 0, None) else int(ring)
    acts = np.zeros((group.order, degree, degree), dtype=object)
    for g in range(group.order):
        perm = perm_of_element(g)
        for i in range(degree):
            acts[g, perm[i], i] = 1
    return GModule(group, modulus, [modulus] * degree, acts, label=label)


def coset_module(group: FiniteGroup, ring, H: Sequence[int], label: str = "") -> GModule:
    """Permutation module on the left cosets G/H."""
    cos = group.cosets(H)
    where = {}
    for i, c in enumerate(cos):
        for x in c:
            where[x] = i

    def perm(g):
        return [where[group.mul(g, c[0])] for c in cos]

    return permutation_module(group, ring, perm, len(cos), label=label or f"Z[G/H{len(H)}]")


def augmentation_module(group: FiniteGroup, ring, H: Sequence[int], label: str = "") -> GModule:
    """Kernel of the degree map Z[G/H] -> Z, in the basis e_i - e_0."""
    P = coset_module(group, ring, H)
    n = P.rank
    acts = []
    for g in range(group.order):
        A = np.asarray(P.actions[g], dtype=object)
        # g(e_i - e_0) = e_{gi} - e_{g0}, rewritten in the basis e_j - e_0
        acts.append((A[1:, 1:] - A[1:, :1]).reshape(n - 1, n - 1))
    return GModule(group, P.modulus, P.orders[1:], acts, label=label or f"I[G/H{len(H)}]")


# ---------------------------------------------------------------------------
# maps


class GModuleMap:
    """Equivariant homomorphism given by a matrix in canonical coordinates."""

    def __init__(self, source: GModule, target: GModule, matrix, check: bool = True, label: str = ""):
        self.source = source
        self.target = target
        M = np.asarray(matrix, dtype=object).reshape(target.rank, source.rank)
        self.matrix = reduce_vectors(M.T, target.orders).T if target.rank and source.rank else M
        self.label = label
        if check:
            self.check()

    def check(self):
        if self.source.group is not self.target.group:
            raise ModuleError("maps must be between modules over the same group")
        if not respects_orders(self.matrix, self.source.orders, self.target.orders):
            raise ModuleError(f"map {self.label} is not well defined on the source presentation")
        G = self.source.group
        for s in G.gens:
            lhs = mat_mul(self.target.actions[s], self.matrix)
            rhs = mat_mul(self.matrix, self.source.actions[s])
            if not self.target.equal_vectors(lhs, rhs):
                raise ModuleError(f"map {self.label} is not equivariant for generator {s}")

    def apply(self, v) -> list:
        w = self.matrix.dot(np.asarray(v, dtype=object))
        return [int(x) for x in reduce_vectors(w, self.target.orders)]

    def apply_values(self, vals: np.ndarray) -> np.ndarray:
        """Apply to an array whose last axis holds source coordinates."""
        out = np.tensordot(np.asarray(vals).astype(object), self.matrix.T, axes=([vals.ndim - 1], [0]))
        out = reduce_vectors(out, self.target.orders)
        return out.astype(self.target.dtype)

    def compose(self, other: "GModuleMap") -> "GModuleMap":
        """self after other."""
        return GModuleMap(other.source, self.target, mat_mul(self.matrix, other.matrix), check=False)

    def is_zero(self) -> bool:
        return self.target.equal_vectors(self.matrix, np.zeros_like(self.matrix))

    def __sub__(self, other):
        return GModuleMap(self.source, self.target, self.matrix - other.matrix, check=False)


def identity_map(M: GModule) -> GModuleMap:
    return GModuleMap(M, M, np.eye(M.rank, dtype=object), check=False)


def zero_map(A: GModule, B: GModule) -> GModuleMap:
    return GModuleMap(A, B, np.zeros((B.rank, A.rank), dtype=object), check=False)


# ---------------------------------------------------------------------------
# presentations, submodules, kernels, cokernels


def from_presentation(group: FiniteGroup, modulus: int, ambient_rank: int, relations, ambient_actions,
                      label: str = "") -> tuple[GModule, np.ndarray, np.ndarray]:
    """Module R^a / relations with an action given on the ambient lattice.

    Returns (module, to_canonical, from_canonical); the first matrix sends
    ambient vectors to canonical coordinates, the second lifts back.
    """
    pm = PresentedModule(ambient_rank, relations, modulus)
    to, frm = pm.reduce_matrix(), pm.lift_matrix()
    acts = np.empty((group.order, pm.rank, pm.rank), dtype=object)
    A = np.asarray(ambient_actions, dtype=object).reshape(group.order, ambient_rank, ambient_rank)
    for g in range(group.order):
        acts[g] = to.dot(A[g]).dot(frm) if pm.rank else np.zeros((0, 0), dtype=object)
    M = GModule(group, modulus, pm.orders, acts, label=label)
    return M, to, frm


def submodule(M: GModule, gens, label: str = "") -> tuple[GModule, GModuleMap]:
    """Submodule generated by the columns of `gens` (canonical coordinates of M)."""
    B = np.asarray(gens, dtype=object).reshape(M.rank, -1)
    s = B.shape[1]
    if s == 0:
        S = GModule(M.group, M.modulus, (), np.zeros((M.group.order, 0, 0)), label=label)
        return S, GModuleMap(S, M, np.zeros((M.rank, 0), dtype=object), check=False)
    # relations among generators: c with B c = 0 in M
    rel = exactla.kernel_basis(B, M.modulus, row_moduli=list(M.orders)) if M.rank else np.eye(s, dtype=object)
    if M.modulus:
        rel = np.concatenate([rel, M.modulus * np.eye(s, dtype=object)], axis=1)
    acts = np.empty((M.group.order, s, s), dtype=object)
    for g in range(M.group.order):
        img = np.asarray(M.actions[g], dtype=object).dot(B)
        T = solve_many(B, img, M.modulus, row_moduli=list(M.orders))
        if T is None:
            raise ModuleError("generators do not span a submodule")
        acts[g] = T
    S, to, frm = from_presentation(M.group, M.modulus, s, rel, acts, label=label)
    incl = GModuleMap(S, M, B.dot(frm), check=False, label="inclusion")
    return S, incl


def kernel(f: GModuleMap, label: str = "") -> tuple[GModule, GModuleMap]:
    K = exactla.kernel_basis(f.matrix, f.target.modulus, row_moduli=list(f.target.orders)) \
        if f.target.rank else np.eye(f.source.rank, dtype=object)
    # kernel generators are taken in the source's ambient; the source relations are absorbed
    return submodule(f.source, K, label=label)


def image(f: GModuleMap, label: str = "") -> tuple[GModule, GModuleMap]:
    return submodule(f.target, f.matrix, label=label)


def cokernel(f: GModuleMap, label: str = "") -> tuple[GModule, GModuleMap]:
    T = f.target
    rel = [f.matrix]
    tors = [j for j, o in enumerate(T.orders) if o and o != T.modulus]
    if tors:
        extra = np.zeros((T.rank, len(tors)), dtype=object)
        for c, j in enumerate(tors):
            extra[j, c] = T.orders[j]
        rel.append(extra)
    R = np.concatenate(rel, axis=1) if T.rank else np.zeros((0, 0), dtype=object)
    C, to, frm = from_presentation(T.group, T.modulus, T.rank, R, T.actions, label=label)
    return C, GModuleMap(T, C, to, check=False, label="projection")


def direct_sum(M: GModule, N: GModule, label: str = "") -> GModule:
    if M.modulus != N.modulus:
        raise ModuleError("direct sum needs a common ring")
    r, s = M.rank, N.rank
    acts = np.zeros((M.group.order, r + s, r + s), dtype=object)
    acts[:, :r, :r] = M.actions
    acts[:, r:, r:] = N.actions
    return GModule(M.group, M.modulus, M.orders + N.orders, acts, label=label or f"{M.label}+{N.label}")


def change_ring(M: GModule, modulus: int) -> GModule:
    """Same coordinates, read over Z/modulus; orders must divide the new modulus."""
    return GModule(M.group, modulus, M.orders, M.actions, label=M.label)


# ---------------------------------------------------------------------------
# functorial constructions


def _pairs(r: int, strict: bool) -> list:
    return [(i, j) for i in range(r) for j in range(r) if (i < j if strict else i <= j)]


def dual(M: GModule) -> GModule:
    if not M.is_free:
        raise ModuleError("dual is implemented for free modules")
    G = M.group
    acts = np.empty_like(M.actions, dtype=object)
    for g in range(G.order):
        acts[g] = np.asarray(M.actions[G.inverse[g]], dtype=object).T
    return GModule(G, M.modulus, M.orders, acts, label=f"dual({M.label})")


def tensor(M: GModule, N: GModule, label: str = "") -> GModule:
    """M (x) N with basis e_a (x) f_b in lexicographic (a, b) order."""
    if M.modulus != N.modulus:
        raise ModuleError("tensor product needs a common ring")
    orders = [gcd(a, b) if (a or b) else 0 for a in M.orders for b in N.orders]
    G = M.group
    acts = np.empty((G.order, len(orders), len(orders)), dtype=object)
    for g in range(G.order):
        acts[g] = np.kron(np.asarray(M.actions[g], dtype=object), np.asarray(N.actions[g], dtype=object))
    return GModule(G, M.modulus, orders, acts, label=label or f"{M.label}(x){N.label}")


def wedge2(M: GModule) -> GModule:
    if not M.is_free:
        raise ModuleError("exterior square is implemented for free modules")
    r = M.rank
    pairs = _pairs(r, strict=True)
    G = M.group
    acts = np.zeros((G.order, len(pairs), len(pairs)), dtype=object)
    for g in range(G.order):
        A = np.asarray(M.actions[g], dtype=object)
        for c, (i, j) in enumerate(pairs):
            for rr, (a, b) in enumerate(pairs):
                acts[g, rr, c] = A[a, i] * A[b, j] - A[b, i] * A[a, j]
    return GModule(G, M.modulus, [M.modulus] * len(pairs), acts, label=f"wedge2({M.label})")


def sym2(M: GModule) -> GModule:
    """S^2 M = (M (x) M)_{S_2}, basis e_i e_j with i <= j."""
    if not M.is_free:
        raise ModuleError("symmetric square is implemented for free modules")
    r = M.rank
    pairs = _pairs(r, strict=False)
    idx = {p: k for k, p in enumerate(pairs)}
    G = M.group
    acts = np.zeros((G.order, len(pairs), len(pairs)), dtype=object)
    for g in range(G.order):
        A = np.asarray(M.actions[g], dtype=object)
        for c, (i, j) in enumerate(pairs):
            for a in range(r):
                for b in range(r):
                    key = (a, b) if a <= b else (b, a)
                    acts[g, idx[key], c] += A[a, i] * A[b, j]
    return GModule(G, M.modulus, [M.modulus] * len(pairs), acts, label=f"sym2({M.label})")


def signed_sym_coinv(M: GModule) -> tuple[GModule, GModuleMap]:
    """(M (x) M) modulo m1 (x) m2 + m2 (x) m1, with the projection from M (x) M."""
    if not M.is_free:
        raise ModuleError("signed coinvariants are implemented for free modules")
    T = tensor(M, M)
    r = M.rank
    rels = []
    for i in range(r):
        for j in range(i, r):
            v = np.zeros(r * r, dtype=object)
            v[i * r + j] += 1
            v[j * r + i] += 1
            rels.append(v)
    R = np.stack(rels, axis=1) if rels else np.zeros((r * r, 0), dtype=object)
    C, to, _ = from_presentation(M.group, M.modulus, r * r, R, T.actions, label=f"coinv({M.label})")
    return C, GModuleMap(T, C, to, check=False, label="projection")


def reduce_mod(M: GModule, k: int) -> tuple[GModule, GModuleMap]:
    """M/k over Z/k together with the reduction map M -> M/k."""
    if M.modulus and M.modulus % k:
        raise ModuleError(f"cannot reduce a Z/{M.modulus}-module modulo {k}")
    orders = [gcd(o, k) if o else k for o in M.orders]
    R = GModule(M.group, k, orders, M.actions, label=f"{M.label}/{k}")
    red = CrossRingMap(M, R, np.eye(M.rank, dtype=object), check=False)
    return R, red


class CrossRingMap:
    """A homomorphism of abelian groups with actions between modules over
    different rings (reductions, multiplication maps Z/p^a -> Z/p^b)."""

    def __init__(self, source: GModule, target: GModule, matrix, check: bool = True):
        self.source = source
        self.target = target
        self.matrix = np.asarray(matrix, dtype=object).reshape(target.rank, source.rank)
        if check:
            if not respects_orders(self.matrix, source.orders, target.orders):
                raise ModuleError("map is not well defined")
            for s in source.group.gens:
                lhs = mat_mul(target.actions[s], self.matrix)
                rhs = mat_mul(self.matrix, source.actions[s])
                if not target.equal_vectors(lhs, rhs):
                    raise ModuleError("map is not equivariant")

    def apply(self, v):
        w = self.matrix.dot(np.asarray(v, dtype=object))
        return [int(x) for x in reduce_vectors(w, self.target.orders)]

    def apply_values(self, vals: np.ndarray) -> np.ndarray:
        out = np.tensordot(np.asarray(vals).astype(object), self.matrix.T, axes=([vals.ndim - 1], [0]))
        return reduce_vectors(out, self.target.orders).astype(self.target.dtype)

    def compose(self, other):
        return CrossRingMap(other.source, self.target, mat_mul(self.matrix, other.matrix), check=False)


def hom(source: GModule, target: GModule, matrix, check: bool = True):
    """A map between modules, over a common ring or not."""
    if source.modulus == target.modulus:
        return GModuleMap(source, target, matrix, check=check)
    return CrossRingMap(source, target, matrix, check=check)


def twist(M: GModule, chi: GModule) -> GModule:
    """M (x) chi for a rank-1 module chi (read over M's ring)."""
    if chi.rank != 1:
        raise ModuleError("twists are by rank-one modules")
    c = chi
    if chi.modulus != M.modulus:
        if M.modulus == 0:
            raise ModuleError("twisting a Z-module needs an integral character")
        c = GModule(chi.group, M.modulus, [M.modulus], chi.actions, label=chi.label)
    return tensor(M, c, label=f"{M.label}({chi.label})")


def inverse_character(chi: GModule) -> GModule:
    G = chi.group
    acts = np.empty((G.order, 1, 1), dtype=object)
    for g in range(G.order):
        acts[g, 0, 0] = int(chi.actions[G.inverse[g], 0, 0])
    return GModule(G, chi.modulus, chi.orders, acts, label=f"{chi.label}^-1")


@dataclass
class Quad2:
    """Quadratic functions on the dual of a free module, with structure maps.

    Basis order: x_0..x_{r-1}, q_0..q_{r-1}, then x_i x_j for i < j.
    `base` is M read at the precision of Q (one bit lower at p = 2).
    """

    module: GModule
    base: GModule
    linear: GModuleMap
    polarization: GModuleMap
    tensor: GModule


def _quad_action(A, r: int, modulus: int) -> np.ndarray:
    """Matrix of f -> f(A^T y) on Q^2 in the basis x, q, x_i x_j."""
    pairs = _pairs(r, strict=True)
    pidx = {p: k for k, p in enumerate(pairs)}
    n = 2 * r + len(pairs)
    Q = np.zeros((n, n), dtype=object)
    A = [[int(x) for x in row] for row in A]
    half = (modulus + 1) // 2 if modulus % 2 else None
    for i in range(r):
        a = [A[k][i] for k in range(r)]
        for k in range(r):
            Q[k, i] += a[k]
        # q_i = (L^2 - L)/2 with L = sum a_k y_k
        col = r + i
        for k in range(r):
            Q[r + k, col] += a[k] * a[k]
            if half is None:
                Q[k, col] += (a[k] * a[k] - a[k]) // 2
            else:
                Q[k, col] += (a[k] * a[k] - a[k]) * half
        for (k, l) in pairs:
            Q[2 * r + pidx[(k, l)], col] += a[k] * a[l]
    for c, (i, j) in enumerate(pairs):
        a = [A[k][i] for k in range(r)]
        b = [A[k][j] for k in range(r)]
        col = 2 * r + c
        for k in range(r):
            # y_k^2 = 2 q_k + x_k
            Q[r + k, col] += 2 * a[k] * b[k]
            Q[k, col] += a[k] * b[k]
        for (k, l) in pairs:
            Q[2 * r + pidx[(k, l)], col] += a[k] * b[l] + a[l] * b[k]
    return Q % modulus


def quad2(M: GModule) -> Quad2:
    """Q^2(M) for M free over Z/p^K.

    At p = 2 the action is computed from integer lifts of M's action at
    precision 2^K and the result lives over Z/2^(K-1); at odd p no
    precision is lost.
    """
    if not M.is_free:
        raise ModuleError("Q^2 needs a free module")
    pp = exactla.prime_power(M.modulus) if M.modulus else None
    if pp is None:
        raise ModuleError("Q^2 needs a ring Z/p^K")
    p, K = pp
    if p == 2 and K < 2:
        raise ModuleError("Q^2 at p = 2 needs precision 2^K with K >= 2")
    qmod = M.modulus // 2 if p == 2 else M.modulus
    r = M.rank
    G = M.group
    n = 2 * r + r * (r - 1) // 2
    acts = np.empty((G.order, n, n), dtype=object)
    for g in range(G.order):
        A = np.asarray(M.actions[g], dtype=object)
        if p == 2:
            acts[g] = _quad_action(A, r, M.modulus) % qmod
        else:
            acts[g] = _quad_action(A, r, qmod)
    Q = GModule(G, qmod, [qmod] * n, acts, label=f"Q2({M.label})")
    base = GModule(G, qmod, [qmod] * r, M.actions, label=f"{M.label}/{qmod}")
    lin = np.zeros((n, r), dtype=object)
    for i in range(r):
        lin[i, i] = 1
    T = tensor(base, base)
    pol = np.zeros((r * r, n), dtype=object)
    for i in range(r):
        pol[i * r + i, r + i] = 1
    for c, (i, j) in enumerate(_pairs(r, strict=True)):
        pol[i * r + j, 2 * r + c] = 1
        pol[j * r + i, 2 * r + c] = 1
    return Quad2(module=Q, base=base, linear=GModuleMap(base, Q, lin, label="linear"),
                 polarization=GModuleMap(Q, T, pol, label="polarization"), tensor=T)


def quad_eval(r: int, coeffs, y) -> int:
    """Evaluate the quadratic function with the given basis coefficients at y."""
    pairs = _pairs(r, strict=True)
    c = list(coeffs)
    val = 0
    for i in range(r):
        val += c[i] * y[i]
        val += c[r + i] * (y[i] * y[i] - y[i]) // 2
    for k, (i, j) in enumerate(pairs):
        val += c[2 * r + k] * y[i] * y[j]
    return val


def tensor_to_wedge(M: GModule, W: GModule, T: Optional[GModule] = None) -> GModuleMap:
    r = M.rank
    pairs = _pairs(r, strict=True)
    idx = {p: k for k, p in enumerate(pairs)}
    T = T if T is not None else tensor(M, M)
    F = np.zeros((len(pairs), r * r), dtype=object)
    for i in range(r):
        for j in range(r):
            if i < j:
                F[idx[(i, j)], i * r + j] = 1
            elif i > j:
                F[idx[(j, i)], i * r + j] = -1
    return GModuleMap(T, W, F, label="wedge")


def comparison_q2_to_m(q: Quad2) -> np.ndarray:
    """Matrix of f -> (m -> 4 f(m) - f(2m)) from Q^2(M) to M."""
    r = q.base.rank
    n = q.module.rank
    F = np.zeros((r, n), dtype=object)
    for col in range(n):
        coeffs = [1 if k == col else 0 for k in range(n)]
        for i in range(r):
            e = [1 if k == i else 0 for k in range(r)]
            e2 = [2 * x for x in e]
            # the result is linear; its value on e_i is its i-th coordinate
            F[i, col] = 4 * quad_eval(r, coeffs, e) - quad_eval(r, coeffs, e2)
    return F


# ---------------------------------------------------------------------------
# extensions


def _solve_into(f, targets) -> Optional[np.ndarray]:
    """Columns x with f(x) = target (in f.target's presentation)."""
    return solve_many(f.matrix, targets, f.target.modulus, row_moduli=list(f.target.orders))


@dataclass
class Extension:
    """A short exact sequence 0 -> A -> B -> C -> 0 (kind 'short') or a
    4-term exact sequence 0 -> A -> B -> C -> D -> 0 (kind 'yoneda2').

    For short sequences `section` is a matrix lifting each coordinate
    vector of C to B; it is applied to canonical representatives.
    """

    kind: str
    modules: list
    maps: list
    label: str = ""
    section: Optional[np.ndarray] = None
    _divider: object = field(default=None, repr=False)

    @property
    def sub(self):
        return self.modules[0]

    @property
    def quotient(self):
        return self.modules[-1]

    def verify(self):
        mods, maps = self.modules, self.maps
        for k, f in enumerate(maps):
            if f.source is not mods[k] or f.target is not mods[k + 1]:
                raise ExactnessError(f"map {k} does not connect consecutive terms")
        first = maps[0]
        K = exactla.kernel_basis(first.matrix, first.target.modulus, row_moduli=list(first.target.orders)) \
            if first.target.rank else np.eye(first.source.rank, dtype=object)
        if K.size and not first.source.equal_vectors(K, np.zeros_like(K)):
            raise ExactnessError("first map is not injective")
        for k in range(len(maps) - 1):
            f, g = maps[k], maps[k + 1]
            comp = mat_mul(g.matrix, f.matrix)
            if not g.target.equal_vectors(comp, np.zeros_like(comp)):
                raise ExactnessError(f"composite of maps {k} and {k + 1} is not zero")
            Kg = exactla.kernel_basis(g.matrix, g.target.modulus, row_moduli=list(g.target.orders)) \
                if g.target.rank else np.eye(g.source.rank, dtype=object)
            if Kg.size and _solve_into(f, Kg) is None:
                raise ExactnessError(f"not exact at term {k + 1}")
        last = maps[-1]
        if last.target.rank:
            if _solve_into(last, np.eye(last.target.rank, dtype=object)) is None:
                raise ExactnessError("last map is not surjective")
        return self

    def default_section(self) -> np.ndarray:
        last = self.maps[-1]
        C = last.target
        if C.rank == 0:
            return np.zeros((last.source.rank, 0), dtype=object)
        S = _solve_into(last, np.eye(C.rank, dtype=object))
        if S is None:
            raise ExactnessError("surjection has no coordinate section")
        return reduce_vectors(S.T, last.source.orders).T

    def splice(self) -> tuple["Extension", "Extension"]:
        """Split a 4-term sequence at the image of its middle map."""
        if self.kind != "yoneda2":
            raise ValueError("only 4-term sequences can be spliced")
        A, B, C, D = self.modules
        f, g, h = self.maps
        K, incl = image(g, label="middle image")
        proj = _solve_into(incl, g.matrix)
        if proj is None:
            raise ExactnessError("middle map does not factor through its image")
        g1 = GModuleMap(B, K, proj, label="onto image")
        e1 = short_extension(f, g1, label=f"{self.label}[left]")
        e2 = short_extension(incl, h, label=f"{self.label}[right]")
        return e1, e2


def short_extension(inj, surj, label: str = "", verify: bool = True) -> Extension:
    E = Extension("short", [inj.source, inj.target, surj.target], [inj, surj], label=label)
    if verify:
        E.verify()
    E.section = E.default_section()
    return E


def yoneda2_extension(f, g, h, label: str = "", verify: bool = True) -> Extension:
    E = Extension("yoneda2", [f.source, f.target, g.target, h.target], [f, g, h], label=label)
    if verify:
        E.verify()
    return E


def multiplication_map(src: GModule, tgt: GModule, factor: int) -> "GModuleMap | CrossRingMap":
    return hom(src, tgt, factor * np.eye(src.rank, dtype=object))


def bockstein_extension(M: GModule, m: int, i: Optional[int] = None, p: Optional[int] = None) -> Extension:
    """0 -> M/p^i -> M/p^(m+i) -> M/p^m -> 0 for free M over Z/p^K or Z.

    With i = None and M over Z this is 0 -> M -(p^m)-> M -> M/p^m -> 0.
    All three terms are read over the ring of the middle term.
    """
    if not M.is_free:
        raise ModuleError("Bockstein sequences are built from free modules")
    if p is None:
        pp = exactla.prime_power(M.modulus) if M.modulus else None
        if pp is None:
            raise ModuleError("give the prime explicitly for modules over Z")
        p = pp[0]
    if i is None:
        if M.modulus != 0:
            raise ModuleError("the integral Bockstein sequence needs a module over Z")
        top = M
        sub = M
    else:
        top_mod = p ** (m + i)
        if M.modulus and M.modulus % top_mod:
            raise ModuleError(f"precision too low: need p^{m + i}")
        top = GModule(M.group, top_mod, [top_mod] * M.rank, M.actions, label=f"{M.label}/{p}^{m + i}")
        sub = GModule(M.group, top_mod, [p ** i] * M.rank, M.actions, label=f"{M.label}/{p}^{i}")
    quo = GModule(M.group, top.modulus, [p ** m] * M.rank, M.actions, label=f"{M.label}/{p}^{m}")
    inj = GModuleMap(sub, top, (p ** m) * np.eye(M.rank, dtype=object), label="times p^m")
    surj = GModuleMap(top, quo, np.eye(M.rank, dtype=object), label="reduction")
    return short_extension(inj, surj, label=f"Bock({M.label},{m},{i})")


def as_ring(M: GModule, modulus: int) -> GModule:
    """The same module read over Z/modulus (its orders must divide it)."""
    if M.modulus == modulus:
        return M
    return GModule(M.group, modulus, M.orders, M.actions, label=M.label, check=False)


def alpha_extension(V: GModule) -> Extension:
    """0 -> V -(v -> v.v)-> S^2 V -> wedge^2 V -> 0 over F_2."""
    if V.modulus != 2 or not V.is_free:
        raise ModuleError("alpha needs a free module over Z/2")
    r = V.rank
    S = sym2(V)
    W = wedge2(V)
    spairs = _pairs(r, strict=False)
    sidx = {p: k for k, p in enumerate(spairs)}
    wpairs = _pairs(r, strict=True)
    widx = {p: k for k, p in enumerate(wpairs)}
    sq = np.zeros((len(spairs), r), dtype=object)
    for i in range(r):
        sq[sidx[(i, i)], i] = 1
    pr = np.zeros((len(wpairs), len(spairs)), dtype=object)
    for (i, j), k in sidx.items():
        if i < j:
            pr[widx[(i, j)], k] = 1
    inj = GModuleMap(V, S, sq, label="square")
    surj = GModuleMap(S, W, pr, label="wedge")
    return short_extension(inj, surj, label=f"alpha({V.label})")


def genius_extension(M: GModule, precision: Optional[int] = None) -> Extension:
    """0 -> M -> Q^2(M) -> M (x) M -> wedge^2 M -> 0.

    Built at the precision of Q^2(M) and optionally reduced further to
    Z/precision (reduction keeps exactness since every term is free).
    """
    q = quad2(M)
    base = q.base
    W = wedge2(base)
    pr = tensor_to_wedge(base, W, q.tensor)
    E = yoneda2_extension(q.linear, q.polarization, pr, label=f"genius({M.label})")
    if precision is not None and precision != q.module.modulus:
        E = reduce_extension(E, precision)
    return E


def reduce_extension(E: Extension, modulus: int) -> Extension:
    """Reduce a sequence of free modules modulo a divisor of their modulus."""
    mods = []
    for X in E.modules:
        if not X.is_free:
            raise ModuleError("only sequences of free modules can be reduced termwise")
        mods.append(GModule(X.group, modulus, [modulus] * X.rank, X.actions, label=f"{X.label}/{modulus}"))
    maps = [GModuleMap(mods[k], mods[k + 1], f.matrix, label=f.label) for k, f in enumerate(E.maps)]
    if E.kind == "short":
        return short_extension(maps[0], maps[1], label=f"{E.label}/{modulus}")
    return yoneda2_extension(*maps, label=f"{E.label}/{modulus}")


def derived_reduction(X: GModule, Et: GModule, psi, c_map, p: int, m: int, label: str = "") -> Extension:
    """Finite model of the reduction mod p^m of a 4-term sequence
    0 -> X -(p)-> X -(psi)-> E~ -> Y -> 0  with X, Y free over Z_p.

    Inputs: X over Z/p^(m+1); Et = E~/p^(m+1); psi: X/p^(m+1) -> Et
    (factoring through X/p); c_map: Et -> Y/p^m the projection.  Output:
    0 -> X/p^m -> Q -> Et -> Y/p^m -> 0 with
    Q = (Et/p + X/p^(m+1)) / <(psi(x), -p^m x)>,  w -> (0, p w),
    (e, x) -> p^m lift(e) + psi(x).
    """
    top = p ** (m + 1)
    if X.modulus != top or Et.modulus != top:
        raise ModuleError("derived reduction needs X and E~ over Z/p^(m+1)")
    G = X.group
    pmap = GModuleMap(Et, Et, p * np.eye(Et.rank, dtype=object), check=False)
    Ebar, proj = cokernel(pmap, label="E~/p")
    lift = solve_many(proj.matrix, np.eye(Ebar.rank, dtype=object), Ebar.modulus, row_moduli=list(Ebar.orders)) \
        if Ebar.rank else np.zeros((Et.rank, 0), dtype=object)
    psi_bar = mat_mul(proj.matrix, psi.matrix)
    e, r = Ebar.rank, X.rank
    amb = e + r
    acts = np.zeros((G.order, amb, amb), dtype=object)
    acts[:, :e, :e] = Ebar.actions
    acts[:, e:, e:] = X.actions
    rels = []
    for k, o in enumerate(Ebar.orders):
        v = np.zeros(amb, dtype=object)
        v[k] = o
        rels.append(v)
    for k in range(r):
        v = np.zeros(amb, dtype=object)
        v[e + k] = top
        rels.append(v)
        w = np.zeros(amb, dtype=object)
        w[:e] = psi_bar[:, k]
        w[e + k] = -(p ** m)
        rels.append(w)
    Q, to, frm = from_presentation(G, top, amb, np.stack(rels, axis=1), acts, label=label or "Q")
    sub = GModule(G, top, [p ** m] * r, X.actions, label=f"{X.label}/{p}^{m}")
    a_amb = np.zeros((amb, r), dtype=object)
    a_amb[e:, :] = p * np.eye(r, dtype=object)
    a = GModuleMap(sub, Q, to.dot(a_amb), label="a")
    b_amb = np.concatenate([(p ** m) * lift, np.asarray(psi.matrix, dtype=object)], axis=1)
    b = GModuleMap(Q, Et, b_amb.dot(frm), label="b")
    c = c_map
    return yoneda2_extension(a, b, c, label=label or "derived reduction")


def pullback_extension(E: Extension, f) -> Extension:
    """Pull a short extension 0 -> A -> B -> C -> 0 back along f: C' -> C."""
    A, B, C = E.modules
    i, s = E.maps
    Cp = f.source
    S = direct_sum(B, Cp)
    D = np.concatenate([np.asarray(s.matrix, dtype=object), -np.asarray(f.matrix, dtype=object)], axis=1)
    diff = GModuleMap(S, C, D, check=False)
    P, incl = kernel(diff, label="pullback")
    iA = np.concatenate([np.asarray(i.matrix, dtype=object), np.zeros((Cp.rank, A.rank), dtype=object)], axis=0)
    ja = solve_many(incl.matrix, iA, S.modulus, row_moduli=list(S.orders))
    inj = GModuleMap(A, P, ja, label="into pullback")
    prC = np.concatenate([np.zeros((Cp.rank, B.rank), dtype=object), np.eye(Cp.rank, dtype=object)], axis=1)
    surj = GModuleMap(P, Cp, mat_mul(prC, incl.matrix), label="pullback projection")
    return short_extension(inj, surj, label=f"pullback({E.label})")


def mu4_extension(mu4: GModule) -> Extension:
    """0 -> Z/2 -> mu_4 -> Z/2 -> 0 for a rank-1 Z/4-module mu_4."""
    if mu4.modulus != 4 or mu4.rank != 1:
        raise ModuleError("mu_4 must be a rank-one module over Z/4")
    G = mu4.group
    sub = GModule(G, 4, [2], np.ones((G.order, 1, 1), dtype=object), label="Z/2")
    quo = GModule(G, 4, [2], np.ones((G.order, 1, 1), dtype=object), label="Z/2")
    inj = GModuleMap(sub, mu4, [[2]], label="times 2")
    surj = GModuleMap(mu4, quo, [[1]], label="reduction")
    return short_extension(inj, surj, label="mu4")


def build_extension(kind: str, *args, **kwargs) -> Extension:
    """Dispatch for the canonical sequences and manual/pullback constructions."""
    table = {
        "genius": genius_extension,
        "alpha": alpha_extension,
        "bockstein": bockstein_extension,
        "mu4": mu4_extension,
        "pullback": pullback_extension,
        "short": short_extension,
        "yoneda2": yoneda2_extension,
    }
    if kind == "genius1":
        from .ssdiff import genius1_model
        return genius1_model(*args, **kwargs)
    if kind not in table:
        raise ValueError(f"unknown extension kind {kind!r}")
    return table[kind](*args, **kwargs)


def restrict_module(M: GModule, H: FiniteGroup, embedding: Sequence[int]) -> GModule:
    """M viewed as a module over a subgroup H (embedding[h] = element of M.group)."""
    acts = np.stack([np.asarray(M.actions[g], dtype=object) for g in embedding])
    return GModule(H, M.modulus, M.orders, acts, label=M.label, check=False)


def matrix_module(group: FiniteGroup, modulus: int, label: str = "") -> GModule:
    """The natural module of a matrix group built by group_from_matrices."""
    if group.elements is None:
        raise ModuleError("group has no matrix elements")
    acts = np.stack([np.asarray(e, dtype=object) for e in group.elements])
    r = acts.shape[1]
    return GModule(group, modulus, [modulus] * r, acts, label=label or f"natural/{modulus}")


# ---------------------------------------------------------------------------
# module-spec documents


class SpecError(ValueError):
    """A module-spec problem, with a location such as `file:$.actions[1]`."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _int_matrix(obj, rank: int, where: str) -> list:
    if not isinstance(obj, list) or len(obj) != rank:
        raise SpecError(where, f"expected a {rank}x{rank} matrix")
    out = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != rank:
            raise SpecError(f"{where}[{i}]", f"expected a row of length {rank}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, int):
                raise SpecError(f"{where}[{i}][{j}]", f"expected an integer, got {x!r}")
        out.append([int(x) for x in row])
    return out


def module_from_spec(doc, source: str = "<spec>") -> GModule:
    """Build a module from a parsed module-spec document.

    Fields: group ({"permutations": [...]} or {"table": ..., "generators": ...}),
    ring ("Z" or a modulus), rank, actions (one matrix per group generator),
    label (optional).
    """
    if not isinstance(doc, dict):
        raise SpecError(f"{source}:$", "expected an object")
    for key in ("group", "ring", "rank", "actions"):
        if key not in doc:
            raise SpecError(f"{source}:$", f"missing field '{key}'")
    try:
        G = build_group(doc["group"]) if isinstance(doc["group"], dict) else None
    except (GroupError, ValueError, TypeError, KeyError) as e:
        raise SpecError(f"{source}:$.group", str(e)) from None
    if G is None:
        raise SpecError(f"{source}:$.group", "expected an object")
    ring = doc["ring"]
    if not (ring == "Z" or (isinstance(ring, int) and not isinstance(ring, bool) and (ring == 0 or ring >= 2))):
        raise SpecError(f"{source}:$.ring", f"expected \"Z\" or a modulus >= 2, got {ring!r}")
    rank = doc["rank"]
    if isinstance(rank, bool) or not isinstance(rank, int) or rank < 0:
        raise SpecError(f"{source}:$.rank", f"expected a nonnegative integer, got {rank!r}")
    acts = doc["actions"]
    if not isinstance(acts, list) or len(acts) != len(G.gens):
        raise SpecError(f"{source}:$.actions", f"expected {len(G.gens)} generator matrices")
    mats = [_int_matrix(a, rank, f"{source}:$.actions[{k}]") for k, a in enumerate(acts)]
    try:
        return build_module(G, ring, rank, mats, label=str(doc.get("label", "")))
    except ModuleError as e:
        msg = str(e)
        m = re.search(r"generator (\d+)", msg)
        where = f"{source}:$.actions[{m.group(1)}]" if m else f"{source}:$.actions"
        raise SpecError(where, msg) from None


def load_module_spec(path: str) -> GModule:
    import json

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise SpecError(path, e.strerror or str(e)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    return module_from_spec(doc, source=path)


def module_to_spec(M: GModule) -> dict:
    """Inverse of module_from_spec for free modules built from generator matrices."""
    if not M.is_free:
        raise ModuleError("only free modules have a module-spec form")
    G = M.group
    if G.elements and all(isinstance(e, tuple) and all(isinstance(x, int) for x in e) for e in G.elements):
        group = {"permutations": [list(G.elements[g]) for g in G.gens]}
    else:
        group = {"table": G.table.tolist(), "generators": list(G.gens)}
    if G.label:
        group["label"] = G.label
    return {
        "group": group,
        "ring": "Z" if M.modulus == 0 else M.modulus,
        "rank": M.rank,
        "actions": [[[int(x) for x in row] for row in M.actions[g]] for g in G.gens],
        "label": M.label,
    }
