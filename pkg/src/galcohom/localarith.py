"""Local arithmetic over Q_p and R: Hilbert symbols, local solubility of
conics and hyperelliptic curves, and a Brauer-Manin local-invariant sum."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

# ---------------------------------------------------------------------------
# places and elementary number theory


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers all n < 2^64)."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Place:
    """A place of Q: p = 0 is the real place, otherwise a prime."""

    p: int

    def __post_init__(self):
        if self.p != 0 and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def is_real(self) -> bool:
        return self.p == 0

    def __str__(self):
        return "inf" if self.p == 0 else str(self.p)

    @staticmethod
    def parse(text) -> "Place":
        t = str(text).strip().lower()
        if t in ("inf", "infinity", "oo", "r", "real"):
            return Place(0)
        return Place(int(t))


REAL = Place(0)


def vp(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x, p: int) -> tuple[int, int]:
    """(v, u) with x = p^v * u and u an integer prime to p, up to squares:
    u = numerator * denominator of the unit part."""
    x = Fraction(x)
    v = vp(x, p)
    y = x / Fraction(p) ** v
    return v, y.numerator * y.denominator


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def squarefree_part(n: int) -> int:
    """Squarefree integer in the square class of a nonzero integer."""
    if n == 0:
        raise ValueError("zero has no square class")
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    q = 2
    while q * q <= n:
        e = 0
        while n % q == 0:
            n //= q
            e += 1
        if e % 2:
            out *= q
        q += 1 if q == 2 else 2
    return sign * out * n


def prime_factors(n: int) -> list:
    n = abs(n)
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _integral_class(x) -> int:
    """An integer in the square class of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("symbol entries must be nonzero")
    return x.numerator * x.denominator


# ---------------------------------------------------------------------------
# Hilbert symbols


def hilbert_symbol(a, b, v: Place) -> int:
    """The local Hilbert symbol (a, b)_v in {1, -1}."""
    a, b = _integral_class(a), _integral_class(b)
    if v.is_real:
        return -1 if a < 0 and b < 0 else 1
    p = v.p
    al, u = unit_part(a, p)
    be, w = unit_part(b, p)
    if p != 2:
        e = (al * be * ((p - 1) // 2)) % 2
        s = -1 if e else 1
        if be % 2:
            s *= legendre(u, p)
        if al % 2:
            s *= legendre(w, p)
        return s

    def eps(t):
        return ((t - 1) // 2) % 2

    def omega(t):
        return ((t * t - 1) // 8) % 2

    e = eps(u) * eps(w) + al * omega(w) + be * omega(u)
    return -1 if e % 2 else 1


def local_invariant(a, b, v: Place) -> Fraction:
    """Invariant of the quaternion algebra (a, b) at v, as 0 or 1/2."""
    return Fraction(0) if hilbert_symbol(a, b, v) == 1 else Fraction(1, 2)


def symbol_places(a, b) -> list:
    """The places where (a, b) can be nontrivial: infinity, 2 and primes dividing a*b."""
    ps = set(prime_factors(_integral_class(a) * _integral_class(b))) | {2}
    return [REAL] + [Place(p) for p in sorted(ps)]


def invariant_sum(a, b) -> Fraction:
    """Sum of local invariants of (a, b) over all places (an integer by the product formula)."""
    return sum((local_invariant(a, b, v) for v in symbol_places(a, b)), Fraction(0))


# ---------------------------------------------------------------------------
# conics z^2 = a x^2 + b y^2, by search and Hensel


def conic_solvable(a, b, v: Place) -> bool:
    """Whether z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v.

    Decided without the symbol formula: a level-by-level search for
    primitive solutions modulo p^k, stopped by Hensel's lemma.
    """
    a, b = squarefree_part(_integral_class(a)), squarefree_part(_integral_class(b))
    if v.is_real:
        return a > 0 or b > 0
    return _conic_padic(a, b, v.p)


def _vint(n: int, p: int, cap: int) -> int:
    if n == 0:
        return cap
    k = 0
    while n % p == 0 and k < cap:
        n //= p
        k += 1
    return k


@lru_cache(maxsize=None)
def _conic_padic(a: int, b: int, p: int) -> bool:
    coef = (a, b, -1)
    v2 = 1 if p == 2 else 0
    depth = 2 * (v2 + 1) + 1

    def q(vec):
        return sum(c * x * x for c, x in zip(coef, vec))

    def hensel_ok(vec, k):
        # a root modulo p^k with derivative valuation d lifts when k >= 2d + 1
        d = min(_vint(2 * c * x, p, k) for c, x in zip(coef, vec))
        return d < k and k >= 2 * d + 1

    for chart in range(3):
        # candidates: residues of the two free coordinates modulo p^k
        cands = [(0, 0)]
        mod = 1
        for k in range(1, depth + 1):
            nxt = []
            for s, t in cands:
                for ds in range(p):
                    for dt in range(p):
                        s2, t2 = s + ds * mod, t + dt * mod
                        vec = [s2, t2]
                        vec.insert(chart, 1)
                        if q(vec) % (p ** k) == 0:
                            if hensel_ok(vec, k):
                                return True
                            nxt.append((s2, t2))
            cands = nxt
            mod *= p
            if not cands:
                break
    return False


# ---------------------------------------------------------------------------
# polynomials


def poly_eval(coeffs: Sequence[int], x):
    """Evaluate a polynomial given by coefficients from the constant term up."""
    out = 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def poly_mul(f: Sequence[int], g: Sequence[int]) -> list:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += a * b
    return out


def poly_derivative(f: Sequence[int]) -> list:
    return [i * c for i, c in enumerate(f)][1:] or [0]


def poly_taylor(f: Sequence[int], x0: int) -> list:
    """Coefficients of f(x0 + t) in t (Horner shifting)."""
    c = list(f)
    n = len(c)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            c[j] += x0 * c[j + 1]
    return c


def resultant(f: Sequence[int], g: Sequence[int]) -> Fraction:
    """Resultant via the Sylvester matrix (exact rational elimination)."""
    f = list(f)
    g = list(g)
    while f and f[-1] == 0:
        f.pop()
    while g and g[-1] == 0:
        g.pop()
    m, n = len(f) - 1, len(g) - 1
    N = m + n
    if N == 0:
        return Fraction(1)
    S = [[Fraction(0)] * N for _ in range(N)]
    for i in range(n):
        for j, c in enumerate(reversed(f)):
            S[i][i + j] = Fraction(c)
    for i in range(m):
        for j, c in enumerate(reversed(g)):
            S[n + i][i + j] = Fraction(c)
    det = Fraction(1)
    for col in range(N):
        piv = next((r for r in range(col, N) if S[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            S[col], S[piv] = S[piv], S[col]
            det = -det
        det *= S[col][col]
        for r in range(col + 1, N):
            if S[r][col]:
                fac = S[r][col] / S[col][col]
                for cc in range(col, N):
                    S[r][cc] -= fac * S[col][cc]
    return det


def discriminant(f: Sequence[int]) -> int:
    n = len(f) - 1
    lead = f[-1]
    r = resultant(f, poly_derivative(f))
    d = Fraction((-1) ** (n * (n - 1) // 2)) * r / lead
    return int(d)


# ---------------------------------------------------------------------------
# local points on y^2 = c f(x)


@dataclass
class CurveLocalDatum:
    """A local point on y^2 = c f(x).

    Finite places: x is an exact rational (or `at_infinity` with x = 1/t),
    c f(x) = p^(2k) u with u a square unit, and y is known modulo
    p^precision.  Real place: x is rational with c f(x) > 0 certified exactly.
    """

    c: int
    f: tuple
    place: Place
    x: Fraction
    at_infinity: bool = False
    y: Optional[int] = None
    y_valuation: int = 0
    precision: int = 0
    value: Fraction = Fraction(0)   # c f(x) (or c F(t) at infinity)

    def check(self) -> bool:
        if self.place.is_real:
            return self.value > 0
        p = self.place.p
        val = self.value
        v = vp(val, p)
        if v % 2:
            return False
        u = val / Fraction(p) ** v
        mod = p ** self.precision
        un = u.numerator * pow(u.denominator, -1, mod) % mod
        return (self.y * self.y - un) % mod == 0

    def to_dict(self) -> dict:
        out = {"place": str(self.place), "x": str(self.x), "at_infinity": self.at_infinity}
        if not self.place.is_real:
            out.update({"y_unit_mod": f"{self.y} mod {self.place.p}^{self.precision}",
                        "y_valuation": self.y_valuation})
        else:
            out["cf_x"] = str(self.value)
        return out


@dataclass
class PointSearch:
    status: str                       # found | none | inconclusive
    points: list = field(default_factory=list)
    note: str = ""


def sqrt_unit(u: int, p: int, prec: int) -> Optional[int]:
    """Square root of a p-adic unit modulo p^prec, or None if it is not a square."""
    if p == 2:
        if u % 8 != 1:
            return None
        y = 1
        for k in range(3, prec + 1):
            # y^2 = u mod 2^k; adjust to mod 2^(k+1)
            if (y * y - u) % (2 ** (k + 1)):
                y += 2 ** (k - 1)
        return y % (2 ** prec)
    if legendre(u, p) != 1:
        return None
    y = next(r for r in range(1, p) if (r * r - u) % p == 0)
    mod = p
    while mod < p ** prec:
        mod = min(mod * mod, p ** prec)
        y = (y - (y * y - u) * pow(2 * y, -1, mod)) % mod
    return y % (p ** prec)


def _square_class_unit(u: int, p: int) -> bool:
    return u % 8 == 1 if p == 2 else legendre(u, p) == 1


def _class_search(g: Sequence[int], p: int, start: list, max_depth: int, want: int):
    """Search residue classes x0 mod p^k for which g(x) is a nonzero square
    for every x in the class.  Returns (points, unresolved) where points are
    representatives x0 (exact integers) and unresolved counts classes left
    open at the depth bound."""
    v2 = 1 if p == 2 else 0
    found = []
    frontier = list(start)
    unresolved = 0
    while frontier:
        x0, k = frontier.pop(0)
        val = poly_eval(g, x0)
        tay = poly_taylor(g, x0)
        mu = min((vp(c, p) + j * k for j, c in enumerate(tay) if j and c), default=10 ** 9)
        if val != 0:
            e = vp(val, p)
            if mu >= e + 1 + 2 * v2:
                # the whole class has the square class of g(x0)
                if e % 2 == 0 and _square_class_unit(val // p ** e if e >= 0 else val, p):
                    found.append((x0, k))
                    if len(found) >= want:
                        return found, unresolved
                continue
        if k >= max_depth:
            unresolved += 1
            continue
        for d in range(p):
            frontier.append((x0 + d * p ** k, k + 1))
    return found, unresolved


def find_local_point(c: int, f: Sequence[int], v: Place, search_bound: Optional[int] = None,
                     precision: Optional[int] = None, want: int = 1, skip: int = 0) -> PointSearch:
    """Local points on y^2 = c f(x) (f given from the constant term up).

    `skip` discards that many points in search order, so a second call
    returns an independent point set.
    """
    f = [int(t) for t in f]
    disc = discriminant(f)
    if disc == 0:
        raise ValueError("f must be separable")
    if v.is_real:
        return _real_points(c, f, search_bound or 64, want, skip)
    p = v.p
    dv = vp(disc, p) if disc % p == 0 else 0
    bound = search_bound if search_bound is not None else 2 * dv + 3 + 2 * (1 if p == 2 else 0) + 4
    prec = precision if precision is not None else 2 * dv + 10
    g = [c * t for t in f]
    deg = len(f) - 1
    pts = []
    # affine chart: x in Z_p
    aff, un1 = _class_search(g, p, [(0, 0)], bound, want + skip)
    for x0, k in aff:
        pts.append((Fraction(x0), False, poly_eval(g, x0)))
    # chart at infinity: x = 1/t, t in pZ_p, y'^2 = c t^deg f(1/t) (deg even)
    un2 = 0
    if len(pts) < want + skip:
        if deg % 2:
            raise ValueError("f must have even degree")
        rev = list(reversed(g))
        inf, un2 = _class_search(rev, p, [(0, 1)], bound, want + skip - len(pts))
        for t0, k in inf:
            if t0 == 0:
                # x = infinity itself: c times the leading coefficient
                pts.append((Fraction(0), True, Fraction(rev[0])))
            else:
                pts.append((Fraction(1, t0), True, poly_eval(rev, t0)))
    pts = pts[skip:skip + want]
    if not pts:
        if un1 or un2:
            return PointSearch("inconclusive", [], f"{un1 + un2} residue classes unresolved at depth {bound}")
        return PointSearch("none", [], "every residue class is excluded")
    out = []
    for x, inf, val in pts:
        val = Fraction(val)
        e = vp(val, p)
        u = val / Fraction(p) ** e
        mod = p ** prec
        un = u.numerator * pow(u.denominator, -1, mod) % mod
        y = sqrt_unit(un, p, prec)
        d = CurveLocalDatum(c, tuple(f), v, x, inf, y, e // 2, prec, val)
        if not d.check():
            raise ArithmeticError("Hensel lift failed the curve equation")
        out.append(d)
    return PointSearch("found", out)


def _real_points(c: int, f: Sequence[int], bound: int, want: int, skip: int) -> PointSearch:
    out = []
    seen = 0
    for n in range(0, bound + 1):
        for x in ([Fraction(n)] if n == 0 else [Fraction(n), Fraction(-n), Fraction(1, n), Fraction(-1, n)]):
            val = c * poly_eval(f, x)
            if val > 0:
                if seen >= skip:
                    out.append(CurveLocalDatum(c, tuple(f), REAL, x, False, value=Fraction(val)))
                    if len(out) >= want:
                        return PointSearch("found", out)
                seen += 1
    if out:
        return PointSearch("found", out)
    # sign analysis at infinity: c * leading coefficient > 0 gives points for large |x|
    if c * f[-1] > 0:
        x = Fraction(2 * bound)
        while c * poly_eval(f, x) <= 0:
            x *= 2
        return PointSearch("found", [CurveLocalDatum(c, tuple(f), REAL, x, False, value=Fraction(c * poly_eval(f, x)))])
    return PointSearch("inconclusive", [], "no sign change found within the bound")


# ---------------------------------------------------------------------------
# the local-invariant sum for y^2 = c (x^2+1)(x^2+17)(x^2-17)


CURVE_F = tuple(poly_mul(poly_mul([1, 0, 1], [17, 0, 1]), [-17, 0, 1]))


def algebra_entry(pt: CurveLocalDatum) -> Fraction:
    """x^2 - 17 at the point, up to squares (1 - 17 t^2 at infinity, x = 1/t)."""
    if pt.at_infinity:
        t = Fraction(0) if pt.x == 0 else 1 / pt.x
        return 1 - 17 * t * t
    return pt.x * pt.x - 17


@dataclass
class CreutzReport:
    total: Fraction
    per_place: list
    rerun_total: Fraction
    certified_outside: list
    bad_primes: list
    notes: list

    def to_dict(self) -> dict:
        return {
            "sum": str(self.total),
            "rerun_sum": str(self.rerun_total),
            "per_place": self.per_place,
            "bad_primes": self.bad_primes,
            "spot_checks_outside_S": self.certified_outside,
            "notes": self.notes,
        }


class LocalSolubilityError(RuntimeError):
    pass


def creutz_sum(c: int = 3, l_sign: int = -1, places: Optional[Sequence[Place]] = None,
               f: Sequence[int] = CURVE_F, spot_primes: Sequence[int] = (5, 7, 11, 13, 19, 23, 29, 31),
               points_per_place: int = 2, precision: Optional[int] = None) -> CreutzReport:
    """Sum over places of inv_v((l, x^2 - 17)(P_v)) for local points P_v.

    `l_sign` is the component of l on the factor x^2 - 17 (the other
    components are 1); with l_sign = 1 the algebra is trivial.
    """
    f = list(f)
    disc = discriminant(f)
    bad = sorted(set(prime_factors(2 * c * disc)))
    if places is None:
        S = [REAL] + [Place(p) for p in sorted(set([2, 17] + prime_factors(c) + bad))]
    else:
        S = list(places)
    missing = [p for p in bad if Place(p) not in S]
    if missing:
        raise ValueError(f"places must contain the bad primes {missing}")

    def inv(pt):
        if l_sign == 1:
            return Fraction(0)
        return local_invariant(l_sign, algebra_entry(pt), pt.place)

    total = Fraction(0)
    rerun = Fraction(0)
    rows = []
    notes = []
    for v in S:
        first = find_local_point(c, f, v, want=points_per_place, precision=precision)
        if first.status != "found":
            raise LocalSolubilityError(f"no local point at {v}: {first.status} ({first.note})")
        second = find_local_point(c, f, v, want=1, skip=points_per_place, precision=precision)
        if second.status != "found":
            second = find_local_point(c, f, v, want=1, skip=points_per_place - 1, precision=precision)
        invs = [inv(pt) for pt in first.points]
        inv2 = inv(second.points[0])
        if any(i != invs[0] for i in invs + [inv2]):
            notes.append(f"invariant at {v} depends on the point")
        total += invs[0]
        rerun += inv2
        rows.append({
            "place": str(v),
            "point": first.points[0].to_dict(),
            "second_point": second.points[0].to_dict(),
            "v(x^2-17)": None if v.is_real else vp(algebra_entry(first.points[0]), v.p),
            "invariant": str(invs[0]),
            "invariants_all_points": [str(i) for i in invs + [inv2]],
        })
    total %= 1
    rerun %= 1
    spot = []
    for p in spot_primes:
        if Place(p) in S:
            continue
        pts = find_local_point(c, f, Place(p), want=points_per_place, precision=precision)
        if pts.status != "found":
            raise LocalSolubilityError(f"no local point at {p}")
        vals = [inv(pt) for pt in pts.points]
        units = [vp(algebra_entry(pt), p) == 0 for pt in pts.points]
        spot.append({"place": p, "invariants": [str(x) for x in vals], "unit_entries": units})
        if any(x != 0 for x in vals):
            notes.append(f"nonzero invariant outside S at {p}")
    return CreutzReport(total, rows, rerun, spot, bad, notes)
