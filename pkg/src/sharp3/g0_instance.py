"""Seed groups G0 acting on a base point set, with brute-force hypothesis checks.

A seed is a finite group given by its multiplication table together with a
right action on a small set of base points.  Elements are stored by index;
index 0 is always the identity.  Products are read left to right, so
``mult[g][h]`` is "first g, then h" and ``act[mult[g][h]][p] == act[h][act[g][p]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any


class G0Error(ValueError):
    """Raised when a serialized seed group violates a structural axiom."""


@dataclass(frozen=True)
class G0Spec:
    order: int
    names: tuple[str, ...]
    mult: tuple[tuple[int, ...], ...]
    points: tuple[str, ...]
    act: tuple[tuple[int, ...], ...]
    a: int
    t: int
    x0: int
    inv: tuple[int, ...] = field(init=False, repr=False, compare=False)
    a2: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _validate(self)
        inv = tuple(next(h for h in range(self.order) if self.mult[g][h] == 0)
                    for g in range(self.order))
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "a2", self.mult[self.a][self.a])

    def mul(self, g: int, h: int) -> int:
        return self.mult[g][h]

    def power(self, g: int, n: int) -> int:
        r = 0
        for _ in range(n % self.element_order(g)):
            r = self.mult[r][g]
        return r

    def element_order(self, g: int) -> int:
        n, r = 1, g
        while r != 0:
            r = self.mult[r][g]
            n += 1
        return n

    def conj(self, g: int, h: int) -> int:
        """h^-1 g h."""
        return self.mult[self.mult[self.inv[h]][g]][h]

    def name_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise G0Error(f"unknown G0 element {name!r}") from None

    @property
    def A(self) -> tuple[int, int, int]:
        x0 = self.x0
        xa = self.act[self.a][x0]
        return (x0, xa, self.act[self.a][xa])

    def to_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "names": list(self.names),
            "mult": [x for row in self.mult for x in row],
            "points": list(self.points),
            "act": [x for row in self.act for x in row],
            "a": self.a,
            "t": self.t,
            "x0": self.x0,
        }


def _validate(g: G0Spec) -> None:
    n = g.order
    if n <= 0 or len(g.names) != n or len(g.mult) != n:
        raise G0Error("shape(order,names,mult)")
    if len(set(g.names)) != n:
        raise G0Error("names must be distinct")
    for i, row in enumerate(g.mult):
        if len(row) != n or any(not 0 <= x < n for x in row):
            raise G0Error(f"shape(mult row {i})")
    for i in range(n):
        if g.mult[0][i] != i or g.mult[i][0] != i:
            raise G0Error(f"identity({i})")
    for i in range(n):
        if sorted(g.mult[i]) != list(range(n)):
            raise G0Error(f"inverses({i})")
    for i, j, k in itertools.product(range(n), repeat=3):
        if g.mult[g.mult[i][j]][k] != g.mult[i][g.mult[j][k]]:
            raise G0Error(f"associativity({i},{j},{k})")
    m = len(g.points)
    if m == 0 or len(set(g.points)) != m:
        raise G0Error("points must be distinct and non-empty")
    if len(g.act) != n:
        raise G0Error("shape(act)")
    for i, row in enumerate(g.act):
        if sorted(row) != list(range(m)):
            raise G0Error(f"permutation(act row {i})")
    if list(g.act[0]) != list(range(m)):
        raise G0Error("homomorphism(identity acts nontrivially)")
    for i, j in itertools.product(range(n), repeat=2):
        gij = g.act[g.mult[i][j]]
        for p in range(m):
            if gij[p] != g.act[j][g.act[i][p]]:
                raise G0Error(f"homomorphism({i},{j},{p})")
    if not (0 <= g.a < n and 0 <= g.t < n and 0 <= g.x0 < m):
        raise G0Error("a, t or x0 out of range")
    if _order(g.mult, g.a) != 3:
        raise G0Error("a must have order 3")
    if _order(g.mult, g.t) != 2:
        raise G0Error("t must have order 2")


def _order(mult, g):
    n, r = 1, g
    while r != 0:
        r = mult[r][g]
        n += 1
    return n


def load_g0(raw: dict[str, Any]) -> G0Spec:
    """Build a G0Spec from its serialized form (row-major tables)."""
    try:
        order = int(raw["order"])
        names = tuple(str(x) for x in raw["names"])
        flat = [int(x) for x in raw["mult"]]
        points = tuple(str(x) for x in raw["points"])
        aflat = [int(x) for x in raw["act"]]
        a, t, x0 = int(raw["a"]), int(raw["t"]), int(raw["x0"])
    except (KeyError, TypeError, ValueError) as exc:
        raise G0Error(f"malformed G0 serialization: {exc}") from None
    m = len(points)
    if len(flat) != order * order or len(aflat) != order * m:
        raise G0Error("shape(mult/act length)")
    mult = tuple(tuple(flat[i * order:(i + 1) * order]) for i in range(order))
    act = tuple(tuple(aflat[i * m:(i + 1) * m]) for i in range(order))
    return G0Spec(order, names, mult, points, act, a, t, x0)


def from_permutations(perms: dict[str, tuple[int, ...]], points, a: str, t: str, x0: int) -> G0Spec:
    """Assemble a seed group from a closed set of named permutations (right action).

    The identity must be the first entry of ``perms``.
    """
    names = list(perms)
    plist = [tuple(perms[k]) for k in names]
    index = {p: i for i, p in enumerate(plist)}
    if len(index) != len(plist):
        raise G0Error("permutations must be distinct")
    mult = []
    for p in plist:
        row = []
        for q in plist:
            pq = tuple(q[p[x]] for x in range(len(p)))
            if pq not in index:
                raise G0Error("permutations not closed under composition")
            row.append(index[pq])
        mult.append(tuple(row))
    return G0Spec(len(plist), tuple(names), tuple(mult), tuple(points), tuple(plist),
                  names.index(a), names.index(t), x0)


def _then(p, q):
    """Permutation "first p, then q"."""
    return tuple(q[p[x]] for x in range(len(p)))


def _s3_elements(a, t) -> dict[str, tuple[int, ...]]:
    e = tuple(range(len(a)))
    a2 = _then(a, a)
    return {"e": e, "a": a, "a2": a2, "t": t, "at": _then(a, t), "a2t": _then(a2, t)}


def builtin_s3() -> G0Spec:
    """S3 in its natural action on three points p1, p2, p3."""
    a = (1, 2, 0)   # p1 -> p2 -> p3 -> p1
    t = (0, 2, 1)   # swap(p2, p3)
    return from_permutations(_s3_elements(a, t), ("p1", "p2", "p3"), "a", "t", 0)


# F8 = F2[x]/(x^3 + x + 1); elements are 3-bit integers.
_F8_MOD = 0b1011


def f8_mul(x: int, y: int) -> int:
    r = 0
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
        if x & 0b1000:
            x ^= _F8_MOD
    return r


def f8_inv(x: int) -> int:
    if x == 0:
        raise ZeroDivisionError("0 has no inverse in F8")
    return next(y for y in range(1, 8) if f8_mul(x, y) == 1)


INF = 8  # the point at infinity of PG(1, F8)


def mobius(a: int, b: int, c: int, d: int, x: int) -> int:
    """x -> (ax + b) / (cx + d) on PG(1, F8)."""
    if x == INF:
        num, den = a, c
    else:
        num, den = f8_mul(a, x) ^ b, f8_mul(c, x) ^ d
    if den == 0:
        return INF
    return f8_mul(num, f8_inv(den))


def builtin_pgl2_f8() -> G0Spec:
    """PGL(2,2) = S3 acting on the projective line over F8.

    t: x -> 1/x and a: x -> 1/(x+1); the base point is 1, the only fixed point of t.
    """
    t = tuple(mobius(0, 1, 1, 0, x) for x in range(9))
    a = tuple(mobius(0, 1, 1, 1, x) for x in range(9))
    points = tuple(str(x) for x in range(8)) + ("inf",)
    return from_permutations(_s3_elements(a, t), points, "a", "t", 1)


def regular_s3() -> G0Spec:
    """S3 acting on itself by right multiplication (six points).  Negative control."""
    s3 = builtin_s3()
    act = tuple(tuple(s3.mult[p][g] for p in range(6)) for g in range(6))
    return G0Spec(6, s3.names, s3.mult, tuple(f"g{n}" for n in s3.names), act, s3.a, s3.t, 0)


def cyclic6() -> G0Spec:
    """Z6 acting regularly, with a = 2 and t = 3 commuting.  Negative control."""
    mult = tuple(tuple((i + j) % 6 for j in range(6)) for i in range(6))
    names = ("e", "c", "c2", "c3", "c4", "c5")
    return G0Spec(6, names, mult, tuple(f"z{i}" for i in range(6)), mult, 2, 3, 0)


BUILTINS = {"s3": builtin_s3, "pgl2f8": builtin_pgl2_f8,
            "regular-s3": regular_s3, "cyclic6": cyclic6}


# --- hypotheses ------------------------------------------------------------

HYPOTHESES = (
    "conj_3cycles",
    "conj_involutions",
    "a_t_generate_s3",
    "cond1_3sharp",
    "cond2_t_unique_fixed_point",
    "cond3_a_fixed_point_free",
    "cond4_triple_identity",
    "cond5_s3_triples_in_orbit_of_A",
)


@dataclass
class HypothesisReport:
    verdicts: dict[str, bool]
    witnesses: dict[str, Any]

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def first_failure(self) -> str | None:
        for name in HYPOTHESES:
            if not self.verdicts[name]:
                return name
        return None

    def lines(self) -> list[str]:
        out = []
        for name in HYPOTHESES:
            v = "pass" if self.verdicts[name] else "FAIL"
            w = "" if self.verdicts[name] else f" witness={self.witnesses[name]}"
            out.append(f"{name}: {v}{w}")
        return out


def _subgroup(g0: G0Spec, gens) -> set[int]:
    elems = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = g0.mul(x, s)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return elems


def _all_conjugate(g0: G0Spec, elems: list[int]):
    """Return None if all of ``elems`` are conjugate to the first, else a witness."""
    if not elems:
        return None
    cls = {g0.conj(elems[0], h) for h in range(g0.order)}
    for e in elems:
        if e not in cls:
            return g0.names[e]
    return None


def set_stabilizer(g0: G0Spec, pts) -> list[int]:
    s = set(pts)
    return [g for g in range(g0.order) if {g0.act[g][p] for p in s} == s]


def is_s3(g0: G0Spec, elems: list[int]) -> bool:
    if len(elems) != 6:
        return False
    return any(g0.mul(x, y) != g0.mul(y, x) for x in elems for y in elems)


def check_hypotheses(g0: G0Spec) -> HypothesisReport:
    """Exhaustively verify the preconditions the construction needs from a seed."""
    verdicts: dict[str, bool] = {}
    wit: dict[str, Any] = {}
    n, m = g0.order, len(g0.points)
    act, names, pts = g0.act, g0.names, g0.points

    def record(name, witness):
        verdicts[name] = witness is None
        wit[name] = witness

    orders = [g0.element_order(g) for g in range(n)]
    threes = [g for g in range(n) if orders[g] == 3]
    if g0.a in threes:
        threes.remove(g0.a)
        threes.insert(0, g0.a)
    record("conj_3cycles", _all_conjugate(g0, threes))
    twos = [g for g in range(n) if orders[g] == 2]
    if g0.t in twos:
        twos.remove(g0.t)
        twos.insert(0, g0.t)
    record("conj_involutions", _all_conjugate(g0, twos))

    sub = sorted(_subgroup(g0, [g0.a, g0.t]))
    record("a_t_generate_s3", None if is_s3(g0, sub) else
           {"subgroup": [names[x] for x in sub]})

    w = None
    for g in range(1, n):
        fixed = [p for p in range(m) if act[g][p] == p]
        if len(fixed) >= 3:
            w = {"element": names[g], "triple": [pts[p] for p in fixed[:3]]}
            break
    record("cond1_3sharp", w)

    fixed_t = [p for p in range(m) if act[g0.t][p] == p]
    record("cond2_t_unique_fixed_point",
           None if fixed_t == [g0.x0] else {"fixed_points": [pts[p] for p in fixed_t]})

    fixed_a = [p for p in range(m) if act[g0.a][p] == p]
    record("cond3_a_fixed_point_free",
           None if not fixed_a else {"fixed_point": pts[fixed_a[0]]})

    x0 = g0.x0
    xa = act[g0.a][x0]
    xaa = act[g0.a][xa]
    xat = act[g0.t][xa]
    A = (x0, xa, xaa)
    ok4 = len(set(A)) == 3 and xaa == xat
    record("cond4_triple_identity", None if ok4 else
           {"x0a2": pts[xaa], "x0at": pts[xat]})

    w = None
    if ok4:
        orbit_sets = {frozenset(act[g][p] for p in A) for g in range(n)}
        for trip in itertools.combinations(range(m), 3):
            if is_s3(g0, set_stabilizer(g0, trip)) and frozenset(trip) not in orbit_sets:
                w = {"triple": [pts[p] for p in trip]}
                break
    else:
        w = {"triple": "A undefined (condition 4 fails)"}
    record("cond5_s3_triples_in_orbit_of_A", w)
    return HypothesisReport(verdicts, wit)
