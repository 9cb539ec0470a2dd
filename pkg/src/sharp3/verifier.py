"""Bounded checks of goodness, sharp 3-transitivity and equivariance.

The central routine walks all locally admissible words of length <= L that
keep at least three points in their domain, carrying the set of
(source, image) pairs along.  At each node it reads off the 3-sets that the
word's partial map leaves invariant: three fixed points ("fix"), a fixed
point plus a 2-cycle ("flip"), or a 3-cycle ("shift").
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .action_store import ActionState, _letters_on, find_connection, reachable_from_A
from .group_core import (
    FreeLetter, Word, format_word, invert_letters, reduce,
)

CONDITIONS = ("cond3", "cond4", "cond5", "cond6")
SAMPLE = 5


@dataclass
class Invariant:
    word: Word
    kind: str               # fix | flip | shift
    triple: tuple           # ordered so that word acts as identity / (0)(1 2) / (0 1 2)


def _letter_maps(st: ActionState):
    g0 = st.g0
    maps = {}
    for g in range(1, g0.order):
        maps[g] = None      # G0 letters are total, handled by act_g0
    for gen, gm in st.genmaps.items():
        maps[gen.letter(1)] = gm.forward
        maps[gen.letter(-1)] = gm.backward
    return maps


def closed_walks(st: ActionState, L: int, kinds=("fix", "flip", "shift")) -> Iterator[Invariant]:
    """Yield every invariant 3-set of every admissible word of length <= L."""
    g0 = st.g0
    maps = _letter_maps(st)
    defined = st.defined_letters()
    n = st.n_points
    want_fix, want_flip, want_shift = "fix" in kinds, "flip" in kinds, "shift" in kinds
    t, a, a2 = g0.t, g0.a, g0.a2
    g0_tables = {g: [st.act_g0(p, g) for p in range(n)] for g in range(1, g0.order)}
    letters = sorted(f for f in maps if type(f) is not int)

    def invariants(word, src, cur):
        m = dict(zip(src, cur))
        fixed = [s for s, c in zip(src, cur) if s == c]
        if want_fix and len(fixed) >= 3:
            for T in itertools.combinations(fixed, 3):
                yield Invariant(word, "fix", T)
        if want_flip and fixed:
            for s, c in zip(src, cur):
                if s < c and m.get(c) == s:
                    for f in fixed:
                        yield Invariant(word, "flip", (f, s, c))
        if want_shift:
            for s, c in zip(src, cur):
                if c != s:
                    d = m.get(c)
                    if d is not None and d != s and d != c and m.get(d) == s and s < c and s < d:
                        yield Invariant(word, "shift", (s, c, d))

    # Once only three points remain, the walk lives in the graph of triple-sets
    # and can only close up if it is within reach of where it started.
    radius = min(L, 2)
    balls: dict[frozenset, dict] = {}
    defined_sets = [frozenset(d) for d in defined]

    def kind3(src, cur):
        if cur == src:
            return "fix"
        fixed = [k for k in range(3) if src[k] == cur[k]]
        if fixed:
            k = fixed[0]
            return "flip", (src[k],) + tuple(sorted(x for x in src if x != src[k]))
        m = dict(zip(src, cur))
        s0 = min(src)
        return "shift", (s0, m[s0], m[m[s0]])

    def found3(word, src, cur):
        k = kind3(src, cur)
        if k == "fix":
            if want_fix:
                yield Invariant(word, "fix", tuple(sorted(src)))
        elif (k[0] == "flip" and want_flip) or (k[0] == "shift" and want_shift):
            yield Invariant(word, k[0], k[1])

    def walk3(word, src, cur, target, dist):
        if word and frozenset(cur) == target:
            yield from found3(word, src, cur)
        r = L - len(word) - 1
        if r < 0:
            return
        prev = word[-1] if word else None
        prev2 = word[-2] if len(word) > 1 else None
        moves: list = []
        if prev is None or type(prev) is not int:
            moves = list(range(1, g0.order))
        common = defined_sets[cur[1]] & defined_sets[cur[2]]
        moves += [f for f in defined[cur[0]] if f in common]
        for x in moves:
            if type(x) is int:
                tab = g0_tables[x]
                c2 = (tab[cur[0]], tab[cur[1]], tab[cur[2]])
            else:
                if type(prev) is int:
                    if prev2 is not None and type(prev2) is not int and prev2.cls == x.cls:
                        if (x.cls == "S" and prev == t) or (x.cls == "U" and prev in (a, a2)):
                            continue
                elif prev is not None and prev.cls == x.cls and prev.index == x.index and prev.exp == -x.exp:
                    continue
                mp = maps[x]
                c2 = (mp[cur[0]], mp[cur[1]], mp[cur[2]])
            if r <= radius:
                d = dist.get(frozenset(c2))
                if d is None or d > r:
                    continue
            yield from walk3(word + (x,), src, c2, target, dist)

    def enter3(word, src, cur):
        target = frozenset(src)
        dist = balls.get(target)
        if dist is None:
            dist = balls[target] = _triple_ball(st, target, radius, defined, g0_tables)
        r = L - len(word)
        if r <= radius:
            d = dist.get(frozenset(cur))
            if d is None or d > r:
                return iter(())
        return walk3(word, src, cur, target, dist)

    # Near the end of the budget, a pair (s, c) can only take part in an
    # invariant set if c gets back to some source (to s itself, for fixes).
    adj = [frozenset([g0_tables[g][p] for g in range(1, g0.order)]
                     + [maps[f][p] for f in defined[p]]) for p in range(n)]
    ball2: dict[int, frozenset] = {}
    only_fix = not (want_flip or want_shift)

    def near(c, r):
        if r == 1:
            return adj[c]
        b = ball2.get(c)
        if b is None:
            b = ball2[c] = adj[c].union(*(adj[y] for y in adj[c]))
        return b

    def prune(src, cur, r):
        if only_fix:
            keep = [k for k in range(len(src)) if src[k] == cur[k] or src[k] in near(cur[k], r)]
        else:
            srcset = frozenset(src)
            keep = [k for k in range(len(src))
                    if cur[k] in srcset or not near(cur[k], r).isdisjoint(srcset)]
        return tuple(src[k] for k in keep), tuple(cur[k] for k in keep)

    stack = []
    # root: the empty word on all points
    all_pts = tuple(range(n))
    stack.append(((), all_pts, all_pts))
    while stack:
        word, src, cur = stack.pop()
        r = L - len(word)
        if 0 < r <= 2 and len(src) > 3:
            src, cur = prune(src, cur, r)
            if len(src) < 3:
                continue
        if len(src) == 3:
            yield from enter3(word, src, cur)
            continue
        if word:
            yield from invariants(word, src, cur)
        if len(word) == L:
            continue
        prev = word[-1] if word else None
        prev2 = word[-2] if len(word) > 1 else None
        children = []
        if prev is None or type(prev) is not int:
            for g in range(1, g0.order):
                tab = g0_tables[g]
                children.append((g, src, tuple(tab[c] for c in cur)))
        idx = {c: k for k, c in enumerate(cur)}
        keys = idx.keys()
        for f in letters:
            mp = maps[f]
            common = keys & mp.keys()
            if len(common) < 3:
                continue
            if prev is not None:
                if type(prev) is int:
                    if prev2 is not None and type(prev2) is not int and prev2.cls == f.cls:
                        if (f.cls == "S" and prev == t) or (f.cls == "U" and prev in (a, a2)):
                            continue
                elif prev.cls == f.cls and prev.index == f.index and prev.exp == -f.exp:
                    continue
            ks = sorted(idx[c] for c in common)
            children.append((f, tuple(src[k] for k in ks), tuple(mp[cur[k]] for k in ks)))
        for x, s2, c2 in reversed(children):
            stack.append((word + (x,), s2, c2))


def _triple_ball(st: ActionState, key: frozenset, radius: int, defined, tables) -> dict:
    """Distances from a triple-set to all triple-sets within ``radius`` moves."""
    dist = {key: 0}
    frontier = [key]
    for d in range(1, radius + 1):
        nxt = []
        for T in frontier:
            pts = tuple(T)
            moves = list(range(1, st.g0.order)) + _letters_on(st, pts, defined)
            for x in moves:
                if type(x) is int:
                    tab = tables[x]
                    T2 = frozenset((tab[pts[0]], tab[pts[1]], tab[pts[2]]))
                else:
                    mp = st.genmaps[x.gen]
                    T2 = frozenset(mp.image(p, x.exp) for p in pts)
                if T2 not in dist:
                    dist[T2] = d
                    nxt.append(T2)
        frontier = nxt
    return dist


@dataclass
class GoodnessReport:
    L: int
    version: int
    violations: dict[str, list] = field(default_factory=lambda: {c: [] for c in CONDITIONS})
    unknowns: dict[str, int] = field(default_factory=lambda: {c: 0 for c in CONDITIONS})
    unknown_samples: dict[str, list] = field(default_factory=lambda: {c: [] for c in CONDITIONS})
    words: int = 0

    @property
    def n_violations(self) -> int:
        return sum(len(v) for v in self.violations.values())

    @property
    def n_unknowns(self) -> int:
        return sum(self.unknowns.values())

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def summary(self) -> str:
        parts = [f"L={self.L}", f"violations={self.n_violations}", f"unknowns={self.n_unknowns}"]
        parts += [f"{c}:{len(self.violations[c])}/{self.unknowns[c]}" for c in CONDITIONS]
        return " ".join(parts)


def _conjugated(st, cert, w):
    g0 = st.g0
    return reduce(tuple(cert) + tuple(w) + invert_letters(cert, g0), g0)


def check_good(st: ActionState, L: int, reach=None) -> GoodnessReport:
    """Bounded check of conditions 3-6 on all admissible words of length <= L."""
    g0 = st.g0
    reach = reach if reach is not None else reachable_from_A(st)
    rep = GoodnessReport(L, st.version)
    shift_ok = {g0.a, g0.a2}
    A = set(g0.A)
    flip_ok = {g for g in range(1, g0.order)
               if g0.element_order(g) == 2 and {g0.act[g][p] for p in A} == A}
    seen_kinds: dict[frozenset, set] = {}
    last_word = None
    for inv in closed_walks(st, L):
        if inv.word is not last_word:
            rep.words += 1
            last_word = inv.word
        key = frozenset(inv.triple)
        if inv.kind == "fix":
            if reduce(inv.word, g0):
                _add(rep.violations, "cond3", {"word": inv.word, "triple": inv.triple})
            continue
        seen_kinds.setdefault(key, set()).add(inv.kind)
        cond = "cond4" if inv.kind == "shift" else "cond5"
        cert = find_connection(st, inv.triple, reach)
        if cert is None:
            rep.unknowns[cond] += 1
            if len(rep.unknown_samples[cond]) < SAMPLE:
                rep.unknown_samples[cond].append({"word": inv.word, "triple": inv.triple})
            continue
        conj = _conjugated(st, cert, inv.word)
        allowed = shift_ok if inv.kind == "shift" else flip_ok
        if not (len(conj) == 1 and type(conj[0]) is int and conj[0] in allowed):
            _add(rep.violations, cond, {"word": inv.word, "triple": inv.triple,
                                        "certificate": cert, "conjugate": conj})
    for key, kinds in seen_kinds.items():
        if len(kinds) == 2 and key not in reach:
            rep.unknowns["cond6"] += 1
            if len(rep.unknown_samples["cond6"]) < SAMPLE:
                rep.unknown_samples["cond6"].append({"triple": tuple(sorted(key))})
    return rep


def _add(bucket, cond, item):
    bucket[cond].append(item)


def verify_witness(st: ActionState, cond: str, item: dict) -> bool:
    """Re-check a reported violation independently of the search."""
    g0 = st.g0
    w, T = item["word"], item["triple"]
    img = st.apply_word_triple(T, w)
    if img is None or set(img) != set(T):
        return False
    if cond == "cond3":
        return img == tuple(T) and reduce(w, g0) != ()
    cert = item["certificate"]
    if st.apply_word_triple(g0.A, cert) != tuple(T):
        return False
    conj = _conjugated(st, cert, w)
    return conj == item["conjugate"]


# --- sharp 3-transitivity -----------------------------------------------------------

@dataclass
class SharpReport:
    L: int
    ok: bool
    witness: dict | None = None


def check_sharp3(st: ActionState, L: int) -> SharpReport:
    """No nontrivial word of length <= L fixes three distinct points."""
    for inv in closed_walks(st, L, kinds=("fix",)):
        if reduce(inv.word, st.g0):
            return SharpReport(L, False, {"word": inv.word, "triple": inv.triple})
    return SharpReport(L, True)


# --- equivariance -------------------------------------------------------------------

def check_equivariance(st: ActionState) -> list[dict]:
    """Closure failures of S and U generators, with (generator, point) witnesses."""
    g0 = st.g0
    out = []
    for gen in sorted(st.genmaps):
        gm = st.genmaps[gen]
        if gen.cls == "S":
            if gm.forward.get(g0.x0) != g0.x0:
                out.append({"gen": gen, "point": g0.x0, "rule": "x0_fixed"})
            cs = (g0.t,)
        elif gen.cls == "U":
            cs = (g0.a, g0.a2)
        else:
            continue
        for x in sorted(gm.forward):
            y = gm.forward[x]
            for c in cs:
                if gm.forward.get(st.act_g0(x, c)) != st.act_g0(y, c):
                    out.append({"gen": gen, "point": x, "rule": f"commutes_with_{g0.names[c]}"})
                    break
    return out


# --- involutions --------------------------------------------------------------------

@dataclass
class InvolutionReport:
    conj_bound: int
    alphabet: list
    involutions: int
    pairs: int
    commuting: list
    candidates: int = 0       # pairs whose permutation images commute


def elements_up_to(alphabet: list, bound: int, g0) -> list[Word]:
    """All elements of canonical length <= bound that are products of alphabet letters."""
    seen = {(): None}
    frontier = [()]
    for _ in range(bound):
        nxt = []
        for w in frontier:
            for x in alphabet:
                r = reduce(w + (x,), g0)
                if len(r) <= bound and r not in seen:
                    seen[r] = None
                    nxt.append(r)
        frontier = nxt
    return list(seen)


def _centralizer_element(perm: list[int], rng: random.Random) -> list[int]:
    """Random permutation commuting with ``perm``: permute equal-length cycles and rotate."""
    n = len(perm)
    seen, by_len = set(), {}
    for i in range(n):
        if i in seen:
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j)
            j = perm[j]
        by_len.setdefault(len(c), []).append(c)
    out = [0] * n
    for cs in by_len.values():
        targets = cs[:]
        rng.shuffle(targets)
        for c, d in zip(cs, targets):
            off = rng.randrange(len(c))
            for k, x in enumerate(c):
                out[x] = d[(k + off) % len(c)]
    return out


class PermImage:
    """A random homomorphism of G into Sym(n), n = |G0| * copies.

    G0 acts on ``copies`` copies of its regular representation; R letters go to
    random permutations, S and U letters to random elements centralizing the
    image of t or a, which respects the amalgamation.
    """

    def __init__(self, g0, seed: int, copies: int = 6):
        rng = random.Random(seed)
        self.g0, self.rng = g0, rng
        order = g0.order
        self.n = order * copies
        self.g0_perms = {g: np.array([b * order + g0.mult[e][g] for b in range(copies) for e in range(order)])
                         for g in range(order)}
        self.free: dict = {}

    def letter(self, x) -> np.ndarray:
        if type(x) is int:
            return self.g0_perms[x]
        key = (x.cls, x.index)
        if key not in self.free:
            if x.cls == "R":
                fwd = list(range(self.n))
                self.rng.shuffle(fwd)
            else:
                c = self.g0.t if x.cls == "S" else self.g0.a
                fwd = _centralizer_element(list(self.g0_perms[c]), self.rng)
            fwd = np.array(fwd)
            self.free[key] = (fwd, np.argsort(fwd))
        fwd, bwd = self.free[key]
        return fwd if x.exp == 1 else bwd

    def image(self, w) -> np.ndarray:
        # right action: the point i goes to i.w
        cur = np.arange(self.n)
        for x in w:
            cur = self.letter(x)[cur]
        return cur


def check_involutions(st: ActionState, conj_bound: int = 4, per_class: int = 1,
                      seed: int = 0) -> InvolutionReport:
    """Search for distinct commuting conjugates h t h^-1 over a capped alphabet.

    The alphabet holds G0 and the first ``per_class`` active generators of
    each class (with inverses).  Candidate pairs are those whose images under
    a random permutation representation commute; each candidate is then
    decided exactly on canonical forms.
    """
    g0 = st.g0
    alphabet: list = list(range(1, g0.order))
    for cls in ("R", "S", "U"):
        gens = sorted(g for g in st.genmaps if g.cls == cls)[:per_class]
        for g in gens:
            alphabet += [g.letter(1), g.letter(-1)]
    hs = elements_up_to(alphabet, conj_bound, g0)
    invs = sorted({reduce(h + (g0.t,) + invert_letters(h, g0), g0) for h in hs},
                  key=lambda w: (len(w), format_word(w, g0)))
    rep = PermImage(g0, seed)
    P = np.stack([rep.image(w) for w in invs]) if invs else np.zeros((0, rep.n), dtype=int)
    commuting = []
    candidates = 0
    for i, x in enumerate(invs):
        rest = P[i + 1:]
        px = P[i]
        # (x then y)[k] = y[x[k]];  (y then x)[k] = x[y[k]]
        same = (rest[:, px] == px[rest]).all(axis=1)
        for j in np.nonzero(same)[0]:
            candidates += 1
            y = invs[i + 1 + int(j)]
            if reduce(x + y, g0) == reduce(y + x, g0):
                commuting.append((x, y))
    m = len(invs)
    names = [str(x) if isinstance(x, FreeLetter) else g0.names[x] for x in alphabet]
    return InvolutionReport(conj_bound, names, m, m * (m - 1) // 2, commuting, candidates)
