"""Partial action of G on a growing point set.

Points are dense integer ids.  The first ``len(g0.points)`` ids are the base
points; every extension appends a block of ``|G0|`` points on which G0 acts
regularly (block point ``start + e`` stands for ``x' * g_e``).  Free
generators act through partial injections stored in both directions.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .g0_instance import G0Spec, check_hypotheses
from .group_core import FreeLetter, GeneratorId, Letter, Word, reduce

Triple = tuple  # tuple[int, int, int]


class ActionError(ValueError):
    """Structural failure: dangling point id, malformed letter, broken invariant."""


class Undefined(NamedTuple):
    """Result of evaluating a word that leaves the domain after ``prefix_len`` letters."""
    prefix_len: int


@dataclass
class GenMap:
    gen: GeneratorId
    forward: dict[int, int] = field(default_factory=dict)
    backward: dict[int, int] = field(default_factory=dict)

    def image(self, x: int, exp: int) -> int | None:
        return (self.forward if exp == 1 else self.backward).get(x)

    def copy(self) -> "GenMap":
        return GenMap(self.gen, dict(self.forward), dict(self.backward))


@dataclass
class ActionState:
    g0: G0Spec
    blocks: list[int] = field(default_factory=list)          # step id of each orbit block
    genmaps: dict[GeneratorId, GenMap] = field(default_factory=dict)
    next_index: dict[str, int] = field(default_factory=lambda: {"R": 0, "S": 0, "U": 0})
    log: list = field(default_factory=list)
    version: int = 0

    # --- points --------------------------------------------------------------

    @property
    def n_base(self) -> int:
        return len(self.g0.points)

    @property
    def n_points(self) -> int:
        return self.n_base + self.g0.order * len(self.blocks)

    def points(self) -> range:
        return range(self.n_points)

    @property
    def A(self) -> Triple:
        return self.g0.A

    def provenance(self, p: int) -> tuple:
        self._check_point(p)
        if p < self.n_base:
            return ("base", p)
        b, e = divmod(p - self.n_base, self.g0.order)
        return ("orbit", self.blocks[b], e)

    def point_name(self, p: int) -> str:
        prov = self.provenance(p)
        if prov[0] == "base":
            return self.g0.points[p]
        return f"o{prov[1]}.{self.g0.names[prov[2]]}"

    def point_by_name(self, name: str) -> int:
        if name in self.g0.points:
            return self.g0.points.index(name)
        if name.startswith("#") and name[1:].isdigit():
            p = int(name[1:])
            self._check_point(p)
            return p
        if name.startswith("o") and "." in name:
            step, g = name[1:].split(".", 1)
            try:
                b = self.blocks.index(int(step))
                return self.n_base + b * self.g0.order + self.g0.name_index(g)
            except ValueError:
                pass
        raise ActionError(f"unknown point {name!r}")

    def _check_point(self, p) -> None:
        if type(p) is not int or not 0 <= p < self.n_points:
            raise ActionError(f"unknown point {p!r}")

    # --- action --------------------------------------------------------------

    def act_g0(self, p: int, g: int) -> int:
        nb = self.n_base
        if p < nb:
            return self.g0.act[g][p]
        b, e = divmod(p - nb, self.g0.order)
        return nb + b * self.g0.order + self.g0.mult[e][g]

    def apply_letter(self, x: int, letter: Letter) -> int | None:
        """Image of x under one letter, or None where the partial action is undefined."""
        self._check_point(x)
        if type(letter) is int:
            if not 0 < letter < self.g0.order:
                raise ActionError(f"bad G0 syllable {letter!r}")
            return self.act_g0(x, letter)
        if not isinstance(letter, FreeLetter) or letter.exp not in (1, -1):
            raise ActionError(f"malformed letter {letter!r}")
        gm = self.genmaps.get(letter.gen)
        if gm is None:
            return None
        return gm.image(x, letter.exp)

    def apply_word(self, x: int, w: Sequence[Letter]) -> int | Undefined:
        for i, letter in enumerate(w):
            y = self.apply_letter(x, letter)
            if y is None:
                return Undefined(i)
            x = y
        self._check_point(x)
        return x

    def apply_word_triple(self, C: Triple, w: Sequence[Letter]) -> Triple | None:
        out = []
        for x in C:
            y = self.apply_word(x, w)
            if isinstance(y, Undefined):
                return None
            out.append(y)
        return tuple(out)

    def defined_letters(self) -> list[list[FreeLetter]]:
        """For every point, the free letters defined there (sorted)."""
        out: list[list[FreeLetter]] = [[] for _ in range(self.n_points)]
        for gen in sorted(self.genmaps):
            gm = self.genmaps[gen]
            for x in gm.forward:
                out[x].append(gen.letter(1))
            for x in gm.backward:
                out[x].append(gen.letter(-1))
        return out

    # --- mutation (used by the extension engine) -----------------------------

    def allocate(self, cls: str) -> GeneratorId:
        gen = GeneratorId(cls, self.next_index[cls])
        self.next_index[cls] += 1
        return gen

    def activate(self, gen: GeneratorId) -> None:
        if gen in self.genmaps:
            raise ActionError(f"generator {gen} already active")
        self.next_index[gen.cls] = max(self.next_index[gen.cls], gen.index + 1)
        self.genmaps[gen] = GenMap(gen)
        if gen.cls == "S":
            x0 = self.g0.x0
            self.genmaps[gen].forward[x0] = x0
            self.genmaps[gen].backward[x0] = x0
        self.version += 1

    def add_block(self, step_id: int) -> int:
        start = self.n_points
        self.blocks.append(step_id)
        self.version += 1
        return start

    def define(self, gen: GeneratorId, x: int, y: int) -> None:
        """Record x * gen = y, refusing to break injectivity."""
        gm = self.genmaps[gen]
        self._check_point(x)
        self._check_point(y)
        if gm.forward.get(x, y) != y or gm.backward.get(y, x) != x:
            raise ActionError(f"injectivity({gen},{x})")
        gm.forward[x] = y
        gm.backward[y] = x
        self.version += 1

    def copy(self) -> "ActionState":
        return ActionState(self.g0, list(self.blocks),
                           {g: m.copy() for g, m in self.genmaps.items()},
                           dict(self.next_index), list(self.log), self.version)

    # --- invariants ------------------------------------------------------------

    def invariant_violations(self) -> list[str]:
        """Scan all structural invariants; empty list when the state is sound."""
        bad = []
        g0 = self.g0
        for gen, gm in sorted(self.genmaps.items()):
            for x, y in gm.forward.items():
                if gm.backward.get(y) != x:
                    bad.append(f"inverse({gen},{x})")
            if len(gm.backward) != len(gm.forward):
                bad.append(f"injectivity({gen})")
            for x in list(gm.forward) + list(gm.backward):
                if not 0 <= x < self.n_points:
                    bad.append(f"dangling({gen},{x})")
            if gen.cls == "S":
                if gm.forward.get(g0.x0) != g0.x0:
                    bad.append(f"x0_fixed({gen})")
                for x, y in gm.forward.items():
                    if gm.forward.get(self.act_g0(x, g0.t)) != self.act_g0(y, g0.t):
                        bad.append(f"s_closure({gen},{x})")
            if gen.cls == "U":
                for x, y in gm.forward.items():
                    for g in (g0.a, g0.a2):
                        if gm.forward.get(self.act_g0(x, g)) != self.act_g0(y, g):
                            bad.append(f"u_closure({gen},{x})")
        for p in self.points():
            if self.act_g0(p, g0.a) == p:
                bad.append(f"a_fixed_point({p})")
            if self.act_g0(p, g0.t) == p and p != g0.x0:
                bad.append(f"t_fixed_point({p})")
        if self.act_g0(g0.x0, g0.t) != g0.x0:
            bad.append("t_fixes_x0")
        return bad


def init_state(g0: G0Spec) -> ActionState:
    """Initial state on the base points; refuses seeds failing the hypotheses."""
    report = check_hypotheses(g0)
    if not report.ok:
        name = report.first_failure()
        raise ActionError(f"hypothesis {name} fails: {report.witnesses[name]}")
    return ActionState(g0)


# --- triples ---------------------------------------------------------------------

class TripleClass(enum.Enum):
    A_TRIPLE = "ATriple"
    T_TRIPLE = "TTriple"
    S3_STABILIZED = "S3Stabilized"
    FREE = "Free"          # no invariant word up to the search bound
    OTHER = "Other"        # left invariant by some nontrivial word that is not a or t
    UNKNOWN = "Unknown"


def is_a_triple(st: ActionState, C: Iterable[int]) -> bool:
    s = set(C)
    return {st.act_g0(x, st.g0.a) for x in s} == s


def is_t_triple(st: ActionState, C: Iterable[int]) -> bool:
    s = set(C)
    return st.g0.x0 in s and {st.act_g0(x, st.g0.t) for x in s} == s


def _letters_on(st: ActionState, T: Triple, defined) -> list[FreeLetter]:
    a, b, c = defined[T[0]], defined[T[1]], defined[T[2]]
    if not a or not b or not c:
        return []
    sb, sc = set(b), set(c)
    return [f for f in a if f in sb and f in sc]


def locally_admissible(prev: Letter | None, prev2: Letter | None, nxt: Letter, g0: G0Spec) -> bool:
    """Cheap prefix filter: rejects g g', f f^-1, s t s', u a u'."""
    if prev is None:
        return True
    if type(nxt) is int:
        return type(prev) is not int
    if type(prev) is int:
        if prev2 is not None and type(prev2) is not int and prev2.cls == nxt.cls:
            if nxt.cls == "S" and prev == g0.t:
                return False
            if nxt.cls == "U" and prev in (g0.a, g0.a2):
                return False
        return True
    return not (prev.cls == nxt.cls and prev.index == nxt.index and prev.exp == -nxt.exp)


def invariant_word(st: ActionState, C: Triple, bound: int, max_nodes: int | None = None,
                   defined=None) -> tuple[Word | None, bool]:
    """Depth-first search for a nontrivial word of length <= bound leaving set(C) invariant.

    Returns (word, exhausted): ``exhausted`` is False when ``max_nodes`` cut the
    search short.
    """
    g0 = st.g0
    target = frozenset(C)
    defined = defined if defined is not None else st.defined_letters()
    g0_letters = range(1, g0.order)
    nodes = 0

    def dfs(T, word):
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise _Budget
        if word and frozenset(T) == target and reduce(word, g0):
            return word
        if len(word) == bound:
            return None
        prev = word[-1] if word else None
        prev2 = word[-2] if len(word) > 1 else None
        cands: list = [] if (prev is not None and type(prev) is int) else list(g0_letters)
        cands += _letters_on(st, T, defined)
        for x in cands:
            if not locally_admissible(prev, prev2, x, g0):
                continue
            if type(x) is int:
                T2 = tuple(st.act_g0(p, x) for p in T)
            else:
                gm = st.genmaps[x.gen]
                T2 = tuple(gm.image(p, x.exp) for p in T)
            found = dfs(T2, word + (x,))
            if found is not None:
                return found
        return None

    try:
        return dfs(tuple(C), ()), True
    except _Budget:
        return None, False


class _Budget(Exception):
    pass


def classify_triple(st: ActionState, C: Triple, bound: int, max_nodes: int | None = None) -> TripleClass:
    """Classify a triple; the FREE verdict only covers words of length <= bound."""
    if len(set(C)) != 3:
        raise ActionError(f"not a triple of distinct points: {C!r}")
    for p in C:
        st._check_point(p)
    ia, it = is_a_triple(st, C), is_t_triple(st, C)
    if ia and it:
        return TripleClass.S3_STABILIZED
    if ia:
        return TripleClass.A_TRIPLE
    if it:
        return TripleClass.T_TRIPLE
    if bound < 1:
        return TripleClass.UNKNOWN
    w, exhausted = invariant_word(st, C, bound, max_nodes)
    if w is not None:
        return TripleClass.OTHER
    return TripleClass.FREE if exhausted else TripleClass.UNKNOWN


# --- reachability from A -----------------------------------------------------------

def reachable_from_A(st: ActionState) -> dict[frozenset, tuple[Triple, Word]]:
    """Breadth-first closure of A's triple-set under all defined letters.

    Maps each reached triple-set to (ordered triple R, word w) with A.w = R.
    """
    A = st.A
    reach = {frozenset(A): (A, ())}
    _expand(st, reach, deque([(A, ())]))
    return reach


def update_reach(st: ActionState, reach: dict, touched: Iterable[int]) -> dict:
    """Grow ``reach`` in place after new pairs were defined at ``touched`` points.

    Reach only grows, so it suffices to re-expand reached sets meeting a
    touched point.  Witness words stay valid but need not be shortest.
    """
    touched = set(touched)
    seeds = [v for k, v in reach.items() if not touched.isdisjoint(k)]
    _expand(st, reach, deque(seeds), restart=True)
    return reach


def _expand(st: ActionState, reach: dict, queue: deque, restart: bool = False) -> None:
    defined = st.defined_letters()
    g0_letters = range(1, st.g0.order)
    while queue:
        T, w = queue.popleft()
        # a G0 move after a G0 letter is redundant, except when re-seeding
        last_g0 = not restart and bool(w) and type(w[-1]) is int
        moves: list = [] if last_g0 else list(g0_letters)
        moves += _letters_on(st, T, defined)
        for x in moves:
            if type(x) is int:
                T2 = tuple(st.act_g0(p, x) for p in T)
            else:
                gm = st.genmaps[x.gen]
                T2 = tuple(gm.image(p, x.exp) for p in T)
            key = frozenset(T2)
            if key not in reach:
                w2 = w + (x,)
                reach[key] = (T2, w2)
                queue.append((T2, w2))


def ordered_certificate(st: ActionState, rep: Triple, w: Word, B: Triple) -> Word | None:
    """Given A.w = rep (ordered) and set(B) == set(rep), a word taking A to B in order."""
    A = st.A
    for h in range(st.g0.order):
        Ah = tuple(st.act_g0(p, h) for p in A)
        perm = [A.index(p) for p in Ah]
        if tuple(rep[k] for k in perm) == tuple(B):
            w = tuple(w)
            if h == 0:
                return w
            if w and type(w[0]) is int:
                g = st.g0.mult[h][w[0]]
                return ((g,) if g else ()) + w[1:]
            return (h,) + w
    return None


def find_connection(st: ActionState, B: Triple, reach=None) -> Word | None:
    """A word w with A.w == B as ordered triples, or None if B's set is unreached."""
    reach = reach if reach is not None else reachable_from_A(st)
    hit = reach.get(frozenset(B))
    if hit is None:
        return None
    return ordered_certificate(st, hit[0], hit[1], tuple(B))
