"""Words in G = ((<a> x F(U)) *_<a> G0 *_<t> (<t> x F(S))) * F(R).

A word is a tuple of letters.  A letter is either a G0 syllable, stored as the
(nonzero) element index of the seed group, or a :class:`FreeLetter`.

Canonical form
--------------
``reduce`` first computes the *right normal form*: free cancellation, merging
of adjacent G0 syllables, and pushing the central elements t (past S letters)
and a^k (past U letters) as far right as they go.  A right pass then applies
the placement policy: a block's central residual that ended up as a bare
syllable to the right of the block moves into the G0 syllable on the block's
left, when there is one.  Blocks are processed right to left so that a
residual prefers a genuine syllable on its right.

In the right normal form a syllable standing directly before an S or U block
is the least-index element of its coset modulo <t> or <a>; the rest of it
travels through the block.

Every rewrite either shortens the word or moves a central letter strictly to
the right, so the measure (length, sum of distances of central letters from
the right end) decreases lexicographically.
"""

from __future__ import annotations

import random
import re
from typing import NamedTuple, Sequence, Union

from .g0_instance import G0Spec

POLICY = "right-normal/left-absorb-v1"

CLASSES = ("R", "S", "U")


class WordError(ValueError):
    """Structural problem with a word: unknown element, malformed letter."""


class GeneratorId(NamedTuple):
    cls: str
    index: int

    def __str__(self):
        return f"{self.cls.lower()}{self.index}"

    def letter(self, exp: int = 1) -> "FreeLetter":
        return FreeLetter(self.cls, self.index, exp)


class FreeLetter(NamedTuple):
    cls: str
    index: int
    exp: int

    @property
    def gen(self) -> GeneratorId:
        return GeneratorId(self.cls, self.index)

    def inverse(self) -> "FreeLetter":
        return FreeLetter(self.cls, self.index, -self.exp)

    def __str__(self):
        s = f"{self.cls.lower()}{self.index}"
        return s if self.exp == 1 else s + "^-1"


Letter = Union[int, FreeLetter]
Word = tuple  # tuple[Letter, ...]


def is_g0(letter: Letter) -> bool:
    return type(letter) is int


def central(g0: G0Spec, cls: str) -> frozenset[int]:
    """Nontrivial elements of the subgroup amalgamated with the given class."""
    if cls == "S":
        return frozenset((g0.t,))
    if cls == "U":
        return frozenset((g0.a, g0.a2))
    return frozenset()


def _check_letters(w: Sequence[Letter], g0: G0Spec) -> None:
    for x in w:
        if type(x) is int:
            if not 0 < x < g0.order:
                raise WordError(f"bad G0 syllable {x!r}")
        elif isinstance(x, FreeLetter):
            if x.cls not in CLASSES or x.exp not in (1, -1) or x.index < 0:
                raise WordError(f"malformed letter {x!r}")
        else:
            raise WordError(f"not a letter: {x!r}")


# --- deterministic strategy ---------------------------------------------------

class _Block:
    __slots__ = ("cls", "letters")

    def __init__(self, cls, letters):
        self.cls = cls
        self.letters = letters


_SPLIT_CACHE: dict[int, tuple] = {}


def _splits(g0: G0Spec) -> dict[str, list[tuple[int, int]]]:
    """Per class, g -> (r, c) with g = r c, c central, r the least index in g C."""
    hit = _SPLIT_CACHE.get(id(g0))
    if hit is not None and hit[0] is g0:
        return hit[1]
    out = {}
    for cls in CLASSES:
        cs = (0,) + tuple(sorted(central(g0, cls)))
        table = []
        for g in range(g0.order):
            r = min(g0.mult[g][c] for c in cs)
            table.append((r, g0.mult[g0.inv[r]][g]))
        out[cls] = table
    _SPLIT_CACHE[id(g0)] = (g0, out)
    return out


def _right_normal(w: Sequence[Letter], g0: G0Spec) -> list:
    split = _splits(g0)
    mult = g0.mult
    stack: list = []

    def push_g(g):
        if g == 0:
            return
        if stack and type(stack[-1]) is int:
            h = mult[stack[-1]][g]
            if h == 0:
                stack.pop()
            else:
                stack[-1] = h
        else:
            stack.append(g)

    for x in w:
        if type(x) is int:
            push_g(x)
            continue
        c = 0
        if stack and type(stack[-1]) is int:
            r, c = split[x.cls][stack[-1]]
            if r:
                stack[-1] = r
            else:
                stack.pop()
        top = stack[-1] if stack else None
        if type(top) is _Block and top.cls == x.cls:
            last = top.letters[-1]
            if last.index == x.index and last.exp == -x.exp:
                top.letters.pop()
                if not top.letters:
                    stack.pop()
            else:
                top.letters.append(x)
        else:
            stack.append(_Block(x.cls, [x]))
        push_g(c)
    return stack


def _place(items: list, g0: G0Spec) -> list:
    cs = {c: central(g0, c) for c in CLASSES}
    i = len(items) - 1
    while i >= 1:
        it = items[i]
        if (type(it) is _Block and i + 1 < len(items)
                and type(items[i + 1]) is int and items[i + 1] in cs[it.cls]
                and type(items[i - 1]) is int):
            items[i - 1] = g0.mult[items[i - 1]][items[i + 1]]
            del items[i + 1]
        i -= 1
    return items


def _flatten(items) -> Word:
    out = []
    for it in items:
        if type(it) is int:
            out.append(it)
        else:
            out.extend(it.letters)
    return tuple(out)


def reduce(w: Sequence[Letter], g0: G0Spec) -> Word:
    """Canonical reduced form of ``w``; empty iff ``w`` is the identity."""
    _check_letters(w, g0)
    return _flatten(_place(_right_normal(w, g0), g0))


def right_normal(w: Sequence[Letter], g0: G0Spec) -> Word:
    _check_letters(w, g0)
    return _flatten(_right_normal(w, g0))


# --- randomized strategy ------------------------------------------------------

def _rule_sites(w: list, split) -> list[int]:
    sites = []
    for i in range(len(w) - 1):
        x, y = w[i], w[i + 1]
        if type(x) is int:
            if type(y) is int:
                sites.append(i)
            elif split[y.cls][x][1]:
                sites.append(i)
        elif type(y) is not int and x.cls == y.cls and x.index == y.index and x.exp == -y.exp:
            sites.append(i)
    return sites


def reduce_by_rules(w: Sequence[Letter], g0: G0Spec, rng: random.Random | None = None) -> Word:
    """Rewrite with local rules at randomly chosen sites, then apply placement.

    Rules: f f^-1 -> (), g h -> gh, and g f -> r f c where g = r c with c
    central in f's factor and r the chosen coset representative.
    Independent of the stack-based strategy; used to test confluence.
    """
    _check_letters(w, g0)
    rng = rng or random.Random()
    split = _splits(g0)
    cur = list(w)
    while True:
        sites = _rule_sites(cur, split)
        if not sites:
            break
        i = rng.choice(sites)
        x, y = cur[i], cur[i + 1]
        if type(x) is int and type(y) is int:
            g = g0.mult[x][y]
            cur[i:i + 2] = [g] if g else []
        elif type(x) is int:
            r, c = split[y.cls][x]
            cur[i:i + 2] = ([r] if r else []) + [y, c]
        else:
            del cur[i:i + 2]
    items: list = []
    for x in cur:
        if type(x) is int:
            items.append(x)
        elif items and type(items[-1]) is _Block and items[-1].cls == x.cls:
            items[-1].letters.append(x)
        else:
            items.append(_Block(x.cls, [x]))
    return _flatten(_place(items, g0))


# --- group operations ---------------------------------------------------------

def invert_letters(w: Sequence[Letter], g0: G0Spec) -> Word:
    return tuple(g0.inv[x] if type(x) is int else x.inverse() for x in reversed(w))


def invert(w: Sequence[Letter], g0: G0Spec) -> Word:
    return reduce(invert_letters(w, g0), g0)


def multiply(w1: Sequence[Letter], w2: Sequence[Letter], g0: G0Spec) -> Word:
    return reduce(tuple(w1) + tuple(w2), g0)


def equal(w1: Sequence[Letter], w2: Sequence[Letter], g0: G0Spec) -> bool:
    return reduce(w1, g0) == reduce(w2, g0)


def is_cyclically_reduced(w: Sequence[Letter], g0: G0Spec) -> bool:
    """No cyclic rotation of ``w`` reduces to a shorter word.

    Length-preserving moves of central letters (e.g. s1 t s2 -> s1 s2 t) do not
    count as reductions here.
    """
    n = len(w)
    w = tuple(w)
    return all(len(reduce(w[k:] + w[:k], g0)) == n for k in range(n))


def cyclic_reduce(w: Sequence[Letter], g0: G0Spec) -> tuple[Word, Word]:
    """Return (core, conjugator) with w = conjugator^-1 . core . conjugator."""
    cur = reduce(w, g0)
    conj: Word = ()
    while True:
        n = len(cur)
        for k in range(1, n):
            rot = reduce(cur[k:] + cur[:k], g0)
            if len(rot) < n:
                # rot = P^-1 cur P with P = cur[:k]; so cur = P rot P^-1
                conj = reduce(invert_letters(cur[:k], g0) + conj, g0)
                cur = rot
                break
        else:
            return cur, conj


# --- forbidden-pattern scan ---------------------------------------------------

def forbidden_patterns(w: Sequence[Letter], g0: G0Spec) -> list[tuple[str, int]]:
    """Occurrences of the six subword patterns excluded from reduced words."""
    w = tuple(w)
    n = len(w)
    hits = []
    cls = [None if type(x) is int else x.cls for x in w]
    apm = (g0.a, g0.a2)
    for i in range(n - 1):
        x, y = w[i], w[i + 1]
        if cls[i] and cls[i + 1] and x.gen == y.gen and x.exp == -y.exp:
            hits.append(("inverse_pair", i))
        if cls[i] is None and cls[i + 1] is None:
            hits.append(("g0_pair", i))
    for i in range(1, n - 1):
        if w[i] == g0.t and cls[i] is None and cls[i - 1] == "S" and cls[i + 1] == "S":
            hits.append(("s_t_s", i))
        if w[i] in apm and cls[i] is None and cls[i - 1] == "U" and cls[i + 1] == "U":
            hits.append(("u_a_u", i))

    def block_end(i, c):
        j = i
        while j < n and cls[j] == c:
            j += 1
        return j

    for i in range(n):
        if cls[i] is not None:
            continue
        for c, cent in (("S", (g0.t,)), ("U", apm)):
            j = block_end(i + 1, c)
            if j == i + 1 or j >= n or cls[j] is not None:
                continue
            # i: syllable, (i+1 .. j-1): block, j: syllable
            if w[i] in cent:
                hits.append((f"central_{c.lower()}_block_g0", i))
            if w[j] in cent:
                hits.append((f"g0_{c.lower()}_block_central", i))
    return hits


# --- text syntax --------------------------------------------------------------

_FREE_RE = re.compile(r"^([rsuRSU])(\d+)(\^-1)?$")


def parse_word(text: str, g0: G0Spec) -> Word:
    out: list[Letter] = []
    for tok in text.split():
        if tok in g0.names:
            g = g0.names.index(tok)
            if g:
                out.append(g)
            continue
        m = _FREE_RE.match(tok)
        if not m:
            raise WordError(f"cannot parse token {tok!r}")
        out.append(FreeLetter(m.group(1).upper(), int(m.group(2)), -1 if m.group(3) else 1))
    return tuple(out)


def format_word(w: Sequence[Letter], g0: G0Spec) -> str:
    return " ".join(g0.names[x] if type(x) is int else str(x) for x in w)


def parse_generator(text: str) -> GeneratorId:
    m = _FREE_RE.match(text)
    if not m or m.group(3):
        raise WordError(f"bad generator {text!r}")
    return GeneratorId(m.group(1).upper(), int(m.group(2)))
