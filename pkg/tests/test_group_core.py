import random

import pytest
from hypothesis import given, settings, strategies as st

from sharp3.group_core import (
    FreeLetter, WordError, cyclic_reduce, equal, forbidden_patterns, format_word,
    invert, invert_letters, is_cyclically_reduced, multiply, parse_word, reduce,
    reduce_by_rules,
)
from sharp3.g0_instance import builtin_s3

from conftest import random_word

S3 = builtin_s3()


def letters(g0=S3, gens=3):
    g0_letter = st.integers(1, g0.order - 1)
    free = st.builds(FreeLetter, st.sampled_from("RSU"), st.integers(0, gens - 1), st.sampled_from((1, -1)))
    return st.lists(st.one_of(g0_letter, free), max_size=12).map(tuple)


# --- examples -----------------------------------------------------------------

@pytest.mark.parametrize("src,expected", [
    ("u1 u1^-1", ""),
    ("a a2", ""),
    ("s1 t s2", "s1 s2 t"),
    ("a s1 t", "at s1"),
    ("s1 t s1^-1", "t"),
    ("u1 u1", "u1 u1"),
    ("", ""),
])
def test_reduce_examples(W, s3, src, expected):
    assert format_word(reduce(W(src), s3), s3) == expected


def test_a_times_t_is_one_syllable(s3):
    a, t = s3.a, s3.t
    assert reduce((a, FreeLetter("S", 1, 1), t), s3) == (s3.mul(a, t), FreeLetter("S", 1, 1))
    assert s3.names[s3.mul(a, t)] == "at"


def test_multiply_examples(W, s3):
    assert multiply(W("a"), W("a2"), s3) == ()
    assert multiply(W("s1 t"), W("s1^-1"), s3) == W("t")
    assert multiply(W("u1"), W("u1"), s3) == W("u1 u1")


def test_invert_examples(W, s3):
    assert invert(W("a u1"), s3) == W("u1^-1 a2")
    assert invert((), s3) == ()
    assert invert(W("r1 t r2^-1"), s3) == W("r2 t r1^-1")


def test_equal_examples(W, s3):
    assert equal(W("u1 a"), W("a u1"), s3)
    assert not equal(W("a t"), W("t a"), s3)
    assert equal(W("s1 s1^-1"), (), s3)


def test_cyclic_reduce_examples(W, s3):
    core, conj = cyclic_reduce(W("u1^-1 a u1"), s3)
    assert core == W("a")
    assert equal(invert_letters(conj, s3) + core + conj, W("u1^-1 a u1"), s3)
    assert cyclic_reduce(W("r1 a r1^-1"), s3) == (W("a"), W("r1^-1"))
    assert cyclic_reduce(W("t"), s3) == (W("t"), ())


def test_structural_errors(s3):
    with pytest.raises(WordError):
        reduce((0,), s3)
    with pytest.raises(WordError):
        reduce((FreeLetter("X", 0, 1),), s3)
    with pytest.raises(WordError):
        reduce((FreeLetter("R", 0, 2),), s3)
    with pytest.raises(WordError):
        parse_word("q7", s3)


def test_text_round_trip(s3):
    w = parse_word("r3 s0^-1 u12 at a2t", s3)
    assert format_word(w, s3) == "r3 s0^-1 u12 at a2t"
    assert parse_word("", s3) == ()
    assert parse_word("e", s3) == ()


def test_forbidden_pattern_scan_detects_each_kind(W, s3):
    cases = {
        "inverse_pair": "r1 r1^-1",
        "g0_pair": "a t",
        "s_t_s": "s1 t s2",
        "u_a_u": "u1 a2 u2",
        "central_s_block_g0": "t s1 s2 a",
        "g0_s_block_central": "a s1 t",
        "central_u_block_g0": "a u1 t",
        "g0_u_block_central": "t u1 u2 a2",
    }
    for kind, text in cases.items():
        assert kind in {k for k, _ in forbidden_patterns(W(text), s3)}, kind
    assert forbidden_patterns(W("r1 s1 at u1 s2 t"), s3) == []


# --- properties ---------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(letters())
def test_reduce_idempotent_and_pattern_free(w):
    r = reduce(w, S3)
    assert reduce(r, S3) == r
    assert forbidden_patterns(r, S3) == []


@settings(max_examples=300, deadline=None)
@given(letters(), st.integers(0, 2**32))
def test_random_strategy_agrees(w, seed):
    assert reduce_by_rules(w, S3, random.Random(seed)) == reduce(w, S3)


@settings(max_examples=200, deadline=None)
@given(letters(), letters(), letters())
def test_group_laws(x, y, z):
    assert equal(multiply(multiply(x, y, S3), z, S3), multiply(x, multiply(y, z, S3), S3), S3)
    assert invert(invert(x, S3), S3) == reduce(x, S3)
    assert multiply(x, invert(x, S3), S3) == ()
    assert multiply((), x, S3) == reduce(x, S3) == multiply(x, (), S3)


@settings(max_examples=200, deadline=None)
@given(letters())
def test_cyclic_reduce_contract(w):
    core, conj = cyclic_reduce(w, S3)
    assert equal(invert_letters(conj, S3) + core + conj, w, S3)
    assert is_cyclically_reduced(core, S3)
    assert (core == ()) == (reduce(w, S3) == ())


# --- independent oracle: random permutation representations ---------------------

def _centralizer_element(perm, rng):
    """Random permutation commuting with ``perm`` (cycles of equal length permuted and rotated)."""
    n = len(perm)
    seen, cycles = set(), []
    for i in range(n):
        if i in seen:
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j)
            j = perm[j]
        cycles.append(c)
    out = [None] * n
    by_len = {}
    for c in cycles:
        by_len.setdefault(len(c), []).append(c)
    for cs in by_len.values():
        targets = cs[:]
        rng.shuffle(targets)
        for c, d in zip(cs, targets):
            off = rng.randrange(len(c))
            for k, x in enumerate(c):
                out[x] = d[(k + off) % len(c)]
    return tuple(out)


class PermRep:
    """Homomorphism G -> Sym(6k) built from k copies of the regular S3 action."""

    def __init__(self, g0, rng, copies=6):
        n = g0.order * copies
        self.n = n
        self.g0 = {g: tuple(blk * g0.order + g0.mult[p][g] for blk in range(copies) for p in range(g0.order))
                   for g in range(g0.order)}
        self.gens = {}
        self.rng = rng
        self.t, self.a = self.g0[g0.t], self.g0[g0.a]

    def free(self, cls, idx):
        key = (cls, idx)
        if key not in self.gens:
            if cls == "R":
                p = list(range(self.n))
                self.rng.shuffle(p)
                p = tuple(p)
            else:
                p = _centralizer_element(self.t if cls == "S" else self.a, self.rng)
            inv = [0] * self.n
            for i, j in enumerate(p):
                inv[j] = i
            self.gens[key] = (p, tuple(inv))
        return self.gens[key]

    def image(self, w):
        cur = list(range(self.n))
        for x in w:
            if type(x) is int:
                p = self.g0[x]
            else:
                fwd, bwd = self.free(x.cls, x.index)
                p = fwd if x.exp == 1 else bwd
            cur = [p[c] for c in cur]
        return tuple(cur)


def test_perm_rep_is_a_homomorphism_sanity(s3):
    rep = PermRep(s3, random.Random(1))
    s, t = rep.free("S", 0)[0], rep.t
    assert all(s[t[i]] == t[s[i]] for i in range(rep.n))


def test_canonical_forms_match_permutation_oracle(s3):
    rng = random.Random(20261015)
    reps = [PermRep(s3, random.Random(k)) for k in range(3)]
    for _ in range(1500):
        w = random_word(rng, s3)
        r = reduce(w, s3)
        for rep in reps:
            assert rep.image(w) == rep.image(r)
    # distinct canonical forms give distinct images (completeness, probabilistic)
    seen = {}
    for _ in range(1500):
        r = reduce(random_word(rng, s3, max_len=6, gens_per_class=1), s3)
        key = tuple(rep.image(r) for rep in reps)
        assert seen.setdefault(key, r) == r
