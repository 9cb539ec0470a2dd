import itertools

import pytest

from sharp3.action_store import init_state
from sharp3.extension_engine import activate_generator, connect_triple, extend_generator
from sharp3.group_core import GeneratorId, reduce
from sharp3.scheduler import BuildConfig, build
from sharp3.verifier import (
    check_equivariance, check_good, check_involutions, check_sharp3, closed_walks,
    elements_up_to, verify_witness,
)

R0, S0, U0 = GeneratorId("R", 0), GeneratorId("S", 0), GeneratorId("U", 0)
R1, S1 = GeneratorId("R", 1), GeneratorId("S", 1)


def small_state(s3, steps=6):
    return build(s3, BuildConfig(steps=steps, word_bound=4, activate={"R": 1, "S": 1, "U": 1})).state


# --- oracle: brute force over all words ------------------------------------------

def brute_invariants(st, L):
    """(set, kind) for every word of length <= L over the full alphabet."""
    g0 = st.g0
    alphabet = list(range(1, g0.order))
    for gen in sorted(st.genmaps):
        alphabet += [gen.letter(1), gen.letter(-1)]
    out = set()
    pts = list(st.points())
    for n in range(1, L + 1):
        for w in itertools.product(alphabet, repeat=n):
            img = {}
            for p in pts:
                q = st.apply_word(p, w)
                if isinstance(q, int):
                    img[p] = q
            if len(img) < 3:
                continue
            nontrivial = reduce(w, g0) != ()
            for C in itertools.combinations(sorted(img), 3):
                if {img[p] for p in C} != set(C):
                    continue
                fixed = sum(img[p] == p for p in C)
                kind = {3: "fix", 1: "flip", 0: "shift"}[fixed]
                if kind != "fix" or nontrivial:
                    out.add((frozenset(C), kind))
    return out


def walk_invariants(st, L):
    out = set()
    for inv in closed_walks(st, L):
        if inv.kind != "fix" or reduce(inv.word, st.g0):
            out.add((frozenset(inv.triple), inv.kind))
        assert set(st.apply_word_triple(inv.triple, inv.word)) == set(inv.triple)
    return out


@pytest.mark.parametrize("steps,L", [(3, 3), (6, 3), (4, 4)])
def test_closed_walks_match_brute_force(s3, steps, L):
    st = small_state(s3, steps)
    assert walk_invariants(st, L) == brute_invariants(st, L)


def test_closed_walks_match_brute_force_with_joins(s3):
    st = init_state(s3)
    for g in (R0, S0, U0):
        activate_generator(st, g)
    extend_generator(st, R0, 0)
    connect_triple(st, (3, 4, 5), "ATriple")
    extend_generator(st, R0, 1)
    connect_triple(st, (s3.x0, 9, st.act_g0(9, s3.t)), "TTriple")
    assert walk_invariants(st, 3) == brute_invariants(st, 3)


def test_walk_ordering_of_triples(s3):
    st = small_state(s3, 4)
    for inv in closed_walks(st, 3):
        img = st.apply_word_triple(inv.triple, inv.word)
        T = inv.triple
        if inv.kind == "fix":
            assert img == T
        elif inv.kind == "flip":
            assert img == (T[0], T[2], T[1])
        else:
            assert img == (T[1], T[2], T[0])


# --- goodness -------------------------------------------------------------------

def test_init_state_is_good(s3, pgl):
    rep = check_good(init_state(s3), 8)
    assert rep.n_violations == 0 and rep.n_unknowns == 0
    # pgl: G0 alone leaves the other t-triples unreached, so only violations count
    rep = check_good(init_state(pgl), 4)
    assert rep.n_violations == 0 and rep.unknowns["cond5"] > 0


def test_built_state_is_good(s3):
    st = small_state(s3, 30)
    rep = check_good(st, 5)
    assert rep.ok, rep.violations


def test_doctored_a_fixing_a_block_violates_cond3(s3):
    st = init_state(s3)
    activate_generator(st, R0)
    extend_generator(st, R0, 0)
    real = st.act_g0
    block = set(range(3, 9))
    st.act_g0 = lambda p, g: p if (p in block and g in (s3.a, s3.a2)) else real(p, g)
    rep = check_good(st, 2)
    assert rep.violations["cond3"]
    w = rep.violations["cond3"][0]["word"]
    assert set(rep.violations["cond3"][0]["triple"]) <= block
    assert w == (s3.a,) or w == (s3.a2,)


def test_misdefined_r_violates_cond3(s3):
    st = init_state(s3)
    activate_generator(st, R1)
    p1, p2, p3 = st.A
    for x, y in ((p1, p1), (p2, p3), (p3, p2)):
        st.define(R1, x, y)
    rep = check_good(st, 4)
    hits = rep.violations["cond3"]
    assert hits
    assert all(verify_witness(st, "cond3", h) for h in hits)
    words = {h["word"] for h in hits}
    r, ri = R1.letter(1), R1.letter(-1)
    assert (r, s3.t, ri, s3.t) in words
    assert not check_sharp3(st, 4).ok


def test_a_triple_joined_by_r_violates_cond4(s3):
    st = init_state(s3)
    activate_generator(st, R0)
    extend_generator(st, R0, 0)
    activate_generator(st, R1)
    for p, q in zip(st.A, (3, 4, 5)):
        st.define(R1, p, q)
    rep = check_good(st, 3)
    assert rep.violations["cond4"]
    assert all(verify_witness(st, "cond4", h) for h in rep.violations["cond4"])


def test_t_triple_joined_by_r_violates_cond5(s3):
    st = init_state(s3)
    activate_generator(st, R0)
    extend_generator(st, R0, 0)
    activate_generator(st, R1)
    y = 4
    B = (s3.x0, y, st.act_g0(y, s3.t))
    for p, q in zip(st.A, B):
        st.define(R1, p, q)
    rep = check_good(st, 3)
    assert rep.violations["cond5"]
    assert all(verify_witness(st, "cond5", h) for h in rep.violations["cond5"])


def test_unreached_invariant_sets_are_unknown_not_violations(s3):
    st = init_state(s3)
    activate_generator(st, R0)
    extend_generator(st, R0, 0)
    rep = check_good(st, 2)
    assert rep.ok
    # the block's two a-triples, each shifted by a and by a2
    assert rep.unknowns["cond4"] == 4
    # each involution fixes one base point and has three 2-cycles on the block
    assert rep.unknowns["cond5"] == 9


# --- sharpness, equivariance, involutions -----------------------------------------

def test_sharp3_examples(s3, pgl):
    assert check_sharp3(init_state(s3), 6).ok
    assert check_sharp3(init_state(pgl), 4).ok
    assert check_sharp3(small_state(s3, 20), 5).ok


def test_equivariance_dropped_pair(s3):
    st = init_state(s3)
    activate_generator(st, S1)
    p2, p3 = st.A[1], st.A[2]
    extend_generator(st, S1, p2)
    assert check_equivariance(st) == []
    gm = st.genmaps[S1]
    y = gm.forward.pop(p3)
    del gm.backward[y]
    bad = check_equivariance(st)
    assert [(b["gen"], b["point"]) for b in bad] == [(S1, p2)]


def test_equivariance_u_and_x0(s3):
    st = init_state(s3)
    for g in (S0, U0):
        activate_generator(st, g)
    extend_generator(st, U0, 0)
    assert check_equivariance(st) == []
    st.genmaps[S0].forward.pop(s3.x0)
    assert [b["rule"] for b in check_equivariance(st)] == ["x0_fixed"]


def test_elements_up_to_counts(s3):
    # G0 alone: all six elements have length <= 1
    assert len(elements_up_to(list(range(1, 6)), 3, s3)) == 6
    r = R0.letter(1)
    assert len(elements_up_to([r, r.inverse()], 3, s3)) == 7


def test_involutions_small(s3):
    st = small_state(s3, 6)
    rep = check_involutions(st, 2)
    assert rep.involutions > 1
    assert rep.commuting == []
