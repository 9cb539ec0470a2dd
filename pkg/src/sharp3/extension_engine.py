"""The two extension moves: totalizing a generator at a point, and joining A to a triple.

Both mutate the state in place (bumping ``st.version``) and append an entry to
``st.log``.  A step whose preconditions fail leaves points and maps untouched,
is logged as rejected, and raises :class:`RejectedStep`.
"""

from __future__ import annotations

from typing import Any

from .action_store import (
    ActionError, ActionState, Triple, TripleClass, classify_triple, is_a_triple,
    is_t_triple, reachable_from_A,
)
from .group_core import GeneratorId

JOIN_CLASS = {"ATriple": "U", "TTriple": "S", "Free": "R"}


class RejectedStep(Exception):
    def __init__(self, reason: str, entry: dict[str, Any]):
        super().__init__(reason)
        self.reason = reason
        self.entry = entry


def _log(st: ActionState, entry: dict[str, Any], status: str, reason: str | None = None) -> dict:
    entry = dict(entry, step=len(st.log), status=status)
    if reason is not None:
        entry["reason"] = reason
    st.log.append(entry)
    return entry


def _reject(st, entry, reason):
    logged = _log(st, entry, "rejected", reason)
    raise RejectedStep(reason, logged)


def activate_generator(st: ActionState, gen: GeneratorId) -> dict:
    """Make a generator active with an empty domain (plus x0 -> x0 for S)."""
    entry = {"kind": "activate", "gen": str(gen)}
    if gen in st.genmaps:
        _reject(st, entry, "already active")
    st.activate(gen)
    return _log(st, entry, "accepted")


def extend_generator(st: ActionState, f: GeneratorId, x: int, direction: int = 1,
                     meta: dict | None = None) -> ActionState:
    """Define x.f^direction on a fresh regular G0-orbit, with the class's closure pairs."""
    entry = {"kind": "extend", "gen": str(f), "at": x, "dir": direction, **(meta or {})}
    if direction not in (1, -1):
        raise ActionError(f"bad direction {direction!r}")
    st._check_point(x)
    gm = st.genmaps.get(f)
    if gm is None:
        _reject(st, entry, "generator not active")
    g0 = st.g0
    side = gm.forward if direction == 1 else gm.backward
    if f.cls == "S":
        sources = [x, st.act_g0(x, g0.t)]
    elif f.cls == "U":
        sources = [x, st.act_g0(x, g0.a), st.act_g0(x, g0.a2)]
    else:
        sources = [x]
    if f.cls == "S" and x == g0.x0:
        _reject(st, entry, "x0 is fixed by every S generator")
    if any(p in side for p in sources):
        _reject(st, entry, "already defined")

    step = len(st.log)
    base = st.add_block(step)
    # block point base + e is x' * g_e; x' * g = base + g for the sources' partners
    targets = [base] + [base + (g0.t if f.cls == "S" else (g0.a, g0.a2)[k]) for k in range(len(sources) - 1)]
    for src, dst in zip(sources, targets):
        if direction == 1:
            st.define(f, src, dst)
        else:
            st.define(f, dst, src)
    entry["new_orbit_base"] = base
    _log(st, entry, "accepted")
    return st


def normalize_target(st: ActionState, B: Triple, cls: str) -> Triple:
    """Reorder B as the join expects: (x, xa, xa^2), (x0, y, yt) or unchanged."""
    g0 = st.g0
    if cls == "ATriple":
        x = min(B)
        return (x, st.act_g0(x, g0.a), st.act_g0(x, g0.a2))
    if cls == "TTriple":
        y = min(p for p in B if p != g0.x0)
        return (g0.x0, y, st.act_g0(y, g0.t))
    return tuple(B)


def connect_triple(st: ActionState, B: Triple, cls: str, bound: int = 6,
                   reach: dict | None = None, max_nodes: int | None = None,
                   meta: dict | None = None) -> ActionState:
    """Join A to an unreached a-, t- or free triple with a fresh U, S or R generator."""
    B = tuple(B)
    entry: dict[str, Any] = {"kind": "join", "target": list(B), "class": cls, **(meta or {})}
    if cls not in JOIN_CLASS:
        raise ActionError(f"bad join class {cls!r}")
    if len(set(B)) != 3:
        raise ActionError(f"not a triple of distinct points: {B!r}")
    for p in B:
        st._check_point(p)
    if cls == "ATriple" and not is_a_triple(st, B):
        _reject(st, entry, "class mismatch: not an a-triple")
    if cls == "TTriple" and not is_t_triple(st, B):
        _reject(st, entry, "class mismatch: not a t-triple")
    B = normalize_target(st, B, cls)
    entry["target"] = list(B)
    reach = reach if reach is not None else reachable_from_A(st)
    if frozenset(B) in reach:
        _reject(st, entry, "already connected")
    if cls == "Free":
        entry["bound"] = bound
        verdict = classify_triple(st, B, bound, max_nodes)
        if verdict is not TripleClass.FREE:
            _reject(st, entry, f"class mismatch: {verdict.value} at bound {bound}")

    f = st.allocate(JOIN_CLASS[cls])
    entry["gen"] = str(f)
    st.activate(f)
    A = st.A
    if cls == "ATriple":
        st.define(f, A[0], B[0])
        st.define(f, A[1], B[1])
        st.define(f, A[2], B[2])
    elif cls == "TTriple":
        st.define(f, A[1], B[1])
        st.define(f, A[2], B[2])
    else:
        for p, q in zip(A, B):
            st.define(f, p, q)
    _log(st, entry, "accepted")
    return st
