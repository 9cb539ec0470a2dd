"""Canonical dumps of an action state, loading, and log replay.

A dump is one line of JSON with sorted keys, no insignificant whitespace and a
trailing LF.  Pair lists are sorted by source id.  The log is the source of
truth; the maps section is a cache that replay re-derives and compares.
"""

from __future__ import annotations

import json
from typing import Any

from .action_store import ActionError, ActionState, GenMap, init_state, reachable_from_A, update_reach
from .extension_engine import RejectedStep, activate_generator, connect_triple, extend_generator
from .g0_instance import G0Error, load_g0
from .group_core import POLICY, WordError, parse_generator

FORMAT_VERSION = "sharp3-dump/1"


class DumpError(ValueError):
    """Unreadable, mismatched or corrupt dump."""


def to_obj(st: ActionState, config: dict | None = None) -> dict[str, Any]:
    gens = sorted(st.genmaps)
    return {
        "version": FORMAT_VERSION,
        "policy": POLICY,
        "g0": st.g0.to_dict(),
        "points": {"base": st.n_base, "blocks": list(st.blocks)},
        "generators": [{"id": str(g), "class": g.cls, "active": True} for g in gens],
        "maps": {str(g): [[x, y] for x, y in sorted(st.genmaps[g].forward.items())] for g in gens},
        "log": st.log,
        "config": config,
    }


def dump(st: ActionState, config: dict | None = None) -> bytes:
    text = json.dumps(to_obj(st, config), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return (text + "\n").encode("ascii")


def parse(data: bytes | str) -> dict:
    if isinstance(data, bytes):
        try:
            data = data.decode("ascii")
        except UnicodeDecodeError as e:
            raise DumpError(f"parse error at offset {e.start}: non-ascii byte") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as e:
        raise DumpError(f"parse error at offset {e.pos}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise DumpError("parse error at offset 0: top level is not an object")
    if obj.get("version") != FORMAT_VERSION:
        raise DumpError(f"version mismatch: {obj.get('version')!r} != {FORMAT_VERSION!r}")
    if obj.get("policy") != POLICY:
        raise DumpError(f"policy mismatch: {obj.get('policy')!r} != {POLICY!r}")
    return obj


def load_with_config(data: bytes | str) -> tuple[ActionState, dict | None]:
    """Rebuild the state from the maps section and re-validate every invariant."""
    obj = parse(data)
    try:
        g0 = load_g0(obj["g0"])
        st = init_state(g0)
        pts = obj["points"]
        if pts["base"] != st.n_base:
            raise DumpError(f"points: base count {pts['base']} != {st.n_base}")
        st.blocks = [int(b) for b in pts["blocks"]]
        for rec in obj["generators"]:
            gen = parse_generator(rec["id"])
            if gen.cls != rec["class"]:
                raise DumpError(f"generator {rec['id']}: class {rec['class']!r}")
            st.genmaps[gen] = GenMap(gen)
            st.next_index[gen.cls] = max(st.next_index[gen.cls], gen.index + 1)
        for name, pairs in obj["maps"].items():
            gen = parse_generator(name)
            if gen not in st.genmaps:
                raise DumpError(f"maps: generator {name} not declared")
            gm = st.genmaps[gen]
            for x, y in pairs:
                if x in gm.forward or y in gm.backward:
                    raise DumpError(f"injectivity({gen},{x})")
                st._check_point(x)
                st._check_point(y)
                gm.forward[x] = y
                gm.backward[y] = x
        st.log = obj["log"]
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DumpError):
            raise
        if isinstance(e, (ActionError, G0Error, WordError)):
            raise DumpError(str(e)) from None
        raise DumpError(f"malformed dump: {e!r}") from None
    bad = st.invariant_violations()
    if bad:
        raise DumpError(f"invariant violation: {bad[0]}")
    return st, obj.get("config")


def load(data: bytes | str) -> ActionState:
    return load_with_config(data)[0]


# --- replay -----------------------------------------------------------------------

_META = ("task", "cohort")


def replay_log(g0, log: list[dict], max_nodes: int | None = None) -> ActionState:
    """Re-execute every logged step from the initial state.

    Accepted entries must be accepted again and rejected ones rejected again
    with the same reason; the rebuilt log must equal the given one.
    """
    st = init_state(g0)
    reach = reachable_from_A(st)
    for k, e in enumerate(log):
        meta = {m: e[m] for m in _META if m in e}
        n0 = st.n_points
        try:
            kind = e["kind"]
            if kind == "activate":
                activate_generator(st, parse_generator(e["gen"]))
                touched = set()
            elif kind == "extend":
                extend_generator(st, parse_generator(e["gen"]), e["at"], e["dir"], meta=meta)
                touched = set(range(n0, st.n_points)) | {e["at"]}
            elif kind == "join":
                connect_triple(st, tuple(e["target"]), e["class"], e.get("bound", 6), reach,
                               max_nodes, meta=meta)
                touched = set(st.A) | set(e["target"])
            else:
                raise DumpError(f"log[{k}]: unknown kind {kind!r}")
        except RejectedStep:
            pass
        except (KeyError, TypeError, ActionError, WordError) as exc:
            raise DumpError(f"log[{k}]: cannot replay: {exc}") from None
        else:
            update_reach(st, reach, touched)
        if st.log[-1] != e:
            raise DumpError(f"log[{k}]: replay diverges: got {st.log[-1]!r}")
    return st


def replay(data: bytes | str) -> tuple[bytes, bytes]:
    """Return (original dump, dump rebuilt from the log)."""
    obj = parse(data)
    st, config = load_with_config(data)
    max_nodes = (config or {}).get("free_max_nodes")
    rebuilt = replay_log(st.g0, obj["log"], max_nodes)
    original = data if isinstance(data, bytes) else data.encode("ascii")
    return original, dump(rebuilt, config)
