"""Command-line entry point: sharp3 {verify-g0,build,check,stats,eval,replay}.

Exit codes: 0 success, 1 violation found, 2 usage or structural error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cli_io
from .action_store import ActionError, Undefined
from .g0_instance import BUILTINS, G0Error, check_hypotheses, load_g0
from .group_core import WordError, format_word, parse_word
from .scheduler import BuildConfig, build, coverage
from .verifier import check_equivariance, check_good, check_involutions, check_sharp3

OK, VIOLATION, STRUCTURAL = 0, 1, 2


class CliError(Exception):
    pass


def resolve_instance(name: str):
    if name in BUILTINS:
        return BUILTINS[name]()
    path = Path(name)
    if not path.is_file():
        raise CliError(f"unknown instance {name!r} (builtins: {', '.join(sorted(BUILTINS))})")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise CliError(f"{name}: parse error at offset {e.pos}: {e.msg}") from None
    return load_g0(raw)


def read_dump(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _word_text(st, w) -> str:
    return format_word(w, st.g0) or "e"


def _triple_text(st, T) -> str:
    return "(" + ",".join(st.point_name(p) for p in T) + ")"


# --- commands -----------------------------------------------------------------------

def cmd_verify_g0(args) -> int:
    g0 = resolve_instance(args.instance)
    report = check_hypotheses(g0)
    for line in report.lines():
        print(line)
    if report.ok:
        print("verify-g0: pass")
        return OK
    failed = [n for n, ok in report.verdicts.items() if not ok]
    print(f"verify-g0: FAIL {' '.join(failed)}")
    return VIOLATION


def cmd_build(args) -> int:
    g0 = resolve_instance(args.instance)
    cfg = BuildConfig(instance=args.instance, steps=args.steps, word_bound=args.word_bound,
                      activate={"R": args.activate_r, "S": args.activate_s, "U": args.activate_u},
                      verify_every=args.verify_every, shuffle_seed=args.shuffle_seed)
    res = build(g0, cfg, progress=None if args.quiet else print)
    data = cli_io.dump(res.state, cfg.to_dict())
    if args.out:
        Path(args.out).write_bytes(data)
    cov = coverage(res.state, res.reach)
    print(f"done steps={len(res.history)} |X|={res.state.n_points} "
          f"generators={len(res.state.genmaps)} reach={cov.fraction:.6f}")
    if any(not rep.ok for _, rep in res.checks):
        return VIOLATION
    return OK


def cmd_check(args) -> int:
    st = cli_io.load(read_dump(args.dump))
    status = OK
    rep = check_good(st, args.word_bound)
    print(f"good: {rep.summary()}")
    for cond, items in rep.violations.items():
        for it in items[:10]:
            print(f"  violation {cond}: word={_word_text(st, it['word'])} triple={_triple_text(st, it['triple'])}")
    for cond, items in rep.unknown_samples.items():
        for it in items:
            w = f"word={_word_text(st, it['word'])} " if "word" in it else ""
            print(f"  unknown {cond}: {w}triple={_triple_text(st, it['triple'])}")
    if not rep.ok or (args.strict_unknowns and rep.n_unknowns):
        status = VIOLATION
    eq = check_equivariance(st)
    print(f"equivariance: {'pass' if not eq else 'FAIL'}")
    for b in eq:
        print(f"  violation {b['rule']}: gen={b['gen']} point={st.point_name(b['point'])}")
        status = VIOLATION
    if args.sharp:
        sh = check_sharp3(st, args.word_bound)
        print(f"sharp3: {'pass' if sh.ok else 'FAIL'} L={args.word_bound}")
        if not sh.ok:
            print(f"  witness word={_word_text(st, sh.witness['word'])} "
                  f"triple={_triple_text(st, sh.witness['triple'])}")
            status = VIOLATION
    if args.involutions is not None:
        inv = check_involutions(st, args.involutions, args.per_class)
        print(f"involutions: {'pass' if not inv.commuting else 'FAIL'} conj_bound={inv.conj_bound} "
              f"alphabet={' '.join(inv.alphabet)} involutions={inv.involutions} pairs={inv.pairs}")
        for x, y in inv.commuting[:10]:
            print(f"  commuting: {_word_text(st, x)} | {_word_text(st, y)}")
        if inv.commuting:
            status = VIOLATION
    return status


def cmd_stats(args) -> int:
    st, config = cli_io.load_with_config(read_dump(args.dump))
    cov = coverage(st)
    by_class = {c: sum(1 for g in st.genmaps if g.cls == c) for c in "RSU"}
    kinds: dict[str, int] = {}
    for e in st.log:
        key = f"{e.get('task', e['kind'])}:{e['status']}"
        kinds[key] = kinds.get(key, 0) + 1
    print(f"points: {st.n_points} (base {st.n_base}, orbits {len(st.blocks)})")
    print("generators: " + " ".join(f"{c}={n}" for c, n in by_class.items()))
    print(f"triple-sets reached: {cov.reached}/{cov.triple_sets} ({cov.fraction:.6f})")
    print(f"a-/t-triple-sets reached: {cov.at_reached}/{cov.at_sets} ({cov.at_fraction:.6f})")
    print(f"defined (gen,point,dir): {cov.defined_slots}/{cov.slots} ({cov.totality:.6f})")
    print("log: " + " ".join(f"{k}={v}" for k, v in sorted(kinds.items())))
    if config:
        print("config: " + json.dumps(config, sort_keys=True))
    return OK


def cmd_eval(args) -> int:
    st = cli_io.load(read_dump(args.dump))
    x = st.point_by_name(args.point)
    w = parse_word(args.word, st.g0)
    y = st.apply_word(x, w)
    if isinstance(y, Undefined):
        print(f"undefined after {y.prefix_len} letters")
    else:
        print(st.point_name(y))
    return OK


def cmd_replay(args) -> int:
    original, rebuilt = cli_io.replay(read_dump(args.dump))
    if args.out:
        Path(args.out).write_bytes(rebuilt)
    if args.verify:
        same = original == rebuilt
        print(f"replay: {'identical' if same else 'DIFFERS'} ({len(rebuilt)} bytes)")
        return OK if same else VIOLATION
    if not args.out:
        sys.stdout.write(rebuilt.decode("ascii"))
    return OK


# --- parser -------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sharp3", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify-g0", help="check the seed group hypotheses")
    v.add_argument("--instance", required=True, help="s3, pgl2f8, regular-s3, cyclic6 or a JSON file")
    v.set_defaults(func=cmd_verify_g0)

    b = sub.add_parser("build", help="run the construction and write a dump")
    b.add_argument("--instance", required=True)
    b.add_argument("--steps", type=int, required=True)
    b.add_argument("--word-bound", type=int, default=6)
    b.add_argument("--activate-r", type=int, default=0)
    b.add_argument("--activate-s", type=int, default=0)
    b.add_argument("--activate-u", type=int, default=0)
    b.add_argument("--verify-every", type=int, default=0)
    b.add_argument("--shuffle-seed", type=int, default=None)
    b.add_argument("--out", default=None)
    b.add_argument("--quiet", action="store_true", help="no per-step progress lines")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", help="bounded goodness check of a dump")
    c.add_argument("--dump", required=True)
    c.add_argument("--word-bound", type=int, required=True)
    c.add_argument("--strict-unknowns", action="store_true")
    c.add_argument("--sharp", action="store_true", help="also check bounded 3-sharpness")
    c.add_argument("--involutions", type=int, default=None, metavar="CONJ_BOUND",
                   help="also search for commuting involutions")
    c.add_argument("--per-class", type=int, default=1,
                   help="generators per class in the involution alphabet")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("stats", help="summary of a dump")
    s.add_argument("--dump", required=True)
    s.set_defaults(func=cmd_stats)

    e = sub.add_parser("eval", help="evaluate a word at a point")
    e.add_argument("--dump", required=True)
    e.add_argument("--point", required=True)
    e.add_argument("--word", required=True)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("replay", help="rebuild a dump from its log")
    r.add_argument("--dump", required=True)
    r.add_argument("--verify", action="store_true")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return STRUCTURAL if e.code else OK
    try:
        return args.func(args)
    except (CliError, cli_io.DumpError, ActionError, G0Error, WordError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
