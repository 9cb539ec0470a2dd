"""Fair FIFO scheduler driving the extension engine.

After every accepted step the scheduler enqueues one *cohort* of tasks: the
totalization obligations created by new points and new generators, followed
by join tasks for the unreached a-triples, t-triples and free triples among
the new points.  Tasks are deduplicated, so each obligation is queued once.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .action_store import (
    ActionState, TripleClass, classify_triple, init_state, is_a_triple, is_t_triple,
    reachable_from_A, update_reach,
)
from .extension_engine import RejectedStep, activate_generator, connect_triple, extend_generator
from .g0_instance import G0Spec
from .group_core import CLASSES, GeneratorId
from .verifier import check_good


@dataclass
class BuildConfig:
    instance: str = "s3"
    steps: int = 10
    word_bound: int = 6
    activate: dict[str, int] = field(default_factory=lambda: {"R": 0, "S": 0, "U": 0})
    verify_every: int = 0
    shuffle_seed: int | None = None
    free_max_nodes: int | None = 200_000

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.word_bound < 2:
            raise ValueError("word_bound must be >= 2")

    def to_dict(self) -> dict:
        return {"instance": self.instance, "steps": self.steps, "word_bound": self.word_bound,
                "activate": {c: self.activate.get(c, 0) for c in CLASSES},
                "verify_every": self.verify_every, "shuffle_seed": self.shuffle_seed,
                "free_max_nodes": self.free_max_nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "BuildConfig":
        return cls(instance=d.get("instance", "s3"), steps=d["steps"], word_bound=d["word_bound"],
                   activate=dict(d["activate"]), verify_every=d.get("verify_every", 0),
                   shuffle_seed=d.get("shuffle_seed"), free_max_nodes=d.get("free_max_nodes"))


class Totalize(NamedTuple):
    gen: GeneratorId
    point: int
    direction: int

    def __str__(self):
        return "Totalize"


class JoinA(NamedTuple):
    triple: tuple

    def __str__(self):
        return "JoinA"


class JoinT(NamedTuple):
    triple: tuple

    def __str__(self):
        return "JoinT"


class JoinFree(NamedTuple):
    triple: tuple

    def __str__(self):
        return "JoinFree"


Task = Totalize | JoinA | JoinT | JoinFree


@dataclass
class CoverageReport:
    n_points: int
    triple_sets: int
    reached: int
    at_sets: int
    at_reached: int
    slots: int
    defined_slots: int

    @property
    def fraction(self) -> float:
        return self.reached / self.triple_sets if self.triple_sets else 1.0

    @property
    def at_fraction(self) -> float:
        return self.at_reached / self.at_sets if self.at_sets else 1.0

    @property
    def totality(self) -> float:
        return self.defined_slots / self.slots if self.slots else 1.0


def at_triple_sets(st: ActionState) -> set[frozenset]:
    """All a-triple-sets and t-triple-sets over the current points."""
    g0 = st.g0
    out = set()
    for p in st.points():
        out.add(frozenset((p, st.act_g0(p, g0.a), st.act_g0(p, g0.a2))))
        if p != g0.x0:
            out.add(frozenset((g0.x0, p, st.act_g0(p, g0.t))))
    return out


def coverage(st: ActionState, reach: dict | None = None) -> CoverageReport:
    reach = reach if reach is not None else reachable_from_A(st)
    n = st.n_points
    ats = at_triple_sets(st)
    defined = sum(len(gm.forward) + len(gm.backward) for gm in st.genmaps.values())
    return CoverageReport(n, n * (n - 1) * (n - 2) // 6, len(reach), len(ats),
                          sum(1 for s in ats if s in reach), 2 * n * len(st.genmaps), defined)


@dataclass
class StepRecord:
    step: int              # number of accepted steps so far
    kind: str
    n_points: int
    reach: float
    at_reach: float


@dataclass
class BuildResult:
    state: ActionState
    history: list[StepRecord]
    cohorts: list[tuple[int, int]]       # (accepted steps at enqueue, last queue seq)
    dequeued: int
    reach: dict
    checks: list            # (accepted steps, GoodnessReport) every verify_every steps
    drained: bool           # queue empty at the end

    @property
    def log(self) -> list:
        return self.state.log


class Scheduler:
    def __init__(self, st: ActionState, cfg: BuildConfig):
        self.st = st
        self.cfg = cfg
        self.queue: deque = deque()
        self.seen: set = set()
        self.seq = 0
        self.dequeued = 0
        self.cohorts: list[tuple[int, int]] = []
        self.rng = random.Random(cfg.shuffle_seed) if cfg.shuffle_seed is not None else None
        self.reach = reachable_from_A(st)
        self.accepted = 0
        self.checks: list = []

    # --- cohorts -------------------------------------------------------------

    def _cohort(self, new_points, new_gens) -> list:
        st, g0 = self.st, self.st.g0
        old_points = range(0, min(new_points)) if new_points else st.points()
        tasks: list = []
        gens = sorted(st.genmaps)
        pairs = [(p, g) for p in new_points for g in gens]
        pairs += [(p, g) for p in old_points for g in sorted(new_gens)]
        for p, g in sorted(pairs):
            gm = st.genmaps[g]
            for d, side in ((1, gm.forward), (-1, gm.backward)):
                if p not in side:
                    tasks.append(Totalize(g, p, d))
        if new_points:
            for p in new_points:
                a_set = tuple(sorted((p, st.act_g0(p, g0.a), st.act_g0(p, g0.a2))))
                tasks.append(JoinA(a_set))
            for p in new_points:
                if p != g0.x0:
                    tasks.append(JoinT(tuple(sorted((g0.x0, p, st.act_g0(p, g0.t))))))
            for T in itertools.combinations(new_points, 3):
                if is_a_triple(st, T) or is_t_triple(st, T) or frozenset(T) in self.reach:
                    continue
                if classify_triple(st, T, self.cfg.word_bound, self.cfg.free_max_nodes) is TripleClass.FREE:
                    tasks.append(JoinFree(T))
        return tasks

    def enqueue(self, new_points, new_gens) -> None:
        tasks = [t for t in self._cohort(list(new_points), new_gens) if t not in self.seen]
        tasks = list(dict.fromkeys(tasks))
        if self.rng is not None:
            self.rng.shuffle(tasks)
        for t in tasks:
            self.seen.add(t)
            self.queue.append((t, self.accepted))
            self.seq += 1
        self.cohorts.append((self.accepted, self.seq))

    # --- execution -----------------------------------------------------------

    def execute(self, task, cohort: int) -> tuple[list[int], list[GeneratorId]] | None:
        """Run one task; returns (new points, new generators) or None if rejected.

        Stale tasks (image filled by a closure pair, triple already connected)
        are rejected by the engine and logged like any other rejection.
        """
        st = self.st
        n0, gens0 = st.n_points, set(st.genmaps)
        meta = {"task": str(task), "cohort": cohort}
        try:
            if isinstance(task, Totalize):
                extend_generator(st, task.gen, task.point, task.direction, meta=meta)
            else:
                cls = {JoinA: "ATriple", JoinT: "TTriple", JoinFree: "Free"}[type(task)]
                connect_triple(st, task.triple, cls, self.cfg.word_bound, self.reach,
                               self.cfg.free_max_nodes, meta=meta)
        except RejectedStep:
            return None
        new_points = list(range(n0, st.n_points))
        new_gens = sorted(set(st.genmaps) - gens0)
        return new_points, new_gens

    def touched(self, task, new_points) -> set[int]:
        if isinstance(task, Totalize):
            return set(new_points) | {task.point}
        return set(self.st.A) | set(task.triple)

    def run(self, progress: Callable[[str], None] | None = None,
            on_step: Callable[["Scheduler", StepRecord], None] | None = None) -> list[StepRecord]:
        history = []
        while self.accepted < self.cfg.steps and self.queue:
            task, cohort = self.queue.popleft()
            self.dequeued += 1
            out = self.execute(task, cohort)
            if out is None:
                continue
            new_points, new_gens = out
            self.accepted += 1
            update_reach(self.st, self.reach, self.touched(task, new_points))
            self.enqueue(new_points, new_gens)
            cov = coverage(self.st, self.reach)
            rec = StepRecord(self.accepted, str(task), self.st.n_points, cov.fraction, cov.at_fraction)
            history.append(rec)
            if progress is not None:
                progress(f"step={rec.step} kind={rec.kind} |X|={rec.n_points} reach={rec.reach:.6f}")
            if self.cfg.verify_every and self.accepted % self.cfg.verify_every == 0:
                rep = check_good(self.st, self.cfg.word_bound, self.reach)
                self.checks.append((self.accepted, rep))
                if progress is not None:
                    progress(f"check step={self.accepted} {rep.summary()}")
            if on_step is not None:
                on_step(self, rec)
        return history


def build(g0: G0Spec, cfg: BuildConfig, progress=None, on_step=None) -> BuildResult:
    """Run the construction for ``cfg.steps`` accepted steps (or until the queue drains)."""
    st = init_state(g0)
    for cls in CLASSES:
        for i in range(cfg.activate.get(cls, 0)):
            activate_generator(st, GeneratorId(cls, i))
    sch = Scheduler(st, cfg)
    sch.enqueue(list(st.points()), sorted(st.genmaps))
    history = sch.run(progress, on_step)
    return BuildResult(st, history, sch.cohorts, sch.dequeued, sch.reach, sch.checks, not sch.queue)

