"""Stagewise registry of c.e. sets and partial-function opponents.

A c.e. set is a registered *program*: a deterministic function
``step(own, stage, view)`` returning the numbers to enumerate at ``stage``.
``W[e, s]`` is the union of everything program ``e`` emitted at stages
``t < s``, so every set is empty at stage 0.

Within a stage, programs run in id order and the view handed to program ``e``
shows ``W[d, s+1]`` for ``d < e`` and ``W[d, s]`` for ``d >= e``.  A program
that transforms a lower-numbered set therefore tracks it with no lag, while a
program reading a higher-numbered set (the self-referential trap built with
:meth:`Registry.fixpoint`) sees it one stage behind.

Every registered program runs from stage 0.  Registering a program after the
registry has advanced back-fills its history, so snapshots never depend on
when registration happened.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

DEFAULT_CAP = 64
FN_WINDOW = 64

_USE_DEFAULT = object()


@dataclass
class Program:
    """A set program plus the metadata the registry cares about.

    ``settle`` is a declared stage after which the program emits nothing new;
    it is what lets approximations report final verdicts.  ``cap`` overrides
    the registry's per-stage emission cap (``None`` = unbounded).
    """

    step: Callable
    settle: Optional[int] = None
    cap: object = _USE_DEFAULT
    name: str = ""

    def reset(self):
        reset = getattr(self.step, "reset", None)
        if reset is not None:
            reset()


@dataclass
class PartialFn:
    rule: Callable[[int], Optional[int]]
    delay: object = 0
    name: str = ""
    _memo: dict = field(default_factory=dict, repr=False)

    def value(self, x: int) -> Optional[int]:
        if x not in self._memo:
            self._memo[x] = self.rule(x)
        return self._memo[x]

    def converge_stage(self, x: int) -> int:
        return self.delay(x) if callable(self.delay) else self.delay


class StageView:
    """Read-only window onto the registry handed to a program's step."""

    __slots__ = ("_reg", "_sets", "stage", "_limit")

    def __init__(self, reg, sets, stage, limit):
        self._reg = reg
        self._sets = sets
        self.stage = stage
        self._limit = limit

    def __getitem__(self, e: int):
        if e < 0:
            raise KeyError(e)
        if e >= self._limit:
            self._reg._missing.add(e)
            return frozenset()
        return self._sets[e]

    def phi(self, n: int, x: int) -> Optional[int]:
        return self._reg.phi_at(n, x, self.stage)


@dataclass(frozen=True)
class StageSnapshot:
    stage: int
    contents: dict
    fn_table: dict

    def to_json(self) -> str:
        obj = {
            "stage": self.stage,
            "sets": {str(e): sorted(v) for e, v in sorted(self.contents.items())},
            "fns": {
                str(n): {str(x): y for x, y in sorted(t.items())}
                for n, t in sorted(self.fn_table.items())
            },
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class _Replay:
    """Sets as of replay stage ``t`` (adds of stage ``t`` included), rebuilt
    only for the indices a program actually reads."""

    def __init__(self, adds, e):
        self._adds = adds
        self._e = e
        self._sets: dict = {}
        self.own: set = set()
        self.t = 0

    def __getitem__(self, d):
        if d == self._e:
            return self.own
        cur = self._sets.get(d)
        if cur is None:
            cur = self._sets[d] = [set(), 0]
        acc, nxt = cur
        adds = self._adds[d]
        while nxt <= self.t:
            acc.update(adds[nxt])
            nxt += 1
        cur[1] = nxt
        return acc


class Registry:
    def __init__(self, emission_cap: Optional[int] = DEFAULT_CAP, record_raw: bool = False):
        self.emission_cap = emission_cap
        self.record_raw = record_raw
        self.stage = 0
        self._progs: list[Program] = []
        self._cur: list[set] = []
        self._entered: list[dict] = []
        self._adds: list[list[tuple]] = []
        self._raw: list[list[frozenset]] = []
        self._missing: set[int] = set()
        self._fns: list[PartialFn] = []
        self._memo: dict = {}
        self._in_stage = False

    def __len__(self):
        return len(self._progs)

    # -- registration -------------------------------------------------
    def register(self, prog, *, settle=None, cap=_USE_DEFAULT, name="") -> int:
        if not isinstance(prog, Program):
            prog = Program(prog, settle=settle, cap=cap, name=name)
        if self._in_stage:
            raise RuntimeError("programs cannot be registered from inside a stage step")
        e = len(self._progs)
        self._progs.append(prog)
        self._cur.append(set())
        self._entered.append({})
        self._adds.append([])
        self._raw.append([])
        if self.stage > 0:
            if e in self._missing:
                self._recompute()
            else:
                self._backfill(e)
        return e

    def fixpoint(self, builder, *, settle=None, cap=_USE_DEFAULT, name="") -> int:
        """Register ``builder`` and return its own index ``e``.

        The builder is called as ``builder(e, stage, view)``, so it can refer
        to ``e`` (and to indices derived from ``e``) in its enumeration: the
        registry supplies the fixed point directly.
        """
        return self.register(builder, settle=settle, cap=cap, name=name)

    def memo(self, key, make: Callable[[], int]) -> int:
        """Return the index registered under ``key``, registering on first use."""
        if key not in self._memo:
            self._memo[key] = make()
        return self._memo[key]

    def register_fn(self, rule, delay=0, name="") -> int:
        self._fns.append(PartialFn(rule, delay, name))
        return len(self._fns) - 1

    # -- stage loop ---------------------------------------------------
    def _cap(self, prog):
        return self.emission_cap if prog.cap is _USE_DEFAULT else prog.cap

    def _emit(self, e, t, emitted, current):
        prog = self._progs[e]
        if self.record_raw:
            self._raw[e].append(frozenset(emitted))
        new = set(emitted).difference(current)
        cap = self._cap(prog)
        if cap is not None and len(new) > cap:
            # the cap keeps the least new elements
            new = sorted(new)[:cap]
        current.update(new)
        self._entered[e].update(dict.fromkeys(new, t + 1))
        self._adds[e].append(tuple(new))

    def _advance_one(self):
        t = self.stage
        n = len(self._progs)
        self._in_stage = True
        try:
            for e in range(n):
                view = StageView(self, self._cur, t, n)
                emitted = self._progs[e].step(e, t, view)
                self._emit(e, t, emitted, self._cur[e])
        finally:
            self._in_stage = False
        self.stage = t + 1

    def _backfill(self, e):
        replay = _Replay(self._adds, e)
        self._in_stage = True
        try:
            for t in range(self.stage):
                replay.t = t
                view = StageView(self, replay, t, e + 1)
                emitted = self._progs[e].step(e, t, view)
                self._emit(e, t, emitted, replay.own)
        finally:
            self._in_stage = False
        self._cur[e] = replay.own

    def _recompute(self):
        target = self.stage
        self.stage = 0
        self._missing.clear()
        for e, prog in enumerate(self._progs):
            prog.reset()
            self._cur[e] = set()
            self._entered[e] = {}
            self._adds[e] = []
            self._raw[e] = []
        self.advance(target)

    def advance(self, s: int):
        while self.stage < s:
            self._advance_one()

    def run_to_stage(self, s: int) -> StageSnapshot:
        self.advance(s)
        contents = {e: self.W(e, s) for e in range(len(self._progs))}
        window = min(s, FN_WINDOW)
        fn_table = {}
        for n in range(len(self._fns)):
            row = {}
            for x in range(window):
                y = self.phi_at(n, x, s)
                if y is not None:
                    row[x] = y
            fn_table[n] = row
        return StageSnapshot(s, contents, fn_table)

    # -- queries ------------------------------------------------------
    def W(self, e: int, s: Optional[int] = None) -> frozenset:
        if e < 0 or e >= len(self._progs):
            raise IndexError(f"no c.e. index {e}")
        if s is None:
            s = self.stage
        self.advance(s)
        if s == self.stage:
            return frozenset(self._cur[e])
        return frozenset(x for x, t in self._entered[e].items() if t <= s)

    def entry_stage(self, e: int, x: int) -> Optional[int]:
        return self._entered[e].get(x)

    def view_at(self, e: int, t: int) -> StageView:
        """The view program ``e`` was handed at stage ``t``."""
        self.advance(t + 1)
        sets = [self.W(d, t + 1 if d < e else t) for d in range(e + 1)]
        return StageView(self, sets, t, e + 1)

    def raw_emissions(self, e: int, t: int) -> frozenset:
        if not self.record_raw:
            raise RuntimeError("registry was created with record_raw=False")
        self.advance(t + 1)
        return self._raw[e][t]

    def settled(self, e: int, s: int) -> bool:
        settle = self._progs[e].settle
        return settle is not None and s >= settle

    def program(self, e: int) -> Program:
        return self._progs[e]

    def phi_at(self, n: int, x: int, s: int) -> Optional[int]:
        if n < 0 or n >= len(self._fns):
            raise IndexError(f"no partial function {n}")
        fn = self._fns[n]
        if s < fn.converge_stage(x):
            return None
        return fn.value(x)

    @property
    def n_fns(self) -> int:
        return len(self._fns)


# -- program catalog -------------------------------------------------------

def empty() -> Program:
    return Program(lambda own, t, view: (), settle=0, name="empty")


def finite(elems: Iterable[int], at: int = 0) -> Program:
    elems = tuple(sorted(set(elems)))

    def step(own, t, view):
        return elems if t == at else ()

    return Program(step, settle=at + 1, name=f"finite{list(elems)}@{at}")


def staged(schedule: dict) -> Program:
    """Emit ``schedule[t]`` at stage ``t``; settles after the last entry."""
    schedule = {int(t): tuple(v) for t, v in schedule.items()}
    last = max(schedule, default=-1)

    def step(own, t, view):
        return schedule.get(t, ())

    return Program(step, settle=last + 1, name="staged")


def stage_counter() -> Program:
    """W[e, s] = {0, ..., s-1}."""
    return Program(lambda own, t, view: (t,), name="stage-counter")


def arithmetic(start: int, step_size: int, per_stage: int = 1) -> Program:
    """Enumerate ``start + step_size*k`` at a rate of ``per_stage`` per stage."""

    def step(own, t, view):
        return [start + step_size * k for k in range(per_stage * t, per_stage * (t + 1))]

    return Program(step, name=f"arith({start},{step_size},{per_stage})")


def evens(per_stage: int = 1) -> Program:
    return arithmetic(0, 2, per_stage)


def odds(per_stage: int = 1) -> Program:
    return arithmetic(1, 2, per_stage)


def copy_of(d: int) -> Program:
    return Program(lambda own, t, view: view[d], name=f"copy({d})")


class _ImageStep:
    def __init__(self, d, fn):
        self.d, self.fn = d, fn
        self.seen: set = set()

    def __call__(self, own, t, view):
        src = view[self.d]
        new = src - self.seen
        self.seen |= new
        return [self.fn(x) for x in new]

    def reset(self):
        self.seen = set()


def image_of(d: int, fn: Callable[[int], int], name: str = "image") -> Program:
    """Pointwise image of set ``d``; exact at every stage when ``d`` < own id."""
    return Program(_ImageStep(d, fn), cap=None, name=name)


def identity_fn(delay: int = 0):
    return (lambda x: x), delay


def swap_fn(a: int, b: int, delay: int = 0):
    def rule(x):
        return b if x == a else a if x == b else x

    return rule, delay


def constant_fn(c: int, delay: int = 0):
    return (lambda x: c), delay


def divergent_fn():
    return (lambda x: None), 0
