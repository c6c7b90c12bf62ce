"""Tree-of-strategies stage loop with restraints, injury and JSONL traces.

A construction supplies a :class:`ConstructionSpec`: a placement rule mapping
a node address (the tuple of outcomes leading to it) to a :class:`Strategy`,
optional per-stage hooks and invariant checks, and optional fault
injections.  At stage ``s`` the engine walks from the root along the
outcomes the strategies choose, visiting nodes whose address is shorter than
``s``.  Each visit does three things in order:

1. the strategy picks its outcome (``decide``);
2. every active node to the right of ``node^outcome`` is initialized;
3. the strategy acts (``act``): restraint changes, then enumerations.

The c.e. sets built by a construction live in ``Engine.V`` (target keys are
set names, usually ints).  Every enumeration and restraint change is logged,
so :func:`check_restraints` can audit a finished run from its trace alone.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

ALL_SETS = "*"


class SpecValidationFailed(ValueError):
    pass


def addr_str(path) -> str:
    return "/".join(path) if path else "root"


class Strategy:
    """A node of the tree.  Subclasses set ``tag`` and ``outcomes`` (leftmost
    first) and override ``decide`` / ``act`` / ``on_initialize``."""

    tag = "node"
    outcomes: tuple = ()

    def __init__(self):
        self.path: tuple = ()
        self.params: dict = {}

    @property
    def addr(self) -> str:
        return addr_str(self.path)

    def decide(self, ctx: "StageCtx") -> str:
        return self.outcomes[0]

    def act(self, ctx: "StageCtx", outcome: str):
        pass

    def on_initialize(self, ctx: "StageCtx", old_params: dict):
        """Hook run when the node is initialized, after its restraints and
        params are cleared; ``old_params`` holds the params it had."""

    def state_json(self) -> dict:
        return {}


class ConstructionSpec:
    name = "construction"

    def strategy_for(self, path: tuple) -> Optional[Strategy]:
        return None

    def validate(self):
        """Raise :class:`SpecValidationFailed` if the construction is unusable."""

    def validate_node(self, path: tuple, strategy: Strategy):
        """Placement constraints for a node about to be created."""

    def begin_stage(self, ctx: "StageCtx"):
        pass

    def end_stage(self, ctx: "StageCtx"):
        pass

    def check(self, ctx: "StageCtx") -> list:
        """Invariant failures at the end of the stage, as dicts with keys
        ``invariant`` and ``detail``."""
        return []

    def injections(self) -> dict:
        """``{stage: [("injure", path) | ("enumerate", n, target)]}``."""
        return {}

    def summary(self, engine: "Engine") -> dict:
        return {}


@dataclass
class StageRecord:
    stage: int
    path: list
    actions: list
    injuries: list
    restraints: list

    def to_json(self) -> str:
        return json.dumps(
            {
                "stage": self.stage,
                "path": self.path,
                "actions": self.actions,
                "injuries": self.injuries,
                "restraints": self.restraints,
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def _tkey(target):
    return (0, target, "") if isinstance(target, int) else (1, 0, str(target))


class StageCtx:
    def __init__(self, engine: "Engine", stage: int):
        self.engine = engine
        self.stage = stage
        self.actions: list = []
        self.injuries: list = []

    @property
    def V(self):
        return self.engine.V

    # numbers
    def mention(self, *xs):
        for x in xs:
            if isinstance(x, int) and x > self.engine.max_mentioned:
                self.engine.max_mentioned = x

    def fresh(self, owner: Optional[Strategy] = None) -> int:
        """Least number larger than every number mentioned so far."""
        n = self.engine.max_mentioned + 1
        self.mention(n)
        if owner is not None:
            self.log(owner, "fresh", n=n)
        return n

    def log(self, owner: Optional[Strategy], op: str, **info):
        rec = {"op": op, "by": owner.addr if owner is not None else "inject"}
        rec.update(info)
        self.actions.append(rec)

    # enumeration and restraints
    def enumerate(self, owner: Optional[Strategy], n: int, target):
        self.mention(n)
        self.engine.V[target].add(n)
        self.log(owner, "enum", n=n, set=target)

    def enumerate_many(self, owner, xs, target):
        have = self.engine.V[target]
        for n in sorted(set(xs) - have):
            self.enumerate(owner, n, target)

    def restrain(self, owner: Strategy, n: int, target=ALL_SETS):
        self.mention(n)
        self.engine.restraints.add((owner.addr, n, target))
        self.log(owner, "restrain", n=n, set=target)

    def lift(self, owner: Strategy, n: int, target=ALL_SETS):
        key = (owner.addr, n, target)
        if key in self.engine.restraints:
            self.engine.restraints.discard(key)
            self.log(owner, "lift", n=n, set=target)

    def restrained(self, n: int, target, exclude_owner: Optional[str] = None) -> list:
        return self.engine.restrained(n, target, exclude_owner)

    def injure(self, path: tuple, cause: str = ""):
        self.engine.initialize(path, self, cause=cause)

    def injure_below(self, owner: Strategy, pred=None, cause: str = ""):
        """Initialize active nodes of lower priority than ``owner``: to its
        right or below it.  ``pred`` narrows the set."""
        for p in sorted(self.engine.live, key=lambda q: (len(q), q)):
            if p != owner.path and self.engine.lower_priority(p, owner.path):
                if pred is None or pred(self.engine.nodes[p]):
                    self.injure(p, cause=cause)


class Engine:
    def __init__(self, spec: ConstructionSpec):
        self.spec = spec
        self.nodes: dict[tuple, Strategy] = {}
        self.V: dict = defaultdict(set)
        self.restraints: set = set()
        self.max_mentioned = -1
        self.records: list[StageRecord] = []
        self.failures: list[dict] = []
        self.stage = 0
        self.outcome_order: dict[str, tuple] = {}
        self.ever: dict[str, Strategy] = {}
        # nodes visited since their last initialization; only these can hold
        # parameters or restraints, so only these need initializing
        self.live: set[tuple] = set()

    # tree ----------------------------------------------------------
    def node(self, path: tuple) -> Optional[Strategy]:
        if path in self.nodes:
            return self.nodes[path]
        strat = self.spec.strategy_for(path)
        if strat is None:
            return None
        strat.path = path
        self.spec.validate_node(path, strat)
        if not strat.outcomes:
            raise SpecValidationFailed(f"node {addr_str(path)} has no outcomes")
        self.nodes[path] = strat
        self.ever[strat.addr] = strat
        self.outcome_order[strat.addr] = tuple(strat.outcomes)
        return strat

    def order_index(self, path: tuple, depth: int) -> int:
        parent = addr_str(path[:depth])
        return self.outcome_order[parent].index(path[depth])

    def left_of(self, p: tuple, q: tuple) -> bool:
        """``p`` branches off strictly to the left of ``q``."""
        for d in range(min(len(p), len(q))):
            if p[d] != q[d]:
                return self.order_index(p, d) < self.order_index(q, d)
        return False

    def lower_priority(self, p: tuple, q: tuple) -> bool:
        """``p`` has lower priority than ``q``: right of it or extending it."""
        if len(p) > len(q) and p[: len(q)] == q:
            return True
        return self.left_of(q, p)

    def initialize(self, path: tuple, ctx: StageCtx, cause: str = ""):
        strat = self.nodes.get(path)
        if strat is None or path not in self.live:
            return
        self.live.discard(path)
        addr = strat.addr
        had_state = bool(strat.params) or any(o == addr for o, _, _ in self.restraints)
        for key in [k for k in self.restraints if k[0] == addr]:
            self.restraints.discard(key)
        old = strat.params
        strat.params = {}
        if had_state:
            ctx.injuries.append(addr)
            ctx.log(None, "injury", node=addr, cause=cause or "initialized")
        strat.on_initialize(ctx, old)

    def restrained(self, n, target, exclude_owner=None) -> list:
        return sorted(
            o for o, m, t in self.restraints
            if m == n and (t == ALL_SETS or t == target or target == ALL_SETS)
            and o != exclude_owner
        )

    # stage loop ----------------------------------------------------
    def _inject(self, ctx: StageCtx):
        for ev in self.spec.injections().get(ctx.stage, []):
            if ev[0] == "injure":
                path = tuple(ev[1])
                self.initialize(path, ctx, cause="injected")
            elif ev[0] == "enumerate":
                ctx.enumerate(None, int(ev[1]), ev[2])
            else:
                raise SpecValidationFailed(f"unknown injection {ev!r}")

    def step(self):
        s = self.stage
        ctx = StageCtx(self, s)
        self._inject(ctx)
        self.spec.begin_stage(ctx)
        path: tuple = ()
        while len(path) < s:
            strat = self.node(path)
            if strat is None:
                break
            self.live.add(path)
            outcome = strat.decide(ctx)
            if outcome not in strat.outcomes:
                raise SpecValidationFailed(f"{strat.addr} chose unknown outcome {outcome!r}")
            here = path + (outcome,)
            d = len(path)
            k = strat.outcomes.index(outcome)
            right = [p for p in self.live
                     if len(p) > d and p[d] != outcome and p[:d] == path
                     and strat.outcomes.index(p[d]) > k]
            for p in sorted(right, key=lambda q: (len(q), q)):
                self.initialize(p, ctx)
            strat.act(ctx, outcome)
            path = here
        self.spec.end_stage(ctx)
        for f in self.spec.check(ctx):
            f = dict(f)
            f["stage"] = s
            self.failures.append(f)
        restraints = [
            {"n": n, "target": t, "owner": o}
            for o, n, t in sorted(self.restraints, key=lambda r: (r[1], _tkey(r[2]), r[0]))
        ]
        self.records.append(StageRecord(s, list(path), ctx.actions, ctx.injuries, restraints))
        self.stage = s + 1
        return ctx


@dataclass
class ConstructionRun:
    spec: ConstructionSpec
    engine: Engine
    records: list
    failures: list
    summary: dict = field(default_factory=dict)

    @property
    def V(self):
        return self.engine.V

    def trace_lines(self) -> list[str]:
        # a construction with no nodes at all has an empty trace
        if not self.engine.nodes and not any(r.actions for r in self.records):
            return []
        return [r.to_json() for r in self.records]

    def trace_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.trace_lines())

    def outcome_order(self, addr: str) -> tuple:
        return self.engine.outcome_order[addr]


def run(spec: ConstructionSpec, stages: int, engine: Optional[Engine] = None) -> ConstructionRun:
    spec.validate()
    eng = engine or Engine(spec)
    while eng.stage < stages:
        eng.step()
    out = ConstructionRun(spec, eng, eng.records, eng.failures)
    out.summary = spec.summary(eng)
    return out


def true_path_approx(run_: ConstructionRun, s: Optional[int] = None) -> list:
    """Leftmost path whose outcomes recur through the second half of the
    observed window ``[0, s)``."""
    records = run_.records if s is None else run_.records[:s]
    if not records:
        return []
    tail = records[len(records) // 2:]
    path: list = []
    while True:
        d = len(path)
        seen = [r.path[d] for r in tail if len(r.path) > d and r.path[:d] == path]
        if not seen:
            return path
        order = run_.engine.outcome_order[addr_str(tuple(path))]
        path.append(min(set(seen), key=order.index))


@dataclass
class RestraintReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self):
        return {"ok": self.ok, "violations": self.violations}


def check_restraints(run_: ConstructionRun) -> RestraintReport:
    """Replay the trace and flag enumerations of pairs restrained by another
    owner at that moment."""
    active: set = set()
    bad = []
    for rec in run_.records:
        for act in rec.actions:
            op = act["op"]
            if op == "restrain":
                active.add((act["by"], act["n"], act["set"]))
            elif op == "lift":
                active.discard((act["by"], act["n"], act["set"]))
            elif op == "injury":
                node = act["node"]
                active = {r for r in active if r[0] != node}
            elif op == "enum":
                hits = sorted(
                    o for o, n, t in active
                    if n == act["n"] and (t == ALL_SETS or t == act["set"]) and o != act["by"]
                )
                if hits:
                    bad.append({"stage": rec.stage, "n": act["n"], "set": act["set"],
                                "by": act["by"], "restrained_by": hits})
    return RestraintReport(bad)
