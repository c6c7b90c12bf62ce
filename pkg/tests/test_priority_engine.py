import json

import pytest

from ceorbit import ce_core as cc
from ceorbit.constructions import LeastReductionSpec
from ceorbit.priority_engine import (ALL_SETS, ConstructionSpec, SpecValidationFailed, Strategy,
                                     check_restraints, run, true_path_approx)


class Flip(Strategy):
    """Two outcomes, ``a`` on even stages and ``b`` on odd ones."""
    outcomes = ("a", "b")

    def decide(self, ctx):
        return "a" if ctx.stage % 2 == 0 else "b"


class Const(Strategy):
    outcomes = ("x", "y")


class Restrainer(Strategy):
    """Restrains 5 from every set on its first visit."""
    outcomes = ("o",)

    def act(self, ctx, outcome):
        if "done" not in self.params:
            ctx.restrain(self, 5)
            self.params["done"] = True


class Spec(ConstructionSpec):
    def __init__(self, make, depth=1, injections=None):
        self.make, self.depth, self._inj = make, depth, injections or {}

    def strategy_for(self, path):
        return self.make() if len(path) < self.depth else None

    def injections(self):
        return self._inj


def test_empty_tree_gives_empty_stage_records():
    r = run(Spec(Flip, depth=0), 10)
    assert len(r.records) == 10
    assert all(rec.path == [] and not rec.actions for rec in r.records)
    assert r.trace_jsonl() == ""


def test_flipping_node_alternates_paths():
    r = run(Spec(Flip), 8)
    assert [rec.path for rec in r.records[1:]] == [["b"], ["a"]] * 3 + [["b"]]


def test_visits_are_bounded_by_the_stage():
    r = run(Spec(Const, depth=50), 6)
    assert [len(rec.path) for rec in r.records] == [0, 1, 2, 3, 4, 5]


def test_true_path_examples():
    assert true_path_approx(run(Spec(Const, depth=3), 20)) == ["x", "x", "x"]
    # "a" (leftmost) recurs at even stages, so it is chosen
    assert true_path_approx(run(Spec(Flip), 20)) == ["a"]


def test_injury_clears_params_and_restraints():
    r = run(Spec(Restrainer, injections={3: [("injure", ())]}), 6)
    injured = [a for rec in r.records for a in rec.actions if a["op"] == "injury"]
    assert injured and injured[0]["node"] == "root"
    # re-restrained on the next visit after injury
    restr = [rec.stage for rec in r.records for a in rec.actions if a["op"] == "restrain"]
    assert restr == [1, 3]


def test_check_restraints_clean_and_injected():
    assert check_restraints(run(Spec(Const), 10)).ok
    r = run(Spec(Restrainer, injections={4: [("enumerate", 5, 0)]}), 8)
    rep = check_restraints(r)
    assert [v["stage"] for v in rep.violations] == [4]
    assert rep.violations[0]["restrained_by"] == ["root"]


def test_unknown_outcome_rejected():
    class Bad(Strategy):
        outcomes = ("a",)

        def decide(self, ctx):
            return "zzz"

    with pytest.raises(SpecValidationFailed):
        run(Spec(Bad), 3)


def test_lower_priority_and_left_of():
    r = run(Spec(Flip, depth=3), 10)
    eng = r.engine
    assert eng.left_of(("a",), ("b",)) and not eng.left_of(("b",), ("a",))
    assert eng.lower_priority(("b",), ("a",))
    assert eng.lower_priority(("a", "a"), ("a",))
    assert not eng.lower_priority(("a",), ("a", "b"))


def _lr_run(stages):
    reg = cc.Registry()
    U = [reg.register(cc.finite([0, 2], at=1)), reg.register(cc.finite([0, 2], at=2)),
         reg.register(cc.finite([1])), reg.register(cc.empty())]
    ops = [reg.register_fn(*cc.identity_fn(2))]
    return run(LeastReductionSpec(reg, U, ops), stages)


def test_least_reduction_replay_identical():
    a, b = _lr_run(500), _lr_run(500)
    assert a.trace_jsonl() == b.trace_jsonl()
    assert json.dumps(a.summary, sort_keys=True) == json.dumps(b.summary, sort_keys=True)


def test_least_reduction_true_path_stabilizes():
    r = _lr_run(600)
    assert true_path_approx(r, 300) == true_path_approx(r, 600)


def test_trace_lines_are_json_records():
    r = _lr_run(50)
    lines = r.trace_lines()
    assert len(lines) == 50
    rec = json.loads(lines[-1])
    assert set(rec) == {"stage", "path", "actions", "injuries", "restraints"}
    assert all(x["target"] == ALL_SETS or isinstance(x["target"], int) for x in rec["restraints"])
