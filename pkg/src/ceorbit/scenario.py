"""JSON scenario files: which construction to run, on what, for how long.

Schema (keys not listed are rejected)::

    {
      "name": "demo",
      "construction": "least-reduction" | "inf-orbit" | "nonisolated" | "antichain",
      "stages": 2000,
      "horizon": 200,                     # comparison window for the report
      "universe": [<program>, ...],       # least-reduction only
      "opponents": [<function>, ...],
      "group": {"name": "z-shift", "tamed": false, "budget": 2},
      "sigma3": {"partition": [[0, 1], [2, 3]]} | {"size": 4, "rules": [...]},
      "levels": 3,                        # antichain only
      "witness_budget": 12,
      "injections": {"<stage>": [["injure", "a/b"] | ["enumerate", n, set]]}
    }

Programs: ``{"kind": "empty"}``, ``{"kind": "finite", "elems": [..], "at": 0}``,
``{"kind": "staged", "schedule": {"3": [1, 2]}}``, ``{"kind": "evens"}``,
``{"kind": "odds"}``, ``{"kind": "arithmetic", "start": 1, "step": 3}``,
``{"kind": "copy", "of": 0}``.  Functions: ``{"kind": "identity"}``,
``{"kind": "swap", "a": 0, "b": 1}``, ``{"kind": "divergent"}``,
``{"kind": "constant", "value": 7}`` or ``{"kind": "constant", "program":
<program>}`` (maps everything to the index of that registered program).
Functions accept an optional ``"delay"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ce_core as cc
from .orbit_rel import rceg_witness
from .perm_group import PermGroup, PreconditionError, format_word, get_group, tame_subgroup
from .priority_engine import (ConstructionRun, SpecValidationFailed, addr_str,
                              check_restraints, run, true_path_approx)
from .constructions import (AntichainSpec, InfOrbitSpec, LeastReductionSpec, NonIsolatedSpec,
                            Sigma3Spec)

CONSTRUCTIONS = ("least-reduction", "inf-orbit", "nonisolated", "antichain")
KEYS = {"name", "construction", "stages", "horizon", "universe", "opponents", "group",
        "sigma3", "levels", "witness_budget", "injections", "description"}


class ScenarioError(ValueError):
    pass


def program_from_json(obj) -> cc.Program:
    kind = obj.get("kind")
    if kind == "empty":
        return cc.empty()
    if kind == "finite":
        return cc.finite([int(x) for x in obj.get("elems", [])], int(obj.get("at", 0)))
    if kind == "staged":
        return cc.staged({int(t): [int(x) for x in v] for t, v in obj["schedule"].items()})
    if kind == "evens":
        return cc.evens(int(obj.get("per_stage", 1)))
    if kind == "odds":
        return cc.odds(int(obj.get("per_stage", 1)))
    if kind == "arithmetic":
        return cc.arithmetic(int(obj["start"]), int(obj["step"]), int(obj.get("per_stage", 1)))
    if kind == "copy":
        return cc.copy_of(int(obj["of"]))
    raise ScenarioError(f"unknown program kind {kind!r}")


def function_from_json(reg: cc.Registry, obj):
    kind = obj.get("kind")
    delay = int(obj.get("delay", 0))
    if kind == "identity":
        return cc.identity_fn(delay)
    if kind == "swap":
        return cc.swap_fn(int(obj["a"]), int(obj["b"]), delay)
    if kind == "divergent":
        return cc.divergent_fn()
    if kind == "constant":
        if "program" in obj:
            return cc.constant_fn(reg.register(program_from_json(obj["program"])), delay)
        return cc.constant_fn(int(obj["value"]), delay)
    raise ScenarioError(f"unknown function kind {kind!r}")


@dataclass
class Scenario:
    name: str
    construction: str
    stages: int
    horizon: int = 200
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj) -> "Scenario":
        if not isinstance(obj, dict):
            raise ScenarioError("a scenario is a JSON object")
        unknown = set(obj) - KEYS
        if unknown:
            raise ScenarioError(f"unknown scenario keys {sorted(unknown)}")
        con = obj.get("construction")
        if con not in CONSTRUCTIONS:
            raise ScenarioError(f"construction must be one of {list(CONSTRUCTIONS)}, got {con!r}")
        try:
            stages = int(obj.get("stages", 0))
            horizon = int(obj.get("horizon", 200))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(str(exc)) from None
        if stages < 0 or horizon < 0:
            raise ScenarioError("stages and horizon must be non-negative")
        return cls(obj.get("name", con), con, stages, horizon, dict(obj))

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
        return cls.from_json(obj)

    def injections(self) -> dict:
        out = {}
        for s, evs in (self.raw.get("injections") or {}).items():
            lst = []
            for ev in evs:
                if ev[0] == "injure":
                    path = ev[1]
                    lst.append(("injure", tuple(path.split("/")) if isinstance(path, str)
                                and path not in ("", "root") else tuple(path or ())))
                elif ev[0] == "enumerate":
                    lst.append(("enumerate", int(ev[1]), ev[2]))
                else:
                    raise ScenarioError(f"unknown injection {ev!r}")
            out[int(s)] = lst
        return out

    def group(self, catalog=None) -> PermGroup:
        g = self.raw.get("group")
        if not g:
            raise ScenarioError(f"{self.construction} needs a group")
        try:
            G = get_group(g["name"], catalog)
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0])) from None
        if g.get("tamed"):
            try:
                G = tame_subgroup(G, int(g.get("stages", 0)), int(g.get("budget", 2)))
            except PreconditionError as exc:
                raise ScenarioError(str(exc)) from None
        return G

    def build(self, catalog=None):
        """``(registry, construction spec)``; raises ScenarioError on bad input."""
        reg = cc.Registry()
        raw = self.raw
        try:
            universe = [reg.register(program_from_json(p)) for p in raw.get("universe", [])]
            opponents = [reg.register_fn(*function_from_json(reg, f))
                         for f in raw.get("opponents", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad program or function: {exc}") from None
        inj = self.injections()
        if self.construction == "least-reduction":
            spec = LeastReductionSpec(reg, universe, opponents, inj)
        elif self.construction == "antichain":
            spec = AntichainSpec(reg, int(raw.get("levels", 2)), opponents, inj)
        else:
            try:
                X = Sigma3Spec.from_json(raw.get("sigma3") or {"size": 0})
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"bad sigma3 block: {exc}") from None
            G = self.group(catalog)
            cls = InfOrbitSpec if self.construction == "inf-orbit" else NonIsolatedSpec
            spec = cls(reg, X, G, opponents, injections=inj)
        try:
            spec.validate()
        except SpecValidationFailed as exc:
            raise ScenarioError(str(exc)) from None
        return reg, spec


@dataclass
class ScenarioResult:
    scenario: Scenario
    run: ConstructionRun
    report: dict

    @property
    def ok(self) -> bool:
        return self.report["ok"]

    def report_json(self) -> str:
        return json.dumps(self.report, sort_keys=True, indent=1) + "\n"

    def write(self, out) -> tuple[Path, Path]:
        """Write ``trace.jsonl`` and ``report.json`` under directory ``out``."""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        trace, report = out / "trace.jsonl", out / "report.json"
        trace.write_text(self.run.trace_jsonl())
        report.write_text(self.report_json())
        return trace, report


def run_scenario(sc: Scenario, stages: Optional[int] = None, horizon: Optional[int] = None,
                 catalog=None) -> ScenarioResult:
    reg, spec = sc.build(catalog)
    n = sc.stages if stages is None else stages
    h = sc.horizon if horizon is None else horizon
    try:
        r = run(spec, n)
    except SpecValidationFailed as exc:
        raise ScenarioError(str(exc)) from None
    restraints = check_restraints(r)
    failures = list(r.failures)
    report = {
        "scenario": sc.name,
        "construction": sc.construction,
        "stages": n,
        "horizon": h,
        "invariants": {
            "ok": not failures,
            "failures": failures[:50],
            "n_failures": len(failures),
            "first_failure_stage": failures[0]["stage"] if failures else None,
        },
        "restraints": restraints.to_json(),
        "true_path": addr_str(tuple(true_path_approx(r))),
        "summary": r.summary,
        "requirements": _requirements(sc, reg, spec, r, h),
    }
    report["ok"] = report["invariants"]["ok"] and restraints.ok
    return ScenarioResult(sc, r, report)


# -- horizon reports --------------------------------------------------------

def _window(V, h):
    """Elements of ``V`` in ``[0, h]``; all of ``V`` when ``h`` is None."""
    return set(V) if h is None else {x for x in V if x <= h}


def diag_witness(reg, fn, Vsrc, Vdst, h, s):
    """A number showing ``Vdst != fn(Vsrc)`` inside the window, if any.
    ``h=None`` searches the whole of both (finite) stage sets."""
    image = set()
    for x in sorted(_window(Vsrc, h)):
        y = reg.phi_at(fn, x, s)
        if y is None:
            continue
        if y not in Vdst:
            return {"x": x, "fn_x": y, "kind": "image-missing"}
        image.add(y)
    for y in sorted(_window(Vdst, h)):
        if y not in image and all(reg.phi_at(fn, x, s) != y for x in Vsrc):
            return {"y": y, "kind": "not-an-image"}
    return None


def _requirements(sc, reg, spec, r, h):
    eng, s = r.engine, r.engine.stage
    V = eng.V
    out = []
    if isinstance(spec, LeastReductionSpec):
        U = spec.universe
        for a in range(len(U)):
            for b in range(a + 1, len(U)):
                equal = reg.W(U[a], s) == reg.W(U[b], s)
                entry = {"pair": [a, b], "universe_equal": equal}
                if equal:
                    entry["status"] = ("satisfied-at-horizon"
                                       if _window(V[a], h) == _window(V[b], h) else "open")
                else:
                    per = []
                    for n, fn in enumerate(spec.opponents):
                        w = diag_witness(reg, fn, V[a], V[b], None, s) or \
                            diag_witness(reg, fn, V[b], V[a], None, s)
                        case = _lr_case(eng, a, b, n)
                        ok = w is not None or case in ("not-injective", "waiting")
                        per.append({"opponent": n, "witness": w, "case": case,
                                    "status": "satisfied-at-horizon" if ok else "open"})
                    entry["diagonalization"] = per
                    entry["status"] = ("satisfied-at-horizon"
                                       if all(p["status"] != "open" for p in per) else "open")
                out.append(entry)
    elif isinstance(spec, (InfOrbitSpec, NonIsolatedSpec)):
        X = spec.X
        budget = int(sc.raw.get("witness_budget", 12))
        for a in range(X.size):
            for b in range(a + 1, X.size):
                if X.declared(a, b):
                    ra = reg.register(cc.finite(_window(V[a], h)))
                    rb = reg.register(cc.finite(_window(V[b], h)))
                    w = rceg_witness(spec.G, reg, ra, rb, h, 2, budget)
                    out.append({"pair": [a, b], "related": True,
                                "word": None if w is None else format_word(w),
                                "status": "satisfied-at-horizon" if w is not None else "open"})
                else:
                    differ = _window(V[a], h) != _window(V[b], h)
                    out.append({"pair": [a, b], "related": False, "differ": differ,
                                "status": "satisfied-at-horizon" if differ else "open"})
    elif isinstance(spec, AntichainSpec):
        for q in r.summary["requirements"]:
            acted = q["acted"]
            out.append({"req": q["req"], "node": q["node"], "acted": acted,
                        "status": "satisfied-at-horizon" if acted else "waiting"})
    return out


def _lr_case(eng, a, b, n):
    for node in sorted(eng.nodes.values(), key=lambda x: (len(x.path), x.path)):
        if getattr(node, "req", None) == ("D", a, b, n) and node.path in eng.live:
            case = node.params.get("case")
            if case:
                return case
            if node.params.get("K"):
                return "waiting"
    return None
