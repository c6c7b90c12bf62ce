"""Coding a Sigma^0_3 relation into orbit equivalence for a group whose
actions are non-isolated and whose orbits are finite (use a tamed subgroup).

Node ``tau`` carries ``P^n_{i,j}`` (outcomes ``inf < d < w``) and a set
``S_tau`` of quadruples ``(a, b, k, l)``: every map from ``V_k`` to ``V_l``
must send ``a`` to ``b``.  On its first visit ``tau`` copies ``S`` from the
live higher-priority nodes, picks ``g`` consistent with it, a number ``K``
in a fresh orbit and two consistent maps ``g0, g1`` that disagree on ``K``,
then keeps the orbit of ``K`` out of every set.

When ``phi_n(K)`` converges and is not already in ``V_j``, ``tau`` puts ``K``
into ``V_i``, keeps ``phi_n(K)`` out of ``V_j`` and places exactly one orbit
member in every other set: ``g0(K)`` or ``g1(K)`` in ``V_j``, the image under
``g^beta`` for sets coded by an ``inf`` ancestor ``beta``, and ``h_k(K)`` for
a consistent ``h_k`` elsewhere.  The placed members extend ``S_tau``.

On ``inf`` or initialization the whole orbit of ``K`` goes into every set
and ``S_tau`` reverts to its initial value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ce_core import Registry
from ..perm_group import (NON_ISOLATED, NoWitnessInBudget, PermGroup, TamedGroup,
                          classify_action, format_word, search_map)
from ..priority_engine import ALL_SETS, SpecValidationFailed, Strategy
from .inf_orbit import INF, D, WAIT, InfOrbitSpec, WordMap
from .sigma3 import Sigma3Spec


class ConsistencySearchFailed(LookupError):
    pass


@dataclass
class QuadrupleSet:
    owner: str
    quads: set = field(default_factory=set)  # (a, b, k, l)

    def copy(self, owner=None) -> "QuadrupleSet":
        return QuadrupleSet(owner or self.owner, set(self.quads))

    def update(self, other):
        self.quads |= set(other.quads if isinstance(other, QuadrupleSet) else other)

    def fixed(self, k, l):
        """``{a: b}`` demanded of maps ``V_k -> V_l``; None if contradictory."""
        out: dict = {}
        for a, b, k2, l2 in self.quads:
            if (k2, l2) != (k, l):
                continue
            if out.get(a, b) != b:
                return None
            out[a] = b
        return out

    def pairs(self) -> set:
        return {(k, l) for _, _, k, l in self.quads}

    def consistent(self, G: PermGroup, word, k, l) -> bool:
        g = G.word_eval(word)
        return all(g(a) == b for a, b, k2, l2 in self.quads if (k2, l2) == (k, l))

    def to_json(self):
        return sorted(list(q) for q in self.quads)

    def __len__(self):
        return len(self.quads)


def consistent_map_search(G: PermGroup, S: QuadrupleSet, k, l, budget: int = 8, avoid=None):
    """First word (search order) consistent with ``S`` on the pair ``(k, l)``."""
    fixed = S.fixed(k, l)
    if fixed is None:
        return None
    return search_map(G, fixed, budget, avoid)


class NPNode(Strategy):
    tag = "P"
    outcomes = (INF, D, WAIT)

    def __init__(self, spec, i, j, n):
        super().__init__()
        self.spec, self.i, self.j, self.n = spec, i, j, n

    @property
    def req(self):
        return ("P", self.i, self.j, self.n)

    @property
    def gmap(self):
        return self.params.get("gmap")

    @property
    def S(self):
        return self.params.get("S")

    def _setup(self, ctx):
        spec, p = self.spec, self.params
        base = spec.inherited_S(ctx.engine, self)
        p["S0"] = base
        p["S"] = base.copy()
        word = spec.consistent(base, self.i, self.j)
        if word is None:
            raise ConsistencySearchFailed(f"{self.addr}: no map V{self.i}->V{self.j} "
                                          f"consistent with S within budget {spec.budget}")
        p["g"] = word
        p["gmap"] = WordMap(spec.G, word)
        ctx.log(self, "choose-g", word=format_word(word))

    def _pick_K(self, ctx):
        spec, p = self.spec, self.params
        # K is fresh and so is every other member of its orbit
        K = ctx.fresh(self)
        orbit = spec.orbit(K)
        while min(orbit) < K:
            K = ctx.fresh(self)
            orbit = spec.orbit(K)
        ctx.mention(*orbit)
        g0 = spec.consistent(p["S"], self.i, self.j)
        if g0 is None:
            raise ConsistencySearchFailed(f"{self.addr}: no g0")
        x0 = spec.G.apply_word(g0, K)
        g1 = spec.consistent(p["S"], self.i, self.j, avoid={K: x0})
        if g1 is None:
            raise ConsistencySearchFailed(f"{self.addr}: no g1 with g1(K) != g0(K) for K={K}")
        p["K"], p["orbit"], p["g0"], p["g1"] = K, sorted(orbit), g0, g1
        spec.k_orbits.add(frozenset(orbit))
        for x in sorted(orbit):
            ctx.restrain(self, x, ALL_SETS)
        ctx.log(self, "choose-K", K=K, orbit=sorted(orbit),
                g0=format_word(g0), g1=format_word(g1))

    def decide(self, ctx):
        p = self.params
        if "S" not in p:
            self._setup(ctx)
        if self.spec.X.flag(self.i, self.j, self.n, ctx.stage):
            return INF
        if "K" not in p:
            self._pick_K(ctx)
            return WAIT
        if "phiK" in p:
            return D
        v = self.spec.phi(self.n, p["K"], ctx.stage)
        if v is None:
            return WAIT
        p["phiK"] = v
        p["pending"] = True
        ctx.mention(v)
        return D

    def clean_up(self, ctx, old, why):
        """Whole orbit of ``K`` into every set."""
        if "K" not in old:
            return
        orbit = old["orbit"]
        for x in orbit:
            ctx.lift(self, x, ALL_SETS)
        if "phiK" in old:
            ctx.lift(self, old["phiK"], self.j)
        for t in self.spec.sets():
            ctx.enumerate_many(self, orbit, t)
        self.spec.cleaned.add(frozenset(orbit))
        ctx.log(self, "clean-up", K=old["K"], orbit=list(orbit), why=why)

    def on_initialize(self, ctx, old_params):
        self.clean_up(ctx, old_params, "initialized")

    def act(self, ctx, outcome):
        p = self.params
        if outcome == INF:
            if "K" in p:
                old = {k: p.pop(k) for k in ("K", "orbit", "phiK", "g0", "g1")
                       if k in p}
                p.pop("pending", None)
                self.clean_up(ctx, old, "inf")
            if len(p["S"]) != len(p["S0"]):
                p["S"] = p["S0"].copy()
                ctx.log(self, "revert-S", size=len(p["S"]))
            return
        if outcome == D and p.pop("pending", False):
            self._diagonalize(ctx)

    def _diagonalize(self, ctx):
        spec, p = self.spec, self.params
        K, v = p["K"], p["phiK"]
        if v in ctx.V[self.j]:
            p["held"] = True
            ctx.log(self, "diag-held", K=K, value=v)
            return
        G = spec.G
        placed = {self.i: K}
        x0 = G.apply_word(p["g0"], K)
        placed[self.j] = x0 if x0 != v else G.apply_word(p["g1"], K)
        coded = spec.coded_by_ancestors(ctx.engine, self)  # k -> beta with beta^inf <= tau
        todo = [k for k in spec.sets() if k not in placed]
        while todo:
            progress = False
            for k in list(todo):
                beta = coded.get(k)
                if beta is None:
                    h = spec.consistent(p["S"], self.i, k)
                    if h is None:
                        raise ConsistencySearchFailed(f"{self.addr}: no h for V{self.i}->V{k}")
                    placed[k] = G.apply_word(h, K)
                elif beta.i in placed:
                    placed[k] = beta.gmap(placed[beta.i])
                else:
                    continue
                todo.remove(k)
                progress = True
            if not progress:
                raise SpecValidationFailed(f"{self.addr}: cyclic coding among {todo}")
        for x in p["orbit"]:
            ctx.lift(self, x, ALL_SETS)
        ctx.restrain(self, v, self.j)
        for k in sorted(placed):
            ctx.enumerate(self, placed[k], k)
        new = {(placed[k], placed[l], k, l) for k in placed for l in placed}
        p["S"].update(new)
        p["placed"] = dict(placed)
        spec.growth.append((self, sorted({(k, l) for _, _, k, l in new})))
        spec.fills.append((self, K, tuple(p["orbit"]), dict(placed)))
        ctx.log(self, "diag", K=K, value=v, placed={str(k): x for k, x in sorted(placed.items())})


class NonIsolatedSpec(InfOrbitSpec):
    name = "nonisolated"

    def __init__(self, reg: Registry, X: Sigma3Spec, G: PermGroup, opponents,
                 budget: int = 8, injections=None):
        super().__init__(reg, X, G, opponents, injections=injections)
        self.budget = budget
        self.k_orbits: set = set()
        self.cleaned: set = set()
        self.growth: list = []
        self.fills: list = []
        self._orbits: dict = {}

    def strategy_for(self, path):
        k = self._walk(path)
        if k is None:
            return None
        return NPNode(self, *self.requirements[k])

    def validate(self):
        G = self.G
        if not isinstance(G, TamedGroup):
            cls = classify_action(G)
            if cls.tag != NON_ISOLATED:
                raise SpecValidationFailed(f"group {G.name!r} is not non-isolated ({cls.tag})")
        for a in range(8):
            if len(self.orbit(a)) < 2:
                raise SpecValidationFailed(f"orbit of {a} is trivial")
        for n in self.opponents:
            if n < 0 or n >= self.reg.n_fns:
                raise SpecValidationFailed(f"opponent {n} is not registered")

    # helpers --------------------------------------------------------
    def sets(self):
        return range(self.X.size)

    def orbit(self, a) -> frozenset:
        if a not in self._orbits:
            orb = self.G.orbit_of(a)
            if orb is None:
                raise SpecValidationFailed(f"orbit of {a} is not finite or not computable")
            for x in orb:
                self._orbits[x] = frozenset(orb)
        return self._orbits[a]

    def consistent(self, S, k, l, avoid=None):
        try:
            return consistent_map_search(self.G, S, k, l, self.budget, avoid)
        except NoWitnessInBudget:
            return None

    def inherited_S(self, eng, node) -> QuadrupleSet:
        out = QuadrupleSet(node.addr)
        for p in sorted(eng.live, key=lambda q: (len(q), q)):
            b = eng.nodes[p]
            if b is node or b.S is None:
                continue
            if eng.lower_priority(node.path, p):
                out.update(b.S)
        return out

    def inf_ancestors(self, eng, node):
        out = []
        for d in range(len(node.path)):
            if node.path[d] == INF:
                out.append(eng.nodes[node.path[:d]])
        return out

    def coded_by_ancestors(self, eng, node) -> dict:
        return {b.j: b for b in self.inf_ancestors(eng, node)}

    # invariants -----------------------------------------------------
    def begin_stage(self, ctx):
        self.growth, self.fills = [], []

    def check(self, ctx):
        eng = ctx.engine
        V = eng.V
        bad = []
        # coherence after every growth of some S
        for node, pairs in self.growth:
            S = node.S
            for k, l in pairs:
                if self.consistent(S, k, l) is None:
                    bad.append({"invariant": "s-coherence",
                                "detail": f"{node.addr}: no map V{k}->V{l} consistent with S"})
            for beta in self.inf_ancestors(eng, node):
                if not S.consistent(self.G, beta.params["g"], beta.i, beta.j):
                    bad.append({"invariant": "s-coherence",
                                "detail": f"{node.addr}: g of {beta.addr} inconsistent with S"})
        # one orbit member per set per diagonalizing action
        for node, K, orbit, placed in self.fills:
            for t in self.sets():
                inside = [x for x in orbit if x in V[t]]
                if t not in placed or inside != [placed[t]]:
                    bad.append({"invariant": "orbit-discipline",
                                "detail": f"{node.addr}: K={K} orbit members {inside} in V{t}"})
        # every enumerated number lies in a chosen orbit
        for act in ctx.actions:
            if act["op"] == "enum" and act["by"] != "inject":
                if self.orbit(act["n"]) not in self.k_orbits:
                    bad.append({"invariant": "orbit-discipline",
                                "detail": f"{act['by']}: {act['n']} outside every K orbit"})
        # cleaned orbits sit in every set
        for orbit in sorted(self.cleaned, key=min):
            for t in self.sets():
                if not orbit <= V[t]:
                    bad.append({"invariant": "clean-up-law",
                                "detail": f"orbit {sorted(orbit)} missing from V{t}"})
        # active restraints hold
        for o, n, t in sorted(eng.restraints, key=lambda r: (r[1], str(r[2]), r[0])):
            hit = [u for u in self.sets() if n in V[u]] if t == ALL_SETS else \
                ([t] if n in V[t] else [])
            if hit:
                bad.append({"invariant": "restraints-maintained",
                            "detail": f"{o}: restrained {n} found in V{hit}"})
        return bad

    def summary(self, eng):
        nodes = []
        for node in sorted(eng.ever.values(), key=lambda n: (len(n.path), n.path)):
            if node.path in eng.live:
                p = node.params
                nodes.append({"node": node.addr, "req": list(node.req),
                              "g": format_word(p.get("g", ())), "K": p.get("K"),
                              "phiK": p.get("phiK"), "held": p.get("held", False),
                              "S": len(p["S"]) if "S" in p else 0})
        return {"construction": self.name, "stages": eng.stage, "nodes": nodes,
                "cleaned_orbits": len(self.cleaned)}
