"""Sets ``V_0, V_1, ...`` with ``V_a = V_b`` whenever ``W_a = W_b`` and, for
distinct settled sets, ``V_b`` never the image of ``V_a`` under an opponent.

R-nodes watch the length of agreement of two universe sets and copy the V's
across on expansionary stages (outcomes ``inf < f``).  D-nodes sit below an
R-node's ``f`` outcome, pick fresh numbers ``K``, restrain them from every
set, wait for the opponent to converge on them (outcomes ``d < w``) and then
diagonalize.
"""

from __future__ import annotations

from ..ce_core import Registry
from ..priority_engine import ALL_SETS, ConstructionSpec, SpecValidationFailed, Strategy

INF, FIN = "inf", "f"
D, WAIT = "d", "w"


def agreement(a, b, bound: int) -> int:
    """``max t <= bound`` with ``a`` and ``b`` equal below ``t``."""
    diff = [x for x in (a ^ b) if x < bound]
    return min(diff) if diff else bound


class RNode(Strategy):
    tag = "R"
    outcomes = (INF, FIN)

    def __init__(self, spec, i, j):
        super().__init__()
        self.spec, self.i, self.j = spec, i, j

    @property
    def req(self):
        return ("R", self.i, self.j)

    def current(self, s):
        reg = self.spec.reg
        Wi, Wj = reg.W(self.spec.universe[self.i], s), reg.W(self.spec.universe[self.j], s)
        ell = agreement(Wi, Wj, s)
        return ell, Wi, Wj

    def decide(self, ctx):
        ell, _, _ = self.current(ctx.stage)
        self.params["ell"] = ell
        if ell > self.params.get("best", -1):
            self.params["best"] = ell
            return INF
        return FIN

    def act(self, ctx, outcome):
        if outcome != INF:
            return
        ell = self.params["ell"]
        Vi, Vj = ctx.V[self.i], ctx.V[self.j]
        to_j = {x for x in Vi if x < ell} - Vj
        to_i = {x for x in Vj if x < ell} - Vi
        ctx.enumerate_many(self, to_j, self.j)
        ctx.enumerate_many(self, to_i, self.i)


class DNode(Strategy):
    tag = "D"
    outcomes = (D, WAIT)

    def __init__(self, spec, i, j, n):
        super().__init__()
        self.spec, self.i, self.j, self.n = spec, i, j, n

    @property
    def req(self):
        return ("D", self.i, self.j, self.n)

    def _direction(self, ctx):
        """``(src, dst)`` for this stage: src holds the least disagreement."""
        r = self.spec.r_ancestor(self)
        _, Wi, Wj = r.current(ctx.stage)
        diff = sorted(Wi ^ Wj)
        if diff and diff[0] in Wi:
            return self.i, self.j, False
        if diff:
            return self.j, self.i, True
        return self.i, self.j, False

    def _value(self, K, inverse, s):
        reg, fn = self.spec.reg, self.spec.opponents[self.n]
        if not inverse:
            return reg.phi_at(fn, K, s)
        for y in range(s):
            if reg.phi_at(fn, y, s) == K:
                return y
        return None

    def higher_restrained(self, ctx) -> set:
        eng = ctx.engine
        out = set()
        for owner, m, _ in eng.restraints:
            node = self.spec.node_by_addr(eng, owner)
            if node is not None and node is not self and isinstance(node, DNode) \
                    and eng.lower_priority(self.path, node.path):
                out.add(m)
        return out

    def decide(self, ctx):
        p = self.params
        if "acted" in p:
            return D
        if "K" not in p:
            p["M"] = len(self.higher_restrained(ctx))
            p["K"] = []
            self._pick(ctx)
            return WAIT
        src, dst, inverse = self._direction(ctx)
        vals = [self._value(K, inverse, ctx.stage) for K in p["K"]]
        if vals[-1] is None:
            return WAIT
        if len(set(vals)) < len(vals):
            p["pending"] = (src, dst, None, vals)
            return D
        higher = self.higher_restrained(ctx)
        free = [m for m, v in enumerate(vals) if v not in higher]
        if free:
            p["pending"] = (src, dst, free[0], vals)
            return D
        if len(p["K"]) <= p["M"]:
            self._pick(ctx)
            return WAIT
        # M+1 distinct values cannot all be among M restrained numbers unless
        # the higher restraints grew since initialization; keep waiting
        return WAIT

    def _pick(self, ctx):
        K = ctx.fresh(self)
        self.params["K"].append(K)
        ctx.restrain(self, K, ALL_SETS)

    def act(self, ctx, outcome):
        p = self.params
        if outcome != D or "pending" not in p:
            return
        src, dst, m, vals = p.pop("pending")
        p["acted"] = ctx.stage
        if m is None:
            p["case"] = "not-injective"
            for K in p["K"]:
                ctx.lift(self, K, ALL_SETS)
            ctx.log(self, "case", case="not-injective")
            return
        K, v = p["K"][m], vals[m]
        for other in p["K"]:
            if other != K:
                ctx.lift(self, other, ALL_SETS)
        ctx.mention(v)
        if v == K:
            p["case"] = "b"
            p["b"] = {"K": K, "into": src, "avoid": dst}
            ctx.lift(self, K, ALL_SETS)
            ctx.restrain(self, K, dst)
            ctx.enumerate(self, K, src)
            ctx.log(self, "case", case="b", K=K, into=src)
            return
        p["case"] = "a"
        p["a"] = {"K": K, "value": v, "into": dst}
        owner = self.spec.owner_of(ctx.engine, v)
        if owner is not None and owner is not self:
            ctx.injure(owner.path, cause=f"case-a:{self.addr}")
        ctx.enumerate(self, v, dst)
        ctx.log(self, "case", case="a", K=K, value=v, into=dst)


class LeastReductionSpec(ConstructionSpec):
    name = "least-reduction"

    def __init__(self, reg: Registry, universe, opponents, injections=None):
        self.reg = reg
        self.universe = list(universe)
        self.opponents = list(opponents)
        self._inject = injections or {}
        pairs = sorted(((i, j) for j in range(len(self.universe)) for i in range(j)),
                       key=lambda p: (max(p), p[0], p[1]))
        self.requirements = []
        for i, j in pairs:
            self.requirements.append(("R", i, j))
            for n in range(len(self.opponents)):
                self.requirements.append(("D", i, j, n))

    # placement ------------------------------------------------------
    def strategy_for(self, path):
        # requirement order along every path; D_{i,j} is skipped below R_{i,j}^inf
        k = self._req_index(path)
        if k is None:
            return None
        req = self.requirements[k]
        return RNode(self, req[1], req[2]) if req[0] == "R" else DNode(self, *req[1:])

    def _req_index(self, path):
        """Index of the requirement placed at ``path`` (skips blocked D's)."""
        k = 0
        blocked = set()
        for outcome in path:
            k = self._skip(k, blocked)
            if k is None:
                return None
            req = self.requirements[k]
            if req[0] == "R" and outcome == INF:
                blocked.add((req[1], req[2]))
            k += 1
        return self._skip(k, blocked)

    def _skip(self, k, blocked):
        while k < len(self.requirements):
            req = self.requirements[k]
            if req[0] == "D" and (req[1], req[2]) in blocked:
                k += 1
                continue
            return k
        return None

    def validate(self):
        for e in self.universe:
            if e < 0 or e >= len(self.reg):
                raise SpecValidationFailed(f"universe index {e} is not registered")
        for n in self.opponents:
            if n < 0 or n >= self.reg.n_fns:
                raise SpecValidationFailed(f"opponent {n} is not registered")

    def validate_node(self, path, strat):
        if isinstance(strat, DNode):
            r = None
            for d in range(len(path)):
                req = self.requirements[self._req_index(path[:d])]
                if req == ("R", strat.i, strat.j):
                    r = path[d]
            if r is None:
                raise SpecValidationFailed(f"D node at {strat.addr} has no R ancestor")
            if r == INF:
                raise SpecValidationFailed(f"D node at {strat.addr} extends R^inf")

    # lookups --------------------------------------------------------
    def node_by_addr(self, eng, addr):
        return eng.ever.get(addr)

    def r_ancestor(self, node):
        eng_nodes = self._engine.nodes
        for d in range(len(node.path)):
            anc = eng_nodes.get(node.path[:d])
            if isinstance(anc, RNode) and (anc.i, anc.j) == (node.i, node.j):
                return anc
        raise SpecValidationFailed(f"no R ancestor for {node.addr}")

    def owner_of(self, eng, x):
        for node in eng.nodes.values():
            if isinstance(node, DNode) and x in node.params.get("K", ()):
                return node
        return None

    def begin_stage(self, ctx):
        self._engine = ctx.engine

    def injections(self):
        return self._inject

    # invariants -----------------------------------------------------
    def check(self, ctx):
        eng = ctx.engine
        bad = []
        for node in eng.nodes.values():
            if not isinstance(node, DNode):
                continue
            p = node.params
            if p.get("K") and "acted" not in p:
                for K in p["K"]:
                    hit = [t for t, V in eng.V.items() if K in V]
                    if hit:
                        bad.append({"invariant": "restraints-maintained",
                                    "detail": f"{node.addr}: K={K} in V{hit}"})
            if p.get("case") == "a":
                K = p["a"]["K"]
                if any(K in V for V in eng.V.values()):
                    bad.append({"invariant": "restraints-maintained",
                                "detail": f"{node.addr}: K={K} entered a set after case (a)"})
            if p.get("case") == "b":
                b = p["b"]
                if b["K"] in eng.V[b["avoid"]]:
                    bad.append({"invariant": "awkward-chaining-win",
                                "detail": f"{node.addr}: K={b['K']} entered V{b['avoid']}"})
        return bad

    def summary(self, eng):
        s = eng.stage
        reqs = {}
        for node in sorted(eng.nodes.values(), key=lambda n: (len(n.path), n.path)):
            if isinstance(node, DNode):
                key = f"D[{node.i},{node.j},{node.n}]"
                reqs.setdefault(key, []).append(
                    {"node": node.addr, "case": node.params.get("case"),
                     "K": node.params.get("K")})
        return {"construction": self.name, "stages": s, "requirements": reqs}
