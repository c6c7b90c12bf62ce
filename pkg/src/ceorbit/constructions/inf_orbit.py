"""Coding a Sigma^0_3 relation into orbit equivalence for a group acting
transitively on the naturals.

Node ``tau`` carries requirement ``P^n_{i,j}`` (outcomes ``inf < d < w``).
On its first visit after initialization it picks ``g`` with ``g.F`` disjoint
from ``F``, where ``F`` holds every number mentioned so far and every number
in a restrained pair.  While the flag ``X(i, j, n)`` is up it takes ``inf``
and closes ``V_i``, ``V_j`` under ``g``.  Otherwise it diagonalizes against
the opponent ``phi_n``: a restraint keeps ``K`` out of ``V_i`` until
``phi_n(K)`` converges, then (if that creates no violated restrained pair) it
puts ``K`` into ``V_i`` and keeps ``phi_n(K)`` out of ``V_j``.

Placement: below ``tau^inf`` no requirement mentioning ``j`` is placed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ce_core import Registry
from ..perm_group import (INFINITE_ORBIT, NoWitnessInBudget, PermGroup, avoid_finite_set,
                          classify_action, format_word, invert_word)
from ..priority_engine import ConstructionSpec, SpecValidationFailed, Strategy
from .sigma3 import Sigma3Spec

INF, D, WAIT = "inf", "d", "w"


class WordMap:
    """Memoized forward and inverse evaluation of a group word."""

    def __init__(self, G: PermGroup, word):
        self.G, self.word = G, tuple(word)
        self.inv_word = invert_word(self.word)
        self._f: dict = {}
        self._b: dict = {}

    def __call__(self, x):
        if x not in self._f:
            y = self.G.apply_word(self.word, x)
            self._f[x] = y
            self._b[y] = x
        return self._f[x]

    def inv(self, y):
        if y not in self._b:
            x = self.G.apply_word(self.inv_word, y)
            self._b[y] = x
            self._f[x] = y
        return self._b[y]


@dataclass
class RestrainedPairSet:
    owner: str
    pairs: dict = field(default_factory=dict)  # (m, l) -> chain of node addrs, first mover first

    def numbers(self) -> set:
        return {m for m, _ in self.pairs}

    def __len__(self):
        return len(self.pairs)


class PNode(Strategy):
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

    def decide(self, ctx):
        p = self.params
        spec = self.spec
        if "g" not in p:
            word = spec.choose_g(ctx, self)
            p["g"] = word
            p["gmap"] = WordMap(spec.G, word)
            ctx.log(self, "choose-g", word=format_word(word))
        if spec.X.flag(self.i, self.j, self.n, ctx.stage):
            return INF
        if "K" not in p:
            K = spec.choose_K(ctx, self)
            p["K"] = K
            ctx.restrain(self, K, self.i)
            return WAIT
        if "phiK" in p:
            return D
        v = spec.phi(self.n, p["K"], ctx.stage)
        if v is None:
            return WAIT
        p["phiK"] = v
        p["pending"] = True
        ctx.mention(v)
        return D

    def act(self, ctx, outcome):
        p = self.params
        V = ctx.V
        if outcome == INF:
            # the node's own diagonalization attempt is abandoned while coding
            for key in ("K", "phiK", "pending", "held"):
                if key in p:
                    if key == "K":
                        ctx.lift(self, p["K"], self.i)
                    if key == "phiK":
                        ctx.lift(self, p["phiK"], self.j)
                    p.pop(key)
            g = p["gmap"]
            Vi, Vj = set(V[self.i]), set(V[self.j])
            ctx.enumerate_many(self, {g.inv(x) for x in Vj}, self.i)
            ctx.enumerate_many(self, {g(x) for x in Vi}, self.j)
            return
        if outcome == D and p.pop("pending", False):
            K, v = p["K"], p["phiK"]
            extra_in = {(K, self.i)}
            rp = self.spec.pairs_from(ctx.engine, self, [(v, self.j)])
            bad = [(m, l) for (m, l) in rp.pairs if m in V[l] or (m, l) in extra_in]
            if bad:
                p["held"] = True
                ctx.log(self, "diag-held", K=K, value=v, blocking=[list(x) for x in bad[:4]])
                return
            ctx.lift(self, K, self.i)
            ctx.restrain(self, v, self.j)
            ctx.enumerate(self, K, self.i)
            ctx.log(self, "diag", K=K, value=v)


class InfOrbitSpec(ConstructionSpec):
    name = "inf-orbit"

    def __init__(self, reg: Registry, X: Sigma3Spec, G: PermGroup, opponents,
                 g_budget=None, injections=None, check_every: int = 1):
        self.reg, self.X, self.G = reg, X, G
        self.opponents = list(opponents)
        self.g_budget = g_budget
        self._inject = injections or {}
        self.check_every = check_every
        width = max(len(self.opponents), X.witnesses)
        reqs = [(i, j, n) for (i, j) in X.pairs() for n in range(width)]
        self.requirements = sorted(reqs, key=lambda r: (max(r[0], r[1]), r[0], r[1], r[2]))
        self.max_pairs_seen = 0
        self._injures: dict = {}
        self._rp_cache: dict = {}

    # placement ------------------------------------------------------
    def _walk(self, path):
        """Requirement index placed at ``path`` or None past the last."""
        k = 0
        blocked: set = set()
        for outcome in path:
            k = self._skip(k, blocked)
            if k is None:
                return None
            i, j, n = self.requirements[k]
            if outcome == INF:
                blocked.add(j)
            k += 1
        return self._skip(k, blocked)

    def _skip(self, k, blocked):
        while k < len(self.requirements):
            i, j, _ = self.requirements[k]
            if i in blocked or j in blocked:
                k += 1
                continue
            return k
        return None

    def strategy_for(self, path):
        k = self._walk(path)
        if k is None:
            return None
        return PNode(self, *self.requirements[k])

    def validate_node(self, path, strat):
        for d in range(len(path)):
            if path[d] != INF:
                continue
            anc = self.requirements[self._walk(path[:d])]
            if anc[1] in (strat.i, strat.j):
                raise SpecValidationFailed(
                    f"{strat.addr}: requirement mentioning {anc[1]} below an inf outcome")

    def validate(self):
        cls = classify_action(self.G)
        if cls.tag != INFINITE_ORBIT:
            raise SpecValidationFailed(f"group {self.G.name!r} has no infinite orbit ({cls.tag})")
        orb = self.G.orbit(0, cap=256)
        # the construction works inside the orbit of 0, which must be all of
        # the naturals: check every small number is reached
        reach = _reach(self.G, 0, 64)
        if not set(range(64)) <= reach:
            raise SpecValidationFailed("group does not act transitively on the naturals")
        del orb
        for n in self.opponents:
            if n < 0 or n >= self.reg.n_fns:
                raise SpecValidationFailed(f"opponent {n} is not registered")

    def injections(self):
        return self._inject

    # helpers --------------------------------------------------------
    def phi(self, n, x, s):
        if n >= len(self.opponents):
            return None
        return self.reg.phi_at(self.opponents[n], x, s)

    def active_nodes(self, eng):
        return [eng.nodes[p] for p in sorted(eng.live, key=lambda q: (len(q), q))]

    def eligible(self, eng, alpha):
        """Nodes whose ``inf`` actions count for ``alpha``'s restrained pairs."""
        out = []
        for beta in self.active_nodes(eng):
            if beta.gmap is None:
                continue
            bp, ap = beta.path, alpha.path
            if len(ap) > len(bp) and ap[: len(bp) + 1] == bp + (INF,):
                out.append(beta)
            elif eng.left_of(ap, bp):
                out.append(beta)
            elif len(bp) > len(ap) and bp[: len(ap)] == ap and bp[len(ap)] in (D, WAIT):
                out.append(beta)
        return out

    def injures(self, eng, b, c) -> bool:
        """``b`` taking ``inf`` initializes ``c``."""
        key = (b.path, c.path)
        hit = self._injures.get(key)
        if hit is None:
            hit = self._injures[key] = eng.left_of(b.path + (INF,), c.path)
        return hit

    def pairs_from(self, eng, alpha, direct) -> RestrainedPairSet:
        """Pairs ``(m, l)`` reachable from ``direct`` by chains of distinct
        eligible nodes, none of which injures a node acting after it."""
        nodes = self.eligible(eng, alpha)
        out = RestrainedPairSet(alpha.addr)
        seen = set()
        stack = [((n, t), ()) for (n, t) in direct]
        while stack:
            pair, later = stack.pop()
            key = (pair, frozenset(b.path for b in later))
            if key in seen:
                continue
            seen.add(key)
            if pair not in out.pairs or len(later) < len(out.pairs[pair]):
                out.pairs[pair] = [b.addr for b in later]
            n, t = pair
            for b in nodes:
                if b in later or any(self.injures(eng, b, c) for c in later):
                    continue
                g = b.gmap
                if t == b.j:
                    stack.append(((g.inv(n), b.i), (b,) + later))
                if t == b.i:
                    stack.append(((g(n), b.j), (b,) + later))
        return out

    def _stamp(self, ctx):
        return (ctx.stage, len(ctx.actions), len(ctx.engine.live))

    def restrained_pairs(self, eng, alpha, ctx=None) -> RestrainedPairSet:
        if ctx is not None:
            key = (self._stamp(ctx), alpha.path)
            if key in self._rp_cache:
                return self._rp_cache[key]
        direct = sorted((n, t) for (o, n, t) in eng.restraints if o == alpha.addr)
        rp = self.pairs_from(eng, alpha, direct)
        if ctx is not None:
            if len(self._rp_cache) > 4096:
                self._rp_cache.clear()
            self._rp_cache[key] = rp
        return rp

    def all_restrained_numbers(self, eng, ctx=None) -> set:
        nums = set()
        for a in self.active_nodes(eng):
            nums |= self.restrained_pairs(eng, a, ctx).numbers()
        return nums

    def choose_g(self, ctx, node):
        eng = ctx.engine
        F = set(range(eng.max_mentioned + 1)) | self.all_restrained_numbers(eng, ctx)
        # on a shift-like orbit the displacement must exceed the span of F
        budget = self.g_budget if self.g_budget is not None else \
            min(max(64, max(F, default=0) + 2), 2048)
        try:
            return avoid_finite_set(self.G, F, budget)
        except NoWitnessInBudget as exc:
            raise NoWitnessInBudget(f"{node.addr}: {exc}") from None

    def choose_K(self, ctx, node):
        eng = ctx.engine
        taken = self.all_restrained_numbers(eng, ctx)
        for _ in range(10_000):
            K = ctx.fresh(node)
            if K in taken:
                continue
            rp = self.pairs_from(eng, node, [(K, node.i)])
            if any(m in ctx.V[l] for (m, l) in rp.pairs):
                continue
            return K
        raise RuntimeError(f"{node.addr}: no admissible K among 10000 fresh numbers")

    # invariants -----------------------------------------------------
    def check(self, ctx):
        if ctx.stage % self.check_every:
            return []
        eng = ctx.engine
        bad = []
        K_owner = {}
        for b in self.active_nodes(eng):
            if "K" in b.params:
                K_owner[b.params["K"]] = b
        for a in self.active_nodes(eng):
            rp = self.restrained_pairs(eng, a, ctx)
            self.max_pairs_seen = max(self.max_pairs_seen, len(rp))
            for (m, l), chain in sorted(rp.pairs.items()):
                if m in ctx.V[l]:
                    bad.append({"invariant": "restrained-pairs-clear",
                                "detail": f"{a.addr}: pair ({m},V{l}) violated via {chain}"})
                b = K_owner.get(m)
                if b is not None and b is not a and b.i == l:
                    if not eng.left_of(b.path + (D,), a.path + (D,)):
                        bad.append({"invariant": "restrained-K-left",
                                    "detail": f"{a.addr}: pair ({m},V{l}) holds K of {b.addr}"})
        return bad

    def summary(self, eng):
        nodes = []
        for node in sorted(eng.ever.values(), key=lambda n: (len(n.path), n.path)):
            if node.path in eng.live:
                nodes.append({"node": node.addr, "req": list(node.req),
                              "g": format_word(node.params.get("g", ())),
                              "K": node.params.get("K"), "phiK": node.params.get("phiK")})
        return {"construction": self.name, "stages": eng.stage, "nodes": nodes,
                "max_restrained_pairs": self.max_pairs_seen}


def _reach(G: PermGroup, a: int, want: int, limit: int = 4096) -> set:
    seen = {a}
    frontier = [a]
    while frontier and len(seen) < limit:
        nxt = []
        for x in frontier:
            alpha = G.touching([x])
            if alpha is None:
                alpha = G.alphabet()
            for i, s in G.letters(alpha):
                y = G.apply_word(((i, s),), x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
        if set(range(want)) <= seen:
            break
    return seen
