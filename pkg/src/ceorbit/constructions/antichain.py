"""Ceers ``X_0, ..., X_{L-1}`` whose coded relations ``A_n`` are pairwise
incomparable.

Every ``X_n`` starts as the column sum of a ceer with infinitely many
infinite classes.  The ``p``-th requirement ``(n, m, e)`` says that opponent
``e`` does not reduce ``A_n`` to ``A_m``.  Its node claims a column ``k``
nobody has mentioned, collapses ``X_n`` there to ``Id_{p+2}`` and protects
that column from lower priorities.  It then watches the probe ``K``, an
index of ``{2k}``, until some even ``2l`` shows up in ``W_{f(K)}``.  If
``X_m``'s column ``l`` is protected by a higher priority it already has fewer
than ``p + 2`` classes.  Otherwise the node collapses it to ``Id_1``.  Either
way ``p + 2`` classes land in fewer, and lower priorities are initialized.

The tree is a single chain (one outcome), so depth is priority.
"""

from __future__ import annotations

from ..ce_core import Registry, finite
from ..priority_engine import ConstructionSpec, SpecValidationFailed, Strategy
from ..reductions import ColumnCeer

GO = "o"


def column_target(n: int) -> str:
    return f"X{n}"


class RNode(Strategy):
    tag = "R"
    outcomes = (GO,)

    def __init__(self, spec, p, n, m, e):
        super().__init__()
        self.spec, self.p, self.n, self.m, self.e = spec, p, n, m, e

    @property
    def req(self):
        return ("R", self.n, self.m, self.e)

    def decide(self, ctx):
        return GO

    def act(self, ctx, outcome):
        spec, p = self.spec, self.params
        s = ctx.stage
        if "k" not in p:
            k = spec.fresh_column()
            q = self.p + 2
            spec.X[self.n].collapse(s, k, q)
            p["k"], p["q"], p["claimed"] = k, q, s
            p["K"] = spec.probe(k)
            ctx.restrain(self, k, column_target(self.n))
            ctx.log(self, "claim", column=k, ceer=self.n, classes=q, probe=p["K"])
            return
        if "acted" in p:
            return
        l = spec.induced_column(self.e, p["K"], s)
        if l is None:
            return
        spec.mention_column(l)
        ctx.injure_below(self, cause=f"acted:{self.addr}")
        owner = spec.protector(ctx.engine, self.m, l)
        before = spec.X[self.m].modulus(l, s + 1)
        if owner is not None and ctx.engine.lower_priority(self.path, owner.path):
            # a higher priority already left fewer than p + 2 classes there
            p["acted"] = {"case": "exploit", "l": l, "classes": before, "by": owner.addr}
        else:
            if before != 1:
                spec.X[self.m].collapse(s, l, 1)
            p["acted"] = {"case": "collapse", "l": l, "classes": 1}
        p["acted"]["stage"] = s
        ctx.log(self, "pigeonhole", column=p["k"], ceer=self.n, classes=p["q"],
                target_ceer=self.m, target_column=l, target_classes=p["acted"]["classes"],
                case=p["acted"]["case"])


class AntichainSpec(ConstructionSpec):
    name = "antichain"

    def __init__(self, reg: Registry, levels: int, opponents, injections=None):
        self.reg = reg
        self.levels = levels
        self.opponents = list(opponents)
        self._inject = injections or {}
        self.X = [ColumnCeer(name=column_target(n), log=[]) for n in range(levels)]
        self.requirements = [(n, m, e) for e in range(len(self.opponents))
                             for n in range(levels) for m in range(levels) if n != m]
        self.max_column = -1

    def strategy_for(self, path):
        p = len(path)
        if p >= len(self.requirements):
            return None
        return RNode(self, p, *self.requirements[p])

    def validate(self):
        if self.levels < 2:
            raise SpecValidationFailed("an antichain needs at least two levels")
        for f in self.opponents:
            if f < 0 or f >= self.reg.n_fns:
                raise SpecValidationFailed(f"opponent {f} is not registered")

    def injections(self):
        return self._inject

    # helpers --------------------------------------------------------
    def fresh_column(self) -> int:
        self.max_column += 1
        return self.max_column

    def mention_column(self, c: int):
        self.max_column = max(self.max_column, c)

    def probe(self, k: int) -> int:
        return self.reg.memo(("probe", k), lambda: self.reg.register(finite([2 * k])))

    def induced_column(self, e: int, K: int, s: int):
        """``l`` once some ``2l`` is in ``W_{f(K)}``, with ``f`` opponent ``e``."""
        idx = self.reg.phi_at(self.opponents[e], K, s)
        if idx is None or idx < 0 or idx >= len(self.reg):
            return None
        evens = sorted(x for x in self.reg.W(idx, s) if x % 2 == 0)
        return evens[0] // 2 if evens else None

    def protector(self, eng, n, column):
        for o, c, t in sorted(eng.restraints, key=lambda r: (r[1], str(r[2]), r[0])):
            if c == column and t == column_target(n):
                return eng.ever[o]
        return None

    # invariants -----------------------------------------------------
    def check(self, ctx):
        eng, s = ctx.engine, ctx.stage
        bad = []
        for path in sorted(eng.live, key=len):
            node = eng.nodes[path]
            p = node.params
            if "k" not in p:
                continue
            q = self.X[node.n].modulus(p["k"], s + 1)
            if q != p["q"]:
                bad.append({"invariant": "column-state",
                            "detail": f"{node.addr}: X{node.n} column {p['k']} has Id_{q}, "
                                      f"declared Id_{p['q']}"})
            a = p.get("acted")
            if a:
                q = self.X[node.m].modulus(a["l"], s + 1)
                want_ok = q == 1 if a["case"] == "collapse" else (q is not None and q < p["q"])
                if not want_ok:
                    bad.append({"invariant": "column-state",
                                "detail": f"{node.addr}: X{node.m} column {a['l']} has Id_{q}"})
        # protected columns: no collapse by anyone else while protected
        for rec in ctx.actions:
            if rec["op"] == "pigeonhole" and rec["case"] == "collapse":
                owner = self.protector(eng, rec["target_ceer"], rec["target_column"])
                if owner is not None and owner.addr != rec["by"]:
                    bad.append({"invariant": "restrained-column",
                                "detail": f"{rec['by']} collapsed X{rec['target_ceer']} column "
                                          f"{rec['target_column']} protected by {owner.addr}"})
        return bad

    def summary(self, eng):
        reqs = []
        for path in sorted(eng.nodes, key=len):
            node = eng.nodes[path]
            reqs.append({"node": node.addr, "req": list(node.req), "priority": node.p,
                         "column": node.params.get("k"), "classes": node.params.get("q"),
                         "acted": node.params.get("acted")})
        return {"construction": self.name, "stages": eng.stage, "requirements": reqs,
                "collapses": {x.name: [list(c) for c in x.log] for x in self.X}}
