"""Named verification suites.

Each suite returns a :class:`SuiteReport`: a list of checks, each naming the
invariant it exercises.  Parameters default to the sizes the acceptance tests
use, so ``ceorbit verify <suite>`` runs the same thing.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

from . import ce_core as cc
from .coding import tuple_code
from .constructions import (AntichainSpec, InfOrbitSpec, LeastReductionSpec, NonIsolatedSpec,
                            Sigma3Spec)
from .orbit_rel import rceg_witness
from .perm_group import (CATALOG, FINITELY_MANY, INFINITE_ORBIT, NON_ISOLATED, PermGroup,
                         TamedGroup, apply, avoid_finite_set, classify_action,
                         extract_permutation, format_word, get_group, induced_alpha,
                         inverse_violations, words_shortlex)
from .priority_engine import check_restraints, run
from .reductions import esetn_to_eqce, rn_image, rn_step, shift_embed

IMAGE_LAW_GROUPS = ("s3-on-3", "block-swaps", "z-shift")


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)  # run name -> JSONL text

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def add(self, check: str, ok: bool, invariant: str, detail=None):
        self.checks.append({"check": check, "ok": bool(ok), "invariant": invariant,
                            "detail": detail})

    def failed(self) -> list:
        return [c for c in self.checks if not c["ok"]]

    def to_json(self) -> str:
        return json.dumps({"suite": self.suite, "ok": self.ok, "checks": self.checks},
                          sort_keys=True, indent=1) + "\n"


# -- fixtures -----------------------------------------------------------------

def probe_programs() -> list:
    """Twenty settled or steadily growing programs used by the image-law suite."""
    P = [cc.empty(), cc.finite([0]), cc.finite([1, 2, 3]), cc.finite([0, 5, 9], at=3),
         cc.evens(), cc.odds(), cc.arithmetic(1, 3), cc.arithmetic(2, 5, 2),
         cc.stage_counter(), cc.staged({0: [4], 2: [7, 8], 10: [30]}),
         cc.finite(range(10)), cc.finite([2, 4, 6, 8], at=7), cc.arithmetic(0, 7),
         cc.staged({1: [1], 5: [11], 50: [51]}), cc.finite([13, 21, 34]),
         cc.arithmetic(3, 4), cc.finite([100]), cc.evens(per_stage=2),
         cc.staged({t: [2 * t + 1] for t in range(0, 40, 3)}), cc.finite(range(5, 25, 2))]
    return P


def sample_words(G: PermGroup, count: int = 10, alphabet_size: int = 3) -> list:
    alphabet = G.alphabet(min(alphabet_size, G.n_gens or alphabet_size))
    out = []
    # a one-generator group has only two reduced words per length
    for w in words_shortlex(G, max(4, count), alphabet):
        if w:
            out.append(w)
        if len(out) == count:
            break
    return out


def catalog_checks(report: SuiteReport, catalog=None, names=None, gens: int = 4):
    table = CATALOG if catalog is None else catalog
    for name in sorted(names or table):
        try:
            G = get_group(name, table)
        except (KeyError, ValueError) as exc:
            report.add(f"catalog:{name}", False, "catalog-entry", str(exc))
            continue
        n = G.n_gens if G.n_gens is not None else gens
        bad = {}
        for i in range(min(n, gens)):
            v = inverse_violations(G.gen(i), bound=256)
            if v:
                bad[i] = v[:4]
        report.add(f"catalog:{name}:inverses", not bad, "declared-inverse",
                   {str(k): v for k, v in bad.items()} or None)


def trichotomy_checks(report: SuiteReport, catalog=None):
    want = {"s3-on-3": FINITELY_MANY, "z-shift": INFINITE_ORBIT, "block-swaps": NON_ISOLATED}
    for name, tag in want.items():
        try:
            got = classify_action(get_group(name, catalog)).tag
        except KeyError as exc:
            report.add(f"classify:{name}", False, "trichotomy", str(exc))
            continue
        report.add(f"classify:{name}", got == tag, "trichotomy", {"want": tag, "got": got})


# -- suites -------------------------------------------------------------------

def image_law_suite(catalog=None, words: int = 10, stages: int = 500, points: int = 64,
              groups=IMAGE_LAW_GROUPS) -> SuiteReport:
    """Image law for induced indices and recovery of the permutation."""
    rep = SuiteReport("lemma-2-4")
    catalog_checks(rep, catalog, groups)
    reg = cc.Registry()
    progs = [reg.register(p) for p in probe_programs()]
    for name in groups:
        G = get_group(name, catalog)
        ws = sample_words(G, words)
        pairs = [(w, e, induced_alpha(reg, G, w, e)) for w in ws for e in progs]
        reg.advance(stages + 1)
        bad = None
        for w, e, a in pairs:
            bad = _image_law_at_every_stage(reg, G.word_eval(w), e, a, stages)
            if bad is not None:
                bad.update(word=format_word(w), index=e)
                break
        rep.add(f"image-law:{name}", bad is None, "pointwise-image",
                bad or {"words": len(ws), "programs": len(progs), "stages": stages})

        def alpha(w, e, G=G):
            return induced_alpha(reg, G, w, e)

        bad = None
        for w in ws:
            g = G.word_eval(w)
            for n in range(points):
                got = extract_permutation(reg, alpha, w, n)
                if got != apply(g, n):
                    bad = {"word": format_word(w), "n": n, "got": got, "want": apply(g, n)}
                    break
            if bad:
                break
        rep.add(f"recovery:{name}", bad is None, "permutation-recovery", bad)
    return rep


def _image_law_at_every_stage(reg, g, e: int, a: int, stages: int):
    """First stage ``s <= stages`` with ``W_{a,s} != g(W_{e,s})``, as a dict, or None.

    Both sets only grow, so equality at every stage up to ``stages`` is
    equality at ``stages`` plus ``g(x)`` entering ``a`` at the stage ``x``
    enters ``e``."""
    We, Wa = reg.W(e, stages), reg.W(a, stages)
    first = None
    for x in We:
        te, ta = reg.entry_stage(e, x), reg.entry_stage(a, g(x))
        if ta != te:
            s = te if ta is None else min(te, ta)
            first = s if first is None else min(first, s)
    for y in Wa - {g(x) for x in We}:
        s = reg.entry_stage(a, y)
        first = s if first is None else min(first, s)
    return None if first is None else {"stage": first}


def family_codes(family, n: int, level_cap: int = 6) -> frozenset:
    """Settled code set V of one ordered family of finite sets."""
    reg = cc.Registry()
    idx = [reg.register(cc.finite(S)) for S in family]
    v = esetn_to_eqce(reg, n, tuple_code(idx), level_cap)
    return reg.W(v, reg.program(v).settle)


def families_oracle(n: int, universe: int = 5, level_cap: int = 6):
    """Compare code sets over all ``n``-tuples of subsets of ``[0, universe)``.

    Rearrangements of one family must give identical sets.  Distinct
    multisets must give distinct sets: they are bucketed by a digest of the
    sorted codes and any digest collision is settled by exact comparison.
    Returns ``(merged, split, classes)``.
    """
    subsets = [tuple(x for x in range(universe) if m >> x & 1) for m in range(1 << universe)]
    buckets: dict = {}
    split, merged = [], []
    for ms in itertools.combinations_with_replacement(range(len(subsets)), n):
        V = None
        for perm in sorted(set(itertools.permutations(ms))):
            W = family_codes([subsets[a] for a in perm], n, level_cap)
            if V is None:
                V = W
            elif W != V:
                split.append(perm)
        key = hashlib.sha256(repr(sorted(V)).encode()).hexdigest()
        for other in buckets.get(key, []):
            if family_codes([subsets[a] for a in other], n, level_cap) == V:
                merged.append((other, ms))
        buckets.setdefault(key, []).append(ms)
    return merged, split, sum(len(b) for b in buckets.values())


def families_suite(sizes=(1, 2, 3), universe: int = 5) -> SuiteReport:
    """Code sets agree exactly when the families agree up to rearrangement."""
    rep = SuiteReport("thm-3-5-oracle")
    for n in sizes:
        merged, split, classes = families_oracle(n, universe)
        rep.add(f"families:n={n}", not merged and not split, "preserves-and-reflects",
                {"multisets": classes, "merged": merged[:3], "split": split[:3]})
    return rep


# demo configurations shared with the acceptance tests

def least_reduction_demo(stages: int = 2000, injections=None):
    reg = cc.Registry()
    universe = [
        reg.register(cc.finite([0, 2, 4], at=0)), reg.register(cc.finite([0, 2, 4], at=1)),
        reg.register(cc.finite([1, 3], at=2)), reg.register(cc.finite([1, 3], at=3)),
        reg.register(cc.finite([0], at=4)), reg.register(cc.finite([5, 6], at=5)),
        reg.register(cc.finite([2, 7], at=6)), reg.register(cc.empty()),
    ]
    opponents = [reg.register_fn(*cc.identity_fn(3)), reg.register_fn(*cc.swap_fn(0, 1, 5)),
                 reg.register_fn(*cc.divergent_fn())]
    spec = LeastReductionSpec(reg, universe, opponents, injections)
    return reg, spec, run(spec, stages)


def least_reduction_invariants(stages: int = 2000, horizon: int = 10) -> SuiteReport:
    rep = SuiteReport("thm-3-1-invariants")
    reg, spec, r = least_reduction_demo(stages)
    rep.traces["least-reduction"] = r.trace_jsonl()
    cr = check_restraints(r)
    rep.add("check-restraints", cr.ok, "restraints-maintained", cr.violations[:5] or None)
    for inv in ("restraints-maintained", "awkward-chaining-win"):
        bad = [f for f in r.failures if f["invariant"] == inv]
        rep.add(f"per-stage:{inv}", not bad, inv, bad[:5] or None)
    s = r.engine.stage
    V = r.V
    U = spec.universe
    for a in range(len(U)):
        for b in range(a + 1, len(U)):
            Wa, Wb = reg.W(U[a], s), reg.W(U[b], s)
            if Wa == Wb:
                ok = {x for x in V[a] if x <= horizon} == {x for x in V[b] if x <= horizon}
                rep.add(f"equal-pair:{a},{b}", ok, "copy-over",
                        {"Va": sorted(x for x in V[a] if x <= horizon),
                         "Vb": sorted(x for x in V[b] if x <= horizon)})
            else:
                diff = sorted(V[a] ^ V[b])
                rep.add(f"distinct-pair:{a},{b}", bool(diff), "identity-diagonalization",
                        {"witness": diff[0] if diff else None})
    return rep


def inf_orbit_demo(stages: int = 5000):
    reg = cc.Registry()
    opponents = [reg.register_fn(*cc.identity_fn(3))]
    X = Sigma3Spec.from_partition([[0, 1], [2, 3]])
    spec = InfOrbitSpec(reg, X, get_group("z-shift"), opponents)
    return reg, spec, run(spec, stages)


def _related_checks(rep, reg, spec, r, window, budget):
    V = r.V
    X = spec.X
    for a in range(X.size):
        for b in range(a + 1, X.size):
            Va = sorted(x for x in V[a] if x <= window)
            Vb = sorted(x for x in V[b] if x <= window)
            if X.declared(a, b):
                ra, rb = reg.register(cc.finite(Va)), reg.register(cc.finite(Vb))
                w = rceg_witness(spec.G, reg, ra, rb, window + 1, 2, budget)
                rep.add(f"related:{a},{b}", w is not None, "orbit-witness",
                        {"word": None if w is None else format_word(w)})
            else:
                rep.add(f"unrelated:{a},{b}", Va != Vb, "diagonalization",
                        {"difference": sorted(set(Va) ^ set(Vb))[:4]})


def inf_orbit_invariants(stages: int = 5000, window: int = 200, budget: int = 12) -> SuiteReport:
    rep = SuiteReport("inf-orbit-invariants")
    reg, spec, r = inf_orbit_demo(stages)
    rep.traces["inf-orbit"] = r.trace_jsonl()
    for inv in ("restrained-pairs-clear", "restrained-K-left"):
        bad = [f for f in r.failures if f["invariant"] == inv]
        rep.add(f"per-stage:{inv}", not bad, inv, bad[:5] or None)
    cr = check_restraints(r)
    rep.add("check-restraints", cr.ok, "restraints-maintained", cr.violations[:5] or None)
    rep.add("finite-restraints", r.summary["max_restrained_pairs"] < 10_000,
            "finite-restraints", {"max": r.summary["max_restrained_pairs"]})
    _related_checks(rep, reg, spec, r, window, budget)
    return rep


def nonisolated_demo(stages: int = 3000, injections=None, catalog=None):
    reg = cc.Registry()
    opponents = [reg.register_fn(*cc.identity_fn(3))]
    X = Sigma3Spec.from_partition([[0, 1], [2, 3]])
    G = TamedGroup(get_group("block-swaps", catalog), 0, 2)
    spec = NonIsolatedSpec(reg, X, G, opponents, injections=injections)
    return reg, spec, run(spec, stages)


NONISOLATED_INVARIANTS = ("s-coherence", "orbit-discipline", "clean-up-law",
                          "restraints-maintained")


def nonisolated_invariants(stages: int = 3000, window: int = 200, budget: int = 12,
                           inject_at: int = 100, inject_node: str = "inf/d",
                           catalog=None) -> SuiteReport:
    rep = SuiteReport("nonisolated-invariants")
    runs = {
        "plain": nonisolated_demo(stages, catalog=catalog),
        "injured": nonisolated_demo(
            stages, {inject_at: [("injure", tuple(inject_node.split("/")))]}, catalog),
    }
    for label, (reg, spec, r) in runs.items():
        rep.traces[f"nonisolated-{label}"] = r.trace_jsonl()
        for inv in NONISOLATED_INVARIANTS:
            bad = [f for f in r.failures if f["invariant"] == inv]
            rep.add(f"{label}:per-stage:{inv}", not bad, inv, bad[:5] or None)
        cr = check_restraints(r)
        rep.add(f"{label}:check-restraints", cr.ok, "restraints-maintained",
                cr.violations[:5] or None)
        diag = sum(1 for rec in r.records for a in rec.actions if a["op"] == "diag")
        rep.add(f"{label}:diagonalized", diag > 0, "orbit-discipline", {"actions": diag})
    # the injected injury must have triggered a clean-up
    reg, spec, r = runs["injured"]
    ups = [(rec.stage, a) for rec in r.records for a in rec.actions
           if a["op"] == "clean-up" and a["by"] == inject_node]
    ok = bool(ups) and ups[0][0] == inject_at
    if ok:
        orbit = set(ups[0][1]["orbit"])
        ok = all(orbit <= r.V[t] for t in spec.sets())
    rep.add("injured:clean-up", ok, "clean-up-law",
            {"events": [[s, a["orbit"]] for s, a in ups[:3]]})
    reg, spec, r = runs["plain"]
    _related_checks(rep, reg, spec, r, window, budget)
    return rep


def antichain_demo(stages: int = 2000, levels: int = 3, fresh_column: int = 40):
    reg = cc.Registry()
    far = reg.register(cc.finite([2 * fresh_column]))
    opponents = [reg.register_fn(*cc.identity_fn(3)), reg.register_fn(*cc.constant_fn(far, 5)),
                 reg.register_fn(*cc.divergent_fn())]
    spec = AntichainSpec(reg, levels, opponents)
    return reg, spec, run(spec, stages)


def antichain_invariants(stages: int = 2000, levels: int = 3, fresh_column: int = 40) -> SuiteReport:
    rep = SuiteReport("antichain-invariants")
    reg, spec, r = antichain_demo(stages, levels, fresh_column)
    rep.traces["antichain"] = r.trace_jsonl()
    for inv in ("column-state", "restrained-column"):
        bad = [f for f in r.failures if f["invariant"] == inv]
        rep.add(f"per-stage:{inv}", not bad, inv, bad[:5] or None)
    s = r.engine.stage
    for q in r.summary["requirements"]:
        a = q["acted"]
        if not a:
            continue
        n, m = q["req"][1], q["req"][2]
        own = spec.X[n].modulus(q["column"], s)
        tgt = spec.X[m].modulus(a["l"], s)
        ok = own == q["classes"] == q["priority"] + 2 and tgt is not None and tgt < own
        rep.add(f"pigeonhole:{q['node']}", ok, "column-state",
                {"own": own, "target": tgt, "case": a["case"]})
    # the constant opponent sends every probe to the fresh column
    hits = [rec for rec in r.records for a in rec.actions
            if a["op"] == "pigeonhole" and a["target_column"] == fresh_column]
    collapsed = [m for m in range(levels) if spec.X[m].modulus(fresh_column, s) == 1]
    rep.add("fresh-column-collapse", bool(hits) and bool(collapsed), "column-state",
            {"pigeonhole_records": len(hits), "collapsed_in": collapsed})
    return rep


def tame_subgroup_suite(catalog=None, points: int = 16, stages: int = 32) -> SuiteReport:
    rep = SuiteReport("tame-subgroup")
    catalog_checks(rep, catalog)
    trichotomy_checks(rep, catalog)
    try:
        parent = get_group("block-swaps", catalog)
        T = TamedGroup(parent, stages, 2)
    except Exception as exc:  # noqa: BLE001 - reported as a failed check
        rep.add("tame:block-swaps", False, "frozen-orbit", f"{type(exc).__name__}: {exc}")
        return rep
    bad = None
    for a in range(points):
        for s in range(a, stages):
            orb = _orbit_with(T._gens[: s + 1], a)
            if orb != T.frozen[a]:
                bad = {"point": a, "stage": s, "orbit": sorted(orb), "frozen": sorted(T.frozen[a])}
                break
        if bad:
            break
    rep.add("tame:frozen-orbit", bad is None, "frozen-orbit", bad)
    ref = [a for a in range(points) if T.frozen[a] - parent.orbit_of(a)]
    rep.add("tame:orbits-inside-parent", not ref, "frozen-orbit", {"differ": ref[:4]})
    moved = [s for s, w in enumerate(T.admitted_words)
             if any(parent.apply_word(w, x) != x for x in range(s))]
    rep.add("tame:fixes-prefix", not moved, "frozen-orbit", {"stages": moved[:4]})
    return rep


def _orbit_with(gens, a):
    seen = {a}
    todo = [a]
    while todo:
        x = todo.pop()
        for g in gens:
            for y in (g(x), g.inv(x)):
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
    return frozenset(seen)


def rn_chain(bound: int = 1000, sizes=(1, 2, 3), stages: int = 500) -> SuiteReport:
    rep = SuiteReport("rn-chain")
    # residue law on the registered maps for initial segments and residue classes
    for n in sizes:
        reg = cc.Registry()
        probes = [cc.finite(range(m)) for m in range(0, bound, 37)] + \
                 [cc.arithmetic(r, n) for r in range(n)] + [cc.finite(range(0, bound, 7))]
        bad = None
        for p in probes:
            k = reg.register(p)
            l = rn_step(reg, n, k)
            s = max(reg.program(k).settle or 0, bound + 1)
            W = {x for x in reg.W(k, s) if x < bound}
            want = {(n + 1) * (z // n) + z % n for z in W}
            got = {x for x in reg.W(l, s) if x < (n + 1) * (bound // n)}
            if not want <= reg.W(l, s) or any(x not in want for x in got if
                                               x // (n + 1) * n + x % (n + 1) < bound):
                bad = {"probe": k, "missing": sorted(want - reg.W(l, s))[:4]}
                break
        rep.add(f"residue-law:n={n}", bad is None, "residue-law", bad)
        # pointwise law below the bound, directly on the map
        bad = None
        for z in range(bound):
            img = rn_image(n, {z})
            if img != {(n + 1) * (z // n) + z % n}:
                bad = {"z": z, "image": sorted(img)}
                break
        rep.add(f"residue-map:n={n}", bad is None, "residue-law", bad)
    reg = cc.Registry()
    bad = None
    for p in probe_programs():
        k = reg.register(p)
        l = shift_embed(reg, k)
        for s in range(stages + 1):
            if 0 in reg.W(l, s):
                bad = {"index": k, "stage": s}
                break
        if bad:
            break
    rep.add("shift-embed:no-zero", bad is None, "shift-embed", bad)
    return rep


def avoid_set_suite(budget: int = 64) -> SuiteReport:
    """Avoiding a finite set on the coded-integers shift."""
    from .coding import zigzag
    rep = SuiteReport("avoid-finite-set")
    G = get_group("z-shift")
    F = sorted(zigzag(z) for z in range(-4, 5))
    w = avoid_finite_set(G, F, budget)
    g = G.word_eval(w)
    disp = sum(e for _, e in w)
    rep.add("avoid:displacement", abs(disp) >= 9, "avoid-finite-set",
            {"word": format_word(w), "displacement": disp})
    rep.add("avoid:disjoint", not ({g(x) for x in F} & set(F)), "avoid-finite-set", None)
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "lemma-2-4": image_law_suite,
    "thm-3-5-oracle": families_suite,
    "thm-3-1-invariants": least_reduction_invariants,
    "inf-orbit-invariants": inf_orbit_invariants,
    "nonisolated-invariants": nonisolated_invariants,
    "antichain-invariants": antichain_invariants,
    "tame-subgroup": tame_subgroup_suite,
    "rn-chain": rn_chain,
}

CATALOG_SUITES = {"lemma-2-4", "tame-subgroup", "nonisolated-invariants"}


def run_suite(name: str, catalog=None, **kw) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    if name in CATALOG_SUITES:
        kw["catalog"] = catalog
    return SUITES[name](**kw)
