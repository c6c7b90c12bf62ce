import pytest

from ceorbit import ce_core as cc
from ceorbit.constructions import (AntichainSpec, InfOrbitSpec, LeastReductionSpec,
                                   NonIsolatedSpec, QuadrupleSet, Sigma3Spec,
                                   consistent_map_search, restrained_pairs)
from ceorbit.orbit_rel import rceg_witness
from ceorbit.perm_group import TamedGroup, get_group, word_eval
from ceorbit.priority_engine import check_restraints, run


# -- Sigma3Spec and QuadrupleSet --------------------------------------------------

def test_sigma3_partition_declares_classes():
    X = Sigma3Spec.from_partition([[0, 1], [2, 3]])
    assert X.size == 4
    assert X.declared(0, 1) and X.declared(3, 2) and X.declared(1, 1)
    assert not X.declared(0, 2)
    assert X.flag(1, 0, 0, 17) and not X.flag(0, 2, 0, 17)
    assert X.validate(200) == []


def test_sigma3_json_rules():
    X = Sigma3Spec.from_json({"size": 3, "rules": [{"i": 2, "j": 0, "flag": "always"}]})
    assert X.declared(0, 2) and not X.declared(0, 1)
    assert X.pairs() == [(0, 1), (0, 2), (1, 2)]


def test_quadruple_set_fixed_and_contradiction():
    S = QuadrupleSet("t", {(0, 1, 0, 1), (4, 5, 0, 1), (2, 2, 1, 0)})
    assert S.fixed(0, 1) == {0: 1, 4: 5}
    assert S.pairs() == {(0, 1), (1, 0)}
    S.update({(0, 0, 0, 1)})
    assert S.fixed(0, 1) is None
    assert S.copy("u").owner == "u" and len(S.copy()) == 4


def test_consistent_map_search_examples():
    G = get_group("block-swaps")
    assert consistent_map_search(G, QuadrupleSet("t"), 0, 1) == ()
    w = consistent_map_search(G, QuadrupleSet("t", {(0, 1, 0, 1)}), 0, 1)
    assert len(w) == 1 and word_eval(G, w)(0) == 1
    bad = QuadrupleSet("t", {(0, 1, 0, 1), (0, 0, 0, 1)})
    assert consistent_map_search(G, bad, 0, 1) is None
    # quadruples on other pairs do not constrain (0, 1)
    assert consistent_map_search(G, QuadrupleSet("t", {(0, 1, 2, 3)}), 0, 1) == ()


# -- least reduction ------------------------------------------------------------

def _least(universe_progs, opponents, stages):
    reg = cc.Registry()
    U = [reg.register(p) for p in universe_progs]
    ops = [reg.register_fn(*o) for o in opponents]
    return run(LeastReductionSpec(reg, U, ops), stages)


def test_least_reduction_single_index_has_no_requirements():
    r = _least([cc.evens()], [cc.identity_fn(2)], 100)
    assert r.summary["requirements"] == {}
    assert r.trace_jsonl() == ""
    assert not r.failures


def test_least_reduction_diagonalizes_distinct_settled_sets():
    r = _least([cc.empty(), cc.finite([0])], [cc.identity_fn(2)], 2000)
    assert r.V[0] != r.V[1]
    (d,) = r.summary["requirements"]["D[0,1,0]"]
    assert d["case"] in ("a", "b")
    assert check_restraints(r).ok and not r.failures


def test_least_reduction_duplicate_evens_agree():
    r = _least([cc.evens(), cc.evens()], [cc.identity_fn(2)], 2000)
    assert {x for x in r.V[0] if x <= 10} == {x for x in r.V[1] if x <= 10}
    assert not r.failures


# -- infinite orbit ---------------------------------------------------------------

def _inf_orbit(X, stages, opponent=None):
    reg = cc.Registry()
    ops = [reg.register_fn(*(opponent or cc.identity_fn(3)))]
    spec = InfOrbitSpec(reg, X, get_group("z-shift"), ops)
    return reg, spec, run(spec, stages)


def test_inf_orbit_all_unrelated_diagonalizes():
    reg, spec, r = _inf_orbit(Sigma3Spec.from_partition([[0], [1], [2]]), 2000)
    assert {rec.path[-1] for rec in r.records[3:]} <= {"d", "w"}
    V = [frozenset(r.V[t]) for t in range(3)]
    assert len(set(V)) == 3
    assert not r.failures and check_restraints(r).ok


def test_inf_orbit_related_pair_has_witness():
    reg, spec, r = _inf_orbit(Sigma3Spec.from_partition([[0, 1], [2]]), 1500)
    window = 200
    a = reg.register(cc.finite(sorted(x for x in r.V[0] if x <= window)))
    b = reg.register(cc.finite(sorted(x for x in r.V[1] if x <= window)))
    assert rceg_witness(spec.G, reg, a, b, window + 1, 2, 12) is not None


def test_inf_orbit_empty_universe_is_vacuous():
    r = run(InfOrbitSpec(cc.Registry(), Sigma3Spec(0), get_group("z-shift"), []), 50)
    assert r.trace_jsonl() == "" and r.summary["nodes"] == []


# -- restrained pairs -------------------------------------------------------------

def _replay_chain(eng, direct, pair, chain):
    """Follow ``chain`` (first mover first) backwards from a direct restraint."""
    nodes = [eng.ever[a] for a in chain]
    for n, t in direct:
        for b in reversed(nodes):
            if t == b.j:
                n, t = b.gmap.inv(n), b.i
            elif t == b.i:
                n, t = b.gmap(n), b.j
            else:
                break
        else:
            if (n, t) == pair:
                return True
    return False


def _pairs_by_node(X):
    reg, spec, r = _inf_orbit(X, 200, cc.divergent_fn())
    eng = r.engine
    out = {}
    for path in eng.live:
        node = eng.nodes[path]
        direct = sorted((m, t) for (o, m, t) in eng.restraints if o == node.addr)
        out[node.addr] = (direct, restrained_pairs(r, node.addr))
    return r, out


def test_restrained_pairs_without_chains_are_direct():
    r, by = _pairs_by_node(Sigma3Spec.from_partition([[0], [1]]))
    direct, rp = by["root"]
    assert direct and rp.pairs == {p: [] for p in direct}


def test_restrained_pairs_one_step_under_inf_ancestor():
    # w/inf carries (0, 3) below the coding node (0, 2) at w
    r, by = _pairs_by_node(Sigma3Spec.from_partition([[0, 2], [1], [3]]))
    direct, rp = by["w/inf"]
    one = [(p, c) for p, c in rp.pairs.items() if c == ["w"]]
    assert one
    for pair, chain in one:
        assert pair[1] == 2 and _replay_chain(r.engine, direct, pair, chain)


def test_restrained_pairs_two_step_chain():
    r, by = _pairs_by_node(Sigma3Spec(3, 1, {(1, 2, 0): "always"}))
    direct, rp = by["root"]
    two = {p: c for p, c in rp.pairs.items() if len(c) == 2}
    assert two
    for pair, chain in two.items():
        assert _replay_chain(r.engine, direct, pair, chain)
    # every listed pair is reproduced by its chain
    for pair, chain in rp.pairs.items():
        assert _replay_chain(r.engine, direct, pair, chain)


def test_restrained_pairs_rejects_other_runs_and_inactive_nodes():
    lr = run(LeastReductionSpec(cc.Registry(), [], []), 5)
    with pytest.raises(TypeError):
        restrained_pairs(lr, "root")
    # the root codes until stage 20, so the subtree below its inf outcome is dropped
    X = Sigma3Spec(3, 1, {(0, 1, 0): {"until": 20}})
    reg, spec, r = _inf_orbit(X, 200)
    stale = [n for n in r.engine.ever.values() if n.path not in r.engine.live]
    assert stale
    with pytest.raises(ValueError):
        restrained_pairs(r, stale[0])


# -- non-isolated ---------------------------------------------------------------

def _nonisolated(X, stages, injections=None):
    reg = cc.Registry()
    ops = [reg.register_fn(*cc.identity_fn(3))]
    G = TamedGroup(get_group("block-swaps"), 0, 2)
    spec = NonIsolatedSpec(reg, X, G, ops, injections=injections)
    return reg, spec, run(spec, stages)


def test_nonisolated_places_one_orbit_member_per_set():
    reg, spec, r = _nonisolated(Sigma3Spec.from_partition([[0], [1], [2]]), 600)
    diags = [a for rec in r.records for a in rec.actions if a["op"] == "diag"]
    assert diags
    for a in diags:
        orbit = {a["K"], a["K"] ^ 1}
        assert set(a["placed"]) == {str(t) for t in spec.sets()}
        assert set(a["placed"].values()) <= orbit
    assert not r.failures and check_restraints(r).ok


def test_nonisolated_related_pair_is_an_image():
    reg, spec, r = _nonisolated(Sigma3Spec.from_partition([[0, 1], [2]]), 600)
    root = r.engine.ever["root"]
    g = word_eval(spec.G, root.params["g"])
    window = 100
    assert {g(x) for x in r.V[0] if g(x) <= window} == {x for x in r.V[1] if x <= window}


def test_nonisolated_injury_cleans_up_the_orbit():
    X = Sigma3Spec.from_partition([[0, 1], [2, 3]])
    reg, spec, r = _nonisolated(X, 400, {100: [("injure", ("inf", "d"))]})
    ups = [(rec.stage, a) for rec in r.records for a in rec.actions
           if a["op"] == "clean-up" and a["by"] == "inf/d"]
    assert ups and ups[0][0] == 100
    orbit = set(ups[0][1]["orbit"])
    assert all(orbit <= r.V[t] for t in spec.sets())
    assert not r.failures


# -- antichain ------------------------------------------------------------------

def _antichain(opponents, stages, levels=3):
    reg = cc.Registry()
    ops = [reg.register_fn(*make(reg)) for make in opponents]
    spec = AntichainSpec(reg, levels, ops)
    return reg, spec, run(spec, stages)


def test_antichain_divergent_opponent_waits():
    reg, spec, r = _antichain([lambda reg: cc.divergent_fn()], 300)
    assert r.summary["requirements"]
    assert all(q["acted"] is None for q in r.summary["requirements"])
    assert not any(a["op"] == "pigeonhole" for rec in r.records for a in rec.actions)
    assert not r.failures


def test_antichain_fresh_column_collapses_to_one_class():
    far = 40

    def constant(reg):
        return cc.constant_fn(reg.register(cc.finite([2 * far])), 5)

    reg, spec, r = _antichain([constant], 600)
    hits = [a for rec in r.records for a in rec.actions
            if a["op"] == "pigeonhole" and a["target_column"] == far]
    assert hits and all(a["target_classes"] == 1 and a["classes"] >= 2 for a in hits)
    assert any(spec.X[m].modulus(far, r.engine.stage) == 1 for m in range(3))
    assert not r.failures


def test_antichain_injured_requirement_reclaims_a_new_column():
    reg, spec, r = _antichain([lambda reg: cc.identity_fn(3)], 50)
    claims = {}
    reclaimed = False
    for rec in r.records:
        for a in rec.actions:
            if a["op"] == "claim":
                prev = claims.get(a["by"])
                if prev is not None and prev != a["column"]:
                    reclaimed = True
                claims[a["by"]] = a["column"]
    injured = {a["node"] for rec in r.records for a in rec.actions if a["op"] == "injury"}
    assert injured and reclaimed
    assert not r.failures


def test_antichain_rejects_one_level():
    from ceorbit.priority_engine import SpecValidationFailed
    with pytest.raises(SpecValidationFailed):
        run(AntichainSpec(cc.Registry(), 1, []), 5)
