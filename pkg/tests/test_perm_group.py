import json

import pytest
from hypothesis import given, settings, strategies as st

from ceorbit import ce_core as cc
from ceorbit.coding import unzigzag, zigzag
from ceorbit.perm_group import (CATALOG, FINITELY_MANY, IDENTITY, INFINITE_ORBIT, NON_ISOLATED,
                                UNKNOWN, Compose, NoWitnessInBudget, PermGroup, PreconditionError,
                                Table, TamedGroup, apply, avoid_finite_set, classify_action,
                                cycles, extract_permutation, get_group, group_from_json,
                                induced_alpha, inverse_violations, invert_word, load_catalog,
                                non_isolation_witness, perm_from_json, search_map, tame_subgroup,
                                word_eval, words_shortlex)


def test_apply_examples():
    assert apply(IDENTITY, 5) == 5
    assert apply(cycles((0, 1)), 0) == 1
    # right-to-left: (1 2) first sends 2 to 1, then (0 1) sends 1 to 0
    assert apply(Compose(cycles((0, 1)), cycles((1, 2))), 2) == 0


def test_word_eval_examples():
    G = get_group("z-shift")
    assert all(word_eval(G, ())(x) == x for x in range(20))
    assert all(word_eval(G, ((0, 1), (0, -1)))(x) == x for x in range(50))
    g3 = word_eval(G, ((0, 1),) * 3)
    for z in (-1, 0, 1):
        assert unzigzag(g3(zigzag(z))) == z + 3


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_declared_inverses(name):
    G = get_group(name)
    for i in range(G.n_gens or 6):
        assert inverse_violations(G.gen(i), bound=256) == []


def test_inverse_violations_flags_bad_table():
    bad = Table(((0, 1), (1, 2), (2, 0)), ((0, 1), (1, 2), (2, 0)))
    assert inverse_violations(bad, bound=8)


@pytest.mark.parametrize("name", ["s3-on-3", "block-swaps", "z-shift", "s3-blocks"])
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_word_inverse_is_inverse(name, data):
    G = get_group(name)
    words = list(words_shortlex(G, 3, G.alphabet(3)))
    w = data.draw(st.sampled_from(words))
    g, h = word_eval(G, w), word_eval(G, invert_word(w))
    for x in range(40):
        assert h(g(x)) == x and g(h(x)) == x


def test_avoid_finite_set_examples():
    G = get_group("z-shift")
    assert avoid_finite_set(G, []) == ()
    w = avoid_finite_set(G, [zigzag(z) for z in (-1, 0, 1)])
    assert len(w) == 3 and abs(sum(s for _, s in w)) == 3
    with pytest.raises(NoWitnessInBudget):
        avoid_finite_set(get_group("s3-on-3"), [0, 1, 2], budget=6)


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(-6, 6), min_size=1, max_size=6))
def test_avoid_finite_set_is_disjoint(zs):
    G = get_group("z-shift")
    F = {zigzag(z) for z in zs}
    g = word_eval(G, avoid_finite_set(G, F))
    assert not ({g(x) for x in F} & F)


def test_non_isolation_witness_examples():
    G = get_group("block-swaps")
    w = non_isolation_witness(G, [0, 1])
    assert word_eval(G, w).support() == {2, 3}
    assert non_isolation_witness(get_group("s3-on-3"), [0, 1, 2], budget=4) is None
    assert len(non_isolation_witness(G, [])) == 1


def test_classify_examples():
    assert classify_action(get_group("s3-on-3")).tag == FINITELY_MANY
    assert classify_action(get_group("z-shift")).tag == INFINITE_ORBIT
    ac = classify_action(get_group("block-swaps"))
    assert ac.tag == NON_ISOLATED
    assert set(ac.witness["orbit_sizes"].values()) == {2}


def test_classify_unknown_without_identity_oracle():
    G = PermGroup([cycles((0, 1))], identity_oracle=None, orbit_oracle="finite-support")
    assert classify_action(G).tag == UNKNOWN


def test_tame_block_swaps_is_the_whole_group():
    T = tame_subgroup(get_group("block-swaps"), 20, 2)
    for a in range(20):
        assert T.orbit_of(a) == {a, a ^ 1}


def test_tame_rejects_isolated_group():
    with pytest.raises(PreconditionError):
        tame_subgroup(get_group("swap01"), 5)


def test_tame_s3_blocks_freezes_three_point_orbits():
    T = TamedGroup(get_group("s3-blocks"), 12, 2)
    for a in range(12):
        assert T.orbit_of(a) == {3 * (a // 3) + r for r in range(3)}


def test_tamed_elements_fix_earlier_points():
    T = TamedGroup(get_group("block-swaps"), 16, 2)
    for s, g in enumerate(T._gens):
        assert all(g(x) == x for x in range(s))


def test_induced_alpha_examples():
    reg = cc.Registry()
    G = get_group("s3-on-3")
    z = reg.register(cc.finite([0]))
    ev = reg.register(cc.evens())
    same = induced_alpha(reg, G, (), ev)
    swapped = induced_alpha(reg, G, ((0, 1),), z)
    Z = get_group("z-shift")
    shifted = induced_alpha(reg, Z, ((0, 1),) * 3, ev)
    reg.advance(100)
    for s in range(101):
        assert reg.W(same, s) == reg.W(ev, s)
    assert reg.W(swapped) == {1}
    g = word_eval(Z, ((0, 1),) * 3)
    assert reg.W(shifted, 100) == {g(x) for x in reg.W(ev, 100)}


def test_induced_alpha_is_memoized_per_group():
    reg = cc.Registry()
    e = reg.register(cc.finite([0]))
    a = induced_alpha(reg, get_group("s3-on-3"), ((0, 1),), e)
    b = induced_alpha(reg, get_group("s3-on-3"), ((0, 1),), e)
    c = induced_alpha(reg, get_group("z-shift"), ((0, 1),), e)
    assert a == b != c


def test_extract_permutation_examples():
    reg = cc.Registry()
    G = get_group("s3-on-3")

    def alpha(w, e):
        return induced_alpha(reg, G, w, e)

    assert extract_permutation(reg, alpha, (), 9) == 9
    assert extract_permutation(reg, alpha, ((0, 1),), 0) == 1
    # cycles (0 1)(1 2) as a word: generator 0 is (0 1); (1 2) = (0 1 2)^-1 (0 1) (0 1 2)
    w = ((0, 1), (1, -1), (0, 1), (1, 1))
    assert extract_permutation(reg, alpha, w, 2) == apply(word_eval(G, w), 2)


def test_search_map_factorizes():
    G = get_group("block-swaps")
    w = search_map(G, {0: 1, 4: 5, 2: 2})
    g = word_eval(G, w)
    assert (g(0), g(4), g(2)) == (1, 5, 2)
    assert search_map(G, {0: 2}) is None
    assert search_map(G, {0: 1}, avoid={0: 1}) is None


def test_catalog_json_round_trip(tmp_path):
    from importlib.resources import files
    cat = load_catalog(files("ceorbit") / "data" / "catalog.json")
    assert sorted(cat) == sorted(CATALOG)
    for name in CATALOG:
        assert cat[name]().describe() == CATALOG[name]().describe()
    p = tmp_path / "one.json"
    p.write_text(json.dumps(get_group("s3-on-3").describe()))
    assert get_group("s3-on-3", load_catalog(p)).describe() == get_group("s3-on-3").describe()


def test_perm_json_syntax():
    assert perm_from_json({"cycles": [[0, 1]]})(0) == 1
    t = perm_from_json({"table": {"forward": {"0": 5, "5": 0}}})
    assert t(0) == 5 and t.inv(5) == 0
    with pytest.raises(ValueError):
        perm_from_json({"spin": 3})
    with pytest.raises(ValueError):
        group_from_json({"name": "x", "generators": [{"identity": 1}], "identity_oracle": "oops"})
