import pytest
from hypothesis import given, settings, strategies as st

from ceorbit import ce_core as cc
from ceorbit.coding import pair, tuple_code, tuple_decode, unpair, unzigzag, zigzag


# -- coding -------------------------------------------------------------------

@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_pair_roundtrip(x, y):
    assert unpair(pair(x, y)) == (x, y)


@given(st.integers(0, 10**5))
def test_unpair_is_onto(z):
    assert pair(*unpair(z)) == z


def test_pair_small_values():
    # hand-computed Cantor codes
    assert [pair(0, 0), pair(1, 0), pair(0, 1), pair(2, 0), pair(1, 1)] == [0, 1, 2, 3, 4]


@given(st.lists(st.integers(0, 500), min_size=1, max_size=4))
def test_tuple_roundtrip(xs):
    assert tuple_decode(tuple_code(xs), len(xs)) == tuple(xs)


@given(st.integers(-10**6, 10**6))
def test_zigzag_roundtrip(n):
    assert unzigzag(zigzag(n)) == n


def test_zigzag_order():
    assert [zigzag(n) for n in (0, -1, 1, -2, 2)] == [0, 1, 2, 3, 4]


# -- registry -----------------------------------------------------------------

def test_empty_program_stays_empty():
    reg = cc.Registry()
    e = reg.register(cc.empty())
    assert e == 0
    reg.advance(20)
    assert all(reg.W(e, s) == frozenset() for s in range(21))


def test_stage_counter():
    reg = cc.Registry()
    e = reg.register(cc.stage_counter())
    reg.advance(30)
    for s in range(31):
        assert reg.W(e, s) == frozenset(range(s))


def test_copy_is_subset_of_source():
    reg = cc.Registry()
    src = reg.register(cc.evens())
    cp = reg.register(cc.copy_of(src))
    reg.advance(100)
    for s in range(101):
        assert reg.W(cp, s) <= reg.W(src, s)


def test_fixpoint_constant_builder():
    reg = cc.Registry()
    e = reg.fixpoint(lambda own, t, view: [7] if t == 0 else [])
    reg.advance(5)
    assert all(reg.W(e, s) == {7} for s in range(1, 6))


def test_fixpoint_emits_own_index():
    reg = cc.Registry()
    reg.register(cc.evens())
    e = reg.fixpoint(lambda own, t, view: [own])
    reg.advance(10)
    assert reg.W(e) == {e}


def test_fixpoint_copying_an_image_of_itself_lags_by_one_stage():
    from ceorbit.perm_group import cycles
    reg = cc.Registry()
    seed = reg.register(cc.finite([0, 3]))
    swap = cycles((0, 1))
    holder = {}

    def builder(own, t, view):
        # the seed plus a copy of the swapped image of W_own itself
        return list(view[seed]) + list(view[holder["img"]])

    e = reg.fixpoint(builder)
    holder["img"] = reg.register(cc.image_of(e, swap))
    reg.advance(200)
    for s in range(200):
        assert reg.W(e, s + 1) == reg.W(seed, s + 1) | reg.W(holder["img"], s)
    assert reg.W(e) == {0, 1, 3}


def test_run_to_stage_zero_and_idempotent():
    reg = cc.Registry()
    reg.register(cc.evens())
    reg.register(cc.finite([4]))
    snap0 = reg.run_to_stage(0)
    assert all(not w for w in snap0.contents.values())
    a = reg.run_to_stage(40)
    b = reg.run_to_stage(40)
    assert a == b and a.to_json() == b.to_json()


def _build():
    reg = cc.Registry()
    reg.register(cc.evens())
    reg.register(cc.arithmetic(1, 3))
    reg.register(cc.copy_of(0))
    reg.register(cc.staged({5: [2, 9], 40: [100]}))
    return reg


def test_replay_determinism():
    assert _build().run_to_stage(500).to_json() == _build().run_to_stage(500).to_json()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 60))
def test_late_registration_matches_early(late):
    early = cc.Registry()
    a = early.register(cc.evens())
    b = early.register(cc.copy_of(a))
    early.advance(80)
    lazy = cc.Registry()
    a2 = lazy.register(cc.evens())
    lazy.advance(late)
    b2 = lazy.register(cc.copy_of(a2))
    lazy.advance(80)
    for s in range(81):
        assert early.W(b, s) == lazy.W(b2, s)


def test_phi_identity_and_divergent():
    reg = cc.Registry()
    ident = reg.register_fn(*cc.identity_fn(3))
    div = reg.register_fn(*cc.divergent_fn())
    assert reg.phi_at(ident, 11, 2) is None
    assert all(reg.phi_at(ident, x, 3) == x for x in range(50))
    assert all(reg.phi_at(div, x, s) is None for x in range(10) for s in (0, 100))


def test_image_of_is_pointwise():
    reg = cc.Registry()
    e = reg.register(cc.odds())
    img = reg.register(cc.image_of(e, lambda x: x + 10))
    reg.advance(50)
    for s in range(51):
        assert reg.W(img, s) == {x + 10 for x in reg.W(e, s)}


def test_emission_cap():
    reg = cc.Registry(emission_cap=2)
    # a program that re-emits everything each stage gets two new per stage
    e = reg.register(lambda own, t, view: range(10))
    reg.advance(3)
    assert reg.W(e, 1) == {0, 1} and reg.W(e, 3) == set(range(6))


def test_register_inside_stage_rejected():
    reg = cc.Registry()

    def bad(own, t, view):
        reg.register(cc.empty())
        return []

    reg.register(bad)
    with pytest.raises(RuntimeError):
        reg.advance(1)
