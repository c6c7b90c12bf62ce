from ceorbit import ce_core as cc
from ceorbit import verify
from ceorbit.perm_group import cycles, get_group


def _reg():
    reg = cc.Registry()
    e = reg.register(cc.staged({0: [0, 3], 4: [1], 9: [8]}))
    return reg, e


def test_image_law_check_accepts_the_image():
    reg, e = _reg()
    g = cycles((0, 1))
    a = reg.register(cc.image_of(e, g))
    reg.advance(20)
    assert verify._image_law_at_every_stage(reg, g, e, a, 20) is None


def test_image_law_check_finds_the_first_bad_stage():
    reg, e = _reg()
    g = cycles((0, 1))
    # emissions at step t enter at stage t + 1; the image of 1 arrives one step late
    late = reg.register(cc.staged({0: [1, 3], 5: [0], 9: [8]}))
    wrong = reg.register(cc.image_of(e, cycles((0, 3))))
    extra = reg.register(cc.staged({0: [1, 3], 4: [0], 7: [50], 9: [8]}))
    reg.advance(20)
    assert verify._image_law_at_every_stage(reg, g, e, late, 20) == {"stage": 5}
    assert verify._image_law_at_every_stage(reg, g, e, wrong, 20) == {"stage": 1}
    assert verify._image_law_at_every_stage(reg, g, e, extra, 20) == {"stage": 8}


def test_image_law_check_matches_stagewise_comparison():
    reg = cc.Registry()
    progs = [reg.register(p) for p in verify.probe_programs()]
    G = get_group("z-shift")
    g = G.word_eval(((0, 1),))
    # a one-stage-late copy of the true image disagrees exactly where W_e grows
    for e in progs:
        a = reg.register(cc.image_of(e, g))
        lag = reg.register(lambda own, t, view, a=a: view[a])
        reg.advance(60)
        want = next((s for s in range(61) if reg.W(lag, s) != {g(x) for x in reg.W(e, s)}), None)
        got = verify._image_law_at_every_stage(reg, g, e, lag, 60)
        assert (got or {}).get("stage") == want


def test_sample_words_has_ten_per_catalog_group():
    for name in verify.IMAGE_LAW_GROUPS:
        ws = verify.sample_words(get_group(name), 10)
        assert len(ws) == len(set(ws)) == 10 and all(ws)
