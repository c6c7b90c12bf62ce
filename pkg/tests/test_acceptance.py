"""Exit criteria, one test per criterion, each timed against its limit.

Run alone with ``pytest -m acceptance -v``; the terminal summary lists one
PASS/FAIL line per criterion.
"""

import json
from pathlib import Path

import pytest

from ceorbit import ce_core as cc
from ceorbit import verify
from ceorbit.cli import main
from ceorbit.coding import zigzag
from ceorbit.perm_group import (FINITELY_MANY, INFINITE_ORBIT, NON_ISOLATED, apply,
                                avoid_finite_set, classify_action, extract_permutation,
                                get_group, induced_alpha)
from ceorbit.reductions import (BIG, FULL_CODING, ODDISH, PROPER_CODING, ModCeer, an_classify,
                                member_code, rx_enumerator)

from conftest import criterion

pytestmark = pytest.mark.acceptance

SCEN = Path(__file__).resolve().parent.parent / "scenarios"

# first-run reports and traces, compared byte for byte by the determinism criterion
FIRST: dict = {}


def _suite(name, **kw):
    rep = verify.run_suite(name, **kw)
    FIRST.setdefault(name, (rep.to_json(), dict(rep.traces)))
    return rep


def _assert_ok(rep):
    assert rep.ok, json.dumps(rep.failed()[:5], indent=1)


def _checks(rep, prefix):
    return [c for c in rep.checks if c["check"].startswith(prefix)]


def test_criterion_01_image_law():
    with criterion(1, "induced indices enumerate the pointwise image", 60):
        rep = _suite("lemma-2-4")
        laws = _checks(rep, "image-law:")
        assert len(laws) == 3 and all(c["ok"] for c in laws)
        for c in laws:
            assert (c["detail"]["words"], c["detail"]["programs"], c["detail"]["stages"]) \
                == (10, 20, 500)
        _assert_ok(rep)


def test_criterion_02_permutation_recovery():
    with criterion(2, "extract_permutation agrees with apply below 64", 10):
        reg = cc.Registry()
        for p in verify.probe_programs():
            reg.register(p)
        for name in verify.IMAGE_LAW_GROUPS:
            G = get_group(name)

            def alpha(w, e, G=G):
                return induced_alpha(reg, G, w, e)

            words = verify.sample_words(G, 10)
            assert len(words) == 10
            for w in words:
                g = G.word_eval(w)
                for n in range(64):
                    assert extract_permutation(reg, alpha, w, n) == apply(g, n), (name, w, n)


def test_criterion_03_families_oracle():
    with criterion(3, "E_set^n code sets preserve and reflect family equality", 300):
        rep = _suite("thm-3-5-oracle")
        fams = _checks(rep, "families:")
        assert [c["check"] for c in fams] == ["families:n=1", "families:n=2", "families:n=3"]
        # multisets of size n from 32 subsets of a 5-element set
        assert [c["detail"]["multisets"] for c in fams] == [32, 528, 5984]
        _assert_ok(rep)


def test_criterion_04_avoid_finite_set():
    with criterion(4, "shift word moves codes of [-4,4] off themselves", 5):
        G = get_group("z-shift")
        F = {zigzag(z) for z in range(-4, 5)}
        w = avoid_finite_set(G, F)
        assert abs(sum(e for _, e in w)) >= 9
        g = G.word_eval(w)
        assert not ({g(x) for x in F} & F)
        _assert_ok(verify.avoid_set_suite())


def test_criterion_05_trichotomy():
    with criterion(5, "classify_action tags on the three catalog witnesses", 30):
        assert classify_action(get_group("s3-on-3")).tag == FINITELY_MANY
        assert classify_action(get_group("z-shift")).tag == INFINITE_ORBIT
        assert classify_action(get_group("block-swaps")).tag == NON_ISOLATED


def test_criterion_06_least_reduction_run():
    with criterion(6, "least-reduction run: restraints, chaining, diagonalization, copies", 120):
        rep = _suite("thm-3-1-invariants")
        assert len(_checks(rep, "equal-pair:")) == 2
        assert len(_checks(rep, "distinct-pair:")) == 26
        assert {c["check"] for c in rep.checks} >= {
            "check-restraints", "per-stage:restraints-maintained",
            "per-stage:awkward-chaining-win"}
        _assert_ok(rep)


def test_criterion_07_infinite_orbit_run():
    with criterion(7, "infinite-orbit run: witnesses, diagonalization, restrained pairs", 300):
        rep = _suite("inf-orbit-invariants")
        assert [c["check"] for c in _checks(rep, "related:")] == ["related:0,1", "related:2,3"]
        assert len(_checks(rep, "unrelated:")) == 4
        assert {c["check"] for c in rep.checks} >= {
            "per-stage:restrained-pairs-clear", "per-stage:restrained-K-left"}
        _assert_ok(rep)


def test_criterion_08_nonisolated_run():
    with criterion(8, "non-isolated run: coherence, orbit discipline, clean-up, restraints", 300):
        rep = _suite("nonisolated-invariants")
        names = {c["check"] for c in rep.checks}
        for label in ("plain", "injured"):
            for inv in verify.NONISOLATED_INVARIANTS:
                assert f"{label}:per-stage:{inv}" in names
        assert "injured:clean-up" in names
        _assert_ok(rep)


def test_criterion_09_rn_chain():
    with criterion(9, "rn_step residue law below 1000; shift_embed avoids 0", 30):
        rep = _suite("rn-chain")
        assert len(_checks(rep, "residue-law:")) == 3
        _assert_ok(rep)


def _kind_oracle(W, window=64):
    evens = [x for x in W if x % 2 == 0]
    if len(evens) >= 2:
        return BIG
    if not evens:
        return ODDISH
    return FULL_CODING if all(x in W for x in range(1, window, 2)) else PROPER_CODING


def test_criterion_10_enumerator_families():
    with criterion(10, "an_classify on six probes; rx members match the template", 120):
        reg = cc.Registry()
        probes = [set(), {1, 3, 5}, {4}, {0, 1, 3}, {6} | set(range(1, 64, 2)), {0, 2, 9}]
        idx = [reg.register(cc.finite(sorted(P))) for P in probes]
        reg.advance(2)
        kinds = set()
        for i, P in zip(idx, probes):
            k = an_classify(reg, i, 2)
            assert k.tag == _kind_oracle(P)
            if k.tag in (PROPER_CODING, FULL_CODING):
                assert k.k == min(x for x in P if x % 2 == 0) // 2
            if k.final:
                # a final verdict never changes later
                reg.advance(reg.stage + 20)
                assert an_classify(reg, i, reg.stage).tag == k.tag
            kinds.add(k.tag)
        assert kinds == {ODDISH, PROPER_CODING, FULL_CODING, BIG}
        # rx members: F(i) = 1 for W_i = {0}, so member r targets x = 2r + 1
        X = ModCeer(2)
        i = reg.register(cc.finite([0]))
        for Y in ([], [4, 9], [0, 1, 2, 3], [12, 40, 49]):
            c = reg.register(cc.finite(Y))
            for r in range(4):
                m = rx_enumerator(reg, X, i, member_code(0, c, r))
                reg.advance(reg.stage + 5)
                x = 2 * r + 1
                want = (set(Y) | set(range(x))) - {x}
                got = reg.W(m)
                assert {v for v in got if v <= 50} == {v for v in want if v <= 50}, (Y, r)


def test_criterion_11_antichain_run():
    with criterion(11, "antichain run: column targets, restrained columns, fresh collapse", 180):
        rep = _suite("antichain-invariants")
        names = {c["check"] for c in rep.checks}
        assert {"per-stage:column-state", "per-stage:restrained-column",
                "fresh-column-collapse"} <= names
        assert _checks(rep, "pigeonhole:")
        _assert_ok(rep)


SCENARIOS = ["empty-universe", "least-reduction", "inf-orbit", "nonisolated", "antichain"]


def _scenario_outputs(name, out):
    main(["run", str(SCEN / f"{name}.json"), "--out", str(out)])
    return (out / "trace.jsonl").read_bytes(), (out / "report.json").read_bytes()


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "suites and scenario runs replay byte for byte", 900):
        for name in sorted(verify.SUITES):
            if name not in FIRST:
                _suite(name)
            rep = verify.run_suite(name)
            assert (rep.to_json(), dict(rep.traces)) == FIRST[name], name
        for name in SCENARIOS:
            a = _scenario_outputs(name, tmp_path / f"{name}-a")
            b = _scenario_outputs(name, tmp_path / f"{name}-b")
            assert a == b, name
