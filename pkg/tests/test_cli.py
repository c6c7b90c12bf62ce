import json
from pathlib import Path

import pytest

from ceorbit.cli import main
from ceorbit.coding import pair

SCEN = Path(__file__).resolve().parent.parent / "scenarios"


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


# -- run ------------------------------------------------------------------------

def test_run_empty_universe(tmp_path, capsys):
    assert main(["run", str(SCEN / "empty-universe.json"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "trace.jsonl").read_text() == ""
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["ok"] is True


def test_run_least_reduction_demo(tmp_path, capsys):
    assert main(["run", str(SCEN / "least-reduction.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    statuses = {r["status"] for r in report["requirements"]}
    assert statuses == {"satisfied-at-horizon"}


def test_run_fault_injection_names_the_stage(tmp_path, capsys):
    assert main(["run", str(SCEN / "fault-injection.json"), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "failed at stage 50" in err


def test_run_bad_scenarios_exit_2(tmp_path, capsys):
    assert main(["run", str(SCEN / "bad-construction.json")]) == 2
    missing = tmp_path / "nope.json"
    assert main(["run", str(missing)]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["run", str(broken)]) == 2


def test_run_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", str(SCEN / "inf-orbit.json"), "--stages", "400",
                     "--out", str(out)]) == 0
    for name in ("trace.jsonl", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


# -- classify -------------------------------------------------------------------

@pytest.mark.parametrize("group,tag", [("s3-on-3", "FinitelyManyActions"),
                                       ("z-shift", "InfiniteOrbit"),
                                       ("block-swaps", "NonIsolated")])
def test_classify_catalog(group, tag, capsys):
    assert main(["classify", group]) == 0
    assert _json_out(capsys)["tag"] == tag


def test_classify_unknown_name_exits_2(capsys):
    assert main(["classify", "nope"]) == 2


def test_classify_unknown_class_exits_3(tmp_path, capsys):
    cat = tmp_path / "cat.json"
    cat.write_text(json.dumps({"name": "opaque", "generators": [{"cycles": [[0, 1]]}],
                               "identity_oracle": None, "orbit_oracle": "finite-support"}))
    assert main(["classify", "opaque", "--catalog", str(cat)]) == 3
    assert _json_out(capsys)["tag"] == "Unknown"


# -- reduce ---------------------------------------------------------------------

def test_reduce_shift_embed_of_empty(capsys):
    assert main(["reduce", "shift-embed", "0"]) == 0
    out = _json_out(capsys)
    assert out["window"] == [] and out["target"] > 0


def test_reduce_rn_step_residue_law(capsys):
    # probe 10 is the settled set {0, ..., 9}
    assert main(["reduce", "rn-step", "10", "--n", "2"]) == 0
    assert _json_out(capsys)["window"] == sorted(3 * (z // 2) + z % 2 for z in range(10))


def test_reduce_esetn_to_eqce_n1(capsys):
    # the tuple code of (0,) is 0, the empty probe: codes (k, 0) for small levels
    assert main(["reduce", "esetn-to-eqce", "0", "--n", "1", "--horizon", "21"]) == 0
    assert _json_out(capsys)["window"] == [pair(k, 0) for k in range(7)]


def test_reduce_is_deterministic(capsys):
    main(["reduce", "rceg-to-esetn", "2"])
    first = capsys.readouterr().out
    main(["reduce", "rceg-to-esetn", "2"])
    assert capsys.readouterr().out == first


@pytest.mark.parametrize("argv", [["reduce", "rn-step", "99"],
                                  ["reduce", "rn-step", "1", "--n", "0"],
                                  ["reduce", "rceg-to-esetn", "1", "--group", "z-shift"],
                                  ["reduce", "shift-embed", "-1"]])
def test_reduce_malformed_input_exits_2(argv, capsys):
    assert main(argv) == 2


def test_reduce_non_integer_index_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["reduce", "rn-step", "x"])
    assert exc.value.code == 2


# -- verify ---------------------------------------------------------------------

def test_verify_image_law_suite_passes(tmp_path, capsys):
    assert main(["verify", "lemma-2-4", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["ok"] and report["checks"]


def test_verify_corrupt_catalog_fails_with_named_invariant(capsys):
    assert main(["verify", "tame-subgroup", "--catalog",
                 str(SCEN / "corrupt-catalog.json")]) == 1
    assert "invariant declared-inverse" in capsys.readouterr().err


def test_verify_unknown_suite_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nope"])
    assert exc.value.code == 2
