"""``ceorbit`` command line: run, classify, reduce, verify.

Exit codes: 0 success, 1 an invariant or suite check failed, 2 bad input
(unknown name, malformed file, failed validation), 3 classification Unknown.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import ce_core as cc
from .perm_group import (FINITELY_MANY, UNKNOWN, Budget, PreconditionError, classify_action,
                         format_word, get_group, load_catalog, parse_word)
from .reductions import esetn_to_eqce, rceg_to_esetn, rn_step, shift_embed
from .scenario import ScenarioError, Scenario, program_from_json, run_scenario
from .verify import SUITES, probe_programs, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNKNOWN = 0, 1, 2, 3
REDUCE_MAPS = ("esetn-to-eqce", "shift-embed", "rn-step", "rceg-to-esetn")


def _emit(obj):
    print(json.dumps(obj, sort_keys=True, indent=1))


def _err(msg) -> int:
    print(f"ceorbit: {msg}", file=sys.stderr)
    return EXIT_INPUT


def _catalog(args):
    if not getattr(args, "catalog", None):
        return None
    return load_catalog(args.catalog)


def cmd_run(args) -> int:
    try:
        catalog = _catalog(args)
        sc = Scenario.load(args.scenario)
        res = run_scenario(sc, args.stages, args.horizon, catalog)
    except (ScenarioError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        return _err(f"invalid scenario: {exc}")
    if args.out:
        trace, report = res.write(args.out)
        print(f"trace: {trace}\nreport: {report}")
    else:
        sys.stdout.write(res.report_json())
    inv = res.report["invariants"]
    if not inv["ok"]:
        f = inv["failures"][0]
        print(f"invariant {f['invariant']} failed at stage {f['stage']}: {f['detail']}",
              file=sys.stderr)
        return EXIT_FAIL
    if not res.report["restraints"]["ok"]:
        v = res.report["restraints"]["violations"][0]
        print(f"restraint violated at stage {v['stage']}: {json.dumps(v, sort_keys=True)}",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_classify(args) -> int:
    try:
        G = get_group(args.group, _catalog(args))
    except (KeyError, OSError, ValueError) as exc:
        return _err(f"unknown group: {exc}")
    budget = Budget() if args.budget is None else Budget(word_len=args.budget)
    ac = classify_action(G, budget)
    _emit({"group": args.group, **ac.to_json()})
    return EXIT_UNKNOWN if ac.tag == UNKNOWN else EXIT_OK


def _universe(args) -> cc.Registry:
    reg = cc.Registry()
    if args.universe:
        specs = json.loads(Path(args.universe).read_text())
        if not isinstance(specs, list):
            raise ScenarioError("universe file must hold a JSON list of programs")
        progs = [program_from_json(p) for p in specs]
    else:
        progs = probe_programs()
    for p in progs:
        reg.register(p)
    return reg


def cmd_reduce(args) -> int:
    try:
        reg = _universe(args)
        size = len(reg)
        if args.index < 0:
            raise ValueError("index must be a natural number")
        if args.map == "esetn-to-eqce":
            if args.n < 1:
                raise ValueError("n must be positive")
            out = esetn_to_eqce(reg, args.n, args.index)
        elif args.map == "shift-embed":
            _check_index(args.index, size)
            out = shift_embed(reg, args.index)
        elif args.map == "rn-step":
            _check_index(args.index, size)
            if args.n < 1:
                raise ValueError("n must be positive")
            out = rn_step(reg, args.n, args.index, fill=args.fill)
        else:
            _check_index(args.index, size)
            G = get_group(args.group, _catalog(args))
            if args.word:
                reps = [parse_word(w.split()) for w in args.word]
            else:
                ac = classify_action(G)
                if ac.tag != FINITELY_MANY:
                    raise ValueError(f"{args.group} has no finite action list ({ac.tag})")
                reps = [parse_word(w) for w in ac.witness["representatives"]]
            out = rceg_to_esetn(reg, G, reps, args.index)
        reg.advance(args.stages)
    except (ScenarioError, PreconditionError, KeyError, ValueError, OSError,
            json.JSONDecodeError) as exc:
        return _err(f"malformed input: {exc}")
    result = {"map": args.map, "source": args.index, "target": out, "stage": args.stages}
    if args.map != "rceg-to-esetn":
        result["window"] = sorted(x for x in reg.W(out) if x <= args.horizon)
    _emit(result)
    return EXIT_OK


def _check_index(i, size):
    if i >= size:
        raise ValueError(f"index {i} is not in the universe (size {size})")


def cmd_verify(args) -> int:
    try:
        catalog = _catalog(args)
        rep = run_suite(args.suite, catalog)
    except (KeyError, OSError, ValueError) as exc:
        return _err(str(exc))
    text = rep.to_json()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        for name, trace in sorted(rep.traces.items()):
            (out / f"{name}.jsonl").write_text(trace)
    sys.stdout.write(text)
    for c in rep.failed():
        print(f"FAIL {c['check']} (invariant {c['invariant']})", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ceorbit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run a construction from a scenario file")
    p.add_argument("scenario")
    p.add_argument("--stages", type=int, help="override the scenario's stage count")
    p.add_argument("--horizon", type=int, help="override the report window")
    p.add_argument("--out", help="directory for trace.jsonl and report.json")
    p.add_argument("--catalog", help="group catalog JSON replacing the built-in one")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("classify", help="classify a catalog group's action")
    p.add_argument("group")
    p.add_argument("--budget", type=int, help="word length for stabilizer searches")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("reduce", help="apply a reduction map to an index")
    p.add_argument("map", choices=REDUCE_MAPS)
    p.add_argument("index", type=int)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--universe", help="JSON list of programs (default: built-in probes)")
    p.add_argument("--stages", type=int, default=50)
    p.add_argument("--horizon", type=int, default=60, help="print the target set up to here")
    p.add_argument("--fill", action="store_true", help="rn-step: add the filler elements")
    p.add_argument("--group", default="s3-on-3", help="rceg-to-esetn: catalog group")
    p.add_argument("--word", action="append",
                   help="rceg-to-esetn: representative word, e.g. 'g0 g1^-1' (repeatable)")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--out", help="directory for report.json and suite traces")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
