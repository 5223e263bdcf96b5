"""Command-line driver: read a JSON problem file, run one task, emit JSON or markdown.

Exit codes: 0 pass, 1 check failure, 2 input error, 3 infinite enumeration,
4 truncation.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .classes import (MorphismClass, Universe, box_left, box_right, class_membership, downarrow,
                      fp_injectivity_test, perp_objects, triangle_objects, uparrow)
from .errors import InfiniteHomSet, SoaLabError, Truncated
from .fpmod import (FpModule, FpMorphism, Ring, equals, hom_count, is_iso, is_mono,
                    random_morphism)
from .lifting import ExtensionProblem, oracle_check, random_square
from .serialize import (SchemaError, class_from_json, dumps, loads, module_from_json, morphism_from_json,
                        morphism_to_json, ring_from_json, trace_from_json, trace_to_json, universe_from_json,
                        universe_to_json)
from .soa import EngineConfig, orthogonal_reflect, run_factorization, weak_reflect
from .wfscheck import (ISO, MOR, check_factorization_system, check_wfs_axioms, class_side,
                       effective_unions_sweep, injectivity_decomposition_check, orthogonal_factorizer,
                       right_polar, soa_factorizer, transferability_check, trivial_left_factorizer,
                       trivial_right_factorizer)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INFINITE, EXIT_TRUNCATED = 0, 1, 2, 3, 4
ORACLE_HOM_CAP = 4096


class InputError(SoaLabError):
    pass


@dataclass
class Problem:
    ring: Ring
    objects: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)
    universe: Optional[dict] = None
    task: dict = field(default_factory=dict)
    engine: dict = field(default_factory=dict)


def parse_problem(doc) -> Problem:
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected an object")
    if "ring" not in doc:
        raise SchemaError("$.ring", "missing")
    R = ring_from_json(doc["ring"], "$.ring")
    P = Problem(R, universe=doc.get("universe"), task=dict(doc.get("task", {})), engine=dict(doc.get("engine", {})))
    for name, m in doc.get("objects", {}).items():
        P.objects[name] = module_from_json(m, R, f"$.objects.{name}")
    for name, f in doc.get("morphisms", {}).items():
        P.morphisms[name] = morphism_from_json(f, R, P.objects, f"$.morphisms.{name}")
    for name, c in doc.get("classes", {}).items():
        C = class_from_json(c, R, P.objects, P.morphisms, f"$.classes.{name}")
        P.classes[name] = MorphismClass(C.generators, C.closure, C.name or name)
    return P


# -- lookups -----------------------------------------------------------------

def _lookup(table: dict, key, path: str, what: str):
    if key not in table:
        raise SchemaError(path, f"unknown {what} {key!r}")
    return table[key]


def _class(P: Problem, key: Optional[str], path: str) -> MorphismClass:
    if key is None:
        return MorphismClass((), name="empty")
    return _lookup(P.classes, key, path, "class")


def _universe(P: Problem, args) -> Universe:
    if args.universe_max_order is not None:
        return Universe.of(P.ring, args.universe_max_order)
    if P.universe is not None:
        return universe_from_json(P.universe, P.ring, P.objects, "$.universe")
    return Universe.of(P.ring, 8)


def _config(P: Problem, gens: MorphismClass, args) -> EngineConfig:
    e = P.engine
    pick = lambda flag, key, default: flag if flag is not None else e.get(key, default)
    stop = pick(args.stop, "stop_rule", "iso")
    stop = {"box": "box_certified", "max": "max_stage"}.get(stop, stop)
    try:
        return EngineConfig(gens, pick(args.variant, "variant", "strict"), pick(args.max_stages, "max_stage", 8),
                            pick(args.square_bound, "square_bound", 64), stop, e.get("cone", "basis"))
    except ValueError as err:
        raise SchemaError("$.engine", str(err)) from err


def _mor(f: FpMorphism) -> str:
    return f"{f.dom.describe()} -> {f.cod.describe()} {f.matrix.tolist()}"


def _yn(b) -> str:
    return "yes" if b else "no"


# -- commands -----------------------------------------------------------------

def cmd_factorize(P: Problem, args):
    f = _lookup(P.morphisms, P.task.get("morphism"), "$.task.morphism", "morphism")
    C = _class(P, P.task.get("class"), "$.task.class")
    cfg = _config(P, C, args)
    code, trace = EXIT_OK, None
    try:
        trace = run_factorization(f, cfg)
    except Truncated as t:
        trace, code = t.trace, EXIT_TRUNCATED
    doc = trace_to_json(trace)
    if args.verify:
        doc["verified"] = trace_from_json(loads(dumps(doc))).verify()
        if not doc["verified"]:
            code = EXIT_FAIL
    n = len(trace.stages)
    lines = ["## Factorization", "", f"- f: {_mor(f)}", f"- generators: {len(cfg.gens)} ({C.name})",
             f"- variant: {cfg.variant}, stop rule: {cfg.stop_rule}, max stages: {cfg.max_stage}"]
    head = f"- {n} stages"
    if n == 0 and equals(trace.f_lambda, f):
        head += ", f_lambda = f"
    lines += [head, f"- termination: {trace.reason}"]
    for st in trace.stages:
        lines.append(f"- stage {st.index}: {len(st.steps)} cells, A = {st.A_next.describe()}, "
                     f"discarded {len(st.discard_log)}")
    lines += [f"- f_star: {_mor(trace.f_star)} (mono: {_yn(is_mono(trace.f_star))})",
              f"- f_lambda: {_mor(trace.f_lambda)} (iso: {_yn(is_iso(trace.f_lambda))})"]
    if f.cod.order == 1 and cfg.gens and all(is_mono(m) for m in cfg.gens):
        from .lifting import is_injective_wrt
        inj = all(is_injective_wrt(trace.f_star.cod, m) for m in cfg.gens)
        doc["reflection"] = {"unit_mono": is_mono(trace.f_star), "injective_wrt_generators": inj}
        lines.append(f"- weak reflection unit mono: {_yn(is_mono(trace.f_star))}; "
                     f"target injective against every generator: {_yn(inj)}")
    if "verified" in doc:
        lines.append(f"- certificates replayed: {_yn(doc['verified'])}")
    return doc, "\n".join(lines), code


def cmd_reflect(P: Problem, args):
    A = _lookup(P.objects, P.task.get("object"), "$.task.object", "object")
    C = _class(P, P.task.get("class"), "$.task.class")
    mode = P.task.get("mode", "weak")
    lines = ["## Reflection", "", f"- object: {A.describe()}", f"- mode: {mode}"]
    if mode == "weak":
        res = weak_reflect(A, _config(P, C, args))
        doc = {"mode": mode, "unit": morphism_to_json(res.unit), "target": res.A_star.describe(),
               "unit_mono": res.unit_mono, "in_class": res.in_class}
        lines += [f"- target: {res.A_star.describe()}", f"- unit: {_mor(res.unit)}",
                  f"- unit mono: {_yn(res.unit_mono)}", f"- target injective against generators: {_yn(res.in_class)}"]
        if P.universe is not None or args.universe_max_order is not None:
            ok = fp_injectivity_test(res.A_star, _universe(P, args))
            doc["fp_injective_in_universe"] = ok
            lines.append(f"- injective against every universe mono: {_yn(ok)}")
    elif mode == "orthogonal":
        unit, target = orthogonal_reflect(A, C.generators, _config(P, C, args).max_stage)
        doc = {"mode": mode, "unit": morphism_to_json(unit), "target": target.describe()}
        lines += [f"- target: {target.describe()}", f"- unit: {_mor(unit)}"]
    else:
        raise SchemaError("$.task.mode", "expected 'weak' or 'orthogonal'")
    return doc, "\n".join(lines), EXIT_OK


_OBJECT_OPS = {"triangle": triangle_objects, "perp": perp_objects}
_MORPHISM_OPS = {"box_right": box_right, "box_left": lambda N, c: box_left(c, N),
                 "downarrow": downarrow, "uparrow": lambda N, c: uparrow(c, N)}


def cmd_classify(P: Problem, args):
    U = _universe(P, args)
    N = _class(P, P.task.get("class"), "$.task.class")
    op = P.task.get("operator", "triangle")
    lines = ["## Classification", "", f"- universe: {U.describe()}", f"- operator: {op} of {N.name}"]
    if op in _OBJECT_OPS:
        members = [M.describe() for M in _OBJECT_OPS[op](N, U)]
        lines += [f"- {len(members)} objects"] + [f"  - {m}" for m in members]
        doc = {"operator": op, "objects": members}
    elif op in _MORPHISM_OPS:
        members = _MORPHISM_OPS[op](N, U.arrow_representatives)
        lines += [f"- {len(members)} morphisms (up to isomorphism of arrows)"] + [f"  - {_mor(m)}" for m in members]
        doc = {"operator": op, "morphisms": [morphism_to_json(m) for m in members]}
    elif op == "member":
        f = _lookup(P.morphisms, P.task.get("morphism"), "$.task.morphism", "morphism")
        m = class_membership(f, N, U)
        lines.append(f"- {_mor(f)}: {m.status}" + (f" ({m.note})" if m.note else ""))
        doc = {"operator": op, "status": m.status, "note": m.note}
    else:
        raise SchemaError("$.task.operator", f"unknown operator {op!r}")
    doc["universe"] = universe_to_json(U)
    return doc, "\n".join(lines), EXIT_OK


def _side(P: Problem, side_name, U: Universe, path: str):
    if side_name == "Mor":
        return MOR
    if side_name == "Iso":
        return ISO
    if not isinstance(side_name, str):
        raise SchemaError(path, "expected a string")
    if ":" in side_name:
        op, name = side_name.split(":", 1)
        C = _lookup(P.classes, name, path, "class")
        if op in ("box", "downarrow"):
            return right_polar(C.generators, op == "downarrow", f"{name}^{'↓' if op == 'downarrow' else '□'}")
        raise SchemaError(path, f"unknown side operator {op!r}")
    return class_side(_lookup(P.classes, side_name, path, "class"), U)


def _factorizer(P: Problem, args, name: str):
    if name == "trivial_left":
        return trivial_left_factorizer
    if name == "trivial_right":
        return trivial_right_factorizer
    C = _class(P, P.task.get("generators"), "$.task.generators")
    if name == "soa":
        return soa_factorizer(_config(P, C, args))
    if name == "orthogonal":
        return orthogonal_factorizer(C.generators, _config(P, C, args).max_stage)
    raise SchemaError("$.task.factorizer", f"unknown factorizer {name!r}")


def cmd_check(P: Problem, args):
    U = _universe(P, args)
    suite = P.task.get("suite", "wfs")
    if suite in ("wfs", "fs"):
        E = _side(P, P.task.get("left", "Mor"), U, "$.task.left")
        M = _side(P, P.task.get("right", "Iso"), U, "$.task.right")
        fac = _factorizer(P, args, P.task.get("factorizer", "trivial_left"))
        run = check_wfs_axioms if suite == "wfs" else check_factorization_system
        rep = run(E, M, U, fac)
        doc, md = rep.to_dict(), rep.to_markdown()
    elif suite in ("effective_unions", "effective_unions_pure", "transferability", "injectivity_decomposition"):
        if suite == "transferability":
            rep = transferability_check(U)
        elif suite == "injectivity_decomposition":
            rep = injectivity_decomposition_check(U)
        else:
            rep = effective_unions_sweep(U, pure=suite.endswith("pure"))
        doc = rep.to_dict()
        md = "\n".join([f"## {rep.name}", "", f"- passed: {_yn(rep.passed)}", f"- instances checked: {rep.checked}"]
                       + [f"- {k}: {v}" for k, v in sorted(rep.notes.items())]
                       + [f"- failure: {x!r}" for x in rep.failures])
    else:
        raise SchemaError("$.task.suite", f"unknown suite {suite!r}")
    return doc, md, EXIT_OK if rep.passed else EXIT_FAIL


def oracle_batch(U: Universe, count: int, rng: random.Random, cap: int = ORACLE_HOM_CAP) -> dict:
    """Random extension and lifting problems over U, each checked against brute force.

    Problems whose brute-force hom-set would exceed ``cap`` maps are resampled.
    """
    objs = list(U.objects)
    stats = {"extension": 0, "lifting": 0, "discrepancies": [], "resampled": 0}
    while stats["extension"] + stats["lifting"] < count:
        kind = "extension" if (stats["extension"] + stats["lifting"]) % 2 == 0 else "lifting"
        if kind == "extension":
            A, B, K = (rng.choice(objs) for _ in range(3))
            if hom_count(B, K) > cap:
                stats["resampled"] += 1
                continue
            prob = ExtensionProblem(random_morphism(A, B, rng), random_morphism(A, K, rng))
        else:
            A, B, C, D = (rng.choice(objs) for _ in range(4))
            if hom_count(B, C) > cap:
                stats["resampled"] += 1
                continue
            p, i = random_morphism(A, B, rng), random_morphism(C, D, rng)
            prob = random_square(p, i, rng)
        rep = oracle_check(prob)
        stats[kind] += 1
        if not rep.agree:
            stats["discrepancies"].append({"kind": kind, "note": rep.note})
    return stats


def cmd_oracle(P: Problem, args):
    U = _universe(P, args)
    count = P.task.get("count", 500)
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise SchemaError("$.task.count", "expected a positive integer")
    stats = oracle_batch(U, count, random.Random(args.seed))
    nd = len(stats["discrepancies"])
    doc = {"universe": universe_to_json(U), **stats, "hom_cap": ORACLE_HOM_CAP}
    md = "\n".join(["## Oracle batch", "", f"- universe: {U.describe()}",
                    f"- extension problems: {stats['extension']}", f"- lifting problems: {stats['lifting']}",
                    f"- {nd} discrepancies"])
    return doc, md, EXIT_OK if nd == 0 else EXIT_FAIL


COMMANDS = {"factorize": cmd_factorize, "reflect": cmd_reflect, "classify": cmd_classify,
            "check": cmd_check, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem file (JSON), or - for stdin")
    common.add_argument("--variant", choices=["strict", "loose", "discard"])
    common.add_argument("--max-stages", type=int, dest="max_stages")
    common.add_argument("--stop", choices=["iso", "box", "max", "box_certified", "max_stage"])
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--universe-max-order", type=int, dest="universe_max_order")
    common.add_argument("--square-bound", type=int, dest="square_bound")
    common.add_argument("--format", choices=["json", "md"], default="md")
    common.add_argument("--out", help="also write the JSON result to this file")
    common.add_argument("--verify", action="store_true", help="reload the emitted trace and replay its certificates")
    ap = argparse.ArgumentParser(prog="soalab", description="Small object argument lab on finite modules.")
    ap.add_argument("--version", action="version", version=f"soalab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        text = _read(args.problem)
        try:
            doc = loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
        P = parse_problem(doc)
        kind = P.task.get("kind", args.command)
        if kind != args.command:
            raise SchemaError("$.task.kind", f"task is {kind!r} but the command is {args.command!r}")
        result, md, code = COMMANDS[args.command](P, args)
    except InfiniteHomSet as e:
        what = e.obj.describe() if isinstance(e.obj, FpModule) else "an object"
        print(f"infinite enumeration: {e} (object: {what})", file=stderr)
        return EXIT_INFINITE
    except (InputError, OSError, ValueError) as e:
        print(f"input error: {e}", file=stderr)
        return EXIT_INPUT
    except SoaLabError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_FAIL
    result = {"command": args.command, "seed": args.seed, "exit_code": code, "result": result}
    text = dumps(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.format == "json":
        stdout.write(text)
    else:
        stdout.write(md + f"\n\n- seed: {args.seed}\n- exit code: {code}\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
