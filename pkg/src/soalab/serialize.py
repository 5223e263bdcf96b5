"""JSON encoding of rings, modules, morphisms, classes, universes and traces.

Only exact integers are accepted.  Errors carry the JSON path of the
offending field so the CLI can report it.
"""
from __future__ import annotations

import json
from typing import Any, Optional

from .classes import MorphismClass, Universe
from .errors import SoaLabError
from .fpmod import FpModule, FpMorphism, Ring, canonical_form, morphism
from .soa import EngineConfig, FactorizationTrace, PushoutStep, Square, StageCone, StageRecord


class SchemaError(SoaLabError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class FloatLiteral(str):
    """A JSON number with a fraction or exponent, kept as text so it can be reported."""


def _int(x: Any, path: str) -> int:
    if isinstance(x, FloatLiteral):
        raise SchemaError(path, f"non-integer number {x}")
    # bool is an int subclass in Python but not a JSON integer
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(path, f"expected an integer, got {json.dumps(x)}")
    return x


def _int_matrix(x: Any, path: str) -> list[list[int]]:
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list of lists")
    out = []
    for i, row in enumerate(x):
        if not isinstance(row, list):
            raise SchemaError(f"{path}[{i}]", "expected a list")
        out.append([_int(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return out


def _obj(x: Any, path: str) -> dict:
    if not isinstance(x, dict):
        raise SchemaError(path, "expected an object")
    return x


def _field(d: dict, key: str, path: str):
    if key not in d:
        raise SchemaError(f"{path}.{key}", "missing")
    return d[key]


# -- rings, modules, morphisms ----------------------------------------------

def ring_to_json(R: Ring) -> dict:
    return {"kind": "Zmod", "n": R.n} if R.kind == "Zmod" else {"kind": "Z"}


def ring_from_json(x: Any, path: str = "ring") -> Ring:
    d = _obj(x, path)
    kind = _field(d, "kind", path)
    if kind == "Z":
        return Ring.Z()
    if kind == "Zmod":
        n = _int(_field(d, "n", path), f"{path}.n")
        if n < 2:
            raise SchemaError(f"{path}.n", "modulus must be at least 2")
        return Ring.Zmod(n)
    raise SchemaError(f"{path}.kind", f"unknown ring kind {kind!r}")


def module_to_json(M: FpModule, with_ring: bool = True) -> dict:
    cols = [M.relations.col(j) for j in range(M.relations.cols)]
    out = {"generators": M.generators, "relations": [list(c) for c in cols]}
    if with_ring:
        out["ring"] = ring_to_json(M.ring)
    return out


def module_from_json(x: Any, ring: Optional[Ring] = None, path: str = "module") -> FpModule:
    d = _obj(x, path)
    R = ring_from_json(d["ring"], f"{path}.ring") if "ring" in d else ring
    if R is None:
        raise SchemaError(f"{path}.ring", "missing")
    if ring is not None and R != ring:
        raise SchemaError(f"{path}.ring", f"ring {R} differs from {ring}")
    n = _int(_field(d, "generators", path), f"{path}.generators")
    if n < 0:
        raise SchemaError(f"{path}.generators", "must be non-negative")
    cols = _int_matrix(d.get("relations", []), f"{path}.relations")
    for j, c in enumerate(cols):
        if len(c) != n:
            raise SchemaError(f"{path}.relations[{j}]", f"expected {n} entries, got {len(c)}")
    return FpModule.from_columns(R, n, cols)


def morphism_to_json(f: FpMorphism, modules: Optional["ModuleTable"] = None) -> dict:
    if modules is None:
        dom, cod = module_to_json(f.dom), module_to_json(f.cod)
    else:
        dom, cod = modules.ref(f.dom), modules.ref(f.cod)
    return {"dom": dom, "cod": cod, "matrix": f.matrix.tolist()}


def morphism_from_json(x: Any, ring: Optional[Ring] = None, objects: Optional[dict] = None,
                       path: str = "morphism") -> FpMorphism:
    d = _obj(x, path)
    ends = []
    for key in ("dom", "cod"):
        v = _field(d, key, path)
        if isinstance(v, (str, int)) and not isinstance(v, bool) and objects is not None:
            if v not in objects:
                raise SchemaError(f"{path}.{key}", f"unknown object {v!r}")
            ends.append(objects[v])
        else:
            ends.append(module_from_json(v, ring, f"{path}.{key}"))
    dom, cod = ends
    rows = _int_matrix(_field(d, "matrix", path), f"{path}.matrix")
    if dom.generators == 0 and not rows:
        rows = [[] for _ in range(cod.generators)]
    if len(rows) != cod.generators or any(len(r) != dom.generators for r in rows):
        raise SchemaError(f"{path}.matrix", f"expected {cod.generators}x{dom.generators}")
    try:
        return morphism(dom, cod, rows)
    except ValueError as e:
        raise SchemaError(f"{path}.matrix", str(e)) from e


class ModuleTable:
    """Interns modules by presentation so traces list each one once."""

    def __init__(self):
        self.entries: list[FpModule] = []
        self._index: dict = {}

    def ref(self, M: FpModule) -> int:
        key = (M.generators, tuple(tuple(M.relations.col(j)) for j in range(M.relations.cols)))
        if key not in self._index:
            self._index[key] = len(self.entries)
            self.entries.append(M)
        return self._index[key]

    def to_json(self) -> list:
        return [module_to_json(M, with_ring=False) for M in self.entries]


# -- classes and universes --------------------------------------------------

def class_to_json(C: MorphismClass, modules: Optional[ModuleTable] = None) -> dict:
    return {"generators": [morphism_to_json(m, modules) for m in C.generators],
            "closure": list(C.closure), "name": C.name}


def class_from_json(x: Any, ring: Ring, objects: dict, morphisms: dict, path: str = "class") -> MorphismClass:
    d = _obj(x, path)
    gens = []
    for i, g in enumerate(d.get("generators", [])):
        p = f"{path}.generators[{i}]"
        if isinstance(g, str):
            if g not in morphisms:
                raise SchemaError(p, f"unknown morphism {g!r}")
            gens.append(morphisms[g])
        else:
            gens.append(morphism_from_json(g, ring, objects, p))
    closure = d.get("closure", [])
    if not isinstance(closure, list) or not all(isinstance(c, str) for c in closure):
        raise SchemaError(f"{path}.closure", "expected a list of strings")
    try:
        return MorphismClass(tuple(gens), tuple(closure), d.get("name", ""))
    except ValueError as e:
        raise SchemaError(f"{path}.closure", str(e)) from e


def universe_to_json(U: Universe) -> dict:
    if U.max_order is not None:
        return {"ring": ring_to_json(U.ring), "max_order": U.max_order}
    return {"ring": ring_to_json(U.ring), "objects": [module_to_json(M, False) for M in U.objects]}


def universe_from_json(x: Any, ring: Ring, objects: dict, path: str = "universe") -> Universe:
    d = _obj(x, path)
    R = ring_from_json(d["ring"], f"{path}.ring") if "ring" in d else ring
    if R != ring:
        raise SchemaError(f"{path}.ring", f"ring {R} differs from {ring}")
    if "max_order" in d:
        return Universe.of(R, _int(d["max_order"], f"{path}.max_order"))
    objs = []
    for i, o in enumerate(_field(d, "objects", path)):
        p = f"{path}.objects[{i}]"
        objs.append(objects[o] if isinstance(o, str) and o in objects else module_from_json(o, R, p))
    return Universe(R, objs)


# -- traces -------------------------------------------------------------------

def config_to_json(cfg: EngineConfig, modules: Optional[ModuleTable] = None) -> dict:
    return {"generators": class_to_json(cfg.generators, modules), "variant": cfg.variant,
            "max_stage": cfg.max_stage, "square_bound": cfg.square_bound,
            "stop_rule": cfg.stop_rule, "cone": cfg.cone}


def trace_to_json(trace: FactorizationTrace) -> dict:
    T = ModuleTable()
    mj = lambda f: morphism_to_json(f, T)

    def square(q: Square) -> dict:
        return {"generator": q.gen_index, "s": mj(q.s), "t": mj(q.t), "solved": q.solved}

    stages = []
    for st in trace.stages:
        stages.append({
            "index": st.index,
            "A": T.ref(st.A),
            "f": mj(st.f),
            "cone": {"legs": [square(q) for q in st.cone.legs],
                     "squares": [square(q) for q in st.cone.squares],
                     "redundant": [square(q) for q in st.cone.redundant],
                     "merged": [list(p) for p in st.cone.dedup_record],
                     "exhaustive": st.cone.exhaustive},
            "steps": [{"square": square(s.square), "attach": mj(s.attach), "reach": mj(s.reach),
                       "p": mj(s.p), "leg": mj(s.leg), "discarded": s.discarded} for s in st.steps],
            "to_normal": mj(st.to_normal), "from_normal": mj(st.from_normal),
            "g": mj(st.g), "f_next": mj(st.f_next), "legs": [mj(l) for l in st.legs],
            "canonical_form": list(canonical_form(st.A_next)[1]),
        })
    body = {"f": mj(trace.f), "config": config_to_json(trace.config, T), "reason": trace.reason,
            "stages": stages, "f_star": mj(trace.f_star), "f_lambda": mj(trace.f_lambda),
            "discard_log": [list(p) for p in trace.discard_log]}
    return {"ring": ring_to_json(trace.f.dom.ring), "modules": T.to_json(), "trace": body}


def trace_from_json(x: Any) -> FactorizationTrace:
    d = _obj(x, "$")
    R = ring_from_json(_field(d, "ring", "$"), "$.ring")
    mods = {i: module_from_json(m, R, f"$.modules[{i}]") for i, m in enumerate(_field(d, "modules", "$"))}
    body = _obj(_field(d, "trace", "$"), "$.trace")
    mor = lambda v, p: morphism_from_json(v, R, mods, p)

    c = body["config"]
    gens = tuple(mor(g, f"$.trace.config.generators[{i}]") for i, g in enumerate(c["generators"]["generators"]))
    cfg = EngineConfig(MorphismClass(gens, tuple(c["generators"]["closure"]), c["generators"].get("name", "")),
                       c["variant"], c["max_stage"], c["square_bound"], c["stop_rule"], c["cone"])

    def square(q, p) -> Square:
        gi = _int(q["generator"], f"{p}.generator")
        return Square(gi, gens[gi], mor(q["s"], f"{p}.s"), mor(q["t"], f"{p}.t"), bool(q["solved"]))

    stages = []
    for a, st in enumerate(body["stages"]):
        p = f"$.trace.stages[{a}]"
        cj = st["cone"]
        sq = lambda key: [square(q, f"{p}.cone.{key}[{i}]") for i, q in enumerate(cj[key])]
        cone = StageCone(st["index"], sq("squares"), sq("legs"), cj["exhaustive"],
                         [tuple(v) for v in cj["merged"]], sq("redundant"))
        steps = []
        for i, s in enumerate(st["steps"]):
            q = f"{p}.steps[{i}]"
            steps.append(PushoutStep(square(s["square"], f"{q}.square"), mor(s["attach"], f"{q}.attach"),
                                     mor(s["reach"], f"{q}.reach"), mor(s["p"], f"{q}.p"),
                                     mor(s["leg"], f"{q}.leg"), bool(s["discarded"])))
        stages.append(StageRecord(st["index"], mods[st["A"]], mor(st["f"], f"{p}.f"), cone, steps,
                                  mor(st["to_normal"], f"{p}.to_normal"),
                                  mor(st["from_normal"], f"{p}.from_normal"),
                                  mor(st["g"], f"{p}.g"), mor(st["f_next"], f"{p}.f_next"),
                                  [mor(l, f"{p}.legs[{i}]") for i, l in enumerate(st["legs"])]))
    return FactorizationTrace(mor(body["f"], "$.trace.f"), cfg, stages, body["reason"])


def dumps(x: Any) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(x, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


def loads(text: str) -> Any:
    """Parse JSON; floats survive as FloatLiteral and are rejected where an integer is read."""
    return json.loads(text, parse_float=FloatLiteral, parse_constant=FloatLiteral)
