"""The small object argument on finite modules: strict, loose and discard runs.

A stage attaches generators along the commutative squares into the current
residual map ``f_alpha`` that are not yet solved.  Solved squares form a
subgroup of the square group, so attaching one cell per generator of the
square group (modulo solved squares) already solves every square of the
stage.  When the square group is small, ``cone="all"`` attaches every
unsolved square instead.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .classes import MorphismClass, _comma_iso
from .errors import InfiniteHomSet, NonCommutingSquare, SoaLabError, Truncated, VariantMismatch
from .fpmod import (Equation, FpModule, FpMorphism, PushoutResult, Term, chain_colimit, compose,
                    equals, finite_colimit, identity, is_iso, is_mono, is_pushout_square,
                    normalize, pushout, solve_maps, zero_module, zero_morphism)
from .lifting import (ExtensionProblem, LiftingSquare, diagonals, extensions, is_injective_wrt,
                      is_orthogonal_to, lifts, lifts_uniquely)

VARIANTS = ("strict", "loose", "discard")
STOP_RULES = ("iso", "box_certified", "max_stage")


@dataclass(frozen=True)
class EngineConfig:
    generators: MorphismClass = MorphismClass(())
    variant: str = "strict"
    max_stage: int = 8
    square_bound: int = 64
    stop_rule: str = "iso"
    cone: str = "basis"            # "basis" | "all"

    def __post_init__(self):
        if not isinstance(self.generators, MorphismClass):
            object.__setattr__(self, "generators", MorphismClass(tuple(self.generators)))
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}")
        if self.max_stage < 1:
            raise ValueError("max_stage must be at least 1")
        if self.cone not in ("basis", "all"):
            raise ValueError("cone must be 'basis' or 'all'")
        for m in self.generators:
            if not (m.dom.is_finite and m.cod.is_finite):
                raise ValueError("generators must be maps between finite modules")

    @property
    def gens(self) -> tuple[FpMorphism, ...]:
        return self.generators.generators


# ---------------------------------------------------------------------------
# Cones
# ---------------------------------------------------------------------------

@dataclass
class Square:
    gen_index: int
    generator: FpMorphism
    s: FpMorphism                   # dom m -> A_alpha
    t: FpMorphism                   # cod m -> B
    solved: bool

    @property
    def key(self) -> tuple:
        return (self.gen_index, self.s.cmat, self.t.cmat)


@dataclass
class StageCone:
    stage: int
    squares: list[Square]           # every square when the group is small, else a generating set
    legs: list[Square]              # squares that get a cell, canonical order
    exhaustive: bool
    dedup_record: list[tuple[int, int]] = field(default_factory=list)   # (dropped, kept) leg positions
    redundant: list[Square] = field(default_factory=list)   # solved by earlier cells of the stage

    @property
    def empty(self) -> bool:
        return not self.legs


def square_group(m: FpMorphism, f: FpMorphism):
    """Solution set of t∘m = f∘s in the unknowns (s, t)."""
    return solve_maps([(m.dom, f.dom), (m.cod, f.cod)],
                      [Equation(m.dom, f.cod, [Term(1, pre=m), Term(0, post=f, coef=-1)])])


def _solved(m: FpMorphism, f: FpMorphism, s: FpMorphism, t: FpMorphism, variant: str) -> bool:
    if variant == "loose":
        return not extensions(ExtensionProblem(m, s)).empty
    return not diagonals(LiftingSquare(m, f, s, t)).empty


def _pushed_leg(m: FpMorphism, s: FpMorphism) -> FpMorphism:
    return pushout(m, s).leg_right


def stage_cone(f_alpha: FpMorphism, cfg: EngineConfig, stage: int = 0) -> StageCone:
    """Squares from each generator into f_alpha and the legs that get a cell.

    Candidate squares are a generating set of each square group (every
    square when ``cone="all"`` and the group has at most ``square_bound``
    elements).  Walking the candidates in canonical order, a candidate
    becomes a leg only if the cells chosen before it do not already solve
    it.  The resulting cone is fixed before any pushout of the stage is
    taken, so the stage colimit does not depend on processing order.
    """
    squares, cands, exhaustive = [], [], cfg.cone == "all"
    for gi, m in enumerate(cfg.gens):
        sol = square_group(m, f_alpha)
        listed = None
        if cfg.cone == "all":
            try:
                listed = sol.enumerate(limit=cfg.square_bound)
            except InfiniteHomSet:
                exhaustive = False
        pairs = listed if listed is not None else sol.kernel()
        mine = [Square(gi, m, s, t, _solved(m, f_alpha, s, t, cfg.variant)) for s, t in pairs]
        squares.extend(mine)
        cands.extend(q for q in mine if not q.solved)
    cands.sort(key=lambda q: q.key)
    cone = StageCone(stage, squares, cands, exhaustive)
    if cfg.variant == "loose":
        _merge_loose(cone)
    _greedy_select(cone, f_alpha, cfg.variant)
    return cone


def _greedy_select(cone: StageCone, f_alpha: FpMorphism, variant: str) -> None:
    reach, fcur = identity(f_alpha.dom), f_alpha
    chosen = []
    for q in cone.legs:
        x = compose(reach, q.s)
        if chosen and _solved(q.generator, fcur, x, q.t, variant):
            cone.redundant.append(q)
            continue
        po = pushout(q.generator, x)
        fcur = po.mediator(q.t, fcur)
        reach = compose(po.leg_right, reach)
        chosen.append(q)
    cone.legs = chosen


COMMA_SEARCH_LIMIT = 24


def _merge_loose(cone: StageCone) -> None:
    """Keep one leg per comma-isomorphism class of pushed-out maps A_alpha -> X.

    Legs with the same generator and attaching map push out to the same
    map and merge at once; the isomorphism search runs only on small cones.
    """
    kept: list[tuple[int, Square, Optional[FpMorphism]]] = []
    seen_s = {}
    search = len(cone.legs) <= COMMA_SEARCH_LIMIT
    new_legs = []
    for i, q in enumerate(cone.legs):
        key = (q.gen_index, q.s.cmat)
        if key in seen_s:
            cone.dedup_record.append((i, seen_s[key]))
            continue
        match = None
        if search:
            h = _pushed_leg(q.generator, q.s)
            for j, _, h2 in kept:
                if h2.cod.order == h.cod.order and _comma_iso(h, h2) is not None:
                    match = j
                    break
        else:
            h = None
        if match is None:
            seen_s[key] = i
            kept.append((i, q, h))
            new_legs.append(q)
        else:
            cone.dedup_record.append((i, match))
    cone.legs = new_legs


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

@dataclass
class PushoutStep:
    square: Square
    attach: FpMorphism               # dom m -> X^gamma, i.e. reach∘s
    reach: FpMorphism                # A_alpha -> X^gamma (h^gamma)
    p: FpMorphism                    # X^gamma -> X^(gamma+1)
    leg: FpMorphism                  # cod m -> X^(gamma+1)
    discarded: bool = False
    po: Optional[PushoutResult] = None

    def verify(self) -> bool:
        if self.discarded:
            return is_iso(self.p)
        return is_pushout_square(self.square.generator, self.attach, self.leg, self.p)


@dataclass
class StageRecord:
    index: int
    A: FpModule
    f: FpMorphism                    # f_alpha
    cone: StageCone
    steps: list[PushoutStep]
    to_normal: FpMorphism            # X^last -> A_(alpha+)
    from_normal: FpMorphism
    g: FpMorphism                    # A_alpha -> A_(alpha+)
    f_next: FpMorphism
    legs: list[FpMorphism]           # cod m -> A_(alpha+), one per attached square

    @property
    def A_next(self) -> FpModule:
        return self.g.cod

    @property
    def discard_log(self) -> list[int]:
        return [i for i, s in enumerate(self.steps) if s.discarded]


def advance_stage(A: FpModule, f_alpha: FpMorphism, cone: StageCone, variant: str = "strict",
                  order: Optional[Sequence[int]] = None,
                  pushout_fn: Callable[[FpMorphism, FpMorphism], PushoutResult] = pushout) -> StageRecord:
    """Attach one cell per leg by successive pushouts, then induce f_(alpha+).

    ``order`` permutes the legs (default: canonical order); ``pushout_fn``
    is a test hook.
    """
    if f_alpha.dom != A:
        raise ValueError("f_alpha must start at A")
    legs = list(cone.legs)
    if order is not None:
        legs = [legs[i] for i in order]
    X, reach, fcur = A, identity(A), f_alpha
    steps: list[PushoutStep] = []
    attached: list[FpMorphism] = []
    for q in legs:
        x = compose(reach, q.s)
        po = pushout_fn(q.generator, x)
        p = po.leg_right
        if variant == "discard" and not is_mono(p):
            steps.append(PushoutStep(q, x, reach, identity(X), zero_morphism(q.generator.cod, X), True, po))
            continue
        fnext = po.mediator(q.t, fcur)
        attached = [compose(p, l) for l in attached] + [po.leg_left]
        steps.append(PushoutStep(q, x, reach, p, po.leg_left, False, po))
        X, reach, fcur = po.apex, compose(p, reach), fnext
    fwd, back = normalize(X)
    return StageRecord(cone.stage, A, f_alpha, cone, steps, fwd, back, compose(fwd, reach),
                       compose(fcur, back), [compose(fwd, l) for l in attached])


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

@dataclass
class FactorizationTrace:
    f: FpMorphism
    config: EngineConfig
    stages: list[StageRecord]
    reason: str
    final_cone: Optional[StageCone] = None
    limit: object = None             # chain colimit, filled in on truncation

    @property
    def objects(self) -> list[FpModule]:
        return [self.f.dom] + [s.A_next for s in self.stages]

    @property
    def g(self) -> list[FpMorphism]:
        return [s.g for s in self.stages]

    @property
    def residuals(self) -> list[FpMorphism]:
        return [self.f] + [s.f_next for s in self.stages]

    @property
    def k(self) -> list[FpMorphism]:
        """k_alpha: A_alpha -> A_final."""
        out = [identity(self.objects[-1])]
        for g in reversed(self.g):
            out.append(compose(out[-1], g))
        return list(reversed(out))

    @property
    def f_star(self) -> FpMorphism:
        return self.k[0]

    @property
    def f_lambda(self) -> FpMorphism:
        return self.residuals[-1]

    @property
    def discard_log(self) -> list[tuple[int, int]]:
        return [(s.index, i) for s in self.stages for i in s.discard_log]

    @property
    def certified(self) -> bool:
        return self.reason in ("iso", "box_certified", "max_stage")

    def verify(self) -> bool:
        """Replay every certificate recorded in the trace."""
        if not equals(compose(self.f_lambda, self.f_star), self.f):
            return False
        for st in self.stages:
            comp = identity(st.A)
            for step in st.steps:
                if not step.verify():
                    return False
                comp = compose(step.p, comp)
            if not equals(compose(st.to_normal, comp), st.g):
                return False
            if not (is_iso(st.to_normal) and equals(compose(st.f_next, st.g), st.f)):
                return False
        return True


def _certified(f_alpha: FpMorphism, cfg: EngineConfig) -> bool:
    if cfg.variant == "loose":
        return stage_cone(f_alpha, cfg).empty
    return all(lifts(m, f_alpha) for m in cfg.gens)


def run_factorization(f: FpMorphism, cfg: EngineConfig, *, rng: Optional[random.Random] = None,
                      pushout_fn=pushout) -> FactorizationTrace:
    """Factor f = f_lambda∘f_star; raise Truncated (with the trace) if the budget runs out."""
    stages: list[StageRecord] = []
    A, fa = f.dom, f
    for alpha in range(cfg.max_stage):
        cone = stage_cone(fa, cfg, alpha)
        if cfg.stop_rule == "iso" and cone.empty:
            return FactorizationTrace(f, cfg, stages, "iso", cone)
        if cfg.stop_rule == "box_certified" and all(lifts(m, fa) for m in cfg.gens):
            return FactorizationTrace(f, cfg, stages, "box_certified", cone)
        order = None
        if rng is not None:
            order = list(range(len(cone.legs)))
            rng.shuffle(order)
        st = advance_stage(A, fa, cone, cfg.variant, order, pushout_fn)
        stages.append(st)
        A, fa = st.A_next, st.f_next
    if _certified(fa, cfg):
        reason = "max_stage" if cfg.stop_rule == "max_stage" else cfg.stop_rule
        return FactorizationTrace(f, cfg, stages, reason)
    trace = FactorizationTrace(f, cfg, stages, "truncated")
    trace.limit = chain_colimit(trace.g) if stages else None
    raise Truncated(f"no certificate after {cfg.max_stage} stages", trace)


# ---------------------------------------------------------------------------
# Weak reflections
# ---------------------------------------------------------------------------

@dataclass
class ReflectionResult:
    unit: FpMorphism
    A_star: FpModule
    trace: object
    unit_mono: Optional[bool] = None
    in_class: Optional[bool] = None


def weak_reflect(A: FpModule, cfg: EngineConfig) -> ReflectionResult:
    """Factor A -> 0; the first factor is the weak reflection."""
    trace = run_factorization(zero_morphism(A, zero_module(A.ring)), cfg)
    unit = trace.f_star
    res = ReflectionResult(unit, unit.cod, trace)
    if all(is_mono(m) for m in cfg.gens):
        res.unit_mono = is_mono(unit)
        res.in_class = all(is_injective_wrt(unit.cod, m) for m in cfg.gens)
    return res


# ---------------------------------------------------------------------------
# Functoriality of strict runs
# ---------------------------------------------------------------------------

def _diagonal_into(m: FpMorphism, upper: FpMorphism, f: FpMorphism, lower: FpMorphism) -> FpMorphism:
    d = diagonals(LiftingSquare(m, f, upper, lower)).particular
    if d is None:
        raise SoaLabError("transported square has no diagonal; the target trace is not a strict run")
    return d


def functorial_transport(u: FpMorphism, v: FpMorphism, trace: FactorizationTrace,
                         trace2: FactorizationTrace) -> FpMorphism:
    """The induced w: A_lambda -> A'_lambda with w∘f_star = f'_star∘u and f'_lambda∘w = v∘f_lambda."""
    for t in (trace, trace2):
        if t.config.variant != "strict" or t.discard_log:
            raise VariantMismatch("functoriality holds for strict runs only")
    if trace.config.gens != trace2.config.gens:
        raise VariantMismatch("both runs must use the same generators")
    f, f2 = trace.f, trace2.f
    if not equals(compose(v, f), compose(f2, u)):
        raise NonCommutingSquare("v∘f != f'∘u")
    n2 = len(trace2.stages)
    w = u
    for a, st in enumerate(trace.stages):
        cells = {}
        if a < n2:
            st2 = trace2.stages[a]
            g2, fnext2 = st2.g, st2.f_next
            attached = [s2 for s2 in st2.steps if not s2.discarded]
            cells = {s2.square.key: leg for s2, leg in zip(attached, st2.legs)}
        else:
            g2, fnext2 = identity(trace2.objects[-1]), trace2.f_lambda
        x = compose(g2, w)
        for step in st.steps:
            q = step.square
            s2, t2 = compose(w, q.s), compose(v, q.t)
            # a square sent onto a cell of the target stage uses that cell
            d = cells.get((q.gen_index, s2.cmat, t2.cmat))
            if d is None:
                d = _diagonal_into(q.generator, compose(g2, s2), fnext2, t2)
            x = step.po.mediator(d, x)
        w = compose(x, st.from_normal)
    # catch up with the longer target run
    for st2 in trace2.stages[len(trace.stages):]:
        w = compose(st2.g, w)
    if not (equals(compose(w, trace.f_star), compose(trace2.f_star, u))
            and equals(compose(trace2.f_lambda, w), compose(v, trace.f_lambda))):
        raise SoaLabError("transport failed to make both squares commute")
    return w


# ---------------------------------------------------------------------------
# Orthogonal (unique-lifting) factorization
# ---------------------------------------------------------------------------

def _orthogonal_squares(f: FpMorphism, gens: Sequence[FpMorphism], square_bound: int) -> list[Square]:
    out = []
    for gi, m in enumerate(gens):
        sol = square_group(m, f)
        try:
            pairs = sol.enumerate(limit=square_bound)
        except InfiniteHomSet:
            pairs = [(zero_morphism(m.dom, f.dom), zero_morphism(m.cod, f.cod))] + sol.kernel()
        out.extend(Square(gi, m, s, t, False) for s, t in pairs)
    return out


def orthogonal_factorize_one_step(f: FpMorphism, gens: Sequence[FpMorphism],
                                  square_bound: int = 0) -> tuple[FpMorphism, FpMorphism]:
    """(h, g) with g∘h = f: h is the canonical map from dom f to the colimit of the
    pushed-out legs and the comma maps between them."""
    gens = list(gens.generators if isinstance(gens, MorphismClass) else gens)
    if not gens:
        return identity(f.dom), f
    A = f.dom
    squares = _orthogonal_squares(f, gens, square_bound)
    objects, arrows, over_B = [A], [], [f]
    legs = []
    for q in squares:
        po = pushout(q.generator, q.s)
        h = po.leg_right
        objects.append(po.apex)
        legs.append(h)
        over_B.append(po.mediator(q.t, f))
        arrows.append((0, len(objects) - 1, h))
    n = len(legs)
    for i in range(n):
        for j in range(n):
            X, Y = objects[i + 1], objects[j + 1]
            sol = solve_maps([(X, Y)], [Equation(A, Y, [Term(0, pre=legs[i])], legs[j]),
                                        Equation(X, f.cod, [Term(0, post=over_B[j + 1])], over_B[i + 1])])
            p = sol.particular()
            if p is None:
                continue
            r0 = p[0]
            arrows.append((i + 1, j + 1, r0))
            for (k,) in sol.kernel():
                arrows.append((i + 1, j + 1, r0 + k))
    colim = finite_colimit(objects, arrows)
    fwd, back = normalize(colim.apex)
    h = compose(fwd, colim.legs[0])
    g = compose(colim.mediator(over_B), back)
    return h, g


def orthogonal_factorize(f: FpMorphism, gens: Sequence[FpMorphism], max_stage: int = 8,
                         square_bound: int = 0) -> tuple[FpMorphism, FpMorphism, dict]:
    """Repeat the one-step factorization until g has unique liftings against every generator."""
    gens = list(gens.generators if isinstance(gens, MorphismClass) else gens)
    h, g = identity(f.dom), f
    for step in range(max_stage + 1):
        if all(lifts_uniquely(m, g) for m in gens):
            return h, g, {"stable": True, "steps": step}
        if step == max_stage:
            break
        h1, g = orthogonal_factorize_one_step(g, gens, square_bound)
        h = compose(h1, h)
    return h, g, {"stable": False, "steps": max_stage}


def orthogonal_reflect(A: FpModule, M: Sequence[FpMorphism], max_stage: int = 8) -> tuple[FpMorphism, FpModule]:
    """Unit A -> A_star with A_star orthogonal to every generator."""
    gens = list(M.generators if isinstance(M, MorphismClass) else M)
    h, g, info = orthogonal_factorize(zero_morphism(A, zero_module(A.ring)), gens, max_stage)
    if not info["stable"] or not all(is_orthogonal_to(h.cod, m) for m in gens):
        raise Truncated(f"no orthogonal reflection after {max_stage} steps", (h, g))
    return h, h.cod
