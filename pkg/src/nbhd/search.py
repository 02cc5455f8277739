"""Bounded model enumeration, seeded random generation, and fuzzing.

Random generation is a pure function of ``(seed, draw)`` built on the
splitmix64 generator, so runs reproduce bit-for-bit across machines and
across implementations in other languages (the algorithm is spelled out
in the README).  Generated models can be repaired to satisfy frame
constraints; repairs happen in a fixed order and are re-verified, and
unsatisfiable combinations raise instead of looping.

Exhaustive mode enumerates every model within (deliberately small)
structural bounds and treats frame constraints as filters.  A missing
countermodel is never a validity proof: the logics here are not known
to have the finite model property.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .errors import ConstraintError, ResourceLimitError
from .formula import Formula, Group, render
from .frames import (
    BinaryConsistent, Conec, Cop, FrameCondition, IntersectionClosed,
    Monotone, Nec, P, PGroup, Reflexive, check_condition, format_condition,
    _close_family_intersections, _close_family_supersets,
)
from .logics import (
    CounterExample, LogicDescriptor, SchemaId, check_schema_semantically,
    format_schema,
)
from .model import (
    AgentModel, Model, NeighbourhoodMap, World, WorldSet, model_to_dict,
    truth_set, unions_up_to,
)

__all__ = [
    "Stream", "SearchBounds", "SchemaTarget", "SearchResult", "Violation",
    "FuzzReport", "random_model", "exhaustive_models", "find_countermodel",
    "soundness_fuzz", "required_constraints", "counterexample_to_dict",
]


# ---------------------------------------------------------------------------
# splitmix64

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


class Stream:
    """splitmix64 stream for trial ``draw`` of run ``seed``.

    The initial state is ``mix64((seed * GAMMA + draw) mod 2^64)``; each
    call to :meth:`next` advances the state by GAMMA and returns its
    mix.  ``below(k)`` reduces by remainder — fine at these ranges.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int, draw: int = 0):
        self.state = _mix((seed * _GAMMA + draw) & _MASK)

    def next(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def below(self, k: int) -> int:
        if k <= 0:
            raise ValueError("below() needs a positive bound")
        return self.next() % k


# ---------------------------------------------------------------------------
# Bounds

# PGroup is accepted as an exhaustive-mode filter only; random_model
# rejects it (it cannot be repaired into place).
_SUPPORTED_CONSTRAINTS = (Nec, Conec, P, Cop, Reflexive, BinaryConsistent,
                          Monotone, IntersectionClosed, PGroup)


@dataclass(frozen=True)
class SearchBounds:
    """Search space plus generation mode.

    Exhaustive mode is guarded (at most 2 worlds, 2 agents, 2 atoms:
    about 17 million models at the limit, and most searches stop far
    earlier).  Random mode needs an explicit seed — there is no
    implicit one — and at most 6 worlds so a single 64-bit draw covers
    a family code.
    """

    max_worlds: int
    agents: tuple[int, ...]
    atoms: tuple[str, ...] = ()
    mode: str = "random"
    trials: int = 1000
    seed: "int | None" = None
    frame_constraints: tuple[FrameCondition, ...] = ()

    def __post_init__(self) -> None:
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")
        agents = tuple(self.agents)
        if not agents or len(set(agents)) != len(agents):
            raise ValueError("agents must be distinct and nonempty")
        if any(a < 0 or isinstance(a, bool) for a in agents):
            raise ValueError("agent ids are non-negative integers")
        object.__setattr__(self, "agents", agents)
        atoms = tuple(self.atoms)
        if len(set(atoms)) != len(atoms):
            raise ValueError("atoms must be distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "frame_constraints",
                           tuple(self.frame_constraints))
        for c in self.frame_constraints:
            if not isinstance(c, _SUPPORTED_CONSTRAINTS):
                raise ValueError(f"unknown frame constraint {c!r}")
            agent = getattr(c, "agent", None)
            named = ((agent,) if agent is not None
                     else tuple(c.group) if isinstance(c, PGroup) else ())
            for a in named:
                if a not in agents:
                    raise ValueError(
                        f"constraint {format_condition(c)} names an agent "
                        "outside the bounds")
        if self.mode == "random":
            if self.seed is None:
                raise ValueError("random mode requires an explicit seed")
            if self.trials < 1:
                raise ValueError("trials must be at least 1")
            if self.max_worlds > 6:
                raise ResourceLimitError(
                    "random generation supports at most 6 worlds")
        elif self.mode == "exhaustive":
            if self.max_worlds > 2 or len(agents) > 2 or len(atoms) > 2:
                raise ResourceLimitError(
                    "exhaustive mode is guarded to at most 2 worlds, "
                    "2 agents and 2 atoms")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")


# ---------------------------------------------------------------------------
# Random generation with constraint repair


def _static_contradictions(constraints: Sequence[FrameCondition]) -> None:
    have = set(constraints)
    agents = {getattr(c, "agent") for c in constraints
              if isinstance(c, (Nec, Conec, P, Cop))}
    for a in sorted(agents):
        if Nec(a) in have and Conec(a) in have:
            raise ConstraintError(
                f"nec:{a} and conec:{a} cannot both hold")
        if P(a) in have and Cop(a) in have:
            raise ConstraintError(f"p:{a} and cop:{a} cannot both hold")
        if (BinaryConsistent() in have and Nec(a) in have
                and Cop(a) in have):
            raise ConstraintError(
                f"bincons with nec:{a} and cop:{a} cannot hold: the empty "
                "set and the full set are complements")


def _repair(families: "dict[int, list[set[int]]]", n: int,
            constraints: Sequence[FrameCondition]) -> None:
    full = (1 << n) - 1
    have = set(constraints)
    agents = sorted(families)

    # 1. insertions
    for c in constraints:
        if isinstance(c, Nec):
            for fam in families[c.agent]:
                fam.add(full)
        elif isinstance(c, Cop):
            for fam in families[c.agent]:
                fam.add(0)

    # 2. deletions
    if Reflexive() in have:
        for a in agents:
            for w, fam in enumerate(families[a]):
                fam.intersection_update({x for x in fam if (x >> w) & 1})
    for c in constraints:
        if isinstance(c, P):
            for fam in families[c.agent]:
                fam.discard(0)
        elif isinstance(c, Conec):
            for fam in families[c.agent]:
                fam.discard(full)

    # 3. closures
    if Monotone() in have:
        for a in agents:
            families[a] = [set(_close_family_supersets(frozenset(fam), full))
                           for fam in families[a]]
    if IntersectionClosed() in have:
        for a in agents:
            families[a] = [set(_close_family_intersections(frozenset(fam)))
                           for fam in families[a]]

    # 4. binary-consistency pruning
    if BinaryConsistent() in have:
        for a in agents:
            protected = set()
            if Nec(a) in have:
                protected.add(full)
            if Cop(a) in have:
                protected.add(0)
            for fam in families[a]:
                for x in sorted(fam):
                    y = full ^ x
                    if x >= y or x not in fam or y not in fam:
                        continue
                    # drop the later member, unless an insertion
                    # constraint pinned it there
                    fam.discard(x if y in protected else y)


def random_model(bounds: SearchBounds, draw: int) -> AgentModel:
    """The ``draw``-th model of the run — a pure function of
    ``(bounds.seed, draw)``.

    Draw order: domain size uniform in 1..max_worlds; per atom (bounds
    order) a world set; per agent (bounds order) per world (ascending)
    a family code over all 2^|W| subsets.  The model is then repaired
    to satisfy the frame constraints: Nec/Cop insertions, then
    Reflexive/P/Conec deletions, then Monotone/IntersectionClosed
    closures, then BinaryConsistent pruning (dropping the bitwise
    later of each complementary pair, keeping insertion-pinned sets);
    the result is re-verified and unsatisfiable combinations raise
    ConstraintError.  PGroup cannot be repaired into place — request
    Reflexive instead, which implies it.
    """
    if bounds.mode != "random":
        raise ValueError("random_model needs bounds in random mode")
    for c in bounds.frame_constraints:
        if isinstance(c, PGroup):
            raise ConstraintError(
                f"{format_condition(c)} cannot be enforced by repair; "
                "use reflexive, which implies it")
    _static_contradictions(bounds.frame_constraints)

    rng = Stream(bounds.seed, draw)
    n = 1 + rng.below(bounds.max_worlds)
    full = (1 << n) - 1
    worlds = tuple(World(i, f"w{i}") for i in range(n))
    valuation = {atom: WorldSet(rng.below(1 << n), n) for atom in bounds.atoms}
    families: dict[int, list[set[int]]] = {}
    for agent in bounds.agents:
        per_world = []
        for _w in range(n):
            code = rng.below(1 << (1 << n))
            per_world.append({s for s in range(1 << n) if (code >> s) & 1})
        families[agent] = per_world

    _repair(families, n, bounds.frame_constraints)

    model = AgentModel(
        worlds, valuation,
        {a: NeighbourhoodMap(n, tuple(frozenset(fam) for fam in fams))
         for a, fams in families.items()})
    for c in bounds.frame_constraints:
        verdict = check_condition(model, c)
        if not verdict.holds:
            where = (f" at world {verdict.witness.world}"
                     if verdict.witness else "")
            raise ConstraintError(
                f"repair left {format_condition(c)} unsatisfied{where}")
    return model


# ---------------------------------------------------------------------------
# Exhaustive enumeration


def exhaustive_models(bounds: SearchBounds) -> Iterator[AgentModel]:
    """Every model within the bounds, frame constraints as filters.

    Order: domain size ascending; then valuation codes (per atom, last
    atom fastest); then family codes per (agent, world) slot, agents in
    bounds order, worlds ascending, last slot fastest.  NBHD_MAX_STATES
    caps the number of models visited.
    """
    if bounds.mode != "exhaustive":
        raise ValueError("exhaustive_models needs bounds in exhaustive mode")
    cap_text = os.environ.get("NBHD_MAX_STATES")
    cap = int(cap_text) if cap_text else None
    visited = 0
    for n in range(1, bounds.max_worlds + 1):
        worlds = tuple(World(i, f"w{i}") for i in range(n))
        n_sets = 1 << n
        n_fams = 1 << n_sets
        slots = len(bounds.agents) * n
        for vcodes in itertools.product(range(n_sets),
                                        repeat=len(bounds.atoms)):
            valuation = {atom: WorldSet(bits, n)
                         for atom, bits in zip(bounds.atoms, vcodes)}
            for fcodes in itertools.product(range(n_fams), repeat=slots):
                visited += 1
                if cap is not None and visited > cap:
                    raise ResourceLimitError(
                        f"exhaustive search visited more than {cap} models "
                        "(NBHD_MAX_STATES)")
                agents = {}
                for ai, agent in enumerate(bounds.agents):
                    fams = tuple(
                        frozenset(s for s in range(n_sets)
                                  if (fcodes[ai * n + w] >> s) & 1)
                        for w in range(n))
                    agents[agent] = NeighbourhoodMap(n, fams)
                model = AgentModel(worlds, valuation, agents)
                if all(check_condition(model, c).holds
                       for c in bounds.frame_constraints):
                    yield model


# ---------------------------------------------------------------------------
# Countermodel search


@dataclass(frozen=True)
class SchemaTarget:
    """A schema to refute, with the checking mode and group pool."""

    schema: SchemaId
    mode: str = "all-subsets"
    pool: "tuple[Group, ...] | None" = None


@dataclass(frozen=True)
class SearchResult:
    model: AgentModel
    witness: "str | CounterExample"
    draw: "int | None" = None
    index: "int | None" = None


def _refutes(m: AgentModel, target: "Formula | SchemaTarget"
             ) -> "str | CounterExample | None":
    if isinstance(target, SchemaTarget):
        verdict = check_schema_semantically(m, target.schema, target.mode,
                                            target.pool)
        return None if verdict.valid else verdict.counterexample
    held = truth_set(m, target)
    for w in m.worlds:
        if w.index not in held:
            return w.label
    return None


def find_countermodel(target: "Formula | SchemaTarget",
                      bounds: SearchBounds) -> "SearchResult | None":
    """First model in the bounds on which the target fails.

    For a formula the witness is the first world (ascending) where it
    is false; for a schema it is the first semantic counterexample.
    Returning None means none was found *within the bounds* — it is
    never a validity proof.
    """
    if bounds.mode == "exhaustive":
        for index, m in enumerate(exhaustive_models(bounds)):
            witness = _refutes(m, target)
            if witness is not None:
                return SearchResult(m, witness, index=index)
        return None
    for draw in range(bounds.trials):
        m = random_model(bounds, draw)
        witness = _refutes(m, target)
        if witness is not None:
            return SearchResult(m, witness, draw=draw)
    return None


# ---------------------------------------------------------------------------
# Soundness fuzzing

_SCHEMA_CONSTRAINT = {
    "TG": Reflexive(), "PG": Reflexive(), "RMG": Monotone(),
    "CG": IntersectionClosed(),
}


def required_constraints(l: LogicDescriptor,
                         agents: Sequence[int]) -> tuple[FrameCondition, ...]:
    """Frame constraints matching the logic, for sound fuzzing.

    B1–B4 need nothing; TG and PG need Reflexive; RMG Monotone; CG
    IntersectionClosed; DI BinaryConsistent; the other agent-indexed
    schemas need their namesake conditions; SA needs Nec for every
    agent in the bounds.
    """
    out: list[FrameCondition] = []
    for s in sorted(l.extensions, key=format_schema):
        if s.kind in _SCHEMA_CONSTRAINT:
            out.append(_SCHEMA_CONSTRAINT[s.kind])
        elif s.kind == "DI":
            out.append(BinaryConsistent())
        elif s.kind == "NEC":
            out.append(Nec(s.agent))
        elif s.kind == "CONEC":
            out.append(Conec(s.agent))
        elif s.kind == "P":
            out.append(P(s.agent))
        elif s.kind == "COP":
            out.append(Cop(s.agent))
        elif s.kind == "SA":
            out.extend(Nec(a) for a in agents)
    seen: list[FrameCondition] = []
    for c in out:
        if c not in seen:
            seen.append(c)
    return tuple(seen)


@dataclass(frozen=True)
class Violation:
    draw: int
    model: AgentModel
    schema: SchemaId
    witness: CounterExample


@dataclass(frozen=True)
class FuzzReport:
    trials: int
    schemas: tuple[SchemaId, ...]
    violations: tuple[Violation, ...] = field(default=())

    def to_text(self) -> str:
        lines = [
            f"trials: {self.trials}",
            "schemas: " + " ".join(format_schema(s) for s in self.schemas),
            f"violations: {len(self.violations)}",
        ]
        lines.extend(
            f"violation: draw {v.draw} schema {format_schema(v.schema)} "
            f"at {v.witness.describe()}"
            for v in self.violations)
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "schemas": [format_schema(s) for s in self.schemas],
            "violations": [
                {"draw": v.draw,
                 "model": model_to_dict(v.model),
                 "schema": format_schema(v.schema),
                 "witness": counterexample_to_dict(v.witness, v.model)}
                for v in self.violations],
        }


def counterexample_to_dict(cx: CounterExample, m: Model) -> dict:
    labels = [w.label for w in m.worlds]
    out: dict = {"world": cx.world}
    if cx.agent is not None:
        out["agent"] = cx.agent
    if cx.groups:
        out["groups"] = {name: list(g.members) for name, g in cx.groups}
    if cx.sets:
        out["sets"] = {name: [labels[i] for i in ws.indices()]
                       for name, ws in cx.sets}
    return out


def soundness_fuzz(l: LogicDescriptor, bounds: SearchBounds) -> FuzzReport:
    """Check every schema of ``l`` on each generated model (all-subsets
    mode) and report the violations, least draw first.

    The bounds must carry the frame constraints the logic corresponds
    to (see :func:`required_constraints`); without them violations
    would be expected, not news, so the mismatch is an error.
    """
    if bounds.mode != "random":
        raise ValueError("soundness_fuzz needs bounds in random mode")
    missing = [c for c in required_constraints(l, bounds.agents)
               if c not in bounds.frame_constraints]
    if missing:
        raise ConstraintError(
            "bounds are missing the frame constraints matching the logic: "
            + ", ".join(format_condition(c) for c in missing))
    pool = unions_up_to(bounds.agents)
    schemas = l.schemas()
    violations = []
    for draw in range(bounds.trials):
        m = random_model(bounds, draw)
        for s in schemas:
            verdict = check_schema_semantically(m, s, "all-subsets", pool)
            if not verdict.valid:
                violations.append(Violation(draw, m, s,
                                            verdict.counterexample))
    return FuzzReport(bounds.trials, schemas, tuple(violations))
