"""Core data model for causal-loop diagrams.

A model is an immutable signed digraph: variables grouped into sectors,
directed links carrying a polarity, and a set of named feedback-loop
declarations given as ordered variable-id sequences.  Construction
normalizes ordering (variables by id, links by endpoint pair, sectors by
id) so that two models with the same content compare equal regardless of
declaration order; loop declarations keep their order because reports are
produced in it.

Nothing here raises on a malformed model: :func:`validate` returns the
violations as data so callers can report all of them at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DuplicateInSequenceError


class Polarity(enum.Enum):
    """Sign of a causal link: effect moves with the cause, against it, or unset."""

    PLUS = "+"
    MINUS = "-"
    UNKNOWN = "?"

    @property
    def symbol(self) -> str:
        return self.value


class VarKind(enum.Enum):
    STOCK = "stock"
    AUX = "aux"


class LoopClass(enum.Enum):
    REINFORCING = "reinforcing"
    BALANCING = "balancing"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Sector:
    id: str
    name: str


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    sector: str
    kind: VarKind = VarKind.STOCK


@dataclass(frozen=True)
class Link:
    """Directed causal edge.  ``anchor`` is a free-form provenance note."""

    source: int
    target: int
    polarity: Polarity = Polarity.UNKNOWN
    anchor: str | None = None

    @property
    def pair(self) -> tuple[int, int]:
        return (self.source, self.target)


@dataclass(frozen=True)
class LoopDecl:
    """A named feedback loop declared as a cyclic sequence of variable ids."""

    name: str
    kind: LoopClass
    sequence: tuple[int, ...]


def cycle_edges(sequence: Sequence[int]) -> list[tuple[int, int]]:
    """Directed edges implied by a cyclic sequence, closing back to the start."""
    n = len(sequence)
    return [(sequence[i], sequence[(i + 1) % n]) for i in range(n)]


@dataclass(frozen=True)
class Model:
    name: str
    sectors: tuple[Sector, ...] = ()
    variables: tuple[Variable, ...] = ()
    links: tuple[Link, ...] = ()
    loops: tuple[LoopDecl, ...] = ()

    # Derived lookups; excluded from equality and repr.
    variables_by_id: dict = field(init=False, repr=False, compare=False)
    links_by_pair: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "sectors", tuple(sorted(self.sectors, key=lambda s: s.id))
        )
        object.__setattr__(
            self, "variables", tuple(sorted(self.variables, key=lambda v: v.id))
        )
        object.__setattr__(
            self, "links", tuple(sorted(self.links, key=lambda l: l.pair))
        )
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(
            self, "variables_by_id", {v.id: v for v in self.variables}
        )
        object.__setattr__(
            self, "links_by_pair", {l.pair: l for l in self.links}
        )

    def has_link(self, source: int, target: int) -> bool:
        return (source, target) in self.links_by_pair

    def polarity(self, source: int, target: int) -> Polarity:
        return self.links_by_pair[(source, target)].polarity

    def with_links(self, links: Iterable[Link]) -> "Model":
        """Copy of the model with its link set replaced."""
        return Model(
            name=self.name,
            sectors=self.sectors,
            variables=self.variables,
            links=tuple(links),
            loops=self.loops,
        )


@dataclass(frozen=True)
class Violation:
    code: str
    location: str
    message: str


def validate(model: Model) -> list[Violation]:
    """Check every structural invariant; empty list means the model is valid.

    Violations are ordered deterministically: variable checks by id, then
    link checks by (source, target), then loop checks by loop name.
    """
    out: list[Violation] = []

    sector_ids = {s.id for s in model.sectors}
    seen_sectors: set[str] = set()
    for s in model.sectors:
        if s.id in seen_sectors:
            out.append(
                Violation("DUPLICATE_SECTOR", f"sector {s.id}", "sector id declared twice")
            )
        seen_sectors.add(s.id)

    seen_vars: set[int] = set()
    for v in model.variables:
        loc = f"variable {v.id}"
        if v.id < 1:
            out.append(Violation("BAD_ID", loc, "variable id must be >= 1"))
        if v.id in seen_vars:
            out.append(Violation("DUPLICATE_VARIABLE", loc, "variable id declared twice"))
        seen_vars.add(v.id)
        if not v.name:
            out.append(Violation("EMPTY_NAME", loc, "variable name must be non-empty"))
        if v.sector not in sector_ids:
            out.append(
                Violation("UNKNOWN_SECTOR", loc, f"sector '{v.sector}' is not declared")
            )

    declared = {v.id for v in model.variables}
    seen_pairs: set[tuple[int, int]] = set()
    for l in model.links:
        loc = f"link {l.source}->{l.target}"
        if l.source == l.target:
            out.append(Violation("SELF_LOOP", loc, "self-loops are not allowed"))
        if l.pair in seen_pairs:
            out.append(Violation("DUPLICATE_LINK", loc, "link declared twice"))
        seen_pairs.add(l.pair)
        for end in (l.source, l.target):
            if end not in declared:
                out.append(
                    Violation("UNKNOWN_VARIABLE", loc, f"variable {end} is not declared")
                )

    seen_names: set[str] = set()
    for d in sorted(model.loops, key=lambda d: d.name):
        loc = f"loop {d.name}"
        if d.name in seen_names:
            out.append(Violation("DUPLICATE_LOOP_NAME", loc, "loop name declared twice"))
        seen_names.add(d.name)
        if len(d.sequence) < 2:
            out.append(
                Violation("LOOP_TOO_SHORT", loc, "loop needs at least 2 variables")
            )
            continue
        if len(set(d.sequence)) != len(d.sequence):
            out.append(
                Violation("DUPLICATE_IN_SEQUENCE", loc, "loop sequence repeats a variable")
            )
            continue
        for vid in d.sequence:
            if vid not in declared:
                out.append(
                    Violation("UNKNOWN_VARIABLE", loc, f"variable {vid} is not declared")
                )
        for a, b in cycle_edges(d.sequence):
            if not model.has_link(a, b):
                out.append(
                    Violation("LOOP_EDGE_MISSING", loc, f"implied link {a}->{b} is missing")
                )
    return out


def edges_from_loops(decls: Iterable[LoopDecl]) -> list[tuple[int, int]]:
    """Union of the directed edges implied by loop declarations.

    Each declaration contributes the closed cycle over its sequence.  The
    result is deduplicated and sorted by (source, target).
    """
    edges: set[tuple[int, int]] = set()
    for d in decls:
        if len(d.sequence) < 2:
            raise ValueError(f"loop {d.name}: sequence must have at least 2 ids")
        if len(set(d.sequence)) != len(d.sequence):
            raise DuplicateInSequenceError(
                f"loop {d.name}: sequence repeats a variable id"
            )
        edges.update(cycle_edges(d.sequence))
    return sorted(edges)


def canonical_hei_model() -> Model:
    """The bundled higher-education AI-transformation model (27 vars, 45 links)."""
    from . import corpus

    return corpus.canonical_hei_model()
