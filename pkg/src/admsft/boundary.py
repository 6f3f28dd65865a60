"""Contact boundary data: Lagrangian components, pieces, and Reeb chords.

A boundary is the combinatorial shadow of a Legendrian submanifold: a set of
Lagrangian components grouped into pieces, and a set of oriented Reeb chords
with exact rational actions and integer gradings.  Everything downstream
(disk words, gluing, differentials) resolves chord endpoints and piece
membership through these tables.

Component and piece ids are global names shared between the two ends of a
cobordism: a component id present in both boundaries denotes the two ends of
one Lagrangian piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

ActionLike = Union[int, str, Fraction]

PURE = "pure"
MIXED = "mixed"


class BoundaryError(ValueError):
    """Malformed boundary data or unresolvable reference."""


def as_action(value: ActionLike) -> Fraction:
    """Coerce an action to an exact Fraction.

    Strings are parsed as exact decimals (the interchange format), so
    ``"1.5"`` becomes ``3/2`` with no rounding.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise BoundaryError(f"cannot interpret action {value!r} as an exact rational")


@dataclass(frozen=True)
class LagrangianComponent:
    id: str
    piece: str


@dataclass(frozen=True)
class ReebChord:
    id: str
    start: str
    end: str
    action: Fraction
    grading: int

    def __post_init__(self):
        object.__setattr__(self, "action", as_action(self.action))


@dataclass(frozen=True)
class BoundaryData:
    """Components, chords, and the positive lower action bound.

    Construction is lenient (so that :func:`validate_boundary` can report on
    malformed data); lookups raise :class:`BoundaryError` on dangling ids.
    Component and chord lists are stored sorted by id, so equality and
    hashing see content, not input order.
    """

    components: tuple[LagrangianComponent, ...]
    chords: tuple[ReebChord, ...]
    min_action: Fraction = Fraction(1)

    _piece_of: dict = field(init=False, compare=False, repr=False)
    _chord_by_id: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        comps = tuple(sorted(self.components, key=lambda c: c.id))
        chords = tuple(sorted(self.chords, key=lambda c: c.id))
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "chords", chords)
        object.__setattr__(self, "min_action", as_action(self.min_action))
        object.__setattr__(self, "_piece_of", {c.id: c.piece for c in comps})
        object.__setattr__(self, "_chord_by_id", {c.id: c for c in chords})

    @property
    def pieces(self) -> tuple[str, ...]:
        return tuple(sorted({c.piece for c in self.components}))

    @property
    def filtration_depth(self) -> int:
        """Number of pieces; the depth of the positive-puncture filtration."""
        return len(self.pieces)

    def piece_of(self, component_id: str) -> str:
        try:
            return self._piece_of[component_id]
        except KeyError:
            raise BoundaryError(f"unknown component id {component_id!r}") from None

    def chord(self, chord_id: str) -> ReebChord:
        try:
            return self._chord_by_id[chord_id]
        except KeyError:
            raise BoundaryError(f"unknown chord id {chord_id!r}") from None

    def has_chord(self, chord_id: str) -> bool:
        return chord_id in self._chord_by_id

    def chord_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.chords)


def boundary(components: Iterable[tuple[str, str]],
             chords: Iterable[tuple[str, str, str, ActionLike, int]],
             min_action: ActionLike = 1) -> BoundaryData:
    """Convenience constructor from plain tuples.

    ``components`` are (id, piece) pairs; ``chords`` are
    (id, start, end, action, grading) tuples.
    """
    return BoundaryData(
        components=tuple(LagrangianComponent(i, p) for i, p in components),
        chords=tuple(ReebChord(i, s, e, as_action(a), g) for i, s, e, a, g in chords),
        min_action=as_action(min_action),
    )


def classify_chord(chord: ReebChord, bdata: BoundaryData) -> str:
    """Classify a chord as PURE (endpoints on one piece) or MIXED."""
    start_piece = bdata.piece_of(chord.start)
    end_piece = bdata.piece_of(chord.end)
    return PURE if start_piece == end_piece else MIXED


def validate_boundary(bdata: BoundaryData) -> list[str]:
    """Report structural violations, one message per line.

    An empty report means every downstream constructor accepting this
    boundary succeeds on structurally well-formed inputs.
    """
    report: list[str] = []
    seen_comp: dict[str, str] = {}
    for comp in bdata.components:
        if comp.id in seen_comp:
            if seen_comp[comp.id] != comp.piece:
                report.append(
                    f"component {comp.id!r} assigned to two pieces "
                    f"({seen_comp[comp.id]!r} and {comp.piece!r})")
            else:
                report.append(f"duplicate component id {comp.id!r}")
        seen_comp[comp.id] = comp.piece
    if not bdata.components and bdata.chords:
        report.append("chords declared but no components")
    if bdata.min_action <= 0:
        report.append("min_action must be strictly positive")
    seen_chord: set[str] = set()
    for ch in bdata.chords:
        if ch.id in seen_chord:
            report.append(f"duplicate chord id {ch.id!r}")
        seen_chord.add(ch.id)
        for endpoint in (ch.start, ch.end):
            if endpoint not in seen_comp:
                report.append(f"chord {ch.id!r} has dangling endpoint {endpoint!r}")
        if ch.action <= 0:
            report.append(f"chord {ch.id!r}: action must be strictly positive")
        elif ch.action < bdata.min_action:
            report.append(
                f"chord {ch.id!r}: action {ch.action} below min_action {bdata.min_action}")
    return report
