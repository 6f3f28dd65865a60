"""Formal disks as cyclic words of signed chord punctures.

A formal disk is stored as the canonical rotation of its puncture word
together with the boundary data of its two ends.  Arc labels (the Lagrangian
component carried by each boundary arc between consecutive punctures) are
derived from chord endpoints:

* positive puncture at chord c:   incoming arc start(c), outgoing arc end(c)
* negative puncture at chord c:   incoming arc end(c),   outgoing arc start(c)

and consecutive labels must match around the circle.  Admissibility, actions,
degree, and the hat-piece puncture order are all functions of the word and
these tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .boundary import BoundaryData, BoundaryError, ReebChord


class DiskError(ValueError):
    """Ill-formed disk word (arc inconsistency, empty word, bad reference)."""


class Puncture(NamedTuple):
    chord: str
    positive: bool

    def key(self) -> tuple[str, int]:
        # Positive sorts before negative at the same chord.
        return (self.chord, 0 if self.positive else 1)

    def __str__(self) -> str:
        return self.chord + ("+" if self.positive else "-")


def parse_word(text: str) -> tuple[Puncture, ...]:
    """Parse whitespace-separated tokens like ``a+ b-`` into a word."""
    tokens = text.split()
    if not tokens:
        raise DiskError("empty disk word")
    word = []
    for tok in tokens:
        if len(tok) < 2 or tok[-1] not in "+-":
            raise DiskError(f"bad puncture token {tok!r} (expected '<chord>+' or '<chord>-')")
        word.append(Puncture(tok[:-1], tok[-1] == "+"))
    return tuple(word)


def format_word(word: Sequence[Puncture]) -> str:
    return " ".join(str(p) for p in word)


def canonical_rotation(word: Sequence[Puncture]) -> tuple[Puncture, ...]:
    """Lexicographically least rotation of the cyclic word."""
    w = tuple(word)
    m = len(w)
    keys = tuple(p.key() for p in w)
    best = min(range(m), key=lambda i: keys[i:] + keys[:i])
    return w[best:] + w[:best]


def word_period(word: Sequence[Puncture]) -> int:
    """Smallest p with rotation-by-p fixing the word (divides len)."""
    w = tuple(word)
    m = len(w)
    for p in range(1, m):
        if m % p == 0 and w[p:] + w[:p] == w:
            return p
    return m


@dataclass(frozen=True)
class FormalDisk:
    """A cyclic puncture word in canonical rotation, over a pair of ends."""

    word: tuple[Puncture, ...]
    pos_boundary: BoundaryData
    neg_boundary: BoundaryData

    _arcs: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_arcs", _arc_components(
            self.word, self.pos_boundary, self.neg_boundary))

    def __repr__(self) -> str:
        return f"FormalDisk[{format_word(self.word)}]"

    def chord_of(self, i: int) -> ReebChord:
        p = self.word[i]
        b = self.pos_boundary if p.positive else self.neg_boundary
        return b.chord(p.chord)

    @property
    def arcs(self) -> tuple[str, ...]:
        """Component id of arc i, the arc between punctures i and i+1."""
        return self._arcs

    def arc_pieces(self) -> tuple[str, ...]:
        pieces = _merged_piece_map(self.pos_boundary, self.neg_boundary)
        return tuple(pieces[c] for c in self._arcs)

    def positive_count(self) -> int:
        return sum(1 for p in self.word if p.positive)

    def period(self) -> int:
        return word_period(self.word)

    def text(self) -> str:
        return format_word(self.word)


def _merged_piece_map(pos_b: BoundaryData, neg_b: BoundaryData) -> dict[str, str]:
    pieces = dict(neg_b._piece_of)
    for cid, piece in pos_b._piece_of.items():
        if cid in pieces and pieces[cid] != piece:
            raise BoundaryError(
                f"component {cid!r} lies on piece {pieces[cid]!r} at one end "
                f"and {piece!r} at the other")
        pieces[cid] = piece
    return pieces


def token_endpoints(p: Puncture, pos_b: BoundaryData, neg_b: BoundaryData) -> tuple[str, str]:
    """(incoming component, outgoing component) for a single puncture."""
    if p.positive:
        c = pos_b.chord(p.chord)
        return c.start, c.end
    c = neg_b.chord(p.chord)
    return c.end, c.start


def _arc_components(word: Sequence[Puncture], pos_b: BoundaryData,
                    neg_b: BoundaryData) -> tuple[str, ...]:
    if not word:
        raise DiskError("empty disk word")
    m = len(word)
    ends = [token_endpoints(p, pos_b, neg_b) for p in word]
    arcs = []
    for i in range(m):
        out_comp = ends[i][1]
        in_next = ends[(i + 1) % m][0]
        if out_comp != in_next:
            raise DiskError(
                f"arc inconsistency between {word[i]} and {word[(i + 1) % m]}: "
                f"outgoing component {out_comp!r} != incoming {in_next!r}")
        arcs.append(out_comp)
    return tuple(arcs)


def canonicalize(word: Sequence[Puncture], pos_boundary: BoundaryData,
                 neg_boundary: BoundaryData) -> FormalDisk:
    """Build a FormalDisk from any rotation of its word.

    Validates arc consistency (raising DiskError naming the failing adjacent
    pair) and that punctures reference chords of the correct end.
    """
    word = tuple(word)
    if not word:
        raise DiskError("empty disk word")
    for p in word:
        b = pos_boundary if p.positive else neg_boundary
        if not b.has_chord(p.chord):
            side = "+infinity" if p.positive else "-infinity"
            raise DiskError(f"puncture {p} references no chord of the {side} boundary")
    _arc_components(word, pos_boundary, neg_boundary)
    return FormalDisk(canonical_rotation(word), pos_boundary, neg_boundary)


def disk_from_text(text: str, pos_boundary: BoundaryData,
                   neg_boundary: BoundaryData) -> FormalDisk:
    return canonicalize(parse_word(text), pos_boundary, neg_boundary)


def action_plus(disk: FormalDisk) -> Fraction:
    return sum((disk.chord_of(i).action for i, p in enumerate(disk.word) if p.positive),
               Fraction(0))


def action_minus(disk: FormalDisk) -> Fraction:
    return sum((disk.chord_of(i).action for i, p in enumerate(disk.word) if not p.positive),
               Fraction(0))


def action(disk: FormalDisk) -> Fraction:
    return action_plus(disk) - action_minus(disk)


def degree(disk: FormalDisk) -> int:
    """Grading: sum of positive gradings - sum of negative gradings + 1 - p.

    Additive under gluing at a single chord, and zero on chord strips.
    """
    pos = neg = 0
    p = 0
    for i, punct in enumerate(disk.word):
        g = disk.chord_of(i).grading
        if punct.positive:
            pos += g
            p += 1
        else:
            neg += g
    return pos - neg + 1 - p


def is_strip(disk: FormalDisk) -> bool:
    """True for the length-2 word [c+, c-] over matching ends."""
    w = disk.word
    return (len(w) == 2 and w[0].chord == w[1].chord
            and w[0].positive and not w[1].positive)


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------

def _impure_flags(word: Sequence[Puncture], pos_b: BoundaryData, neg_b: BoundaryData,
                  pieces: dict[str, str]) -> list[bool]:
    """A puncture is impure if it is positive or at a mixed chord."""
    out = []
    for p in word:
        b = pos_b if p.positive else neg_b
        c = b.chord(p.chord)
        mixed = pieces[c.start] != pieces[c.end]
        out.append(p.positive or mixed)
    return out


def admissible_word(word: Sequence[Puncture], pos_b: BoundaryData,
                    neg_b: BoundaryData, require_positive: bool = True) -> bool:
    """Decide admissibility of a cyclic word.

    Condition (collapsing arcs): for every pair of boundary arcs on the same
    piece, one of the two puncture intervals they bound must be free of
    positive and mixed punctures.  Equivalently, grouping the circle by the
    arcs of each piece, at most one gap between consecutive same-piece arcs
    may contain an impure puncture.  ``require_positive=False`` checks only
    the collapsing-arc condition (used for pruning partial disks).
    """
    word = tuple(word)
    if require_positive and not any(p.positive for p in word):
        return False
    pieces = _merged_piece_map(pos_b, neg_b)
    arcs = _arc_components(word, pos_b, neg_b)
    m = len(word)
    impure = _impure_flags(word, pos_b, neg_b, pieces)
    by_piece: dict[str, list[int]] = {}
    for i, comp in enumerate(arcs):
        by_piece.setdefault(pieces[comp], []).append(i)
    for positions in by_piece.values():
        if len(positions) < 2:
            continue
        # Count gaps between cyclically consecutive same-piece arcs that
        # contain an impure puncture; two such gaps give a failing arc pair.
        bad_gaps = 0
        t = len(positions)
        for j in range(t):
            a = positions[j]
            b = positions[(j + 1) % t]
            # punctures strictly between arc a and arc b: indices a+1 .. b
            i = (a + 1) % m
            hit = False
            while True:
                if impure[i]:
                    hit = True
                    break
                if i == b:
                    break
                i = (i + 1) % m
            if hit:
                bad_gaps += 1
                if bad_gaps > 1:
                    return False
    return True


def is_admissible(disk: FormalDisk) -> bool:
    """At least one positive puncture, and every same-piece collapsing arc
    cuts off a side with only pure negative punctures."""
    return admissible_word(disk.word, disk.pos_boundary, disk.neg_boundary)


# ---------------------------------------------------------------------------
# Hat-piece puncture order
# ---------------------------------------------------------------------------

def order_start_index(word: Sequence[Puncture], arc_pieces: Sequence[str],
                      piece: str) -> int:
    """Index at which the natural puncture order starts.

    The order is always a rotation of the boundary order: for a disk whose
    arcs all lie on the piece it starts just after the unique positive
    puncture (so the positive puncture comes last); otherwise it starts at
    the puncture entering the single maximal run of on-piece arcs.
    """
    m = len(word)
    on = [pc == piece for pc in arc_pieces]
    if not any(on):
        raise DiskError(f"no boundary arc lies on piece {piece!r}")
    if all(on):
        positives = [i for i, p in enumerate(word) if p.positive]
        if len(positives) != 1:
            raise DiskError("non-admissible: pure disk without a unique positive puncture")
        return (positives[0] + 1) % m
    # Runs of on-piece arcs; more than one means >2 mixed piece-punctures.
    starts = [i for i in range(m) if on[i] and not on[(i - 1) % m]]
    if len(starts) != 1:
        raise DiskError("non-admissible: >2 mixed piece-punctures")
    # Arc run starting at arc s is entered by puncture s (its outgoing arc).
    return starts[0]


def order_punctures(disk: FormalDisk, piece: str) -> list[int]:
    """Puncture indices in the natural order with respect to a piece."""
    if not is_admissible(disk):
        raise DiskError("order_punctures requires an admissible disk")
    start = order_start_index(disk.word, disk.arc_pieces(), piece)
    m = len(disk.word)
    return [(start + i) % m for i in range(m)]


# ---------------------------------------------------------------------------
# Word enumeration (arc-consistent cyclic words over a pair of ends)
# ---------------------------------------------------------------------------

def generate_words(pos_b: BoundaryData, neg_b: BoundaryData, max_punctures: int,
                   alpha: Fraction | float | None = None) -> Iterable[tuple[Puncture, ...]]:
    """Yield every arc-consistent cyclic word, one canonical rotation each.

    Words are filtered by (+)-action <= alpha when given; admissibility is
    NOT filtered (callers decide).  Intended for exhaustive small searches.
    """
    pieces = _merged_piece_map(pos_b, neg_b)
    tokens: list[tuple[Puncture, str, str, Fraction]] = []
    for c in pos_b.chords:
        tokens.append((Puncture(c.id, True), c.start, c.end, c.action))
    for c in neg_b.chords:
        tokens.append((Puncture(c.id, False), c.end, c.start, Fraction(0)))
    del pieces
    by_in: dict[str, list[int]] = {}
    for idx, (_, inc, _, _) in enumerate(tokens):
        by_in.setdefault(inc, []).append(idx)

    seen: set[tuple[Puncture, ...]] = set()
    word: list[int] = []

    def emit():
        w = tuple(tokens[i][0] for i in word)
        cw = canonical_rotation(w)
        if cw not in seen:
            seen.add(cw)
            yield cw

    def rec(first_in: str, last_out: str, apos: Fraction):
        if word and tokens[word[0]][1] == last_out:
            yield from emit()
        if len(word) >= max_punctures:
            return
        for idx in by_in.get(last_out, []):
            tok, _, out, act = tokens[idx]
            a2 = apos + act
            if alpha is not None and a2 > alpha:
                continue
            word.append(idx)
            yield from rec(first_in, out, a2)
            word.pop()

    for start in range(len(tokens)):
        tok, inc, out, act = tokens[start]
        if alpha is not None and act > alpha:
            continue
        word.append(start)
        yield from rec(inc, out, act)
        word.pop()
