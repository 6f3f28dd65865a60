"""Finite GF(2) sums of admissible formal disks with an action truncation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .boundary import BoundaryData
from .disk import FormalDisk, action_plus, disk_from_text, is_admissible

INFINITY = math.inf


class VectorError(ValueError):
    pass


@dataclass(frozen=True)
class DiskVector:
    """A finite set of formal disks (membership = coefficient 1 in GF(2)).

    Every disk must be admissible, live over one fixed pair of ends, and
    have (+)-action at most ``alpha``.
    """

    disks: frozenset[FormalDisk]
    alpha: Fraction | float = INFINITY

    def __post_init__(self):
        pos = neg = None
        for d in self.disks:
            if not is_admissible(d):
                raise VectorError(f"non-admissible disk in vector: {d.text()}")
            if action_plus(d) > self.alpha:
                raise VectorError(
                    f"disk {d.text()} has (+)-action {action_plus(d)} above alpha {self.alpha}")
            if pos is None:
                pos, neg = d.pos_boundary, d.neg_boundary
            elif d.pos_boundary != pos or d.neg_boundary != neg:
                raise VectorError("disks of one vector must share both ends")

    def __iter__(self):
        return iter(self.disks)

    def __len__(self) -> int:
        return len(self.disks)

    def __contains__(self, disk: FormalDisk) -> bool:
        return disk in self.disks

    def sorted_disks(self) -> list[FormalDisk]:
        return sorted(self.disks, key=lambda d: (action_plus(d), len(d.word), d.text()))

    def words(self) -> list[str]:
        """Sorted disk-word strings (the serialization of the support)."""
        return [d.text() for d in self.sorted_disks()]

    def boundaries(self) -> tuple[BoundaryData, BoundaryData] | None:
        for d in self.disks:
            return d.pos_boundary, d.neg_boundary
        return None


def disk_vector(disks: Iterable[FormalDisk] = (), alpha: Fraction | float = INFINITY) -> DiskVector:
    return DiskVector(frozenset(disks), alpha)


def vector_from_words(texts: Iterable[str], pos_boundary: BoundaryData,
                      neg_boundary: BoundaryData,
                      alpha: Fraction | float = INFINITY) -> DiskVector:
    return disk_vector((disk_from_text(t, pos_boundary, neg_boundary) for t in texts), alpha)


def add(u: DiskVector, v: DiskVector) -> DiskVector:
    """Componentwise GF(2) sum; the result is truncated to min(alpha_u, alpha_v)."""
    bu, bv = u.boundaries(), v.boundaries()
    if bu is not None and bv is not None and bu != bv:
        raise VectorError("cannot add vectors over different ends")
    alpha = min(u.alpha, v.alpha)
    support = u.disks ^ v.disks
    return DiskVector(frozenset(d for d in support if action_plus(d) <= alpha), alpha)


def project(v: DiskVector, beta: Fraction | float) -> DiskVector:
    """Truncation map: drop disks of (+)-action above beta."""
    if beta > v.alpha:
        raise VectorError(
            f"cannot project to level {beta}: vector only carries information up to {v.alpha}")
    return DiskVector(frozenset(d for d in v.disks if action_plus(d) <= beta), beta)
