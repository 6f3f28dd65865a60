"""Cobordism data and the filtered differential built from disk counts.

A cobordism carries two ends, a degree-0 potential vector of disk counts,
and degree-1 Hamiltonian vectors for the symplectizations of its ends.  The
differential of a disk v is the sum over admissible glued trees with exactly
one v-factor, exactly one Hamiltonian factor (attached above through the
positive end or below through the negative end), and all remaining factors
drawn from the potential.

The engine doubles as a validator: d^2 = 0 and h(f) = 0 are consequences of
geometric origin for honest counts, so they are checked at runtime rather
than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .boundary import BoundaryData
from .disk import FormalDisk, Puncture, action, action_plus, degree, is_strip
from .gluing import (LOWER, UPPER, Entry, GlueContext, gluing_pairing, linearize_lower,
                     linearize_upper, pairing_buckets)
from .vector import DiskVector, add, disk_vector


class CobordismError(ValueError):
    pass


@dataclass(frozen=True)
class CobordismData:
    pos_boundary: BoundaryData
    neg_boundary: BoundaryData
    potential: DiskVector
    ham_pos: DiskVector
    ham_neg: DiskVector
    trivial: bool = False

    _strips_pos: DiskVector = field(init=False, compare=False, repr=False)
    _strips_neg: DiskVector = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_strips_pos", strip_vector(self.pos_boundary))
        object.__setattr__(self, "_strips_neg", strip_vector(self.neg_boundary))

    def min_disk_action(self) -> Fraction:
        """Smallest action among non-strip input disks; the step size that
        certifies termination of iterated constructions."""
        acts = [action(d) for v in (self.potential, self.ham_pos, self.ham_neg)
                for d in v if not is_strip(d)]
        acts = [a for a in acts if a > 0]
        floor = min(self.pos_boundary.min_action, self.neg_boundary.min_action)
        return min(acts) if acts else floor


def strip_vector(bdata: BoundaryData) -> DiskVector:
    """One chord strip [c+, c-] per chord; the trivial potential."""
    disks = []
    for c in bdata.chords:
        disks.append(FormalDisk((Puncture(c.id, True), Puncture(c.id, False)),
                                bdata, bdata))
    return disk_vector(disks)


def validate_cobordism(cob: CobordismData) -> list[str]:
    """Structural report: potential disks of degree 0 and action >= 0,
    Hamiltonian disks of degree 1 and action > 0, trivial potential = strips."""
    report = []
    for d in cob.potential:
        if degree(d) != 0:
            report.append(f"potential disk [{d.text()}] has degree {degree(d)}, expected 0")
        if action(d) < 0:
            report.append(f"potential disk [{d.text()}] has negative action {action(d)}")
        if d.pos_boundary != cob.pos_boundary or d.neg_boundary != cob.neg_boundary:
            report.append(f"potential disk [{d.text()}] lives over the wrong ends")
    for name, ham, b in (("ham_pos", cob.ham_pos, cob.pos_boundary),
                         ("ham_neg", cob.ham_neg, cob.neg_boundary)):
        for d in ham:
            if degree(d) != 1:
                report.append(f"{name} disk [{d.text()}] has degree {degree(d)}, expected 1")
            if action(d) <= 0:
                report.append(f"{name} disk [{d.text()}] has non-positive action {action(d)}")
            if d.pos_boundary != b or d.neg_boundary != b:
                report.append(f"{name} disk [{d.text()}] is not a symplectization disk of its end")
    if cob.trivial:
        if cob.pos_boundary != cob.neg_boundary:
            report.append("trivial cobordism must have equal ends")
        elif cob.potential != strip_vector(cob.pos_boundary):
            report.append("trivial cobordism potential must be the strip vector")
    return report


def trivial_cobordism(bdata: BoundaryData, h: DiskVector) -> CobordismData:
    cob = CobordismData(bdata, bdata, strip_vector(bdata), h, h, trivial=True)
    problems = validate_cobordism(cob)
    if problems:
        raise CobordismError("; ".join(problems))
    return cob


# ---------------------------------------------------------------------------
# Hamiltonian operators and the differential
# ---------------------------------------------------------------------------

def _ctx_plus(cob: CobordismData) -> GlueContext:
    return GlueContext(bottom=cob.neg_boundary, seam=cob.pos_boundary,
                       top=cob.pos_boundary)


def _ctx_minus(cob: CobordismData) -> GlueContext:
    return GlueContext(bottom=cob.neg_boundary, seam=cob.neg_boundary,
                       top=cob.pos_boundary)


def ham_op_plus(cob: CobordismData, v: DiskVector, alpha) -> DiskVector:
    """One Hamiltonian disk of the positive end with v-factors attached below
    at its negative punctures (strips of the end filling nothing new)."""
    lower = [Entry(d) for d in v]
    upper = [Entry(d) for d in cob._strips_pos] + [Entry(d, special=True) for d in cob.ham_pos]
    even, _ = pairing_buckets(_ctx_plus(cob), lower, upper, alpha,
                              want_special=1, min_lower=1)
    return DiskVector(even, alpha)


def ham_op_minus(cob: CobordismData, v: DiskVector, alpha) -> DiskVector:
    """One Hamiltonian disk of the negative end attached below v-factors."""
    lower = [Entry(d) for d in cob._strips_neg] + [Entry(d, special=True) for d in cob.ham_neg]
    upper = [Entry(d) for d in v]
    even, _ = pairing_buckets(_ctx_minus(cob), lower, upper, alpha, want_special=1)
    return DiskVector(even, alpha)


def differential_plus(cob: CobordismData, v: DiskVector, alpha) -> DiskVector:
    """Positive-end part of the differential: one marked v-factor, one
    Hamiltonian factor above, remaining factors from the potential."""
    lower = ([Entry(d) for d in cob.potential] + [Entry(d, marked=True) for d in v])
    upper = [Entry(d) for d in cob._strips_pos] + [Entry(d, special=True) for d in cob.ham_pos]
    _, odd = pairing_buckets(_ctx_plus(cob), lower, upper, alpha, want_special=1)
    return DiskVector(odd, alpha)


def differential_minus(cob: CobordismData, v: DiskVector, alpha) -> DiskVector:
    """Negative-end part of the differential."""
    lower = [Entry(d) for d in cob._strips_neg] + [Entry(d, special=True) for d in cob.ham_neg]
    upper = ([Entry(d) for d in cob.potential] + [Entry(d, marked=True) for d in v])
    _, odd = pairing_buckets(_ctx_minus(cob), lower, upper, alpha, want_special=1)
    return DiskVector(odd, alpha)


def differential(cob: CobordismData, v: DiskVector, alpha) -> DiskVector:
    """d^f(v), truncated at (+)-action alpha.

    Raises degree by one, preserves the positive-puncture filtration, and
    never decreases (+)-action.
    """
    return add(differential_plus(cob, v, alpha), differential_minus(cob, v, alpha))


def h_of_f(cob: CobordismData, alpha) -> DiskVector:
    """Constant term of the Hamiltonian operator at the potential.

    Vanishes for consistent count data.  Unlike the public Hamiltonian
    operators this includes single-factor trees (a Hamiltonian disk with no
    punctures on the shared end counts by itself).
    """
    lower_p = [Entry(d) for d in cob.potential]
    upper_p = [Entry(d) for d in cob._strips_pos] + [Entry(d, special=True) for d in cob.ham_pos]
    even_p, _ = pairing_buckets(_ctx_plus(cob), lower_p, upper_p, alpha, want_special=1)
    lower_m = [Entry(d) for d in cob._strips_neg] + [Entry(d, special=True) for d in cob.ham_neg]
    upper_m = [Entry(d) for d in cob.potential]
    even_m, _ = pairing_buckets(_ctx_minus(cob), lower_m, upper_m, alpha, want_special=1)
    return add(DiskVector(even_p, alpha), DiskVector(even_m, alpha))


# ---------------------------------------------------------------------------
# Consistency validation
# ---------------------------------------------------------------------------

@dataclass
class ConsistencyReport:
    structural: list[str]
    h_of_f_support: list[str]
    d_squared_failures: list[tuple[str, list[str]]]  # (generator word, d^2 image words)
    truncation_leaks: list[str]

    def ok(self) -> bool:
        return not (self.structural or self.h_of_f_support or self.d_squared_failures)

    def lines(self) -> list[str]:
        out = list(self.structural)
        for w in self.h_of_f_support:
            out.append(f"h(f) != 0: contains [{w}]")
        for gen, image in self.d_squared_failures:
            out.append(f"d^2 != 0 on [{gen}]: image {image}")
        for leak in self.truncation_leaks:
            out.append(f"truncation leak: {leak}")
        return out


def verify_d_squared(cob: CobordismData, alpha, max_punctures: int = 8,
                     degree_window: tuple[int, int] | None = None) -> ConsistencyReport:
    """Apply d twice to every enumerated basis disk and report failures.

    An empty report certifies the count data is algebraically consistent at
    this truncation level.  Basis leaks (differentials leaving the enumerated
    window) are reported, never silently ignored.
    """
    from .spectral import enumerate_basis

    basis, closure = enumerate_basis(cob, alpha, max_punctures, degree_window)
    structural = validate_cobordism(cob)
    hf = h_of_f(cob, alpha)
    failures = []
    for g in basis:
        dd = differential(cob, disk_vector([g], alpha), alpha)
        d2 = differential(cob, dd, alpha)
        if len(d2):
            failures.append((g.text(), [w.text() for w in d2.sorted_disks()]))
    return ConsistencyReport(
        structural=structural,
        h_of_f_support=[d.text() for d in hf.sorted_disks()],
        d_squared_failures=failures,
        truncation_leaks=closure.messages(),
    )


# ---------------------------------------------------------------------------
# Joining cobordisms
# ---------------------------------------------------------------------------

def _check_joinable(lower: CobordismData, upper: CobordismData):
    if lower.pos_boundary != upper.neg_boundary:
        raise CobordismError("cannot join: lower positive end differs from upper negative end")


def join(lower: CobordismData, upper: CobordismData, alpha) -> CobordismData:
    """Joined cobordism: potential is the gluing pairing of the potentials,
    Hamiltonian vectors come from the outer ends."""
    _check_joinable(lower, upper)
    joined_potential = gluing_pairing(
        lower.potential, upper.potential, lower.pos_boundary, alpha,
        neg_boundary=lower.neg_boundary, pos_boundary=upper.pos_boundary)
    return CobordismData(
        pos_boundary=upper.pos_boundary,
        neg_boundary=lower.neg_boundary,
        potential=joined_potential,
        ham_pos=upper.ham_pos,
        ham_neg=lower.ham_neg,
        trivial=False,
    )


def chain_map_lower(lower: CobordismData, upper: CobordismData, w: DiskVector,
                    alpha) -> DiskVector:
    """Chain map on vectors of the lower cobordism induced by joining the
    upper one on top: one w-factor below, potentials elsewhere."""
    _check_joinable(lower, upper)
    return linearize_lower(lower.potential, upper.potential, w, lower.pos_boundary,
                           alpha, neg_boundary=lower.neg_boundary,
                           pos_boundary=upper.pos_boundary)


def chain_map_upper(lower: CobordismData, upper: CobordismData, w: DiskVector,
                    alpha) -> DiskVector:
    """Chain map on vectors of the upper cobordism induced by joining the
    lower one below."""
    _check_joinable(lower, upper)
    return linearize_upper(lower.potential, upper.potential, w, lower.pos_boundary,
                           alpha, neg_boundary=lower.neg_boundary,
                           pos_boundary=upper.pos_boundary)
