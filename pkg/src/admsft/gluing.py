"""Tree gluing of formal disks across a shared end.

A glued disk is built from factors on two levels: lower-level factors whose
positive punctures all sit on the shared boundary, and upper-level factors
whose negative punctures all sit there.  Every shared-boundary puncture must
be glued (a positive of a lower factor to a negative of an upper factor at
the same chord), the contact structure is a tree, and the (+)-action of the
result is the sum of the (+)-actions of the upper factors, which bounds the
tree size by the action budget.

Factorizations are counted mod 2.  Two labeled trees describe the same
factorization when they differ by the rotational period of a factor word or
of the glued word; the enumeration therefore runs from every upper seed and
dedups by a canonical re-rooted serialization of the labeled tree.

The split gluings additionally distinguish, around one k-factor, which side
of the induced hat-piece puncture order a fill lands on, attaching the
``after`` vector (v0) or the ``before`` vector (v1) accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .boundary import BoundaryData, BoundaryError
from .disk import (FormalDisk, Puncture, action_plus, canonicalize, is_admissible,
                   order_start_index, token_endpoints, word_period)
from .vector import INFINITY, DiskVector, disk_vector

LOWER, UPPER = 0, 1

ZONE_AFTER = "a"    # receives v0
ZONE_BEFORE = "b"   # receives v1


class GluingError(ValueError):
    pass


@dataclass(frozen=True)
class GlueContext:
    """Ends of a two-level join: result lives over (top, bottom)."""

    bottom: BoundaryData
    seam: BoundaryData
    top: BoundaryData
    piece_of: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        pieces: dict[str, str] = {}
        for b in (self.bottom, self.seam, self.top):
            for cid, piece in b._piece_of.items():
                if cid in pieces and pieces[cid] != piece:
                    raise BoundaryError(
                        f"component {cid!r} has inconsistent piece across ends")
                pieces[cid] = piece
        object.__setattr__(self, "piece_of", pieces)
        if self.seam.min_action <= 0:
            raise GluingError("zero-action cycle risk: seam min_action must be positive")


@dataclass(frozen=True)
class Entry:
    """A catalog disk with its bookkeeping role."""

    disk: FormalDisk
    marked: bool = False    # the epsilon-linear slot (v-factor)
    special: bool = False   # the distinguished Hamiltonian factor
    k_role: bool = False    # the k-factor of a split gluing


# A slot of the partial glued word:
# (chord, positive, level, factor_id, word_index, zone, in_comp, out_comp)
Slot = tuple


@dataclass
class Factorization:
    """One counted tree: the glued disk plus its labeled structure."""

    disk: FormalDisk
    factors: list[tuple[FormalDisk, int, bool, bool, bool]]
    edges: list[tuple[int, int, int, int, str]]  # (fu, wu, fl, wl, chord)

    def n_marked(self) -> int:
        return sum(1 for f in self.factors if f[2])

    def factor_actions(self) -> list[Fraction]:
        from .disk import action
        return [action(f[0]) for f in self.factors]


@dataclass
class _Config:
    alpha: Fraction
    want_marked: int | None = 0   # None: bucket trees by 0/1 marked factors
    want_special: int = 0
    min_lower: int = 0
    prune: bool = True
    collect: list | None = None


def _slot(token: Puncture, level: int, factor: int, widx: int, zone,
          disk: FormalDisk) -> Slot:
    inc, out = token_endpoints(token, disk.pos_boundary, disk.neg_boundary)
    return (token.chord, token.positive, level, factor, widx, zone, inc, out)


def _factor_slots(disk: FormalDisk, level: int, factor: int, zones=None) -> list[Slot]:
    return [_slot(tok, level, factor, i, None if zones is None else zones[i], disk)
            for i, tok in enumerate(disk.word)]


def _pending(slot: Slot) -> bool:
    return (slot[2] == LOWER and slot[1]) or (slot[2] == UPPER and not slot[1])


def _a2_ok(slots: Sequence[Slot], piece_of: dict) -> bool:
    """Collapsing-arc condition on the partial word (soundness of pruning:
    a violating partial disk has no admissible completion)."""
    m = len(slots)
    if m == 0:
        return True
    impure = [s[1] or piece_of[s[6]] != piece_of[s[7]] for s in slots]
    by_piece: dict[str, list[int]] = {}
    for i, s in enumerate(slots):
        by_piece.setdefault(piece_of[s[7]], []).append(i)
    for positions in by_piece.values():
        t = len(positions)
        if t < 2:
            continue
        bad = 0
        for j in range(t):
            a, b = positions[j], positions[(j + 1) % t]
            i = (a + 1) % m
            while True:
                if impure[i]:
                    bad += 1
                    break
                if i == b:
                    break
                i = (i + 1) % m
            if bad > 1:
                return False
    return True


def _glue_options(entries: Iterable[Entry], positive: bool):
    """chord -> [(entry, word_index)] over one rotational period per disk."""
    table: dict[str, list[tuple[Entry, int]]] = {}
    for e in entries:
        period = e.disk.period()
        for i in range(period):
            tok = e.disk.word[i]
            if tok.positive == positive:
                table.setdefault(tok.chord, []).append((e, i))
    return table


def _encode(factors, edges) -> tuple:
    """Canonical serialization of the labeled tree, minimized over roots.

    Puncture indices are reduced mod the rotational period of the factor
    word, so gluings that differ by a factor symmetry are identified; taking
    the minimum over roots makes the encoding independent of the seed and of
    deck rotations of the glued word.
    """
    labels = []
    periods = []
    for disk, level, marked, special, k_role in factors:
        labels.append((disk.text(), level, marked, special, k_role))
        periods.append(disk.period())
    incident: list[list[tuple[int, tuple, int]]] = [[] for _ in factors]
    for eid, (fu, wu, fl, wl, chord) in enumerate(edges):
        ku = (chord, wu % periods[fu], wl % periods[fl])
        incident[fu].append((eid, ("dn",) + ku, fl))
        incident[fl].append((eid, ("up",) + ku, fu))

    def ser(n: int, avoid: int) -> tuple:
        branches = sorted((key, ser(other, eid))
                          for eid, key, other in incident[n] if eid != avoid)
        return (labels[n], tuple(branches))

    return min(ser(n, -1) for n in range(len(factors)))


class _Search:
    def __init__(self, ctx: GlueContext, cfg: _Config, fill_options):
        if cfg.alpha == INFINITY:
            raise GluingError(
                "zero-action cycle risk: tree enumeration needs a finite alpha")
        self.ctx = ctx
        self.cfg = cfg
        self.fill_options = fill_options
        self.seen: set = set()
        self.buckets: dict[int, dict[FormalDisk, int]] = {0: {}, 1: {}}

    def run_seed(self, slots, factors, edges, apos, n_marked, n_special):
        cfg = self.cfg
        if apos > cfg.alpha or n_special > cfg.want_special:
            return
        if cfg.want_marked is None:
            if n_marked > 1:
                return
        elif n_marked > cfg.want_marked:
            return
        if cfg.prune and not _a2_ok(slots, self.ctx.piece_of):
            return
        self._expand(slots, factors, edges, apos, n_marked, n_special)

    def _expand(self, slots, factors, edges, apos, n_marked, n_special):
        cfg = self.cfg
        pend = next((i for i, s in enumerate(slots) if _pending(s)), None)
        if pend is None:
            self._finalize(slots, factors, edges, n_marked, n_special)
            return
        slot = slots[pend]
        for entry, widx in self.fill_options(slot):
            d = entry.disk
            marked2 = n_marked + entry.marked
            if cfg.want_marked is None:
                if marked2 > 1:
                    continue
            elif marked2 > cfg.want_marked:
                continue
            special2 = n_special + entry.special
            if special2 > cfg.want_special:
                continue
            level = 1 - slot[2]
            apos2 = apos + (action_plus(d) if level == UPPER else 0)
            if apos2 > cfg.alpha:
                continue
            fid = len(factors)
            rest = d.word[widx + 1:] + d.word[:widx]
            zone = slot[5]
            mid = [_slot(tok, level, fid, (widx + 1 + t) % len(d.word), zone, d)
                   for t, tok in enumerate(rest)]
            slots2 = slots[:pend] + mid + slots[pend + 1:]
            if cfg.prune and not _a2_ok(slots2, self.ctx.piece_of):
                continue
            factors2 = factors + [(d, level, entry.marked, entry.special, entry.k_role)]
            if level == UPPER:
                edge = (fid, widx, slot[3], slot[4], slot[0])
            else:
                edge = (slot[3], slot[4], fid, widx, slot[0])
            self._expand(slots2, factors2, edges + [edge], apos2, marked2, special2)

    def _finalize(self, slots, factors, edges, n_marked, n_special):
        cfg = self.cfg
        if n_special != cfg.want_special:
            return
        if cfg.want_marked is not None and n_marked != cfg.want_marked:
            return
        if sum(1 for f in factors if f[1] == LOWER) < cfg.min_lower:
            return
        word = tuple(Puncture(s[0], s[1]) for s in slots)
        if not any(p.positive for p in word):
            return
        if not _a2_ok(slots, self.ctx.piece_of):
            return
        disk = canonicalize(word, self.ctx.top, self.ctx.bottom)
        enc = _encode(factors, edges)
        if enc in self.seen:
            return
        self.seen.add(enc)
        bucket = self.buckets[n_marked if cfg.want_marked is None else 0]
        bucket[disk] = bucket.get(disk, 0) ^ 1
        if cfg.collect is not None:
            cfg.collect.append(Factorization(disk, list(factors), list(edges)))

    def parities(self, bucket: int = 0) -> frozenset[FormalDisk]:
        return frozenset(d for d, c in self.buckets[bucket].items() if c)


# ---------------------------------------------------------------------------
# Plain pairing
# ---------------------------------------------------------------------------

def pairing_trees(ctx: GlueContext, lower: Sequence[Entry], upper: Sequence[Entry],
                  cfg: _Config) -> _Search:
    """Enumerate all complete glued trees with factors from the catalogs."""
    lower_opts = _glue_options(lower, positive=True)
    upper_opts = _glue_options(upper, positive=False)

    def fill(slot: Slot):
        table = upper_opts if slot[2] == LOWER else lower_opts
        return table.get(slot[0], ())

    search = _Search(ctx, cfg, fill)
    for e in upper:
        slots = _factor_slots(e.disk, UPPER, 0)
        search.run_seed(slots, [(e.disk, UPPER, e.marked, e.special, e.k_role)], [],
                        action_plus(e.disk), int(e.marked), int(e.special))
    return search


def glue_at(lower: FormalDisk, pos_idx: int, upper: FormalDisk, neg_idx: int) -> FormalDisk:
    """Attach one disk to another at a matched puncture pair.

    The positive puncture ``pos_idx`` of ``lower`` is glued to the negative
    puncture ``neg_idx`` of ``upper``; both are erased and the words spliced.
    The result need not be admissible (callers filter).
    """
    lp = lower.word[pos_idx]
    up = upper.word[neg_idx]
    if not lp.positive:
        raise GluingError(f"sign mismatch: {lp} is not a positive puncture")
    if up.positive:
        raise GluingError(f"sign mismatch: {up} is not a negative puncture")
    if lp.chord != up.chord:
        raise GluingError(f"chord mismatch: {lp} glued to {up}")
    if lower.pos_boundary != upper.neg_boundary:
        raise GluingError("shared end mismatch between the glued disks")
    rest = lower.word[pos_idx + 1:] + lower.word[:pos_idx]
    word = upper.word[:neg_idx] + rest + upper.word[neg_idx + 1:]
    return canonicalize(word, upper.pos_boundary, lower.neg_boundary)


def _infer_ends(v_lower: DiskVector, v_upper: DiskVector, shared: BoundaryData,
                neg_boundary=None, pos_boundary=None):
    blo = v_lower.boundaries()
    bup = v_upper.boundaries()
    if blo is not None:
        if blo[0] != shared:
            raise GluingError("lower vector does not end on the shared boundary")
        neg_boundary = blo[1] if neg_boundary is None else neg_boundary
    if bup is not None:
        if bup[1] != shared:
            raise GluingError("upper vector does not start on the shared boundary")
        pos_boundary = bup[0] if pos_boundary is None else pos_boundary
    return neg_boundary, pos_boundary


def gluing_pairing(v_lower: DiskVector, v_upper: DiskVector, shared: BoundaryData,
                   alpha, *, neg_boundary=None, pos_boundary=None,
                   prune: bool = True, collect=None) -> DiskVector:
    """Sum of all admissible glued disks with factors from the two vectors,
    truncated at (+)-action alpha.  The coefficient of a disk is the mod-2
    number of its factorizations."""
    neg_b, pos_b = _infer_ends(v_lower, v_upper, shared, neg_boundary, pos_boundary)
    if pos_b is None or neg_b is None:
        return disk_vector((), alpha)
    ctx = GlueContext(neg_b, shared, pos_b)
    cfg = _Config(alpha=alpha, prune=prune, collect=collect)
    search = pairing_trees(ctx, [Entry(d) for d in v_lower], [Entry(d) for d in v_upper], cfg)
    return DiskVector(search.parities(0), alpha)


def linearize_lower(f_lower: DiskVector, f_upper: DiskVector, w: DiskVector,
                    shared: BoundaryData, alpha, **kw) -> DiskVector:
    """Trees with exactly one w-factor on the lower level, other factors
    from the potentials."""
    return _linearized(f_lower, f_upper, w, shared, alpha, w_level=LOWER, **kw)


def linearize_upper(f_lower: DiskVector, f_upper: DiskVector, w: DiskVector,
                    shared: BoundaryData, alpha, **kw) -> DiskVector:
    """Trees with exactly one w-factor on the upper level."""
    return _linearized(f_lower, f_upper, w, shared, alpha, w_level=UPPER, **kw)


def _linearized(f_lower, f_upper, w, shared, alpha, w_level, neg_boundary=None,
                pos_boundary=None) -> DiskVector:
    wb = w.boundaries()
    if wb is not None:
        if w_level == LOWER:
            neg_boundary = wb[1] if neg_boundary is None else neg_boundary
        else:
            pos_boundary = wb[0] if pos_boundary is None else pos_boundary
    neg_b, pos_b = _infer_ends(f_lower, f_upper, shared, neg_boundary, pos_boundary)
    if neg_b is None or pos_b is None:
        return disk_vector((), alpha)
    ctx = GlueContext(neg_b, shared, pos_b)
    lower = [Entry(d) for d in f_lower]
    upper = [Entry(d) for d in f_upper]
    if w_level == LOWER:
        lower += [Entry(d, marked=True) for d in w]
    else:
        upper += [Entry(d, marked=True) for d in w]
    cfg = _Config(alpha=alpha, want_marked=1)
    return DiskVector(pairing_trees(ctx, lower, upper, cfg).parities(0), alpha)


# ---------------------------------------------------------------------------
# Split gluings
# ---------------------------------------------------------------------------

def _zone_of_k_token(kdisk: FormalDisk, idx: int, piece: str) -> str:
    """Fills landing inside the k-factor: before at its first hat-piece
    puncture, after everywhere else."""
    try:
        start = order_start_index(kdisk.word, kdisk.arc_pieces(), piece)
    except Exception:
        return ZONE_AFTER
    return ZONE_BEFORE if idx == start else ZONE_AFTER


def _seed_split(hdisk: FormalDisk, h_level: int, kdisk: FormalDisk, j: int, i: int,
                piece: str, ctx: GlueContext):
    """Seed state for h#k glued at (h word index j) <- (k word index i).

    Returns (slots, factors, edges, apos) with zones assigned: the h-disk's
    remaining punctures are classified before/after the k-stretch in the
    linearized hat-piece order of the partial disk; k-stretch punctures use
    the k-disk's own first-puncture rule.
    """
    k_level = 1 - h_level
    mk = len(kdisk.word)
    rest_idx = [(i + 1 + t) % mk for t in range(mk - 1)]
    h_slots = _factor_slots(hdisk, h_level, 0)
    k_slots = [_slot(kdisk.word[widx], k_level, 1, widx,
                     _zone_of_k_token(kdisk, widx, piece), kdisk)
               for widx in rest_idx]
    slots = h_slots[:j] + k_slots + h_slots[j + 1:]
    if not _a2_ok(slots, ctx.piece_of):
        return None
    m = len(slots)
    word = [Puncture(s[0], s[1]) for s in slots]
    arc_pieces = [ctx.piece_of[s[7]] for s in slots]
    try:
        start = order_start_index(word, arc_pieces, piece)
    except Exception:
        return None
    blo, bhi = j, j + len(k_slots)  # k-stretch occupies [blo, bhi)
    if len(k_slots) == 0:
        blo, bhi = j, j  # fully absorbed k-factor: classify around the splice point
    zoned = []
    for pos, s in enumerate(slots):
        if blo <= pos < bhi:
            zoned.append(s)  # k-token zones already set
            continue
        rank = (pos - start) % m
        if bhi > blo:
            r0 = (blo - start) % m
            r1 = (bhi - 1 - start) % m
            before = r0 <= r1 and rank < r0  # start inside the stretch: nothing before
        else:
            r0 = (blo - start) % m
            before = rank < r0
        zone = ZONE_BEFORE if before else ZONE_AFTER
        zoned.append(s[:5] + (zone,) + s[6:])
    if h_level == UPPER:
        edge = (0, j, 1, i, hdisk.word[j].chord)
        apos = action_plus(hdisk)
    else:
        edge = (1, i, 0, j, hdisk.word[j].chord)
        apos = action_plus(kdisk)
    factors = [(hdisk, h_level, False, False, False), (kdisk, k_level, False, False, True)]
    return zoned, factors, [edge], apos


def _split_core(h_vec: Sequence[Entry], h_level: int, k_vec: Sequence[Entry],
                v0: Sequence[Entry], v1: Sequence[Entry], v_opp: Sequence[Entry],
                piece: str, ctx: GlueContext, cfg: _Config) -> _Search:
    """Common machinery of the two split gluings.

    ``v0``/``v1`` fill the zoned pendings on the h-side level's opposite
    side; ``v_opp`` fills pendings of the other sign.
    """
    zone_side_positive = h_level == LOWER  # which pending sign is zoned
    v0_opts = _glue_options(v0, positive=not zone_side_positive)
    v1_opts = _glue_options(v1, positive=not zone_side_positive)
    opp_opts = _glue_options(v_opp, positive=zone_side_positive)

    def fill(slot: Slot):
        pending_positive = slot[1]
        if pending_positive == zone_side_positive:
            table = v1_opts if slot[5] == ZONE_BEFORE else v0_opts
        else:
            table = opp_opts
        return table.get(slot[0], ())

    search = _Search(ctx, cfg, fill)
    for eh in h_vec:
        for ek in k_vec:
            hperiod = eh.disk.period()
            kperiod = ek.disk.period()
            for j in range(hperiod):
                htok = eh.disk.word[j]
                if htok.positive != (h_level == LOWER):
                    continue
                for i in range(kperiod):
                    ktok = ek.disk.word[i]
                    if ktok.positive == htok.positive or ktok.chord != htok.chord:
                        continue
                    seed = _seed_split(eh.disk, h_level, ek.disk, j, i, piece, ctx)
                    if seed is None:
                        continue
                    slots, factors, edges, apos = seed
                    factors = [
                        (eh.disk, h_level, eh.marked, eh.special, False),
                        (ek.disk, 1 - h_level, ek.marked, ek.special, True),
                    ]
                    search.run_seed(slots, factors, edges, apos,
                                    int(eh.marked) + int(ek.marked),
                                    int(eh.special) + int(ek.special))
    return search


def _check_k_arcs(k: DiskVector, piece: str):
    for d in k:
        if piece not in d.arc_pieces():
            raise GluingError(
                f"k-disk {d.text()} has no boundary arc on piece {piece!r}")


def split_glue_down(k: DiskVector, h_upper: DiskVector, v0: DiskVector, v1: DiskVector,
                    v_up: DiskVector, piece: str, alpha, *,
                    ctx: GlueContext | None = None) -> DiskVector:
    """Split gluing with the k-factor below: one h-factor (upper) with one
    attached k-factor (lower); remaining seam punctures of upper factors
    receive v0 after the k-factor and v1 before it; seam punctures of lower
    factors receive v_up."""
    _check_k_arcs(k, piece)
    ctx = ctx or _split_ctx_down(k, h_upper)
    if ctx is None:
        return disk_vector((), alpha)
    cfg = _Config(alpha=alpha)
    search = _split_core([Entry(d) for d in h_upper], UPPER, [Entry(d) for d in k],
                         [Entry(d) for d in v0], [Entry(d) for d in v1],
                         [Entry(d) for d in v_up], piece, ctx, cfg)
    return DiskVector(search.parities(0), alpha)


def split_glue_up(h_lower: DiskVector, k: DiskVector, v_low: DiskVector, v0: DiskVector,
                  v1: DiskVector, piece: str, alpha, *,
                  ctx: GlueContext | None = None) -> DiskVector:
    """Split gluing with the k-factor above: remaining seam punctures of
    lower factors receive v0 after / v1 before; seam punctures of upper
    factors receive v_low."""
    _check_k_arcs(k, piece)
    ctx = ctx or _split_ctx_up(h_lower, k)
    if ctx is None:
        return disk_vector((), alpha)
    cfg = _Config(alpha=alpha)
    search = _split_core([Entry(d) for d in h_lower], LOWER, [Entry(d) for d in k],
                         [Entry(d) for d in v0], [Entry(d) for d in v1],
                         [Entry(d) for d in v_low], piece, ctx, cfg)
    return DiskVector(search.parities(0), alpha)


def pairing_buckets(ctx: GlueContext, lower: Sequence[Entry], upper: Sequence[Entry],
                    alpha, *, want_special: int = 0, min_lower: int = 0,
                    prune: bool = True) -> tuple[frozenset, frozenset]:
    """Pairing over marked catalogs, split into (no-mark, one-mark) parts.

    Trees with two or more marked factors are discarded (second order in the
    bookkeeping variable).
    """
    cfg = _Config(alpha=alpha, want_marked=None, want_special=want_special,
                  min_lower=min_lower, prune=prune)
    search = pairing_trees(ctx, lower, upper, cfg)
    return search.parities(0), search.parities(1)


def split_buckets(h_vec: Sequence[Entry], h_level: int, k_vec: Sequence[Entry],
                  v0: Sequence[Entry], v1: Sequence[Entry], v_opp: Sequence[Entry],
                  piece: str, ctx: GlueContext, alpha) -> tuple[frozenset, frozenset]:
    """Split gluing over marked catalogs, split into (no-mark, one-mark) parts."""
    cfg = _Config(alpha=alpha, want_marked=None)
    search = _split_core(h_vec, h_level, k_vec, v0, v1, v_opp, piece, ctx, cfg)
    return search.parities(0), search.parities(1)


def _split_ctx_down(k: DiskVector, h_upper: DiskVector) -> GlueContext | None:
    bk, bh = k.boundaries(), h_upper.boundaries()
    if bk is None or bh is None:
        return None
    return GlueContext(bottom=bk[1], seam=bk[0], top=bh[0])


def _split_ctx_up(h_lower: DiskVector, k: DiskVector) -> GlueContext | None:
    bh, bk = h_lower.boundaries(), k.boundaries()
    if bh is None or bk is None:
        return None
    return GlueContext(bottom=bh[1], seam=bh[0], top=bk[0])
