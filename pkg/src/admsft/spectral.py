"""Basis enumeration, the filtered GF(2) complex, and its spectral sequence.

The complex is graded by disk degree and filtered (decreasingly) by the
number of positive punctures p = 1 .. k, k the number of pieces.  Pages are
computed directly from the cycle/boundary formula

    E_r^{p,q} = Z_r^{p,q} / (Z_{r-1}^{p+1,q-1} + d Z_{r-1}^{p-r+1,q+r-2}),
    Z_r^{p,q} = { x in F^p, degree p+q : dx in F^{p+r} },

with d_r induced by d, bidegree (r, 1-r).  Pages are reported for
r = 1 .. k+1 with the last labeled as the limit page.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gf2
from .disk import FormalDisk, action_plus, admissible_word, canonical_rotation, degree
from .sft import CobordismData, differential
from .vector import DiskVector, disk_vector


class SpectralError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Basis enumeration
# ---------------------------------------------------------------------------

@dataclass
class ClosureReport:
    """Basis disks whose differential leaves the enumerated window."""

    leaks: dict[FormalDisk, list[FormalDisk]] = field(default_factory=dict)

    def ok(self) -> bool:
        return not self.leaks

    def unreliable_bidegrees(self, k: int) -> set[tuple[int, int]]:
        bad = set()
        for g, escaped in self.leaks.items():
            for w in [g] + escaped:
                p = w.positive_count()
                bad.add((p, degree(w) - p))
        return bad

    def messages(self) -> list[str]:
        return [f"d[{g.text()}] leaves the enumerated basis at "
                f"{[w.text() for w in ws]}" for g, ws in sorted(
                    self.leaks.items(), key=lambda kv: kv[0].text())]


def generator_sort_key(d: FormalDisk):
    return (action_plus(d), len(d.word), d.text())


def enumerate_basis(cob: CobordismData, alpha, max_punctures: int = 8,
                    degree_window: tuple[int, int] | None = None
                    ) -> tuple[list[FormalDisk], ClosureReport]:
    """All admissible disks over the cobordism's ends with (+)-action at most
    alpha, at most max_punctures punctures, and degree in the window.

    The closure report flags every basis disk whose differential produces a
    disk inside the action truncation but outside the enumerated window.
    """
    from .disk import generate_words

    basis = []
    for word in generate_words(cob.pos_boundary, cob.neg_boundary, max_punctures, alpha):
        if not admissible_word(word, cob.pos_boundary, cob.neg_boundary):
            continue
        disk = FormalDisk(canonical_rotation(word), cob.pos_boundary, cob.neg_boundary)
        if degree_window is not None and not (degree_window[0] <= degree(disk) <= degree_window[1]):
            continue
        basis.append(disk)
    basis.sort(key=generator_sort_key)
    in_basis = set(basis)
    report = ClosureReport()
    for g in basis:
        image = differential(cob, disk_vector([g], alpha), alpha)
        escaped = [w for w in image if w not in in_basis]
        if escaped:
            report.leaks[g] = sorted(escaped, key=generator_sort_key)
    return basis, report


# ---------------------------------------------------------------------------
# Filtered complex
# ---------------------------------------------------------------------------

@dataclass
class FilteredComplex:
    """Generators with (degree, filtration level), and d as a GF(2) matrix.

    ``matrix[i, j] = 1`` iff generator i appears in d(generator j).
    """

    generators: list
    degrees: list[int]
    filtration: list[int]
    matrix: np.ndarray
    depth: int
    alpha: Fraction | float | None = None
    actions: list[Fraction] | None = None

    @property
    def n(self) -> int:
        return len(self.generators)

    def validate(self) -> list[str]:
        problems = []
        n = self.n
        for j in range(n):
            for i in np.nonzero(self.matrix[:, j])[0]:
                i = int(i)
                if self.degrees[i] != self.degrees[j] + 1:
                    problems.append(f"d is not degree 1 on generator {j}")
                if self.filtration[i] < self.filtration[j]:
                    problems.append(f"d drops the filtration on generator {j}")
                if self.actions is not None and self.actions[i] < self.actions[j]:
                    problems.append(f"d decreases (+)-action on generator {j}")
        if n and np.any((self.matrix @ self.matrix) % 2):
            problems.append("d^2 != 0")
        return problems

    def filtration_matrix(self, p: int, n_deg: int) -> np.ndarray:
        """Basis columns of F^p in degree n_deg (standard basis vectors)."""
        cols = [i for i in range(self.n)
                if self.filtration[i] >= p and self.degrees[i] == n_deg]
        M = np.zeros((self.n, len(cols)), dtype=np.uint8)
        for k, i in enumerate(cols):
            M[i, k] = 1
        return M


def build_complex(cob: CobordismData, alpha, max_punctures: int = 8,
                  degree_window: tuple[int, int] | None = None,
                  allow_leaks: bool = False, threads: int = 1) -> FilteredComplex:
    """Matrix of the truncated differential on the enumerated basis.

    Raises on inconsistent data (d^2 != 0) and, unless ``allow_leaks``, on
    truncation leaks.
    """
    basis, closure = enumerate_basis(cob, alpha, max_punctures, degree_window)
    if not closure.ok() and not allow_leaks:
        raise SpectralError("truncation leak: " + "; ".join(closure.messages()))
    index = {g: i for i, g in enumerate(basis)}
    n = len(basis)
    matrix = np.zeros((n, n), dtype=np.uint8)

    def column(j: int):
        image = differential(cob, disk_vector([basis[j]], alpha), alpha)
        for w in image:
            i = index.get(w)
            if i is not None:
                matrix[i, j] = 1

    if threads > 1 and n:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(column, range(n)))
    else:
        for j in range(n):
            column(j)

    if np.any((matrix @ matrix) % 2):
        bad = [basis[j].text() for j in range(n)
               if np.any((matrix @ matrix[:, j]) % 2)]
        raise SpectralError(f"d^2 != 0 on generators {bad}; input counts inconsistent")
    fc = FilteredComplex(
        generators=basis,
        degrees=[degree(g) for g in basis],
        filtration=[g.positive_count() for g in basis],
        matrix=matrix,
        depth=max(cob.pos_boundary.filtration_depth, cob.neg_boundary.filtration_depth, 1),
        alpha=alpha,
        actions=[action_plus(g) for g in basis],
    )
    fc.closure = closure
    return fc


# ---------------------------------------------------------------------------
# Spectral sequence pages
# ---------------------------------------------------------------------------

@dataclass
class PageEntry:
    dim: int
    reps: np.ndarray      # columns: representative chains in the complex
    denominator: np.ndarray  # columns spanning the subspace quotiented out


@dataclass
class SpectralPage:
    r: int
    entries: dict[tuple[int, int], PageEntry]
    d: dict[tuple[int, int], np.ndarray]  # matrix of d_r at (p, q)
    is_limit: bool = False

    def dim(self, p: int, q: int) -> int:
        e = self.entries.get((p, q))
        return e.dim if e else 0

    def dims(self) -> dict[tuple[int, int], int]:
        return {pq: e.dim for pq, e in self.entries.items() if e.dim}


def _cycle_space(fc: FilteredComplex, p: int, r: int, n_deg: int) -> np.ndarray:
    """Z_r^{p, n-p}: chains in F^p of degree n with boundary in F^{p+r}."""
    F = fc.filtration_matrix(p, n_deg)
    if F.shape[1] == 0:
        return F
    dF = (fc.matrix @ F) % 2
    target = fc.filtration_matrix(p + r, n_deg + 1)
    # rows outside F^{p+r}: degree n+1 generators with filtration < p+r
    outside = [i for i in range(fc.n)
               if fc.degrees[i] == n_deg + 1 and fc.filtration[i] < p + r]
    if not outside:
        return F
    sub = dF[outside, :]
    K = gf2.kernel_basis(sub)
    return (F @ K) % 2


def _page_data(fc: FilteredComplex, r: int) -> SpectralPage:
    k = fc.depth
    degrees = sorted(set(fc.degrees))
    entries = {}
    for p in range(1, k + 1):
        for n_deg in degrees:
            q = n_deg - p
            Z = _cycle_space(fc, p, r, n_deg)
            if Z.shape[1] == 0:
                continue
            Z_deep = _cycle_space(fc, p + 1, r - 1, n_deg)
            Zsrc = _cycle_space(fc, p - r + 1, r - 1, n_deg - 1)
            B = (fc.matrix @ Zsrc) % 2
            denom = gf2.column_space_basis(np.hstack([Z_deep, B]))
            # restrict the denominator to Z (B lands in F^p automatically? no:
            # dZ_{r-1}^{p-r+1} lies in F^p and is a cycle subspace of Z_r).
            reps = gf2.quotient_basis(denom, np.hstack([denom, Z]))
            dim = reps.shape[1]
            if dim or denom.shape[1]:
                entries[(p, q)] = PageEntry(dim=dim, reps=reps, denominator=denom)
    page = SpectralPage(r=r, entries={pq: e for pq, e in entries.items() if e.dim}, d={})
    # keep zero entries out of the report but remember denominators for maps
    page._full_entries = entries
    for (p, q), e in page.entries.items():
        tp, tq = p + r, q - r + 1
        target = entries.get((tp, tq))
        img = (fc.matrix @ e.reps) % 2
        if target is None or target.dim == 0:
            if img.size and np.any(_reduce_mod(fc, img, tp, r)):
                raise SpectralError("d_r image misses its target entry")
            page.d[(p, q)] = np.zeros((0, e.dim), dtype=np.uint8)
            continue
        cols = []
        for j in range(img.shape[1]):
            coords = gf2.coordinates(target.reps, target.denominator, img[:, j])
            if coords is None:
                raise SpectralError("d_r image not in the target page entry")
            cols.append(coords)
        page.d[(p, q)] = np.array(cols, dtype=np.uint8).T
    return page


def _reduce_mod(fc: FilteredComplex, img: np.ndarray, p_target: int, r: int) -> np.ndarray:
    """Class of img in E_r^{p_target, *}: zero iff it lies in the denominator."""
    out = []
    for j in range(img.shape[1]):
        v = img[:, j]
        if not np.any(v):
            out.append(0)
            continue
        n_deg = None
        for i in np.nonzero(v)[0]:
            n_deg = fc.degrees[int(i)]
            break
        Z_deep = _cycle_space(fc, p_target + 1, r - 1, n_deg)
        Zsrc = _cycle_space(fc, p_target - r + 1, r - 1, n_deg - 1)
        denom = np.hstack([Z_deep, (fc.matrix @ Zsrc) % 2])
        out.append(0 if gf2.in_span(denom, v) else 1)
    return np.array(out, dtype=np.uint8)


def spectral_sequence(fc: FilteredComplex) -> list[SpectralPage]:
    """Pages r = 1 .. k+1; the last page is the limit (d_r = 0 for r >= k
    since the filtration has k levels)."""
    problems = fc.validate()
    if problems:
        raise SpectralError("; ".join(problems))
    pages = [_page_data(fc, r) for r in range(1, fc.depth + 2)]
    pages[-1].is_limit = True
    return pages


# ---------------------------------------------------------------------------
# Morphisms of spectral sequences
# ---------------------------------------------------------------------------

@dataclass
class PageMorphism:
    r: int
    blocks: dict[tuple[int, int], np.ndarray]
    injective: bool
    surjective: bool

    @property
    def isomorphism(self) -> bool:
        return self.injective and self.surjective


@dataclass
class MorphismReport:
    per_page: list[PageMorphism]

    def all_isomorphisms(self) -> bool:
        return all(m.isomorphism for m in self.per_page)


def _check_chain_map(M: np.ndarray, A: FilteredComplex, B: FilteredComplex):
    if M.shape != (B.n, A.n):
        raise SpectralError(f"map shape {M.shape} does not match complexes")
    comm = (B.matrix @ M + M @ A.matrix) % 2
    if np.any(comm):
        j = int(np.nonzero(comm.any(axis=0))[0][0])
        raise SpectralError(
            f"not a chain map: fails on generator {A.generators[j]!r}")
    for j in range(A.n):
        for i in np.nonzero(M[:, j])[0]:
            if B.filtration[int(i)] < A.filtration[j]:
                raise SpectralError(
                    f"map does not preserve the filtration on generator {A.generators[j]!r}")
            if B.degrees[int(i)] != A.degrees[j]:
                raise SpectralError(
                    f"map is not degree 0 on generator {A.generators[j]!r}")


def page_morphism(M: np.ndarray, A: FilteredComplex, B: FilteredComplex,
                  pages_A: list[SpectralPage] | None = None,
                  pages_B: list[SpectralPage] | None = None) -> MorphismReport:
    """Morphism of spectral sequences induced by a filtration-preserving
    chain map, with injectivity/surjectivity flags per page."""
    _check_chain_map(M, A, B)
    pages_A = pages_A or spectral_sequence(A)
    pages_B = pages_B or spectral_sequence(B)
    report = []
    for pa, pb in zip(pages_A, pages_B):
        blocks = {}
        injective = surjective = True
        for pq in set(pa._full_entries) | set(pb._full_entries):
            ea = pa._full_entries.get(pq)
            eb = pb._full_entries.get(pq)
            dim_a = ea.dim if ea else 0
            dim_b = eb.dim if eb else 0
            if dim_a == 0 and dim_b == 0:
                continue
            if dim_a == 0:
                surjective = False
                blocks[pq] = np.zeros((dim_b, 0), dtype=np.uint8)
                continue
            img = (M @ ea.reps) % 2
            if dim_b == 0:
                # image must die in the target quotient
                if eb is not None:
                    for j in range(img.shape[1]):
                        if not gf2.in_span(eb.denominator, img[:, j]):
                            raise SpectralError("induced map leaves the target page")
                elif np.any(img):
                    raise SpectralError("induced map hits an empty target entry")
                blocks[pq] = np.zeros((0, dim_a), dtype=np.uint8)
                injective = injective and dim_a == 0
                continue
            cols = []
            for j in range(img.shape[1]):
                coords = gf2.coordinates(eb.reps, eb.denominator, img[:, j])
                if coords is None:
                    raise SpectralError("induced map leaves the target page")
                cols.append(coords)
            block = np.array(cols, dtype=np.uint8).T
            blocks[pq] = block
            injective = injective and gf2.rank(block) == dim_a
            surjective = surjective and gf2.rank(block) == dim_b
        report.append(PageMorphism(r=pa.r, blocks=blocks,
                                   injective=injective, surjective=surjective))
    return MorphismReport(report)


# ---------------------------------------------------------------------------
# Stabilization across action levels
# ---------------------------------------------------------------------------

@dataclass
class StabilizationReport:
    alphas: list
    pages: list[list[SpectralPage]]
    morphism_iso: list[bool]     # for each consecutive pair
    stable_from: object          # first alpha after which all morphisms are isos
    basis_stable_from: object    # first alpha after which the basis saturates

    def lines(self) -> list[str]:
        out = []
        for i, ok in enumerate(self.morphism_iso):
            out.append(f"pi: alpha={self.alphas[i + 1]} -> {self.alphas[i]}: "
                       f"{'isomorphism' if ok else 'not an isomorphism'}")
        out.append(f"stable from alpha = {self.stable_from}")
        out.append(f"basis saturated from alpha = {self.basis_stable_from}")
        return out


def projection_matrix(A: FilteredComplex, B: FilteredComplex) -> np.ndarray:
    """Matrix of the truncation map between two basis levels (B at the lower
    action level): identity on shared generators, zero elsewhere."""
    index = {g: i for i, g in enumerate(B.generators)}
    M = np.zeros((B.n, A.n), dtype=np.uint8)
    for j, g in enumerate(A.generators):
        i = index.get(g)
        if i is not None:
            M[i, j] = 1
    return M


def stabilize(cob: CobordismData, alphas: list, max_punctures: int = 8,
              degree_window: tuple[int, int] | None = None,
              allow_leaks: bool = False) -> StabilizationReport:
    """Pages at each level with the truncation-induced morphisms between
    consecutive levels; reports the first level in the list beyond which all
    morphisms are isomorphisms on every page."""
    if sorted(alphas) != list(alphas):
        raise SpectralError("alphas must be increasing")
    complexes = [build_complex(cob, a, max_punctures, degree_window, allow_leaks)
                 for a in alphas]
    pages = [spectral_sequence(fc) for fc in complexes]
    iso = []
    saturated = []
    for i in range(len(alphas) - 1):
        A, B = complexes[i + 1], complexes[i]
        M = projection_matrix(A, B)
        iso.append(page_morphism(M, A, B, pages[i + 1], pages[i]).all_isomorphisms())
        saturated.append(set(A.generators) == set(B.generators))

    def first_stable(flags):
        out = alphas[-1]
        for i in range(len(flags), 0, -1):
            if not flags[i - 1]:
                break
            out = alphas[i - 1]
        return out

    return StabilizationReport(alphas=list(alphas), pages=pages, morphism_iso=iso,
                               stable_from=first_stable(iso),
                               basis_stable_from=first_stable(saturated))
