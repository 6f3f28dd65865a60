"""Dense GF(2) linear algebra on numpy uint8 arrays.

Row reduction with XOR row operations; everything downstream (ranks, spans,
quotient bases, solving) is phrased through one echelon routine.  Matrices
store vectors as columns unless noted.
"""

from __future__ import annotations

import numpy as np


def gf2(M) -> np.ndarray:
    return (np.asarray(M, dtype=np.uint8) % 2).astype(np.uint8)


def row_echelon(M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row-echelon form and pivot column indices (rank = #pivots)."""
    R = gf2(M).copy()
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hit = np.nonzero(R[r:, c])[0]
        if hit.size == 0:
            continue
        lead = r + int(hit[0])
        if lead != r:
            R[[r, lead]] = R[[lead, r]]
        mask = R[:, c].copy()
        mask[r] = 0
        R[mask.astype(bool)] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    return len(row_echelon(M)[1])


def column_space_basis(M: np.ndarray) -> np.ndarray:
    """Columns of M forming a basis of the column space."""
    M = gf2(M)
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    _, piv = row_echelon(M)
    return M[:, piv]


def in_span(M: np.ndarray, v: np.ndarray) -> bool:
    """Is v in the column span of M?"""
    M = gf2(M)
    v = gf2(v).reshape(-1, 1)
    return rank(np.hstack([M, v])) == rank(M)


def solve(M: np.ndarray, v: np.ndarray) -> np.ndarray | None:
    """One solution x of M x = v over GF(2), or None."""
    M = gf2(M)
    v = gf2(v).reshape(-1)
    rows, cols = M.shape
    aug = np.hstack([M, v.reshape(-1, 1)])
    R, pivots = row_echelon(aug)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for r in range(len(pivots) - 1, -1, -1):
        c = pivots[r]
        s = R[r, -1] ^ (int(R[r, c + 1:cols] @ x[c + 1:cols]) % 2)
        x[c] = s
    return x


def kernel_basis(M: np.ndarray) -> np.ndarray:
    """Columns spanning the null space of M."""
    M = gf2(M)
    rows, cols = M.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.uint8)
    R, pivots = row_echelon(M)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=np.uint8)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            basis[c, k] = int(R[r, c + 1:] @ basis[c + 1:, k]) % 2
    return basis


def quotient_basis(sub: np.ndarray, space: np.ndarray) -> np.ndarray:
    """Columns of ``space`` completing a basis of span(sub) to span(space).

    Their classes form a basis of span(space)/span(sub); requires
    span(sub) <= span(space).
    """
    sub = gf2(sub)
    space = gf2(space)
    chosen = []
    cur = sub
    base_rank = rank(cur)
    for j in range(space.shape[1]):
        cand = np.hstack([cur, space[:, j:j + 1]])
        r = rank(cand)
        if r > base_rank:
            chosen.append(j)
            cur = cand
            base_rank = r
    return space[:, chosen] if chosen else space[:, :0]


def coordinates(basis: np.ndarray, modulo: np.ndarray, v: np.ndarray) -> np.ndarray | None:
    """Coordinates of [v] in the quotient span(basis | modulo)/span(modulo).

    Solves [basis | modulo] x = v and returns the basis part, or None when v
    is not in the combined span.
    """
    combined = np.hstack([basis, modulo]) if modulo.size else basis
    x = solve(combined, v)
    if x is None:
        return None
    return x[:basis.shape[1]]


def intersect(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Basis of span(A) & span(B) (Zassenhaus via kernel of [A | B])."""
    A, B = gf2(A), gf2(B)
    if A.shape[1] == 0 or B.shape[1] == 0:
        return A[:, :0]
    K = kernel_basis(np.hstack([A, B]))
    vecs = (A @ K[:A.shape[1]]) % 2
    return column_space_basis(vecs)
