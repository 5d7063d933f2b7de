"""Dense GF(2) linear algebra on numpy uint8 arrays.

Internal helpers shared by the homology oracles. Matrices hold 0/1 entries;
all arithmetic is mod 2. Sizes here are desk scale, so clarity beats
asymptotics.
"""

from __future__ import annotations

import numpy as np


def as_gf2(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.uint8) % 2
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    return out


def row_reduce(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2).

    Returns (rref, pivot_columns). The input is not modified.
    """
    r = a.copy().astype(np.uint8) % 2
    n_rows, n_cols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        hits = np.nonzero(r[row:, col])[0]
        if hits.size == 0:
            continue
        pivot_row = row + int(hits[0])
        if pivot_row != row:
            r[[row, pivot_row]] = r[[pivot_row, row]]
        others = np.nonzero(r[:, col])[0]
        for i in others:
            if i != row:
                r[i] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    _, pivots = row_reduce(a)
    return len(pivots)


def nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of the kernel of a, as columns of the returned matrix."""
    n_cols = a.shape[1]
    if n_cols == 0:
        return np.zeros((0, 0), dtype=np.uint8)
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(n_cols, dtype=np.uint8)
    rref, pivots = row_reduce(a)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = np.zeros((n_cols, len(free)), dtype=np.uint8)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for row, pc in enumerate(pivots):
            basis[pc, k] = rref[row, fc]
    return basis


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution x of a @ x = b over GF(2), or None if inconsistent."""
    b = np.asarray(b, dtype=np.uint8).reshape(-1) % 2
    if a.shape[1] == 0:
        return np.zeros(0, dtype=np.uint8) if not b.any() else None
    aug = np.concatenate([a % 2, b.reshape(-1, 1)], axis=1).astype(np.uint8)
    rref, pivots = row_reduce(aug)
    if a.shape[1] in pivots:
        return None
    x = np.zeros(a.shape[1], dtype=np.uint8)
    for row, pc in enumerate(pivots):
        x[pc] = rref[row, a.shape[1]]
    return x


def column_space(a: np.ndarray) -> np.ndarray:
    """Basis of the column space, as columns (a subset of input columns)."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=np.uint8)
    _, pivots = row_reduce(a % 2)
    return (a % 2)[:, pivots].astype(np.uint8)


def extend_basis(inner: np.ndarray, outer: np.ndarray) -> np.ndarray:
    """Columns of outer extending span(inner) to span(inner) + span(outer).

    Both arguments are column bases over the same ambient space. Used to pick
    homology representatives: outer = cycle basis, inner = boundary basis.
    """
    picked = []
    current = inner % 2
    base_rank = rank(current)
    for j in range(outer.shape[1]):
        cand = np.concatenate([current, outer[:, j : j + 1] % 2], axis=1)
        if rank(cand) > base_rank:
            picked.append(j)
            current = cand
            base_rank += 1
    if not picked:
        return np.zeros((outer.shape[0], 0), dtype=np.uint8)
    return (outer % 2)[:, picked].astype(np.uint8)
