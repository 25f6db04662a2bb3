"""Exact integer lattice algebra on Python ints (no overflow).

Lattices are given by generating rows.  Everything canonical goes through
the row Hermite normal form: pivots positive, entries above each pivot
reduced into ``[0, pivot)``, zero rows dropped.
"""

from __future__ import annotations

from typing import Iterable, Sequence

Matrix = list[list[int]]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``a*x + b*y = g``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _as_matrix(rows: Iterable[Sequence[int]], ncols: int | None = None) -> Matrix:
    out = [[int(v) for v in row] for row in rows]
    if ncols is not None and any(len(row) != ncols for row in out):
        raise ValueError(f"every row must have length {ncols}")
    return out


def row_echelon(rows: Iterable[Sequence[int]], ncols: int, *, track: bool = False):
    """Unimodular row reduction to echelon form.

    Returns ``(H, U, pivots)`` with ``U @ M == H``; ``H`` keeps the zero rows
    at the bottom so that the tail rows of ``U`` span the left kernel of M.
    ``U`` is ``None`` unless ``track`` is set.
    """
    H = _as_matrix(rows, ncols)
    m = len(H)
    U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        if top == m:
            break
        for i in range(top + 1, m):
            if H[i][col] == 0:
                continue
            a, b = H[top][col], H[i][col]
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            # [[x, y], [-q, p]] has determinant 1
            rt, ri = H[top], H[i]
            H[top] = [x * s + y * t for s, t in zip(rt, ri)]
            H[i] = [-q * s + p * t for s, t in zip(rt, ri)]
            if U is not None:
                ut, ui = U[top], U[i]
                U[top] = [x * s + y * t for s, t in zip(ut, ui)]
                U[i] = [-q * s + p * t for s, t in zip(ut, ui)]
        if H[top][col] == 0:
            continue
        if H[top][col] < 0:
            H[top] = [-v for v in H[top]]
            if U is not None:
                U[top] = [-v for v in U[top]]
        piv = H[top][col]
        for i in range(top):
            q = H[i][col] // piv
            if q:
                H[i] = [s - q * t for s, t in zip(H[i], H[top])]
                if U is not None:
                    U[i] = [s - q * t for s, t in zip(U[i], U[top])]
        pivots.append(col)
        top += 1
    return H, U, pivots


def hnf(rows: Iterable[Sequence[int]], ncols: int) -> Matrix:
    """Row Hermite normal form of the lattice spanned by ``rows``."""
    H, _, pivots = row_echelon(rows, ncols)
    return H[: len(pivots)]


def rank(rows: Iterable[Sequence[int]], ncols: int) -> int:
    return len(hnf(rows, ncols))


def kernel(rows: Iterable[Sequence[int]], ncols: int) -> Matrix:
    """Canonical basis of ``{m in Z^ncols : m . d = 0 for every row d}``.

    The result is saturated: it is the full integer kernel, not just a
    finite-index sublattice of it.
    """
    rows = _as_matrix(rows, ncols)
    if not rows:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    # reduce the transpose; zero rows of the echelon form pick out kernel vectors
    transposed = [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]
    H, U, pivots = row_echelon(transposed, len(rows), track=True)
    basis = U[len(pivots):]
    return hnf(basis, ncols)


def contains(basis: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """True iff ``v`` is an integer combination of the rows of ``basis``."""
    v = [int(x) for x in v]
    if not basis:
        return all(x == 0 for x in v)
    H = hnf(basis, len(v))
    for row in H:
        col = next(j for j, x in enumerate(row) if x)
        q, rem = divmod(v[col], row[col])
        if rem:
            return False
        if q:
            v = [s - q * t for s, t in zip(v, row)]
    return all(x == 0 for x in v)


def saturation(basis: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Smallest saturated lattice containing the rows of ``basis``."""
    return kernel(kernel(basis, ncols), ncols)


def is_saturated(basis: Sequence[Sequence[int]], ncols: int) -> bool:
    return all(contains(basis, v) for v in saturation(basis, ncols))


def same_lattice(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], ncols: int) -> bool:
    return hnf(a, ncols) == hnf(b, ncols)


def primitive(v: Sequence[int]) -> list[int]:
    """Divide ``v`` by the gcd of its entries."""
    g = 0
    for x in v:
        g = _xgcd(g, int(x))[0]
    return [int(x) // g for x in v] if g else [int(x) for x in v]
