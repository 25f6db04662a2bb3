"""From non-orthogonal monomial pairs to the largest compatible torus action.

Every confirmed ``<z^alpha, z^beta> != 0`` forces the character
``g_{alpha,beta}`` to be trivial, i.e. ``A^T (alpha - beta) = 0``.  The
largest admissible weight lattice is therefore the integer kernel of the
observed differences, which is saturated by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import lattice
from .moments import INCONCLUSIVE, NONZERO, GramData, Policy, decide_nonzero
from .torus import TorusAction

QC_SEARCH_BOUND = 12


def _canonical_sign(d: Sequence[int]) -> tuple[int, ...]:
    d = tuple(int(x) for x in d)
    for x in d:
        if x:
            return d if x > 0 else tuple(-y for y in d)
    return d


@dataclass
class DifferenceSet:
    """Differences ``alpha - beta`` of confirmed non-orthogonal pairs, one per sign class."""

    n: int
    provenance: dict[tuple[int, ...], list[tuple[tuple[int, ...], tuple[int, ...]]]] = field(default_factory=dict)
    inconclusive: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)

    @property
    def diffs(self) -> list[tuple[int, ...]]:
        return sorted(self.provenance)

    @property
    def inconclusive_count(self) -> int:
        return len(self.inconclusive)

    def add(self, d: Sequence[int], witness=None) -> None:
        d = _canonical_sign(d)
        if len(d) != self.n:
            raise ValueError("difference has wrong length")
        if not any(d):
            raise ValueError("the zero difference is never evidence")
        self.provenance.setdefault(d, [])
        if witness is not None:
            self.provenance[d].append(witness)

    def __contains__(self, d) -> bool:
        return _canonical_sign(d) in self.provenance

    @classmethod
    def from_vectors(cls, n: int, vectors: Iterable[Sequence[int]]) -> "DifferenceSet":
        out = cls(n)
        for v in vectors:
            if any(v):
                out.add(v)
        return out


def difference_set(gram: GramData, policy: Policy = Policy()) -> DifferenceSet:
    policy = policy.resolve(gram.volume)
    out = DifferenceSet(len(gram.indices[0]))
    for a, b in gram.upper_pairs():
        decision = decide_nonzero(gram[a, b], policy)
        if decision == NONZERO:
            out.add([x - y for x, y in zip(a, b)], (a, b))
        elif decision == INCONCLUSIVE:
            out.inconclusive.append((a, b))
    return out


def integer_kernel(diffs: DifferenceSet | Iterable[Sequence[int]], n: int) -> TorusAction:
    """Primitive basis of ``{m in Z^n : m . d = 0 for all d}`` as a torus action."""
    rows = diffs.diffs if isinstance(diffs, DifferenceSet) else [tuple(d) for d in diffs]
    return TorusAction(n, tuple(tuple(v) for v in lattice.kernel(rows, n)))


def lattice_membership(A: TorusAction, v: Sequence[int]) -> bool:
    if len(v) != A.n:
        raise ValueError("vector has wrong length")
    return lattice.contains(A.columns, v)


def _positive_vector(basis: list[list[int]], n: int, bound: int) -> list[int] | None:
    """Strictly positive lattice vector with the smallest max-entry, or None."""
    def better(v, best):
        key = (max(v), sum(v), tuple(v))
        return best is None or key < (max(best), sum(best), tuple(best))

    best = None
    for b in basis:
        for v in (b, [-x for x in b]):
            if all(x > 0 for x in v) and better(v, best):
                best = list(v)
    if best is not None:
        return lattice.primitive(best)
    r = len(basis)
    if r == 0:
        return None
    B = np.array(basis, dtype=np.int64)
    coeffs = np.arange(-bound, bound + 1)
    # chunk over the first coefficient to keep memory flat
    combos = list(itertools.product(coeffs.tolist(), repeat=r - 1))
    rest = np.array(combos, dtype=np.int64).reshape(len(combos), r - 1)
    for c0 in coeffs:
        C = np.column_stack([np.full(len(rest), c0), rest])
        V = C @ B
        pos = V[np.all(V > 0, axis=1)]
        for v in pos:
            if better(list(v), best):
                best = [int(x) for x in v]
    return lattice.primitive(best) if best is not None else None


@dataclass(frozen=True)
class SymmetryClassification:
    is_reinhardt: bool
    is_circular: bool
    hartogs_coords: tuple[int, ...]  # 1-based
    quasi_circular_weights: tuple[int, ...] | None
    detected_action: TorusAction
    caveats: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "is_reinhardt": self.is_reinhardt,
            "is_circular": self.is_circular,
            "hartogs_coords": list(self.hartogs_coords),
            "quasi_circular_weights": None if self.quasi_circular_weights is None
            else list(self.quasi_circular_weights),
            "detected_action": self.detected_action.to_json(),
            "caveats": list(self.caveats),
        }


def classify(A: TorusAction, bound: int = QC_SEARCH_BOUND) -> SymmetryClassification:
    n = A.n
    basis = A.lattice_basis()
    ones = [1] * n
    is_circular = lattice.contains(basis, ones)
    hartogs = tuple(j + 1 for j in range(n)
                    if lattice.contains(basis, [int(i == j) for i in range(n)]))
    caveats = []
    if is_circular:
        weights = tuple(ones)
    else:
        found = _positive_vector(basis, n, bound)
        weights = None if found is None else tuple(found)
        if found is None and A.r > 0:
            caveats.append(f"no positive weight vector found (coefficient bound {bound})")
    if A.r == 0:
        caveats.append("no torus symmetry detected")
    return SymmetryClassification(A.r == n, is_circular, hartogs, weights, A, tuple(caveats))
