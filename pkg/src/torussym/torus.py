"""Diagonal torus actions ``rho_A`` on C^n and their characters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lattice

TORUS_TOL = 1e-12


@dataclass(frozen=True)
class TorusAction:
    """Integer weight matrix ``A`` (n x r), stored column by column.

    Column ``k`` holds the exponents of ``lambda_k`` on each coordinate.  The
    columns must be independent and span a saturated lattice; ``r == 0`` is
    the trivial action.
    """

    n: int
    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cols = tuple(tuple(int(v) for v in c) for c in self.columns)
        object.__setattr__(self, "columns", cols)
        if self.n < 1:
            raise ValueError("ambient dimension must be >= 1")
        if any(len(c) != self.n for c in cols):
            raise ValueError(f"every column must have length {self.n}")
        if lattice.rank(cols, self.n) != len(cols):
            raise ValueError("columns are not linearly independent")
        if not lattice.is_saturated(cols, self.n):
            raise ValueError("columns do not span a saturated lattice")

    @property
    def r(self) -> int:
        return len(self.columns)

    @property
    def matrix(self) -> np.ndarray:
        """``A`` as an (n, r) int64 array."""
        return np.array(self.columns, dtype=np.int64).reshape(self.r, self.n).T

    @classmethod
    def identity(cls, n: int) -> "TorusAction":
        return cls(n, tuple(tuple(int(i == k) for i in range(n)) for k in range(n)))

    @classmethod
    def trivial(cls, n: int) -> "TorusAction":
        return cls(n, ())

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], n: int | None = None) -> "TorusAction":
        columns = [list(c) for c in columns]
        if n is None:
            if not columns:
                raise ValueError("dimension required for the trivial action")
            n = len(columns[0])
        return cls(n, tuple(tuple(c) for c in columns))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "TorusAction":
        """Parse ``"1,0;0,1"``: columns separated by ``;``, entries by ``,``."""
        text = text.strip()
        if not text:
            return cls.from_columns([], n)
        cols = [[int(x) for x in part.split(",")] for part in text.split(";")]
        return cls.from_columns(cols, n)

    def lattice_basis(self) -> list[list[int]]:
        """Canonical (Hermite) basis of the column lattice."""
        return lattice.hnf(self.columns, self.n)

    def same_lattice(self, other: "TorusAction") -> bool:
        return self.n == other.n and lattice.same_lattice(self.columns, other.columns, self.n)

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "columns": [list(c) for c in self.columns]}

    @classmethod
    def from_json(cls, data: dict) -> "TorusAction":
        act = cls(int(data["n"]), tuple(tuple(c) for c in data["columns"]))
        if act.r != int(data["r"]):
            raise ValueError("r does not match the number of columns")
        return act


def _check_torus(lam: np.ndarray) -> None:
    if lam.size and np.max(np.abs(np.abs(lam) - 1.0)) > TORUS_TOL:
        raise ValueError("torus point has a coordinate off the unit circle")


def coordinate_factors(A: TorusAction, lam) -> np.ndarray:
    """``prod_k lam_k ** a_jk`` for each coordinate j.

    ``lam`` may be a single torus point (shape (r,)) or a batch (m, r).
    """
    lam = np.asarray(lam, dtype=complex)
    if lam.shape[-1:] != (A.r,):
        raise ValueError(f"torus point must have {A.r} coordinates")
    _check_torus(lam)
    M = A.matrix  # (n, r)
    powers = lam[..., None, :] ** M  # (..., n, r)
    return np.prod(powers, axis=-1)


def apply_torus(A: TorusAction, lam, z) -> np.ndarray:
    """``rho_A(lam) z``; broadcasts over leading batch axes of ``lam`` and ``z``."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != A.n:
        raise ValueError(f"point must have {A.n} coordinates, got {z.shape[-1]}")
    return coordinate_factors(A, lam) * z


def character_exponents(A: TorusAction, d: Sequence[int]) -> list[int]:
    """``A^T d``: the exponent of each ``lambda_k`` in ``g_{alpha,beta}``."""
    if len(d) != A.n:
        raise ValueError("difference vector has wrong length")
    return [sum(int(a) * int(x) for a, x in zip(col, d)) for col in A.columns]


def g_is_trivial(A: TorusAction, d: Sequence[int]) -> bool:
    return all(e == 0 for e in character_exponents(A, d))


def eval_g(A: TorusAction, alpha: Sequence[int], beta: Sequence[int], lam) -> complex:
    """The character ``g_{alpha,beta}(lam) = prod_k lam_k ** (A^T (alpha - beta))_k``."""
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.size != A.r:
        raise ValueError(f"torus point must have {A.r} coordinates")
    _check_torus(lam)
    d = [int(a) - int(b) for a, b in zip(alpha, beta)]
    out = complex(1.0)
    for lk, e in zip(lam, character_exponents(A, d)):
        if e:
            out *= complex(lk) ** e
    return out
