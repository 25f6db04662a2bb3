"""Domain descriptions in C^n: membership, bounding data, closed-form moments.

Every shape is an immutable dataclass.  ``contains`` is vectorised over an
``(m, n)`` complex array.  ``closed_form(alpha, beta)`` returns the exact
moment ``int_Omega z^alpha conj(z)^beta dv`` when one is known and ``None``
otherwise.

``declared_action`` is ground-truth metadata for tests; detection code must
never consult it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .profile import ProfileFunction, parse_profile
from .torus import TorusAction

MultiIndex = tuple[int, ...]
DifferenceVector = tuple[int, ...]


class NonIntegrableError(ValueError):
    """A requested monomial is not square integrable over the domain."""


def multi_index(exps: Sequence[int]) -> MultiIndex:
    out = tuple(int(e) for e in exps)
    if any(e < 0 for e in out):
        raise ValueError(f"multi-index entries must be nonnegative: {out}")
    return out


def degree(alpha: Sequence[int]) -> int:
    return sum(alpha)


def difference(alpha: Sequence[int], beta: Sequence[int]) -> DifferenceVector:
    if len(alpha) != len(beta):
        raise ValueError("multi-indices have different lengths")
    return tuple(int(a) - int(b) for a, b in zip(alpha, beta))


def multi_indices(n: int, N: int) -> list[MultiIndex]:
    """All alpha in N^n with |alpha| <= N, graded then reverse-lexicographic."""
    out: list[MultiIndex] = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + (a,), remaining - a, slots - 1)

    for d in range(N + 1):
        rec((), d, n)
    return out


def disk_moment(a: int, b: int, radius: float, center: complex = 0j) -> complex:
    """``int_{|z - c| < R} z^a conj(z)^b dA`` by binomial expansion about c."""
    c = complex(center)
    total = 0j
    for i in range(min(a, b) + 1):
        total += (
            math.comb(a, i) * math.comb(b, i)
            * c ** (a - i) * c.conjugate() ** (b - i)
            * math.pi * radius ** (2 * i + 2) / (i + 1)
        )
    return total


def ball_norm_closed_form(n: int, radius: float, alpha: Sequence[int]) -> float:
    """``||z^alpha||^2`` over the ball of the given radius in C^n."""
    k = sum(alpha)
    num = math.prod(math.factorial(a) for a in alpha)
    return radius ** (2 * k + 2 * n) * math.pi ** n * num / math.factorial(n + k)


def polydisk_norm_closed_form(radii: Sequence[float], alpha: Sequence[int]) -> float:
    return math.prod(math.pi * r ** (2 * a + 2) / (a + 1) for r, a in zip(radii, alpha))


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = out.get(e, 0j) + c1 * c2
    return out


def _linear_power(row: Sequence[complex], power: int) -> dict:
    n = len(row)
    lin = {tuple(int(i == j) for i in range(n)): complex(row[j]) for j in range(n) if row[j] != 0}
    out = {(0,) * n: 1 + 0j}
    for _ in range(power):
        out = _poly_mul(out, lin)
    return out


def _disk_box(radii: Sequence[float]) -> np.ndarray:
    r = np.asarray(radii, dtype=float)
    return np.column_stack([-r, r, -r, r])


class Domain:
    """Common interface; concrete shapes are the dataclasses below."""

    kind: str = "domain"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def bounded_coords(self) -> tuple[bool, ...]:
        return (True,) * self.dim

    @property
    def declared_action(self) -> Optional[TorusAction]:
        return None

    def contains(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def box(self, truncation: float | None = None) -> np.ndarray:
        """Per-coordinate rectangle ``[re_lo, re_hi, im_lo, im_hi]``, shape (n, 4)."""
        raise NotImplementedError

    def closed_form(self, alpha: MultiIndex, beta: MultiIndex) -> complex | None:
        return None

    def check_integrable(self, alpha: MultiIndex) -> None:
        """Raise :class:`NonIntegrableError` if ``z^alpha`` is not in L^2."""

    def summary(self) -> dict:
        return {"type": self.kind, "dim": self.dim}

    def direct_sampler(self) -> Callable | None:
        """Exact uniform sampler ``(rng, m) -> (m, n) points``, if the shape has one."""
        return None

    def exact_volume(self) -> float | None:
        v = self.closed_form((0,) * self.dim, (0,) * self.dim)
        return None if v is None else v.real


def _check_point(spec: Domain, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != spec.dim:
        raise ValueError(f"dimension mismatch: domain is in C^{spec.dim}, point has {z.shape[-1]} coordinates")
    return z


def membership(spec: Domain, z) -> bool:
    """True iff the single point ``z`` lies in the domain."""
    z = _check_point(spec, z)
    if z.ndim != 1:
        raise ValueError("membership takes a single point; use Domain.contains for batches")
    return bool(spec.contains(z[None, :])[0])


@dataclass(frozen=True)
class Polydisk(Domain):
    radii: tuple[float, ...]
    kind = "polydisk"

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ValueError("polydisk radii must be positive")

    @property
    def dim(self):
        return len(self.radii)

    @property
    def declared_action(self):
        return TorusAction.identity(self.dim)

    def contains(self, Z):
        return np.all(np.abs(Z) < np.asarray(self.radii), axis=-1)

    def box(self, truncation=None):
        return _disk_box(self.radii)

    def closed_form(self, alpha, beta):
        if tuple(alpha) != tuple(beta):
            return 0j
        return complex(polydisk_norm_closed_form(self.radii, alpha))

    def summary(self):
        return {"type": self.kind, "dim": self.dim, "radii": list(self.radii)}


@dataclass(frozen=True)
class Ball(Domain):
    radius: float = 1.0
    n: int = 2
    kind = "ball"

    def __post_init__(self):
        if self.radius <= 0 or self.n < 1:
            raise ValueError("ball needs positive radius and dimension")

    @property
    def dim(self):
        return self.n

    @property
    def declared_action(self):
        return TorusAction.identity(self.n)

    def contains(self, Z):
        return np.sum(Z.real ** 2 + Z.imag ** 2, axis=-1) < self.radius ** 2

    def box(self, truncation=None):
        return _disk_box([self.radius] * self.n)

    def closed_form(self, alpha, beta):
        if tuple(alpha) != tuple(beta):
            return 0j
        return complex(ball_norm_closed_form(self.n, self.radius, alpha))

    def summary(self):
        return {"type": self.kind, "dim": self.dim, "radius": self.radius}


@dataclass(frozen=True)
class PuncturedBall(Ball):
    """Ball minus one point; moment-equivalent to the full ball."""

    point: tuple[complex, ...] = ()
    kind = "punctured_ball"

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(complex(p) for p in self.point))
        if len(self.point) != self.n:
            raise ValueError("removed point must have one coordinate per dimension")
        super().__post_init__()

    @property
    def declared_action(self):
        # only rotations of coordinates where the removed point vanishes fix it
        cols = [tuple(int(i == j) for i in range(self.n)) for j in range(self.n) if self.point[j] == 0]
        return TorusAction(self.n, tuple(cols)) if cols else None

    def contains(self, Z):
        inside = super().contains(Z)
        return inside & ~np.all(Z == np.asarray(self.point), axis=-1)

    def summary(self):
        out = super().summary()
        out["removed_point"] = [[p.real, p.imag] for p in self.point]
        return out


@dataclass(frozen=True)
class LinearImageBall(Domain):
    """``T(B)`` for the unit ball B and an invertible complex matrix T."""

    matrix: tuple[tuple[complex, ...], ...]
    kind = "linear_image_ball"
    _inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        T = np.array(self.matrix, dtype=complex)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ValueError("matrix must be square")
        if abs(np.linalg.det(T)) < 1e-12:
            raise ValueError("matrix must be invertible")
        object.__setattr__(self, "matrix", tuple(tuple(complex(v) for v in row) for row in T))
        object.__setattr__(self, "_inv", np.linalg.inv(T))

    @property
    def dim(self):
        return len(self.matrix)

    @property
    def declared_action(self):
        return TorusAction(self.dim, ((1,) * self.dim,))

    def contains(self, Z):
        W = Z @ self._inv.T
        return np.sum(W.real ** 2 + W.imag ** 2, axis=-1) < 1.0

    def box(self, truncation=None):
        T = np.array(self.matrix)
        return _disk_box(np.sqrt(np.sum(np.abs(T) ** 2, axis=1)))

    def closed_form(self, alpha, beta):
        # change of variables z = T w: |det T|^2 * int_B (Tw)^alpha conj((Tw)^beta) dv
        n = self.dim
        pa = {(0,) * n: 1 + 0j}
        pb = {(0,) * n: 1 + 0j}
        for row, a, b in zip(self.matrix, alpha, beta):
            pa = _poly_mul(pa, _linear_power(row, a))
            pb = _poly_mul(pb, _linear_power(row, b))
        total = 0j
        for e, c in pa.items():
            d = pb.get(e)
            if d is not None:
                total += c * d.conjugate() * ball_norm_closed_form(n, 1.0, e)
        det = abs(np.linalg.det(np.array(self.matrix)))
        return total * det ** 2

    def summary(self):
        return {"type": self.kind, "dim": self.dim,
                "matrix": [[[v.real, v.imag] for v in row] for row in self.matrix]}


def _decay_exponent(f: Callable[[float], float]) -> float:
    """Heuristic power-decay exponent of a profile; ``inf`` for faster decay."""
    def local(R):
        a, b = f(R), f(2 * R)
        if not (a > 0 and b > 0) or not math.isfinite(a) or not math.isfinite(b):
            return math.inf
        return math.log(a / b) / math.log(2.0)

    p1, p2 = local(1e4), local(1e8)
    if math.isinf(p2) or p2 > 1.05 * p1 + 1e-9:
        return math.inf
    return p2


@dataclass(frozen=True)
class ProfileDomain(Domain):
    """``{(z1, z2) : |z2| < f(|z1|)}`` for a positive profile f."""

    profile: ProfileFunction
    z2_bound: float | None = None
    kind = "profile"

    @property
    def dim(self):
        return 2

    @property
    def bounded_coords(self):
        return (False, True)

    @property
    def declared_action(self):
        return TorusAction.identity(2)

    @cached_property
    def decay_exponent(self) -> float:
        return _decay_exponent(self.profile)

    def f(self, r):
        return self.profile(r)

    def contains(self, Z):
        return np.abs(Z[..., 1]) < self.f(np.abs(Z[..., 0]))

    def _z2_bound(self, R):
        if self.z2_bound is not None:
            return float(self.z2_bound)
        grid = np.linspace(0.0, R, 20001)
        return float(np.max(self.f(grid))) * 1.01

    def box(self, truncation=None):
        if truncation is None:
            raise ValueError("profile domains are unbounded in z1; a truncation radius is required")
        return _disk_box([truncation, self._z2_bound(truncation)])

    def check_integrable(self, alpha):
        from .condition_d import power_decay_membership

        p = self.decay_exponent
        if math.isinf(p):
            return
        # f ~ r^-p: |z1|^(2a1) |z2|^(2a2) integrable iff a1 < p (a2 + 1) - 1
        if not power_decay_membership(p * (alpha[1] + 1), 1.0, 1.0, alpha[0]):
            raise NonIntegrableError(
                f"z^{tuple(alpha)} is not square integrable: profile decays like r^-{p:.3g}"
            )

    def summary(self):
        return {"type": self.kind, "dim": 2, "profile": self.profile.pretty()}


@dataclass(frozen=True)
class ExpProfileFamily(ProfileDomain):
    """``{|z2| < exp(-|z1|^(1/2^k))}`` for k in {0, 1}."""

    profile: ProfileFunction = field(default=None, repr=False, compare=False)
    k: int = 0
    kind = "exp_profile"

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ValueError("k must be 0 or 1")
        expo = "1" if self.k == 0 else "0.5"
        object.__setattr__(self, "profile", parse_profile(f"exp(-r^{expo})"))

    def f(self, r):
        return np.exp(-np.power(r, 0.5 ** self.k))

    @property
    def decay_exponent(self):
        return math.inf

    def _z2_bound(self, R):
        return 1.0

    def closed_form(self, alpha, beta):
        from .condition_d import exact_omega_k_moment

        if tuple(alpha) != tuple(beta):
            return 0j
        return complex(exact_omega_k_moment(self.k, alpha[0], alpha[1]))

    def direct_sampler(self):
        # |z1| has density proportional to r f(r)^2; with u = 2 |z1|^(1/2^k)
        # that is Gamma(2^(k+1), 1).  Given z1, z2 is uniform in a disk.
        shape = 2.0 ** (self.k + 1)
        s = 2 ** self.k

        def draw(rng: np.random.Generator, m: int) -> np.ndarray:
            u = rng.gamma(shape, 1.0, size=m)
            r1 = (u / 2.0) ** s
            rho = np.exp(-u / 2.0) * np.sqrt(rng.random(m))
            t = rng.random((m, 2)) * (2 * np.pi)
            return np.column_stack([r1 * np.exp(1j * t[:, 0]), rho * np.exp(1j * t[:, 1])])

        return draw

    def summary(self):
        return {"type": self.kind, "dim": 2, "k": self.k}


@dataclass(frozen=True)
class TranslatedDiskProduct(Domain):
    """``{|z1 - c| < r1, |z2| < r2}``."""

    center: complex = 0.5
    r1: float = 1.0
    r2: float = 1.0
    kind = "translated_disk_product"

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if self.r1 <= 0 or self.r2 <= 0:
            raise ValueError("radii must be positive")

    @property
    def dim(self):
        return 2

    @property
    def declared_action(self):
        if self.center == 0:
            return TorusAction.identity(2)
        return TorusAction(2, ((0, 1),))

    def contains(self, Z):
        return (np.abs(Z[..., 0] - self.center) < self.r1) & (np.abs(Z[..., 1]) < self.r2)

    def box(self, truncation=None):
        c = self.center
        return np.array([
            [c.real - self.r1, c.real + self.r1, c.imag - self.r1, c.imag + self.r1],
            [-self.r2, self.r2, -self.r2, self.r2],
        ])

    def closed_form(self, alpha, beta):
        return (disk_moment(alpha[0], beta[0], self.r1, self.center)
                * disk_moment(alpha[1], beta[1], self.r2))

    def summary(self):
        return {"type": self.kind, "dim": 2, "center": [self.center.real, self.center.imag],
                "radii": [self.r1, self.r2]}


def _cubic_moment(a1: int, a2: int, b1: int, b2: int) -> complex:
    # z2 = z1^2 + w with |w| < 1, |z1| < 2; the shear has unit Jacobian
    total = 0j
    for i in range(min(a2, b2) + 1):
        total += (math.comb(a2, i) * math.comb(b2, i)
                  * disk_moment(a1 + 2 * (a2 - i), b1 + 2 * (b2 - i), 2.0)
                  * disk_moment(i, i, 1.0))
    return total


@dataclass(frozen=True)
class QuasiCircularCubic(Domain):
    """``{|z1^2 - z2| < 1, |z1| < 2}``, quasi-circular with weight (1, 2)."""

    kind = "quasi_circular_cubic"

    @property
    def dim(self):
        return 2

    @property
    def declared_action(self):
        return TorusAction(2, ((1, 2),))

    def contains(self, Z):
        z1, z2 = Z[..., 0], Z[..., 1]
        return (np.abs(z1 * z1 - z2) < 1.0) & (np.abs(z1) < 2.0)

    def box(self, truncation=None):
        return _disk_box([2.0, 5.0])

    def closed_form(self, alpha, beta):
        return _cubic_moment(alpha[0], alpha[1], beta[0], beta[1])


@dataclass(frozen=True)
class MixedQuasiReinhardt(Domain):
    """``{|z1^2 - z2| < 1, |z1| < 2, |z3| < 1}``."""

    kind = "mixed_quasi_reinhardt"

    @property
    def dim(self):
        return 3

    @property
    def declared_action(self):
        return TorusAction(3, ((1, 2, 0), (0, 0, 1)))

    def contains(self, Z):
        z1, z2, z3 = Z[..., 0], Z[..., 1], Z[..., 2]
        return (np.abs(z1 * z1 - z2) < 1.0) & (np.abs(z1) < 2.0) & (np.abs(z3) < 1.0)

    def box(self, truncation=None):
        return _disk_box([2.0, 5.0, 1.0])

    def closed_form(self, alpha, beta):
        return _cubic_moment(alpha[0], alpha[1], beta[0], beta[1]) * disk_moment(alpha[2], beta[2], 1.0)


@dataclass(frozen=True)
class PolydiskDifference(Domain):
    """``P(outer) minus the closure of P(inner)``."""

    outer: tuple[float, ...]
    inner: tuple[float, ...]
    kind = "polydisk_difference"

    def __post_init__(self):
        object.__setattr__(self, "outer", tuple(float(r) for r in self.outer))
        object.__setattr__(self, "inner", tuple(float(r) for r in self.inner))
        if len(self.outer) != len(self.inner) or not self.outer:
            raise ValueError("outer and inner radii must have the same nonzero length")
        if any(r <= 0 for r in self.outer + self.inner):
            raise ValueError("radii must be positive")

    @property
    def dim(self):
        return len(self.outer)

    @property
    def declared_action(self):
        return TorusAction.identity(self.dim)

    def contains(self, Z):
        A = np.abs(Z)
        in_outer = np.all(A < np.asarray(self.outer), axis=-1)
        in_inner_closure = np.all(A <= np.asarray(self.inner), axis=-1)
        return in_outer & ~in_inner_closure

    def box(self, truncation=None):
        return _disk_box(self.outer)

    def closed_form(self, alpha, beta):
        if tuple(alpha) != tuple(beta):
            return 0j
        overlap = [min(a, b) for a, b in zip(self.outer, self.inner)]
        return complex(polydisk_norm_closed_form(self.outer, alpha)
                       - polydisk_norm_closed_form(overlap, alpha))

    def summary(self):
        return {"type": self.kind, "dim": self.dim, "outer": list(self.outer), "inner": list(self.inner)}


@dataclass(frozen=True)
class Predicate(Domain):
    """Arbitrary membership test with per-coordinate modulus bounds.

    ``bounds[j] is None`` marks an unbounded coordinate; sampling then needs
    ``truncation`` and moments are labelled truncated.
    """

    test: Callable = field(compare=False)
    bounds: tuple[Optional[float], ...] = ()
    truncation: float | None = None
    vectorized: bool = False
    name: str = "predicate"
    kind = "predicate"

    def __post_init__(self):
        if not self.bounds:
            raise ValueError("predicate domains need one bound entry per coordinate")

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def bounded_coords(self):
        return tuple(b is not None for b in self.bounds)

    def contains(self, Z):
        Z = np.asarray(Z, dtype=complex)
        if self.vectorized:
            return np.asarray(self.test(Z), dtype=bool)
        return np.fromiter((bool(self.test(z)) for z in Z), dtype=bool, count=len(Z))

    def box(self, truncation=None):
        R = truncation if truncation is not None else self.truncation
        radii = []
        for b in self.bounds:
            if b is None:
                if R is None:
                    raise ValueError("unbounded coordinate needs a truncation radius")
                b = R
            radii.append(b)
        return _disk_box(radii)

    def summary(self):
        return {"type": self.kind, "dim": self.dim, "name": self.name,
                "bounds": list(self.bounds), "truncation": self.truncation}


SHEAR = ((1, 1), (0, 1))


def catalog() -> dict[str, Domain]:
    """Built-in test domains with known symmetry."""
    return {
        "polydisk": Polydisk((1.0, 1.0)),
        "ball": Ball(1.0, 2),
        "sheared_ball": LinearImageBall(SHEAR),
        "translated_disk_product": TranslatedDiskProduct(0.5, 1.0, 1.0),
        "quasi_circular_cubic": QuasiCircularCubic(),
        "mixed_quasi_reinhardt": MixedQuasiReinhardt(),
        "polydisk_difference": PolydiskDifference((2.0, 2.0), (1.0, 1.0)),
        "punctured_ball": PuncturedBall(1.0, 2, (0.5, 0.25)),
        "omega_0": ExpProfileFamily(k=0),
        "omega_1": ExpProfileFamily(k=1),
    }
