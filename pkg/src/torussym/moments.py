"""Bergman-space moments ``<z^alpha, z^beta> = int_Omega z^alpha conj(z)^beta dv``.

Three routes: exact closed forms, 1-D radial quadrature for profile domains,
and Monte Carlo over a shared uniform sample.  ``method="auto"`` picks the
first that applies in that order.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .domains import Domain, ExpProfileFamily, MultiIndex, ProfileDomain, multi_index, multi_indices
from .profile import ProfileFunction
from .sampling import Sample, sample_uniform

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte_carlo"
METHODS = (CLOSED_FORM, QUADRATURE, MONTE_CARLO)

QUAD_RTOL = 1e-10
DEFAULT_BUDGET = 2_000_000
CHUNK = 1 << 16


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class MomentEstimate:
    value: complex
    std_error: float = 0.0
    method: str = CLOSED_FORM
    effort: int = 0
    tolerance: float = 0.0  # reported absolute error bound for quadrature
    truncated: bool = False

    def conjugate(self) -> "MomentEstimate":
        return MomentEstimate(self.value.conjugate(), self.std_error, self.method,
                              self.effort, self.tolerance, self.truncated)

    @property
    def deterministic(self) -> bool:
        return self.method != MONTE_CARLO


@dataclass(frozen=True)
class Policy:
    """Thresholds for :func:`decide_nonzero`.  ``abs_tol=None`` means 1e-3 x volume."""

    abs_tol: float | None = None
    sigma_factor: float = 5.0

    def resolve(self, volume: float) -> "Policy":
        if self.abs_tol is not None:
            return self
        return Policy(1e-3 * volume, self.sigma_factor)


NONZERO, ZERO, INCONCLUSIVE = "nonzero", "zero", "inconclusive"


def decide_nonzero(est: MomentEstimate, policy: Policy) -> str:
    if policy.abs_tol is None:
        raise ValueError("policy must be resolved against a volume first")
    mag = abs(est.value)
    noise = 0.0 if est.deterministic else policy.sigma_factor * est.std_error
    if mag > max(policy.abs_tol, noise):
        return NONZERO
    if mag + noise < policy.abs_tol:
        return ZERO
    return INCONCLUSIVE


def profile_moment_quadrature(f, alpha: Sequence[int], beta: Sequence[int],
                              truncation: float | None = None) -> MomentEstimate:
    """Moment over ``{|z2| < f(|z1|)}`` by 1-D radial quadrature.

    Off-diagonal moments vanish by the angular integrals.  The diagonal is
    ``(2 pi)^2 int_0^inf r^(2a1+1) f(r)^(2a2+2) / (2a2+2) dr``.
    """
    alpha, beta = multi_index(alpha), multi_index(beta)
    if alpha != beta:
        return MomentEstimate(0j, 0.0, QUADRATURE, 0, 0.0)
    a1, a2 = alpha
    fn = f if callable(f) else f.__call__
    e_r, e_f = 2 * a1 + 1, 2 * a2 + 2

    def integrand(r):
        return r ** e_r * fn(r) ** e_f

    if truncation is None:
        truncation = _certified_tail(integrand, fn)
    total, err, neval = 0.0, 0.0, 0
    # split at powers of two so each piece is well resolved
    edges = [0.0] + [2.0 ** k for k in range(-4, int(math.ceil(math.log2(truncation))) + 1)
                     if 2.0 ** k < truncation] + [truncation]
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e, info = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200, full_output=1)[:3]
        total += val
        err += e
        neval += info["neval"]
    if total <= 0 or err > QUAD_RTOL * total:
        raise QuadratureError(f"radial quadrature error {err:.3e} exceeds tolerance for {alpha}")
    scale = (2 * math.pi) ** 2 / e_f
    return MomentEstimate(complex(scale * total), 0.0, QUADRATURE, neval, scale * err)


def _certified_tail(integrand, f, rel: float = 1e-14) -> float:
    R = 1.0
    for _ in range(60):
        with warnings.catch_warnings():
            # a divergent tail is the failure being tested for
            warnings.simplefilter("ignore", IntegrationWarning)
            head = quad(integrand, 0.0, R, limit=200)[0]
            tail = quad(integrand, R, np.inf, limit=200)[0]
        if head > 0 and tail < rel * head and f(2 * R) <= f(R):
            return R
        R *= 2.0
    raise QuadratureError("tail bound cannot be certified; profile is not eventually decreasing")


def _monomials(Z: np.ndarray, indices: Sequence[MultiIndex]) -> np.ndarray:
    """Rows ``P[a] = z ** indices[a]`` over the points of ``Z`` (shape (len(indices), m))."""
    Zt = np.ascontiguousarray(Z.T)
    n, m = Zt.shape
    top = max((max(a) for a in indices), default=0)
    pw = np.empty((n, top + 1, m), dtype=complex)
    pw[:, 0] = 1.0
    for k in range(1, top + 1):
        np.multiply(pw[:, k - 1], Zt, out=pw[:, k])
    P = np.empty((len(indices), m), dtype=complex)
    for row, a in enumerate(indices):
        P[row] = pw[0, a[0]]
        for j in range(1, n):
            if a[j]:
                P[row] *= pw[j, a[j]]
    return P


def _mc_moments(sample: Sample, indices: Sequence[MultiIndex]) -> tuple[np.ndarray, np.ndarray]:
    """Shared-sample estimates and standard errors for every ordered pair."""
    m = len(indices)
    S1 = np.zeros((m, m), dtype=complex)
    S2 = np.zeros((m, m))
    Z = sample.points
    for start in range(0, len(Z), CHUNK):
        P = _monomials(Z[start:start + CHUNK], indices)
        S1 += P @ P.conj().T
        A = P.real ** 2 + P.imag ** 2
        S2 += A @ A.T
    cnt = len(Z)
    mean = S1 / cnt
    var = np.maximum(S2 / cnt - np.abs(mean) ** 2, 0.0)
    V, Vse = sample.volume, sample.volume_se
    est = V * mean
    se = np.sqrt(V ** 2 * var / cnt + np.abs(mean) ** 2 * Vse ** 2)
    return est, se


def _resolve_method(spec: Domain, method: str) -> str:
    has_closed = spec.closed_form((0,) * spec.dim, (0,) * spec.dim) is not None
    if method in ("auto", "quad", CLOSED_FORM, QUADRATURE):
        if has_closed and method != QUADRATURE:
            return CLOSED_FORM
        if isinstance(spec, ProfileDomain):
            return QUADRATURE
        if method == "auto":
            return MONTE_CARLO
        raise ValueError(f"no deterministic moment route for {spec.kind} domains")
    if method in ("mc", MONTE_CARLO):
        return MONTE_CARLO
    raise ValueError(f"unknown method {method!r}")


def inner_product(spec: Domain, alpha, beta, method: str = "auto", budget: int = DEFAULT_BUDGET,
                  seed: int = 0, sample: Sample | None = None) -> MomentEstimate:
    """Estimate ``<z^alpha, z^beta>`` over ``spec``."""
    alpha, beta = multi_index(alpha), multi_index(beta)
    if len(alpha) != spec.dim or len(beta) != spec.dim:
        raise ValueError("multi-index length does not match the domain dimension")
    spec.check_integrable(alpha)
    spec.check_integrable(beta)
    route = _resolve_method(spec, method)
    if route == CLOSED_FORM:
        return MomentEstimate(complex(spec.closed_form(alpha, beta)), 0.0, CLOSED_FORM, 0)
    if route == QUADRATURE:
        return profile_moment_quadrature(spec.f, alpha, beta)
    if sample is None:
        sample = sample_uniform(spec, seed, budget)
    est, se = _mc_moments(sample, [alpha, beta])
    return MomentEstimate(complex(est[0, 1]), float(se[0, 1]), MONTE_CARLO, len(sample.points),
                          truncated=sample.truncated)


@dataclass
class GramData:
    """Moments for all ordered pairs with ``|alpha|, |beta| <= N``."""

    N: int
    indices: list[MultiIndex]
    entries: dict[tuple[MultiIndex, MultiIndex], MomentEstimate] = field(repr=False)

    def __getitem__(self, pair) -> MomentEstimate:
        a, b = pair
        return self.entries[(tuple(a), tuple(b))]

    @property
    def volume(self) -> float:
        zero = (0,) * len(self.indices[0])
        return self.entries[(zero, zero)].value.real

    def upper_pairs(self) -> Iterable[tuple[MultiIndex, MultiIndex]]:
        for i, a in enumerate(self.indices):
            for b in self.indices[i + 1:]:
                yield a, b

    def to_json(self) -> dict:
        out = []
        for a in self.indices:
            for b in self.indices:
                e = self.entries[(a, b)]
                out.append({"alpha": list(a), "beta": list(b), "re": e.value.real, "im": e.value.imag,
                            "se": e.std_error, "method": e.method})
        return {"N": self.N, "entries": out}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "GramData":
        entries = {}
        indices: list[MultiIndex] = []
        seen = set()
        for e in data["entries"]:
            a, b = tuple(e["alpha"]), tuple(e["beta"])
            for idx in (a, b):
                if idx not in seen:
                    seen.add(idx)
                    indices.append(idx)
            entries[(a, b)] = MomentEstimate(complex(e["re"], e["im"]), e["se"], e["method"])
        return cls(int(data["N"]), indices, entries)

    @classmethod
    def loads(cls, text: str) -> "GramData":
        return cls.from_json(json.loads(text))


def gram(spec: Domain, N: int, method: str = "auto", budget: int = DEFAULT_BUDGET, seed: int = 0,
         sample: Sample | None = None) -> GramData:
    """All moments up to degree ``N``; the lower triangle is the exact conjugate of the upper.

    Monte Carlo entries share one point cloud, so their errors are correlated.
    """
    indices = multi_indices(spec.dim, N)
    for a in indices:
        spec.check_integrable(a)
    route = _resolve_method(spec, method)
    entries: dict = {}
    if route == MONTE_CARLO:
        if sample is None:
            sample = sample_uniform(spec, seed, budget)
        est, se = _mc_moments(sample, indices)
        for i, a in enumerate(indices):
            for j in range(i, len(indices)):
                b = indices[j]
                value = complex(est[i, j])
                if i == j:
                    # sum of |z^a|^2; any imaginary part is matmul rounding
                    value = complex(value.real, 0.0)
                e = MomentEstimate(value, float(se[i, j]), MONTE_CARLO, len(sample.points),
                                   truncated=sample.truncated)
                entries[(a, b)] = e
                entries[(b, a)] = e.conjugate()
    else:
        for i, a in enumerate(indices):
            for b in indices[i:]:
                e = inner_product(spec, a, b, route)
                if a == b:
                    e = MomentEstimate(complex(e.value.real, 0.0), e.std_error, e.method, e.effort,
                                       e.tolerance, e.truncated)
                entries[(a, b)] = e
                entries[(b, a)] = e.conjugate()
    return GramData(N, indices, entries)
