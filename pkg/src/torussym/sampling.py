"""Reproducible uniform sampling on domains by box rejection.

Proposals are drawn in fixed-size batches; batch ``b`` always uses the
random substream ``SeedSequence(seed, spawn_key=(b,))``, so the accepted
points are identical whatever the number of worker threads.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domains import Domain, ProfileDomain

BATCH = 1 << 16
MIN_ACCEPTANCE = 1e-6
ACCEPTANCE_CHECK_AFTER = 100_000


class DegenerateDomainError(RuntimeError):
    """Rejection sampling accepts (almost) nothing."""


@dataclass(frozen=True)
class Sample:
    points: np.ndarray  # (count, n) complex
    volume: float
    volume_se: float
    proposals: int
    truncation: float | None = None

    @property
    def truncated(self) -> bool:
        return self.truncation is not None


def thread_count() -> int:
    env = os.environ.get("TORUSSYM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


def _rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(batch,)))


def default_truncation(spec: Domain, degree: int = 8) -> float | None:
    """Truncation radius for the unbounded coordinate of a profile domain.

    Doubles R until ``int_R^inf r^(d+1) f^2 dr`` is below ``1e-14`` of the
    head integral, for ``d = 2 * degree``.
    """
    if not isinstance(spec, ProfileDomain):
        return getattr(spec, "truncation", None)
    from scipy.integrate import IntegrationWarning, quad

    d = 2 * degree

    def integrand(r):
        return r ** (d + 1) * spec.f(r) ** 2

    R = 1.0
    for _ in range(60):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            head = quad(integrand, 0.0, R, limit=200)[0]
            tail = quad(integrand, R, np.inf, limit=200)[0]
        decreasing = spec.f(2 * R) <= spec.f(R)
        if head > 0 and tail < 1e-14 * head and decreasing:
            return R
        R *= 2.0
    raise DegenerateDomainError("could not certify a truncation radius for the profile tail")


def _propose(box: np.ndarray, rng: np.random.Generator, m: int) -> np.ndarray:
    # interleaved (re, im) columns viewed as complex without a copy
    lo = box[:, [0, 2]].reshape(-1)
    width = (box[:, [1, 3]] - box[:, [0, 2]]).reshape(-1)
    u = rng.random((m, 2 * len(box)))
    u *= width
    u += lo
    return u.view(np.complex128)


def sample_uniform(spec: Domain, seed: int, count: int, truncation: float | None = None,
                   threads: int | None = None) -> Sample:
    """Draw ``count`` i.i.d. uniform points of the domain (truncated if unbounded)."""
    if count < 1:
        raise ValueError("count must be positive")
    direct = spec.direct_sampler()
    if direct is not None:
        parts, have, b = [], 0, 0
        while have < count:
            pts = direct(_rng(seed, b), min(BATCH, count - have))
            parts.append(pts)
            have += len(pts)
            b += 1
        return Sample(np.concatenate(parts), spec.exact_volume(), 0.0, count)

    if not all(spec.bounded_coords) and truncation is None:
        truncation = default_truncation(spec)
    box = spec.box(truncation)
    box_volume = float(np.prod((box[:, 1] - box[:, 0]) * (box[:, 3] - box[:, 2])))
    threads = threads or thread_count()

    def run(b):
        pts = _propose(box, _rng(seed, b), BATCH)
        keep = spec.contains(pts)
        return pts[keep], np.flatnonzero(keep)

    parts, have, proposals, b = [], 0, 0, 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        while have < count:
            wave = list(pool.map(run, range(b, b + threads)))
            for pts, idx in wave:
                need = count - have
                if len(pts) >= need:
                    parts.append(pts[:need])
                    proposals += int(idx[need - 1]) + 1
                    have = count
                    break
                parts.append(pts)
                have += len(pts)
                proposals += BATCH
            b += threads
            if have < count and proposals >= ACCEPTANCE_CHECK_AFTER and have < MIN_ACCEPTANCE * proposals:
                raise DegenerateDomainError(
                    f"acceptance rate {have / proposals:.2e} after {proposals} proposals; "
                    "check the bounding box or truncation")
    rate = count / proposals
    volume = box_volume * rate
    volume_se = box_volume * math.sqrt(rate * (1.0 - rate) / proposals)
    return Sample(np.concatenate(parts), volume, volume_se, proposals,
                  truncation if not all(spec.bounded_coords) else None)
