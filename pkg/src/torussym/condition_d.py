"""Carleman-type norm series ``sum_k ||z_j^k||^(-1/k)`` and its verdicts.

Norms are kept in log space: ``||z_1^200||`` on the k = 1 exponential
profile involves ``803!`` and overflows any float.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import Domain, ExpProfileFamily
from .moments import (CLOSED_FORM, DEFAULT_BUDGET, MONTE_CARLO, QUADRATURE, _mc_moments, _resolve_method,
                      inner_product)
from .sampling import sample_uniform

EXACT_FORMULA = "exact_formula"

HOLDS_BOUNDED = "holds_bounded"
HOLDS_DIVERGENT = "holds_divergent"
FAILS_CONVERGENT = "fails_convergent"
INCONCLUSIVE = "inconclusive"

MIN_TERMS = 10


def log_omega_k_moment(k: int, a1: int, a2: int) -> float:
    """``log ||z1^a1 z2^a2||^2`` on ``{|z2| < exp(-|z1|^(1/2^k))}``.

    The squared norm is ``2^(k+2) pi^2 (2^k (j+2) - 1)! / (m+2)^(2^k (j+2) + 1)``
    with ``j = 2 a1``, ``m = 2 a2``; the factorial is an exact integer.
    """
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    if a1 < 0 or a2 < 0:
        raise ValueError("exponents must be nonnegative")
    j, m = 2 * a1, 2 * a2
    e = 2 ** k * (j + 2)
    return (math.log(2 ** (k + 2)) + 2 * math.log(math.pi)
            + math.log(math.factorial(e - 1)) - (e + 1) * math.log(m + 2))


def exact_omega_k_moment(k: int, a1: int, a2: int) -> float:
    """Squared L^2 norm of ``z1^a1 z2^a2`` on the exponential profile domain.

    Returns ``inf`` past the double range; :func:`log_omega_k_moment` stays finite.
    """
    j, m = 2 * a1, 2 * a2
    e = 2 ** k * (j + 2)
    num = 2 ** (k + 2) * math.factorial(e - 1)
    den = (m + 2) ** (e + 1)
    try:
        ratio = num / den  # correctly rounded big-int division
    except OverflowError:
        return math.inf
    return math.pi ** 2 * ratio


def power_decay_membership(p: float, C1: float, C2: float, j: float) -> bool:
    """Whether ``z1^j`` can be square integrable when ``f(r) >= C1 r^-p`` for ``r >= C2``.

    The integral of ``r^(2j+1-2p)`` diverges at infinity exactly when
    ``j >= p - 1``; ``C1`` and ``C2`` only move the threshold's constant.
    """
    if p <= 0 or C1 <= 0 or C2 <= 0:
        raise ValueError("p, C1, C2 must be positive")
    return j < p - 1


@dataclass(frozen=True)
class NormSequence:
    """``(k, log ||z_j^k||)`` for k = 1..K."""

    coord: int  # 1-based
    log_norms: tuple[float, ...]
    source: str

    def __post_init__(self):
        if not self.log_norms:
            raise ValueError("empty norm sequence")
        if not all(math.isfinite(v) for v in self.log_norms):
            raise ValueError("norms must be positive and finite")

    @property
    def K(self) -> int:
        return len(self.log_norms)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    @property
    def norms(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(self.log_norms))

    @property
    def terms(self) -> np.ndarray:
        """``a_k = ||z_j^k||^(-1/k)``."""
        return np.exp(-np.asarray(self.log_norms) / self.ks)

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.terms)


def norm_sequence(spec: Domain, j: int, K: int, method: str = "auto", budget: int = DEFAULT_BUDGET,
                  seed: int = 0) -> NormSequence:
    """``||z_j^k||`` for k = 1..K (j is 1-based)."""
    n = spec.dim
    if not 1 <= j <= n:
        raise ValueError(f"coordinate {j} out of range for C^{n}")
    if K < 1:
        raise ValueError("K must be positive")

    def alpha(k):
        return tuple(k if i == j - 1 else 0 for i in range(n))

    for k in range(1, K + 1):
        try:
            spec.check_integrable(alpha(k))
        except ValueError as exc:
            raise type(exc)(f"z_{j}^{k} is the first non-integrable power: {exc}") from exc

    route = _resolve_method(spec, method)
    if route == CLOSED_FORM and isinstance(spec, ExpProfileFamily):
        logs = [0.5 * log_omega_k_moment(spec.k, *alpha(k)) for k in range(1, K + 1)]
        return NormSequence(j, tuple(logs), EXACT_FORMULA)
    if route in (CLOSED_FORM, QUADRATURE):
        logs = [0.5 * math.log(inner_product(spec, alpha(k), alpha(k), route).value.real)
                for k in range(1, K + 1)]
        return NormSequence(j, tuple(logs), EXACT_FORMULA if route == CLOSED_FORM else QUADRATURE)

    sample = sample_uniform(spec, seed, budget)
    est, _ = _mc_moments(sample, [alpha(k) for k in range(1, K + 1)])
    logs = [0.5 * math.log(est[i, i].real) for i in range(K)]
    return NormSequence(j, tuple(logs), MONTE_CARLO)


@dataclass(frozen=True)
class Thresholds:
    divergent_below: float = 1.2
    convergent_above: float = 1.6


@dataclass(frozen=True)
class CoordinateVerdict:
    coord: int
    verdict: str
    partial_sums: tuple[float, ...]
    fitted_exponent: float | None = None
    fitted_exponent_se: float | None = None
    naive_exponent: float | None = None
    source: str | None = None

    @property
    def heuristic(self) -> bool:
        return self.fitted_exponent is not None

    def to_json(self) -> dict:
        out = {"coord": self.coord, "verdict": self.verdict, "heuristic": self.heuristic,
               "source": self.source}
        if self.fitted_exponent is not None:
            out["fitted_exponent"] = self.fitted_exponent
            out["fitted_exponent_se"] = self.fitted_exponent_se
            out["naive_exponent"] = self.naive_exponent
        out["partial_sum"] = self.partial_sums[-1] if self.partial_sums else None
        return out


def fit_decay_exponent(seq: NormSequence) -> tuple[float, float, float]:
    """Estimate p in ``a_k ~ C k^-p`` from the window ``k in [K/2, K]``.

    Factorial-type norm growth puts ``log(k)/k`` and ``1/k`` corrections on
    ``log a_k`` (Stirling); they are fitted alongside so the slope is the
    asymptotic exponent rather than a finite-K secant.  Returns
    ``(p, standard error of p, plain log-log slope estimate)``.
    """
    ks = seq.ks.astype(float)
    y = np.log(seq.terms)
    sel = ks >= math.ceil(seq.K / 2)
    x, y = ks[sel], y[sel]
    lx = np.log(x)
    naive = -np.polyfit(lx, y, 1)[0]
    X = np.column_stack([np.ones_like(x), lx, lx / x, 1.0 / x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = len(x) - X.shape[1]
    resid = y - X @ coef
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.pinv(X.T @ X)
    return float(-coef[1]), float(math.sqrt(max(cov[1, 1], 0.0))), float(naive)


def condition_d_verdict(seq: NormSequence, bounded: bool,
                        thresholds: Thresholds = Thresholds()) -> CoordinateVerdict:
    sums = tuple(float(s) for s in seq.partial_sums)
    if bounded:
        return CoordinateVerdict(seq.coord, HOLDS_BOUNDED, sums, source=seq.source)
    if seq.K < MIN_TERMS:
        raise ValueError(f"the series fit needs at least {MIN_TERMS} terms, got {seq.K}")
    p, se, naive = fit_decay_exponent(seq)
    if p < thresholds.divergent_below:
        verdict = HOLDS_DIVERGENT
    elif p > thresholds.convergent_above:
        verdict = FAILS_CONVERGENT
    else:
        verdict = INCONCLUSIVE
    return CoordinateVerdict(seq.coord, verdict, sums, p, se, naive, seq.source)


@dataclass(frozen=True)
class ConditionDVerdict:
    per_coordinate: dict[int, CoordinateVerdict] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return bool(self.per_coordinate) and all(
            v.verdict in (HOLDS_BOUNDED, HOLDS_DIVERGENT) for v in self.per_coordinate.values())

    def to_json(self) -> dict:
        return {"holds": self.holds,
                "coordinates": [self.per_coordinate[j].to_json() for j in sorted(self.per_coordinate)]}


def evaluate_condition_d(spec: Domain, K: int = 40, method: str = "auto", budget: int = DEFAULT_BUDGET,
                         seed: int = 0, thresholds: Thresholds = Thresholds()) -> ConditionDVerdict:
    """Verdict for every coordinate; bounded projections hold without any norms."""
    out = {}
    for j, bounded in enumerate(spec.bounded_coords, start=1):
        if bounded:
            out[j] = CoordinateVerdict(j, HOLDS_BOUNDED, ())
            continue
        seq = norm_sequence(spec, j, K, method, budget, seed)
        out[j] = condition_d_verdict(seq, False, thresholds)
    return ConditionDVerdict(out)


def _format_log(ln: float) -> str:
    if ln < 700.0:
        return repr(math.exp(ln))
    L = ln / math.log(10.0)
    e = math.floor(L)
    return f"{10.0 ** (L - e):.15f}e+{e}"


def sequences_to_csv(rows: list[tuple[NormSequence, CoordinateVerdict]], header_lines=()) -> str:
    """CSV with columns coord, k, norm, a_k, partial_sum, verdict, fitted_p."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coord", "k", "norm", "a_k", "partial_sum", "verdict", "fitted_p"])
    for seq, verdict in rows:
        p = "" if verdict.fitted_exponent is None else repr(verdict.fitted_exponent)
        for k, ln, a, s in zip(seq.ks, seq.log_norms, seq.terms, seq.partial_sums):
            norm_text = _format_log(ln)
            w.writerow([seq.coord, int(k), norm_text, repr(float(a)), repr(float(s)),
                        verdict.verdict, p])
    return buf.getvalue()
