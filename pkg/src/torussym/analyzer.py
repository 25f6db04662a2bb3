"""End-to-end pipeline: Gram data, differences, lattice, labels, Condition D, report.

The report never claims that the domain itself is symmetric.  Moments cannot
see measure-zero defects, so every conclusion is phrased for
``int(closure(Omega))``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .condition_d import HOLDS_BOUNDED, HOLDS_DIVERGENT, ConditionDVerdict, evaluate_condition_d
from .domains import Ball, Domain, Predicate, PuncturedBall, multi_index
from .moments import (DEFAULT_BUDGET, INCONCLUSIVE, MONTE_CARLO, NONZERO, ZERO, GramData, MomentEstimate,
                      Policy, decide_nonzero, gram, inner_product)
from .sampling import sample_uniform
from .symmetry import DifferenceSet, SymmetryClassification, classify, difference_set, integer_kernel
from .torus import TorusAction, apply_torus, eval_g, g_is_trivial

SCHEMA_VERSION = "1.0"
MAX_WITNESSES = 10
DEFAULT_TERMS = 40
DEFAULT_CHECK_SAMPLES = 20_000

# substream keys for the auxiliary random draws; sampling batches use (b,)
_LAMBDA_KEY = (0, 1)
_MU_KEY = (0, 2)


def default_degree(n: int) -> int:
    return {1: 6, 2: 4, 3: 3}.get(n, 2)


@dataclass(frozen=True)
class Budgets:
    mc_samples: int = DEFAULT_BUDGET
    terms: int = DEFAULT_TERMS
    check_samples: int = DEFAULT_CHECK_SAMPLES

    def to_json(self) -> dict:
        return {"mc_samples": self.mc_samples, "terms": self.terms, "check_samples": self.check_samples}


def _aux_rng(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _torus_points(rng: np.random.Generator, m: int, r: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random((m, r)))


def _pair(z) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z, dtype=complex)]


@dataclass(frozen=True)
class ViolationCheck:
    """Fraction of sampled points mapped outside the domain, with a few witnesses."""

    samples: int
    violations: int
    witnesses: tuple[tuple[list, list], ...] = ()
    label: str = "lambda"

    @property
    def rate(self) -> float:
        return self.violations / self.samples

    def to_json(self) -> dict:
        return {"samples": self.samples, "violations": self.violations, "violation_rate": self.rate,
                "witnesses": [{"z": z, self.label: w} for z, w in self.witnesses]}


def verify_invariance(spec: Domain, A: TorusAction, sample_count: int = 100_000,
                      seed: int = 0) -> ViolationCheck:
    """Sample z in the domain and lambda on the torus; count ``rho_A(lambda) z`` outside."""
    if A.n != spec.dim:
        raise ValueError("action and domain dimensions differ")
    Z = sample_uniform(spec, seed, sample_count).points
    lam = _torus_points(_aux_rng(seed, _LAMBDA_KEY), sample_count, A.r)
    bad = np.flatnonzero(~spec.contains(apply_torus(A, lam, Z)))
    wit = tuple((_pair(Z[i]), _pair(lam[i])) for i in bad[:MAX_WITNESSES])
    return ViolationCheck(sample_count, len(bad), wit, "lambda")


def check_complete_reinhardt(spec: Domain, sample_count: int = 100_000, seed: int = 0) -> ViolationCheck:
    """Star-shapedness under polydisk multipliers: is ``(mu_1 z_1, ..., mu_n z_n)`` still inside?"""
    Z = sample_uniform(spec, seed, sample_count).points
    rng = _aux_rng(seed, _MU_KEY)
    mu = np.sqrt(rng.random(Z.shape)) * np.exp(2j * np.pi * rng.random(Z.shape))
    bad = np.flatnonzero(~spec.contains(mu * Z))
    wit = tuple((_pair(Z[i]), _pair(mu[i])) for i in bad[:MAX_WITNESSES])
    return ViolationCheck(sample_count, len(bad), wit, "mu")


@dataclass(frozen=True)
class CalculationCheck:
    """``|<z^a, z^b> - g(lambda) <z^a, z^b>|`` over sampled lambda."""

    estimate: MomentEstimate
    g_trivial: bool
    max_residual: float
    residual_bound: float  # 8 x standard error: the worst case |1 - g| = 2
    passed: bool
    lambda_samples: int

    def to_json(self) -> dict:
        e = self.estimate
        return {"estimate": {"re": e.value.real, "im": e.value.imag, "se": e.std_error, "method": e.method},
                "g_trivial": self.g_trivial, "max_residual": self.max_residual,
                "residual_bound": self.residual_bound, "passed": self.passed,
                "lambda_samples": self.lambda_samples}


def verify_calculation_identity(spec: Domain, A: TorusAction, alpha, beta, lambda_samples: int = 100,
                                budget: int = DEFAULT_BUDGET, seed: int = 0,
                                method: str = "auto") -> CalculationCheck:
    """Check ``<z^a, z^b> = g_{a,b}(lambda) <z^a, z^b>`` for an action the domain is known to have.

    Each residual ``|1 - g| |m|`` is compared with four of its own standard
    errors ``|1 - g| se``; when g is trivial the residual is exactly zero.
    """
    alpha, beta = multi_index(alpha), multi_index(beta)
    est = inner_product(spec, alpha, beta, method, budget, seed)
    trivial = g_is_trivial(A, [a - b for a, b in zip(alpha, beta)])
    lams = _torus_points(_aux_rng(seed, _LAMBDA_KEY), lambda_samples, A.r)
    floor = 1e-12 * (1.0 + abs(est.value))
    worst, passed = 0.0, True
    for lam in lams:
        g = 1.0 if trivial else eval_g(A, alpha, beta, lam)
        gap = abs(1.0 - g)
        residual = abs(est.value - g * est.value)
        worst = max(worst, residual)
        if residual > 4.0 * gap * est.std_error + floor:
            passed = False
    return CalculationCheck(est, trivial, worst, 8.0 * est.std_error, passed, lambda_samples)


def closure_note(spec: Domain) -> tuple[str, bool | None]:
    """Text on int(closure(Omega)) and whether Omega is known to equal it."""
    base = "Conclusions concern int(closure(Omega)), the interior of the closure of the domain"
    if isinstance(spec, PuncturedBall):
        inside = bool(Ball(spec.radius, spec.n).contains(np.asarray([spec.point]))[0])
        if inside:
            return (base + "; here Omega is a ball minus a point, so int(closure(Omega)) is the full ball "
                    "and Omega itself is neither Reinhardt, circular nor Hartogs.", False)
    if isinstance(spec, Predicate):
        return base + "; whether Omega equals it is not known for a predicate domain.", None
    return base + "; for this domain the two coincide.", True


@dataclass
class SymmetryReport:
    domain: dict
    degree_bound: int
    method: str
    seed: int
    budgets: Budgets
    policy: Policy
    gram_stats: dict | None = None
    differences: DifferenceSet | None = None
    detected_action: TorusAction | None = None
    classification: SymmetryClassification | None = None
    condition_d: ConditionDVerdict | None = None
    theorem_asserted: bool = False
    theorem_statement: str = ""
    closure_note: str = ""
    omega_equals_closure_interior: bool | None = None
    star_shaped: dict | None = None
    unverified_hypotheses: list[str] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        diffs = self.differences
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": "torussym", "version": __version__},
            "domain": self.domain,
            "degree_bound": self.degree_bound,
            "method": self.method,
            "seed": self.seed,
            "budgets": self.budgets.to_json(),
            "policy": {"abs_tol": self.policy.abs_tol, "sigma_factor": self.policy.sigma_factor},
            "gram_stats": self.gram_stats,
            "differences": None if diffs is None else [
                {"diff": list(d), "witnesses": [[list(a), list(b)] for a, b in diffs.provenance[d]]}
                for d in diffs.diffs],
            "inconclusive_pairs": None if diffs is None else [[list(a), list(b)] for a, b in diffs.inconclusive],
            "detected_action": None if self.detected_action is None else self.detected_action.to_json(),
            "classification": None if self.classification is None else self.classification.to_json(),
            "condition_d": None if self.condition_d is None else self.condition_d.to_json(),
            "theorem_asserted": self.theorem_asserted,
            "theorem_statement": self.theorem_statement,
            "closure_note": self.closure_note,
            "omega_equals_closure_interior": self.omega_equals_closure_interior,
            "star_shaped": self.star_shaped,
            "unverified_hypotheses": self.unverified_hypotheses,
            "errors": self.errors,
        }

    def dumps(self) -> str:
        return dumps_stable(self.to_json())


def _gram_stats(g: GramData, policy: Policy) -> dict:
    counts = {NONZERO: 0, ZERO: 0, INCONCLUSIVE: 0}
    for a, b in g.upper_pairs():
        counts[decide_nonzero(g[a, b], policy)] += 1
    methods = sorted({e.method for e in g.entries.values()})
    return {"monomials": len(g.indices), "pairs": sum(counts.values()), "nonzero": counts[NONZERO],
            "zero": counts[ZERO], "inconclusive": counts[INCONCLUSIVE], "methods": methods,
            "volume": g.volume, "truncated": any(e.truncated for e in g.entries.values())}


def _action_text(A: TorusAction) -> str:
    return "[" + "; ".join(",".join(str(v) for v in c) for c in A.columns) + "]"


def analyze(spec: Domain, N: int | None = None, budgets: Budgets = Budgets(), policy: Policy = Policy(),
            seed: int = 0, method: str = "auto") -> SymmetryReport:
    """Detect the maximal torus action consistent with the observed non-orthogonality.

    Failures in a stage are recorded in ``errors`` and later stages that
    depend on it are skipped; the partial report is still returned.
    """
    N = default_degree(spec.dim) if N is None else N
    if N < 1:
        raise ValueError("degree bound must be at least 1")
    note, regular = closure_note(spec)
    rep = SymmetryReport(spec.summary(), N, method, seed, budgets, policy, closure_note=note,
                         omega_equals_closure_interior=regular)
    try:
        g = gram(spec, N, method, budgets.mc_samples, seed)
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        rep.errors.append({"stage": "gram", "message": f"{type(exc).__name__}: {exc}"})
        rep.theorem_statement = "Analysis incomplete; no conclusion about int(closure(Omega))."
        return rep
    resolved = policy.resolve(g.volume)
    rep.policy = resolved
    rep.gram_stats = _gram_stats(g, resolved)
    diffs = difference_set(g, resolved)
    rep.differences = diffs
    A = integer_kernel(diffs, spec.dim)
    rep.detected_action = A
    cls = classify(A)
    caveats = [c if c != "no torus symmetry detected" else f"no torus symmetry detected at degree {N}"
               for c in cls.caveats]
    if diffs.inconclusive_count:
        caveats.append(f"{diffs.inconclusive_count} inconclusive pair(s) excluded; the detected action is "
                       "maximal with respect to confirmed non-orthogonality")
    rep.classification = SymmetryClassification(cls.is_reinhardt, cls.is_circular, cls.hartogs_coords,
                                                cls.quasi_circular_weights, A, tuple(caveats))

    try:
        rep.condition_d = evaluate_condition_d(spec, budgets.terms, method, budgets.mc_samples, seed)
    except Exception as exc:  # noqa: BLE001
        rep.errors.append({"stage": "condition_d", "message": f"{type(exc).__name__}: {exc}"})

    if cls.is_reinhardt:
        try:
            star = check_complete_reinhardt(spec, budgets.check_samples, seed)
            rep.star_shaped = {"applicable": True, **star.to_json(), "star_shaped": star.violations == 0}
        except Exception as exc:  # noqa: BLE001
            rep.errors.append({"stage": "star_shaped", "message": f"{type(exc).__name__}: {exc}"})
    else:
        rep.star_shaped = {"applicable": False}

    rep.unverified_hypotheses = _unverified(rep, N)
    rep.theorem_asserted, rep.theorem_statement = _theorem(rep, N)
    return rep


def _unverified(rep: SymmetryReport, N: int) -> list[str]:
    out = [f"orthogonality observed only for monomials of degree <= {N}",
           "monomials forming an orthogonal basis (density is not detectable from finitely many moments)",
           "domain of holomorphy (not checked)"]
    if rep.gram_stats and MONTE_CARLO in rep.gram_stats["methods"]:
        out.append("zero/nonzero decisions are statistical (Monte Carlo)")
    if rep.gram_stats and rep.gram_stats["truncated"]:
        out.append("moments computed on a truncated domain")
    if rep.condition_d is not None:
        for j, v in sorted(rep.condition_d.per_coordinate.items()):
            if v.heuristic:
                out.append(f"Condition D in coordinate {j} is a heuristic verdict (fitted exponent)")
    return out


def _theorem(rep: SymmetryReport, N: int) -> tuple[bool, str]:
    reasons = []
    cd = rep.condition_d
    if cd is None:
        reasons.append("Condition D was not evaluated")
    else:
        failing = [j for j, v in sorted(cd.per_coordinate.items())
                   if v.verdict not in (HOLDS_BOUNDED, HOLDS_DIVERGENT)]
        if failing:
            reasons.append("Condition D not verified in coordinate(s) " + ", ".join(map(str, failing)))
    if rep.differences is not None and rep.differences.inconclusive_count:
        reasons.append(f"{rep.differences.inconclusive_count} inconclusive monomial pair(s)")
    if rep.errors:
        reasons.append("analysis errors")
    A = rep.detected_action
    if reasons:
        return False, ("Hypotheses not met (" + "; ".join(reasons) + "): no invariance of "
                       "int(closure(Omega)) is asserted.")
    if A.r == 0:
        return False, (f"Condition D holds but no torus symmetry was detected at degree {N}; "
                       "there is no invariance of int(closure(Omega)) to assert.")
    return True, (f"Condition D verified and the orthogonality pattern up to degree {N} is fully "
                  f"resolved: int(closure(Omega)) is rho_A-invariant for A with columns {_action_text(A)}.")


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps_stable(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion-ordered keys and floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_stable(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps_stable(v) for v in obj) + "]"
        items = [pad + dumps_stable(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
