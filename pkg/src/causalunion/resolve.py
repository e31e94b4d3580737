"""Conflict resolution: choose a satisfiable subset of the soft constraints.

Observed features can contradict each other under finite samples.  Each
adjacency feature carries the maximum p-value seen for its pair; the pooled
p-values are modeled as a mixture of a uniform density (true independencies)
and a Beta(xi, 1) density with 0 < xi < 1 (true dependencies):

    f(p) = pi0 + (1 - pi0) * xi * p**(xi - 1)

The posterior-odds ratio between the two components scores how confidently a
p-value calls independence or dependence; features are re-directed to the more
probable side, sorted by that confidence, and greedily added to the hard
formula whenever they keep it satisfiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .solve import CdclSolver


class ConflictError(ValueError):
    pass


# -- mixture fitting --------------------------------------------------------


def storey_pi0(pvals):
    """Estimate the uniform-component weight: the survival ratio
    #{p > lam} / (M (1 - lam)) over a grid of lam, extrapolated by a
    least-squares line to lam = 0.9, clamped to [0.01, 1]."""
    p = np.asarray(pvals, dtype=float)
    lams = np.arange(0.05, 0.9001, 0.05)
    w = np.array([(p > lam).sum() / (len(p) * (1.0 - lam)) for lam in lams])
    slope, intercept = np.polyfit(lams, w, 1)
    pi0 = slope * 0.9 + intercept
    return float(min(1.0, max(0.01, pi0)))


def neg_log_likelihood(xi, pvals, pi0):
    p = np.asarray(pvals, dtype=float)
    p = np.clip(p, 1e-300, 1.0)
    return float(-np.sum(np.log(pi0 + (1.0 - pi0) * xi * p ** (xi - 1.0))))


def fit_xi(pvals, pi0, lo=1e-4, hi=1.0 - 1e-4, tol=1e-6):
    """Golden-section minimization of the negative log likelihood in xi."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = neg_log_likelihood(c, pvals, pi0)
    fd = neg_log_likelihood(d, pvals, pi0)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = neg_log_likelihood(c, pvals, pi0)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = neg_log_likelihood(d, pvals, pi0)
    return (a + b) / 2.0


def fit_mixture(pvals):
    """(pi0, xi) from pooled p-values; a flat default below 20 samples."""
    pvals = [p for p in pvals if p is not None]
    if len(pvals) < 20:
        return 0.5, 0.5
    pi0 = storey_pi0(pvals)
    xi = fit_xi(pvals, min(pi0, 1.0 - 1e-9))
    return pi0, xi


def log_odds_dependence(p, pi0, xi):
    """log E1(p): log odds that p comes from the dependence component."""
    if p <= 0.0:
        return math.inf
    pi0 = min(pi0, 1.0 - 1e-12)  # a weight of exactly 1 would zero the ratio
    return math.log(xi) + (xi - 1.0) * math.log(p) + math.log1p(-pi0) - math.log(pi0)


def mmr_score(p, pi0, xi):
    """(independent, score): which hypothesis the p-value favors, and the
    maximum of the two posterior-odds ratios quantifying the confidence."""
    l1 = log_odds_dependence(p, pi0, xi)
    if l1 < 0.0:
        return True, math.exp(-l1)
    return False, math.exp(l1) if l1 < 700 else math.inf


# -- strategies -------------------------------------------------------------


@dataclass
class ResolveReport:
    accepted: list = field(default_factory=list)  # SoftConstraint, as directed
    rejected: list = field(default_factory=list)
    flipped: list = field(default_factory=list)  # re-directed by the mixture
    pi0: float = None
    xi: float = None

    @property
    def n_accepted(self):
        return len(self.accepted)


def _directed_lit(cnf, soft, positive):
    return cnf.lit(soft.atom, positive)


def resolve(encoded, solver, strategy="mmr"):
    """Add a non-conflicting subset of soft constraints to the solver.

    strategy "none" adds every literal as observed and raises ConflictError if
    that is unsatisfiable; "mmr" scores, re-directs and greedily accepts.
    Accepted literals are added as unit clauses.  Returns a ResolveReport; the
    accepted list holds (SoftConstraint, polarity-as-added) pairs.
    """
    cnf = encoded.cnf
    report = ResolveReport()
    if strategy == "none":
        for s in encoded.soft:
            if not solver.add_clause([_directed_lit(cnf, s, s.positive)]):
                raise ConflictError(
                    f"constraints conflict at {s.kind} {s.nodes} (dataset {s.dataset})"
                )
            report.accepted.append((s, s.positive))
        if not solver.solve():
            raise ConflictError("observed constraints are jointly unsatisfiable")
        return report
    if strategy != "mmr":
        raise ValueError(f"unknown strategy {strategy!r}")

    adjacency_pvals = [
        s.pvalue for s in encoded.soft if s.kind == "adjacency" and s.pvalue is not None
    ]
    pi0, xi = fit_mixture(adjacency_pvals)
    report.pi0, report.xi = pi0, xi

    # score every pair once; colliders inherit the score of the independence
    # that separates their endpoints
    pair_scores = {}
    for s in encoded.soft:
        if s.kind == "adjacency" and s.pvalue is not None:
            independent, score = mmr_score(s.pvalue, pi0, xi)
            pair_scores[(s.dataset, s.nodes)] = (independent, score)

    ranked = []
    for s in encoded.soft:
        key = (s.dataset, s.score_pair)
        if s.kind == "adjacency":
            if key in pair_scores:
                independent, score = pair_scores[key]
                positive = not independent
                if positive != s.positive:
                    report.flipped.append(s)
            else:
                positive, score = s.positive, math.inf
        else:
            positive = True
            score = pair_scores.get(key, (None, math.inf))[1]
        ranked.append((score, s, positive))

    ranked.sort(
        key=lambda item: (
            -item[0],
            item[1].dataset,
            item[1].nodes,
            item[1].kind,
        )
    )

    if not solver.solve():
        raise ConflictError("hard constraints alone are unsatisfiable")
    for score, s, positive in ranked:
        lit = _directed_lit(cnf, s, positive)
        # the cached model often satisfies the literal already, skipping a call
        if solver.model_value(lit) or solver.solve([lit]):
            solver.add_clause([lit])
            report.accepted.append((s, positive))
        else:
            report.rejected.append((s, positive))
    return report
