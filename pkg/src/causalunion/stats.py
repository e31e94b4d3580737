"""Conditional independence tests and p-value bookkeeping.

Testers share one interface: ``test(x, y, z)`` returns a p-value in [0, 1] for
the null "x independent of y given z", or None when the test cannot be run
(too few samples or zero degrees of freedom).  Callers treat None as
dependence (the edge is kept) and no p-value is recorded.  Every computed
p-value is cached, and the running maximum per variable pair is kept as the
pair's association score for conflict resolution.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as sps


class PValueCache:
    """Caches p-values per (x, y, z) and tracks the max p-value per pair."""

    def __init__(self):
        self._by_query = {}
        self._pair_max = {}

    @staticmethod
    def _key(x, y, z):
        return (frozenset((x, y)), tuple(sorted(z)))

    def get(self, x, y, z):
        return self._by_query.get(self._key(x, y, z), None)

    def put(self, x, y, z, p):
        self._by_query[self._key(x, y, z)] = p
        if p is not None:
            pair = frozenset((x, y))
            prev = self._pair_max.get(pair)
            if prev is None or p > prev:
                self._pair_max[pair] = p

    def __contains__(self, query):
        return self._key(*query) in self._by_query

    def max_p(self, x, y):
        """Largest p-value seen for the pair, or None if never tested."""
        return self._pair_max.get(frozenset((x, y)))


class CITester:
    """Base: caching, alpha thresholding, and the observed-variable list."""

    def __init__(self, variables, alpha=0.1):
        self.variables = list(variables)
        self.alpha = alpha
        self.cache = PValueCache()
        self.n_tests = 0

    def test(self, x, y, z=()):
        z = tuple(sorted(z))
        if (x, y, z) in self.cache:
            return self.cache.get(x, y, z)
        p = self._compute(x, y, z)
        self.n_tests += 1
        self.cache.put(x, y, z, p)
        return p

    def independent(self, x, y, z=()):
        p = self.test(x, y, z)
        return p is not None and p > self.alpha

    def _compute(self, x, y, z):
        raise NotImplementedError


class FisherZTester(CITester):
    """Partial-correlation test for continuous data.

    The statistic is sqrt(n - |z| - 3) * atanh(r) where r is the partial
    correlation of x and y given z, compared against a standard normal.
    """

    def __init__(self, data, variables, alpha=0.1):
        super().__init__(variables, alpha)
        self.data = np.asarray(data, dtype=float)
        if self.data.shape[1] != len(self.variables):
            raise ValueError("data column count does not match variable list")
        self._col = {v: i for i, v in enumerate(self.variables)}
        self._corr = np.corrcoef(self.data, rowvar=False)
        if self._corr.ndim == 0:
            self._corr = self._corr.reshape(1, 1)

    def _compute(self, x, y, z):
        n = self.data.shape[0]
        dof = n - len(z) - 3
        if dof <= 0:
            return None
        idx = [self._col[x], self._col[y]] + [self._col[v] for v in z]
        sub = self._corr[np.ix_(idx, idx)]
        try:
            prec = np.linalg.inv(sub)
        except np.linalg.LinAlgError:
            prec = np.linalg.pinv(sub)
        denom = math.sqrt(abs(prec[0, 0] * prec[1, 1]))
        r = -prec[0, 1] / denom if denom > 0 else 0.0
        r = max(-1.0 + 1e-12, min(1.0 - 1e-12, r))
        stat = math.sqrt(dof) * math.atanh(r)
        return 2.0 * sps.norm.sf(abs(stat))


class GSquaredTester(CITester):
    """Likelihood-ratio test for discrete data, stratified on z.

    G2 = 2 * sum o * ln(o / e) over cells with positive observed count and
    positive expected count; degrees of freedom accumulate
    (rx - 1) * (ry - 1) per nonempty stratum, with rx and ry the number of
    levels of x and y actually present in the stratum.
    """

    def __init__(self, data, variables, alpha=0.1):
        super().__init__(variables, alpha)
        self.data = np.asarray(data)
        if self.data.shape[1] != len(self.variables):
            raise ValueError("data column count does not match variable list")
        self._col = {v: i for i, v in enumerate(self.variables)}

    def _compute(self, x, y, z):
        xs = self.data[:, self._col[x]]
        ys = self.data[:, self._col[y]]
        if z:
            zcols = self.data[:, [self._col[v] for v in z]]
            _, strata = np.unique(zcols, axis=0, return_inverse=True)
        else:
            strata = np.zeros(len(xs), dtype=int)
        g2 = 0.0
        df = 0
        for s in np.unique(strata):
            mask = strata == s
            sx, sy = xs[mask], ys[mask]
            xv, xi = np.unique(sx, return_inverse=True)
            yv, yi = np.unique(sy, return_inverse=True)
            if len(xv) < 2 or len(yv) < 2:
                continue
            table = np.zeros((len(xv), len(yv)))
            np.add.at(table, (xi, yi), 1)
            total = table.sum()
            expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
            nz = table > 0
            g2 += 2.0 * float(np.sum(table[nz] * np.log(table[nz] / expected[nz])))
            df += (len(xv) - 1) * (len(yv) - 1)
        if df == 0:
            return None
        return float(sps.chi2.sf(g2, df))


class OracleTester(CITester):
    """Exact test against a known manipulated causal graph: p-value 1 when the
    pair is m-separated given z, 0 otherwise."""

    def __init__(self, graph, variables, alpha=0.1):
        super().__init__(variables, alpha)
        self.graph = graph

    def _compute(self, x, y, z):
        from .graph import m_separated

        return 1.0 if m_separated(self.graph, x, y, z) else 0.0
