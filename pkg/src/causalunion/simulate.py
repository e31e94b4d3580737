"""Synthetic studies: random causal models, linear-Gaussian sampling under
hard interventions, and quality metrics for summary graphs.

A study holds several datasets sampled from one linear-Gaussian structural
equation model.  Each dataset hides some variables and manipulates others
(replacing their equation with an exogenous standard normal).  The chosen
targets always form a conservative family: every variable is observed
unmanipulated in at least one dataset, which keeps the combined learning
problem well posed.
"""

from __future__ import annotations

import csv
import json
import pathlib
from dataclasses import dataclass, field

import numpy as np

from .graph import ARROW, TAIL, MixedGraph, latent_project_dag
from .pipeline import ALWAYS, NEVER

# -- random models ----------------------------------------------------------


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_dag(n, max_parents=5, seed=None):
    """Random DAG over X1..Xn: a uniformly shuffled topological order, with
    each node's parent count uniform on {0..min(max_parents, position)} and
    the parents drawn uniformly from its predecessors."""
    if n < 1:
        raise ValueError("need at least one node")
    if max_parents < 0:
        raise ValueError("max_parents must be nonnegative")
    rng = _rng(seed)
    names = [f"X{i + 1}" for i in range(n)]
    order = list(names)
    rng.shuffle(order)
    g = MixedGraph(names, "dag")
    for pos, child in enumerate(order):
        k = int(rng.integers(0, min(max_parents, pos) + 1))
        for parent in rng.choice(pos, size=k, replace=False) if k else []:
            g.add_directed(order[int(parent)], child)
    return g


def _implied_covariance(order, index, coef):
    n = len(order)
    b = np.zeros((n, n))
    for (parent, child), w in coef.items():
        b[index[child], index[parent]] = w
    a = np.linalg.inv(np.eye(n) - b)
    return a @ a.T  # unit-variance noise terms


def _min_partial_correlation(sigma, child, parents, index):
    """Smallest |partial correlation| of the child with each parent given the
    remaining parents, from the joint covariance."""
    worst = np.inf
    for p in parents:
        idx = [index[child], index[p]] + [index[q] for q in parents if q != p]
        prec = np.linalg.inv(sigma[np.ix_(idx, idx)])
        r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
        worst = min(worst, abs(r))
    return worst


def draw_coefficients(dag, seed=None, min_partial=0.2, attempts=500):
    """Edge weights with every child-parent conditional correlation at least
    min_partial in absolute value, found by redrawing until the bound holds."""
    rng = _rng(seed)
    index = {v: i for i, v in enumerate(dag.nodes)}
    children = [(v, sorted(dag.parents(v))) for v in dag.nodes if dag.parents(v)]

    def propose():
        out = {}
        for child, parents in children:
            for p in parents:
                w = rng.uniform(0.3, 0.9) * rng.choice([-1.0, 1.0])
                out[(p, child)] = w
        return out

    best_floor = -np.inf
    for _ in range(attempts):
        coef = propose()
        sigma = _implied_covariance(dag.nodes, index, coef)
        floor = min(
            (_min_partial_correlation(sigma, c, ps, index) for c, ps in children),
            default=np.inf,
        )
        if floor >= min_partial:
            return coef
        best_floor = max(best_floor, floor)
    raise ValueError(
        f"could not reach the {min_partial} conditional-correlation floor "
        f"(best attempt {best_floor:.3f})"
    )


# -- studies ----------------------------------------------------------------


@dataclass
class StudyDataset:
    name: str
    variables: list  # observed columns, in model-node order
    manipulated: tuple
    rows: np.ndarray  # shape (n_rows, len(variables))


@dataclass
class GeneratedStudy:
    dag: MixedGraph
    coefficients: dict
    datasets: list
    seed: object = None

    def globally_latent(self):
        observed = set()
        for d in self.datasets:
            observed.update(d.variables)
        return [v for v in self.dag.nodes if v not in observed]

    def ground_truth(self):
        """The model over the union of observed variables: the generating DAG
        with the never-observed variables marginalized out."""
        return latent_project_dag(self.dag, self.globally_latent())


def _choose_targets(nodes, n_datasets, max_latent, max_manip, rng, attempts=1000):
    """Per-dataset (latent, manipulated) picks forming a conservative family."""
    n = len(nodes)
    if max_latent + max_manip >= n and n > 1:
        raise ValueError("latent and manipulated caps leave no room for observation")
    for _ in range(attempts):
        picks = []
        for _ in range(n_datasets):
            n_lat = int(rng.integers(0, max_latent + 1))
            n_man = int(rng.integers(0, max_manip + 1))
            chosen = rng.choice(n, size=n_lat + n_man, replace=False)
            latent = tuple(sorted(nodes[int(i)] for i in chosen[:n_lat]))
            manip = tuple(sorted(nodes[int(i)] for i in chosen[n_lat:]))
            picks.append((latent, manip))
        free = set()
        for latent, manip in picks:
            free.update(set(nodes) - set(latent) - set(manip))
        if free == set(nodes):
            return picks
    raise ValueError("could not draw a conservative family of targets")


def _sample_rows(dag, coef, manipulated, n_rows, rng):
    cols = {}
    for v in _topo_order(dag):
        noise = rng.standard_normal(n_rows)
        if v in manipulated:
            cols[v] = noise
            continue
        total = noise
        for p in dag.parents(v):
            total = total + coef[(p, v)] * cols[p]
        cols[v] = total
    return cols


def _topo_order(dag):
    remaining = {v: set(dag.parents(v)) for v in dag.nodes}
    out = []
    while remaining:
        ready = sorted(v for v, ps in remaining.items() if not ps)
        if not ready:
            raise ValueError("graph has a cycle")
        for v in ready:
            out.append(v)
            del remaining[v]
        for ps in remaining.values():
            ps.difference_update(ready)
    return out


def sample_study(
    dag,
    n_datasets=5,
    max_latent=3,
    max_manip=2,
    n_rows=1000,
    seed=None,
    coefficients=None,
):
    """Sample a multi-dataset study from one linear-Gaussian model.

    Per dataset: disjoint latent and manipulated sets are drawn uniformly
    within their caps (redrawn until the family is conservative), manipulated
    variables are replaced by independent standard normals, n_rows samples are
    taken, and the latent columns are dropped.
    """
    rng = _rng(seed)
    coef = coefficients if coefficients is not None else draw_coefficients(dag, rng)
    picks = _choose_targets(list(dag.nodes), n_datasets, max_latent, max_manip, rng)
    datasets = []
    for i, (latent, manip) in enumerate(picks):
        cols = _sample_rows(dag, coef, set(manip), n_rows, rng)
        observed = [v for v in dag.nodes if v not in latent]
        rows = np.column_stack([cols[v] for v in observed])
        datasets.append(
            StudyDataset(
                name=f"d{i}", variables=observed, manipulated=manip, rows=rows
            )
        )
    return GeneratedStudy(dag=dag, coefficients=coef, datasets=datasets, seed=seed)


def write_study(study, directory):
    """Serialize as one CSV per dataset plus a manifest; the manifest is a
    valid pipeline input."""
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for d in study.datasets:
        path = directory / f"{d.name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(d.variables)
            w.writerows(np.round(d.rows, 8).tolist())
        entries.append(
            {
                "csv_path": path.name,
                "intervention_targets": list(d.manipulated),
                "value_kind": "continuous",
            }
        )
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=2))
    return manifest


# -- quality metrics --------------------------------------------------------


@dataclass
class QualityReport:
    s_precision: float  # None when undefined (0/0)
    s_recall: float
    o_precision: float
    o_recall: float
    dashed_edge_fraction: float
    dashed_endpoint_fraction: float
    counts: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(self.__dict__, indent=2)


def _ratio(num, den):
    return num / den if den else None


def _solid_mark(summary, x, y, end):
    """'arrow', 'tail' or None (undetermined) at `end` of the x--y edge."""
    if summary.mark(x, y, end, "arrow") == ALWAYS and (
        summary.mark(x, y, end, "tail") == NEVER
    ):
        return "arrow"
    if summary.mark(x, y, end, "tail") == ALWAYS and (
        summary.mark(x, y, end, "arrow") == NEVER
    ):
        return "tail"
    return None


def score_summary(summary, truth):
    """Compare a summary graph against the generating model.

    Edge scores use solid edges only; orientation scores use solidly
    determined endpoint marks only.  Ratios with zero denominator are None
    and should be excluded from aggregation.
    """
    extra = set(summary.nodes) - set(truth.nodes)
    if extra:
        raise ValueError(f"summary mentions unknown variables: {sorted(extra)}")
    solid = summary.solid_edges()
    dashed = summary.dashed_edges()
    present = solid + dashed
    solid_hits = sum(1 for x, y in solid if truth.is_adjacent(x, y))
    truth_edges = len(truth.pairs())

    n_oriented = 0
    o_hits = 0
    n_circled = 0
    for x, y in present:
        for end, other in ((x, y), (y, x)):
            mark = _solid_mark(summary, x, y, end)
            if mark is None:
                n_circled += 1
                continue
            n_oriented += 1
            if not truth.is_adjacent(x, y):
                continue
            marks = truth.marks_at(other, end)
            if mark == "arrow" and ARROW in marks:
                o_hits += 1
            elif mark == "tail" and TAIL in marks:
                o_hits += 1

    return QualityReport(
        s_precision=_ratio(solid_hits, len(solid)),
        s_recall=_ratio(solid_hits, truth_edges),
        o_precision=_ratio(o_hits, n_oriented),
        o_recall=_ratio(o_hits, 2 * truth_edges),
        dashed_edge_fraction=_ratio(len(dashed), len(present)) or 0.0,
        dashed_endpoint_fraction=(
            _ratio(n_circled, 2 * len(present)) or 0.0
        ),
        counts={
            "solid_edges": len(solid),
            "dashed_edges": len(dashed),
            "solid_edge_hits": solid_hits,
            "truth_edges": truth_edges,
            "oriented_endpoints": n_oriented,
            "oriented_hits": o_hits,
            "circled_endpoints": n_circled,
        },
    )
