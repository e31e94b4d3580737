"""Translate per-dataset PAGs into one SAT instance over a shared causal model.

Core boolean variables describe the candidate model S over the union of
observed variables:

- ("edge", (X, Y))   X and Y adjacent in S (pair sorted)
- ("arrow", X, Y)    some edge between X and Y is into Y
- ("tail", X, Y)     some edge between X and Y is out of Y

arrow and tail may hold together at one endpoint (a directed plus a bidirected
edge between the same pair).  Everything else (per-dataset adjacency, collider
status, ancestry) is defined from these via auxiliary variables so that the
hard formula's models are exactly the candidate models consistent with the
soft constraints chosen later.

Each dataset i has latent set L_i (variables never measured there) and
manipulated set I_i.  Manipulating a variable removes every edge into it, so
paths and endpoint conditions are specialized per dataset at build time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .cnf import Cnf
from .graph import ARROW, CIRCLE, MixedGraph


# -- search graph -----------------------------------------------------------


def build_search_graph(results):
    """Initial graph H bounding the model search space.

    H carries the union of all PAG skeletons plus edges between pairs that
    were never measured together unmanipulated (such an edge could exist yet
    be invisible in every dataset).  The only orientations kept are arrowheads
    that hold in every PAG showing the edge, plus arrowheads into manipulated
    members of the never-jointly-unmanipulated pairs; both kinds are sound for
    every consistent model.
    """
    nodes = []
    for r in results:
        for v in r.variables:
            if v not in nodes:
                nodes.append(v)
    h = MixedGraph(nodes, "search")
    for r in results:
        for x, y in r.pag.pairs():
            if not h.is_adjacent(x, y):
                h.add_edge(x, y, CIRCLE, CIRCLE)
    # invariant arrowheads across every PAG that has the edge
    for x, y in h.pairs():
        for a, b in ((x, y), (y, x)):
            votes = [
                r.pag.mark_at(a, b)
                for r in results
                if a in r.variables and b in r.variables and r.pag.is_adjacent(a, b)
            ]
            if votes and all(m == ARROW for m in votes):
                h.set_mark(a, b, ARROW)
    # pairs never measured together unmanipulated
    for x, y in combinations(nodes, 2):
        if h.is_adjacent(x, y):
            continue
        jointly_free = any(
            x in r.variables
            and y in r.variables
            and x not in r.manipulated
            and y not in r.manipulated
            for r in results
        )
        if jointly_free:
            continue
        h.add_edge(x, y, CIRCLE, CIRCLE)
        for a, b in ((x, y), (y, x)):
            # a manipulated while both measured: any edge must point into a
            if any(
                a in r.variables
                and b in r.variables
                and a in r.manipulated
                and b not in r.manipulated
                for r in results
            ):
                h.set_mark(b, a, ARROW)
    return h


# -- path enumeration -------------------------------------------------------


def possibly_inducing_paths(h, x, y, latent, manip, mpl):
    """Simple paths x..y in H that could be inducing paths w.r.t. latent in
    the model manipulated at manip.

    Interior nodes may not be manipulated (a collider needs arrows into it, a
    non-collider must be latent, and latent variables are never manipulated).
    A manipulated endpoint needs its path edge out of it, impossible when H
    fixes an arrowhead there.
    """
    bound = mpl if mpl is not None else len(h.nodes) - 1
    paths = []

    def dfs(path):
        v = path[-1]
        if v == y:
            if x in manip and h.marks_at(path[1], x) == frozenset({ARROW}):
                return
            if y in manip and h.marks_at(path[-2], y) == frozenset({ARROW}):
                return
            paths.append(tuple(path))
            return
        if len(path) - 1 >= bound:
            return
        for w in h.neighbors(v):
            if w in path:
                continue
            if w != y and w in manip:
                continue
            dfs(path + [w])

    dfs([x])
    return paths


def possibly_ancestral_paths(h, x, y, manip, mpl):
    """Simple paths x..y in H that could be directed x -> ... -> y in the
    manipulated model: no fixed arrowhead at the out-end of any step, and no
    node after x manipulated (each receives an arrow)."""
    bound = mpl if mpl is not None else len(h.nodes) - 1
    paths = []

    def dfs(path):
        v = path[-1]
        if v == y:
            paths.append(tuple(path))
            return
        if len(path) - 1 >= bound:
            return
        for w in h.neighbors(v):
            if w in path or w in manip:
                continue
            if h.marks_at(w, v) == frozenset({ARROW}):
                continue  # arrow fixed at v: edge cannot leave v
            dfs(path + [w])

    dfs([x])
    return paths


# -- constraint generation --------------------------------------------------


@dataclass
class SoftConstraint:
    atom: tuple
    positive: bool
    kind: str  # "adjacency", "collider" or "noncollider"
    pvalue: object  # float or None when no test backs the feature
    dataset: int
    nodes: tuple
    score_pair: tuple  # the pair whose association p-value ranks this literal

    def lit(self, cnf):
        return cnf.lit(self.atom, self.positive)


@dataclass
class EncodeResult:
    cnf: Cnf
    search: MixedGraph
    soft: list
    core_atoms: list
    datasets: list  # (name, observed, manipulated, latent) per dataset

    def core_vars(self):
        return [self.cnf.registry.var(a) for a in self.core_atoms]


class _Encoder:
    def __init__(self, results, mpl):
        self.results = results
        self.mpl = mpl
        self.h = build_search_graph(results)
        self.cnf = Cnf()
        self.soft = []
        self.core_atoms = []
        self._defined = set()

    # atom helpers; edge pairs sorted, experiments keyed by manipulated set

    def edge(self, x, y):
        return self.cnf.lit(("edge", tuple(sorted((x, y)))))

    def arrow(self, x, y):
        return self.cnf.lit(("arrow", x, y))

    def tail(self, x, y):
        return self.cnf.lit(("tail", x, y))

    def adjacent(self, x, y, i):
        return self.cnf.lit(("adj", tuple(sorted((x, y))), i))

    def run(self):
        self._core()
        self._acyclicity()
        for i, r in enumerate(self.results):
            latent = frozenset(self.h.nodes) - frozenset(r.variables)
            manip = frozenset(r.manipulated)
            self._adjacencies(i, r, latent, manip)
            self._triples(i, r, manip)
            self._disc_paths(i, r, manip)
        return EncodeResult(
            cnf=self.cnf,
            search=self.h,
            soft=self.soft,
            core_atoms=self.core_atoms,
            datasets=[
                (
                    r.name or str(i),
                    tuple(r.variables),
                    tuple(sorted(r.manipulated)),
                    tuple(sorted(frozenset(self.h.nodes) - frozenset(r.variables))),
                )
                for i, r in enumerate(self.results)
            ],
        )

    # -- structural clauses ----------------------------------------------

    def _core(self):
        for x, y in self.h.pairs():
            e = self.edge(x, y)
            marks = []
            for a, b in ((x, y), (y, x)):
                ar, tl = self.arrow(a, b), self.tail(a, b)
                marks.append((a, b, ar, tl))
                self.cnf.add([-ar, e])  # no mark without the edge
                self.cnf.add([-tl, e])
                self.cnf.add([-e, ar, tl])  # every endpoint carries a mark
            self.cnf.add([-self.tail(x, y), -self.tail(y, x)])  # one tail max
            for a, b, ar, tl in marks:
                if self.h.marks_at(a, b) == frozenset({ARROW}):
                    self.cnf.add([-e, ar])
                    self.cnf.add([-tl])
            self.core_atoms.extend(
                [
                    ("edge", tuple(sorted((x, y)))),
                    ("arrow", x, y),
                    ("arrow", y, x),
                    ("tail", x, y),
                    ("tail", y, x),
                ]
            )

    def _acyclicity(self):
        for x, y in combinations(self.h.nodes, 2):
            axy = self._ancestor(x, y, frozenset())
            ayx = self._ancestor(y, x, frozenset())
            self.cnf.add([-axy, -ayx])

    # -- ancestry ---------------------------------------------------------

    def _ancestor(self, x, y, manip):
        key = ("anc", x, y, tuple(sorted(manip)))
        lit = self.cnf.lit(key)
        if key in self._defined:
            return lit
        self._defined.add(key)
        disjuncts = []
        for p in possibly_ancestral_paths(self.h, x, y, manip, self.mpl):
            disjuncts.append(self._ancestral_path(p, manip))
        self.cnf.add_iff_or(lit, disjuncts)
        return lit

    def _ancestral_path(self, path, manip):
        key = ("ancp", path, tuple(sorted(manip)))
        lit = self.cnf.lit(key)
        if key in self._defined:
            return lit
        self._defined.add(key)
        conj = []
        for a, b in zip(path, path[1:]):
            # directed a -> b: tail at a, arrow at b (edge implied by marks)
            conj.append(self.tail(b, a))
            conj.append(self.arrow(a, b))
        self.cnf.add_iff_and(lit, conj)
        return lit

    # -- adjacency constraints --------------------------------------------

    def _adjacencies(self, i, r, latent, manip):
        for x, y in combinations(r.variables, 2):
            adj = self.adjacent(x, y, i)
            disjuncts = []
            for p in possibly_inducing_paths(self.h, x, y, latent, manip, self.mpl):
                disjuncts.append(self._inducing_path(p, i, latent, manip))
            self.cnf.add_iff_or(adj, disjuncts)
            positive = r.pag.is_adjacent(x, y)
            pval = r.tester.cache.max_p(x, y) if r.tester is not None else None
            self.soft.append(
                SoftConstraint(
                    atom=("adj", tuple(sorted((x, y))), i),
                    positive=positive,
                    kind="adjacency",
                    pvalue=pval,
                    dataset=i,
                    nodes=tuple(sorted((x, y))),
                    score_pair=tuple(sorted((x, y))),
                )
            )

    def _inducing_path(self, path, i, latent, manip):
        key = ("ind", path, i)
        lit = self.cnf.lit(key)
        if key in self._defined:
            return lit
        self._defined.add(key)
        x, y = path[0], path[-1]
        conj = []
        if len(path) == 2:
            conj.append(self.edge(x, y))
        else:
            for j in range(1, len(path) - 1):
                conj.append(
                    self._unblocked(path[j - 1], path[j], path[j + 1], x, y, latent, manip)
                )
        if x in manip:
            conj.append(self.tail(path[1], x))
        if y in manip:
            conj.append(self.tail(path[-2], y))
        self.cnf.add_iff_and(lit, conj)
        return lit

    def _unblocked(self, z, v, w, x, y, latent, manip):
        zs, ws = sorted((z, w))
        pair = tuple(sorted((x, y)))
        ikey = tuple(sorted(manip))
        is_latent = v in latent
        key = ("unb", zs, v, ws, pair, is_latent, ikey)
        lit = self.cnf.lit(key)
        if key in self._defined:
            return lit
        self._defined.add(key)
        h2h = self._head2head(z, v, w)
        anc1 = self._ancestor(v, x, manip)
        anc2 = self._ancestor(v, y, manip)
        conj = [self.edge(z, v), self.edge(v, w)]
        if is_latent:
            # non-collider, or a collider ancestral to an endpoint
            alt = self.cnf.lit(("unb-alt", zs, v, ws, pair, ikey))
            self.cnf.add_iff_or(alt, [-h2h, anc1, anc2])
            conj.append(alt)
        else:
            anc = self.cnf.lit(("anc-either", v, pair, ikey))
            if ("anc-either", v, pair, ikey) not in self._defined:
                self._defined.add(("anc-either", v, pair, ikey))
                self.cnf.add_iff_or(anc, [anc1, anc2])
            conj.append(h2h)
            conj.append(anc)
        self.cnf.add_iff_and(lit, conj)
        return lit

    def _head2head(self, z, v, w):
        zs, ws = sorted((z, w))
        key = ("h2h", zs, v, ws)
        lit = self.cnf.lit(key)
        if key not in self._defined:
            self._defined.add(key)
            self.cnf.add_iff_and(lit, [self.arrow(z, v), self.arrow(w, v)])
        return lit

    # -- collider constraints ---------------------------------------------

    def _triples(self, i, r, manip):
        for t in r.triples:
            if t.kind == "ambiguous":
                continue
            unsh = self._unshielded(t.x, t.y, t.z, i)
            anc1 = self._ancestor(t.y, t.x, manip)
            anc2 = self._ancestor(t.y, t.z, manip)
            self._collider_literal(
                i,
                nodes=(t.x, t.y, t.z),
                is_collider=(t.kind == "collider"),
                structure=unsh,
                anc1=anc1,
                anc2=anc2,
                score_pair=tuple(sorted((t.x, t.z))),
                tester=r.tester,
            )

    def _disc_paths(self, i, r, manip):
        seen = set()
        for d in r.disc_paths:
            if (d.path, d.collider) in seen:
                continue
            seen.add((d.path, d.collider))
            x, y, z = d.path[-3], d.path[-2], d.path[-1]
            disc = self._discriminating(d.path, i, manip)
            anc1 = self._ancestor(y, x, manip)
            anc2 = self._ancestor(y, z, manip)
            self._collider_literal(
                i,
                nodes=(x, y, z),
                is_collider=d.collider,
                structure=disc,
                anc1=anc1,
                anc2=anc2,
                score_pair=tuple(sorted((d.path[0], z))),
                tester=r.tester,
            )

    def _collider_literal(
        self, i, nodes, is_collider, structure, anc1, anc2, score_pair, tester
    ):
        kind = "collider" if is_collider else "noncollider"
        atom = (kind, nodes, i)
        lit = self.cnf.lit(atom)
        # one atom may be backed by several structures (e.g. two paths that
        # both discriminate the same triple); every implication is required
        self.cnf.add([-lit, structure])
        if is_collider:
            # y ancestor of neither endpoint
            self.cnf.add([-lit, -anc1])
            self.cnf.add([-lit, -anc2])
        else:
            self.cnf.add([-lit, anc1, anc2])
        if atom not in self._defined:
            self._defined.add(atom)
            pval = tester.cache.max_p(*score_pair) if tester is not None else None
            self.soft.append(
                SoftConstraint(
                    atom=atom,
                    positive=True,
                    kind=kind,
                    pvalue=pval,
                    dataset=i,
                    nodes=nodes,
                    score_pair=score_pair,
                )
            )

    def _unshielded(self, x, y, z, i):
        key = ("unsh", x, y, z, i)
        lit = self.cnf.lit(key)
        if key not in self._defined:
            self._defined.add(key)
            self.cnf.add_iff_and(
                lit,
                [
                    self.adjacent(x, y, i),
                    self.adjacent(y, z, i),
                    -self.adjacent(x, z, i),
                ],
            )
        return lit

    def _discriminating(self, path, i, manip):
        key = ("disc", path, i)
        lit = self.cnf.lit(key)
        if key in self._defined:
            return lit
        self._defined.add(key)
        n1 = path[-1]  # the node all interior vertices must cause
        interior = path[1:-2]  # nodes strictly between the start and path[-2]
        if any(v in manip for v in interior):
            # a collider cannot be manipulated, so the path cannot discriminate
            self.cnf.add([-lit])
            return lit
        conj = [-self.adjacent(path[0], n1, i)]
        for a, b in zip(path, path[1:]):
            conj.append(self.adjacent(a, b, i))
        for j in range(1, len(path) - 2):
            v = path[j]
            conj.append(self.adjacent(v, n1, i))
            conj.append(self._ancestor(v, n1, manip))
            # arrows into v from both path neighbors
            conj.append(-self._ancestor(v, path[j - 1], manip))
            conj.append(-self._ancestor(v, path[j + 1], manip))
        self.cnf.add_iff_and(lit, conj)
        return lit


def encode(results, mpl=3):
    """Build the SAT instance for a list of per-dataset search results."""
    return _Encoder(list(results), mpl).run()
