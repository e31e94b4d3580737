"""Per-dataset structure learning: a PAG over the observed variables.

The search is constraint based: a PC-style skeleton phase, conservative
classification of unshielded triples (a triple is only called a collider or a
definite non-collider when every separating subset agrees), an optional
Possible-D-Sep pruning stage, and the standard orientation rule set without
the selection-bias rules.

The result keeps everything downstream consumers need: the PAG itself, the
separating sets, the triple classifications (ambiguous ones included, so they
can be excluded from soft constraints), discriminating-path records, and the
tester whose p-value cache scores conflicts later.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .graph import ARROW, CIRCLE, TAIL, MixedGraph

COLLIDER = "collider"
NONCOLLIDER = "noncollider"
AMBIGUOUS = "ambiguous"


@dataclass
class Triple:
    x: str
    y: str
    z: str
    kind: str  # collider / noncollider / ambiguous


@dataclass
class DiscPath:
    path: tuple  # (d, ..., a, b, c); b is the node the rule decides about
    collider: bool  # True: b collider on the path (b <-> neighbors)


@dataclass
class FciResult:
    pag: MixedGraph
    sepsets: dict = field(default_factory=dict)
    triples: list = field(default_factory=list)
    disc_paths: list = field(default_factory=list)
    tester: object = None
    manipulated: frozenset = frozenset()
    name: str = ""

    @property
    def variables(self):
        return list(self.pag.nodes)


class FciSearch:
    def __init__(self, tester, manipulated=(), max_k=5, pds=True, name=""):
        self.tester = tester
        self.manipulated = frozenset(manipulated)
        self.max_k = max_k
        self.pds = pds
        self.name = name
        self.nodes = list(tester.variables)
        self.sepsets = {}

    # -- skeleton ---------------------------------------------------------

    def run(self):
        g = self._skeleton()
        triples = self._classify_triples(g)
        self._orient_colliders(g, triples)
        if self.pds:
            removed = self._pds_prune(g)
            if removed:
                self._reset_orientations(g)
            triples = self._classify_triples(g)
            self._reset_orientations(g)
            self._orient_colliders(g, triples)
        disc = []
        self._apply_rules(g, disc)
        g.validate()
        return FciResult(
            pag=g,
            sepsets=dict(self.sepsets),
            triples=triples,
            disc_paths=disc,
            tester=self.tester,
            manipulated=self.manipulated,
            name=self.name,
        )

    def _skeleton(self):
        g = MixedGraph(self.nodes, "pag")
        for x, y in combinations(self.nodes, 2):
            g.add_edge(x, y, CIRCLE, CIRCLE)
        for k in range(self.max_k + 1):
            for x, y in list(g.pairs()):
                if self._try_separate(g, x, y, k):
                    g.remove_pair(x, y)
        return g

    def _try_separate(self, g, x, y, k, pool=None):
        cands = []
        if pool is None:
            cands.append([v for v in g.neighbors(x) if v != y])
            cands.append([v for v in g.neighbors(y) if v != x])
        else:
            cands.append([v for v in pool if v not in (x, y)])
        tried = set()
        for c in cands:
            if len(c) < k:
                continue
            for z in combinations(sorted(c), k):
                if z in tried:
                    continue
                tried.add(z)
                if self.tester.independent(x, y, z):
                    self.sepsets[frozenset((x, y))] = tuple(z)
                    return True
        return False

    # -- conservative triples --------------------------------------------

    def _separating_subsets(self, g, x, z):
        """All separating subsets drawn from either adjacency list (plus the
        recorded sepset), up to max_k."""
        found = []
        seen = set()
        pools = [
            [v for v in g.neighbors(x) if v != z],
            [v for v in g.neighbors(z) if v != x],
        ]
        rec = self.sepsets.get(frozenset((x, z)))
        if rec is not None:
            pools.append(list(rec))
        for pool in pools:
            for k in range(min(self.max_k, len(pool)) + 1):
                for s in combinations(sorted(pool), k):
                    if s in seen:
                        continue
                    seen.add(s)
                    if self.tester.independent(x, z, s):
                        found.append(set(s))
        return found

    def _classify_triples(self, g):
        triples = []
        for y in self.nodes:
            nbrs = g.neighbors(y)
            for x, z in combinations(nbrs, 2):
                if g.is_adjacent(x, z):
                    continue
                seps = self._separating_subsets(g, x, z)
                if not seps:
                    kind = AMBIGUOUS
                elif all(y in s for s in seps):
                    kind = NONCOLLIDER
                elif all(y not in s for s in seps):
                    kind = COLLIDER
                else:
                    kind = AMBIGUOUS
                triples.append(Triple(x, y, z, kind))
        return triples

    def _orient_colliders(self, g, triples):
        for t in triples:
            if t.kind == COLLIDER:
                if g.is_adjacent(t.x, t.y):
                    g.set_mark(t.x, t.y, ARROW)
                if g.is_adjacent(t.z, t.y):
                    g.set_mark(t.z, t.y, ARROW)

    def _reset_orientations(self, g):
        for x, y in g.pairs():
            g.set_mark(x, y, CIRCLE)
            g.set_mark(y, x, CIRCLE)

    # -- possible-d-sep ---------------------------------------------------

    def _possible_d_sep(self, g, x):
        """Nodes reachable from x along paths where every interior node is
        either a collider on the path or in a triangle with its path
        neighbors."""
        out = set()
        frontier = [(x, w) for w in g.neighbors(x)]
        seen = set(frontier)
        while frontier:
            a, b = frontier.pop()
            out.add(b)
            for c in g.neighbors(b):
                if c == a or (b, c) in seen:
                    continue
                collider = (
                    g.mark_at(a, b) == ARROW and g.mark_at(c, b) == ARROW
                )
                triangle = g.is_adjacent(a, c)
                if collider or triangle:
                    seen.add((b, c))
                    frontier.append((b, c))
        out.discard(x)
        return out

    def _pds_prune(self, g):
        removed = False
        for x, y in list(g.pairs()):
            done = False
            for src in (x, y):
                if done:
                    break
                pool = sorted(self._possible_d_sep(g, src) - {x, y})
                for k in range(1, min(self.max_k, len(pool)) + 1):
                    if self._try_separate(g, x, y, k, pool=pool):
                        g.remove_pair(x, y)
                        removed = True
                        done = True
                        break
        return removed

    # -- orientation rules ------------------------------------------------

    def _apply_rules(self, g, disc):
        changed = True
        while changed:
            changed = False
            changed |= self._rule1(g)
            changed |= self._rule2(g)
            changed |= self._rule3(g)
            changed |= self._rule4(g, disc)
            changed |= self._rule8(g)
            changed |= self._rule9(g)
            changed |= self._rule10(g)

    @staticmethod
    def _set(g, a, b, mark):
        if g.mark_at(a, b) != mark:
            g.set_mark(a, b, mark)
            return True
        return False

    def _rule1(self, g):
        # a *-> b o-* c with a, c nonadjacent: orient b -> c
        changed = False
        for b in self.nodes:
            for a in g.neighbors(b):
                if g.mark_at(a, b) != ARROW:
                    continue
                for c in g.neighbors(b):
                    if c == a or g.is_adjacent(a, c):
                        continue
                    if g.mark_at(c, b) == CIRCLE:
                        changed |= self._set(g, c, b, TAIL)
                        changed |= self._set(g, b, c, ARROW)
        return changed

    def _rule2(self, g):
        # a -> b *-> c or a *-> b -> c, with a *-o c: orient a *-> c
        changed = False
        for b in self.nodes:
            for a in g.neighbors(b):
                for c in g.neighbors(b):
                    if c == a or not g.is_adjacent(a, c):
                        continue
                    if g.mark_at(a, c) != CIRCLE:
                        continue
                    first = (
                        g.mark_at(a, b) == ARROW
                        and g.mark_at(b, a) == TAIL
                        and g.mark_at(b, c) == ARROW
                    )
                    second = (
                        g.mark_at(a, b) == ARROW
                        and g.mark_at(b, c) == ARROW
                        and g.mark_at(c, b) == TAIL
                    )
                    if first or second:
                        changed |= self._set(g, a, c, ARROW)
        return changed

    def _rule3(self, g):
        # a *-> b <-* c, a *-o d o-* c, a, c nonadjacent, d *-o b: d *-> b
        changed = False
        for b in self.nodes:
            for d in g.neighbors(b):
                if g.mark_at(d, b) != CIRCLE:
                    continue
                for a, c in combinations(g.neighbors(b), 2):
                    if d in (a, c) or g.is_adjacent(a, c):
                        continue
                    if g.mark_at(a, b) != ARROW or g.mark_at(c, b) != ARROW:
                        continue
                    if not (g.is_adjacent(a, d) and g.is_adjacent(c, d)):
                        continue
                    if g.mark_at(a, d) != CIRCLE or g.mark_at(c, d) != CIRCLE:
                        continue
                    changed |= self._set(g, d, b, ARROW)
        return changed

    def _rule4(self, g, disc):
        # discriminating path <d, ..., a, b, c> for b: d, c nonadjacent, every
        # node between d and b is a collider on the path and a parent of c.
        # b in sepset(d, c): orient b -> c; else b <-> its path neighbors <-> c
        changed = False
        for b in self.nodes:
            for c in g.neighbors(b):
                if g.mark_at(b, c) == TAIL and g.mark_at(c, b) == ARROW:
                    continue
                for a in g.neighbors(b):
                    if a == c:
                        continue
                    if not (
                        g.mark_at(b, a) == ARROW
                        and g.is_adjacent(a, c)
                        and g.mark_at(a, c) == ARROW
                        and g.mark_at(c, a) == TAIL
                    ):
                        continue
                    path = self._find_disc_path(g, [c, b, a])
                    if path is None:
                        continue
                    d = path[0]
                    sep = self.sepsets.get(frozenset((d, c)), ())
                    if b in sep:
                        if g.mark_at(c, b) == CIRCLE or g.mark_at(b, c) == CIRCLE:
                            changed |= self._set(g, c, b, TAIL)
                            changed |= self._set(g, b, c, ARROW)
                            disc.append(DiscPath(tuple(path), collider=False))
                    else:
                        if g.mark_at(a, b) != ARROW or g.mark_at(c, b) != ARROW \
                                or g.mark_at(b, a) != ARROW:
                            changed |= self._set(g, a, b, ARROW)
                            changed |= self._set(g, b, a, ARROW)
                            changed |= self._set(g, c, b, ARROW)
                            changed |= self._set(g, b, c, ARROW)
                            disc.append(DiscPath(tuple(path), collider=True))
        return changed

    def _find_disc_path(self, g, tail_path):
        """Extend <..., a, b, c> (stored reversed as [c, b, a, ...]) backwards
        to some d not adjacent to c; returns the path [d, ..., a, b, c]."""
        c = tail_path[0]
        last = tail_path[-1]
        for prev in g.neighbors(last):
            if prev in tail_path:
                continue
            if not g.is_adjacent(prev, c):
                # candidate endpoint d; interior nodes must be colliders on the
                # path and parents of c, already guaranteed for nodes between
                # d and b by construction
                if g.mark_at(prev, last) == ARROW:
                    return list(reversed(tail_path + [prev]))
                continue
            # prev stays interior: must be a collider and a parent of c
            if (
                g.mark_at(prev, last) == ARROW
                and g.mark_at(last, prev) == ARROW
                and g.mark_at(prev, c) == ARROW
                and g.mark_at(c, prev) == TAIL
            ):
                found = self._find_disc_path(g, tail_path + [prev])
                if found is not None:
                    return found
        return None

    def _rule8(self, g):
        # a -> b -> c (or a -o b -> c) with a o-> c: orient a -> c
        changed = False
        for b in self.nodes:
            for a in g.neighbors(b):
                for c in g.neighbors(b):
                    if c == a or not g.is_adjacent(a, c):
                        continue
                    if not (g.mark_at(a, c) == ARROW and g.mark_at(c, a) == CIRCLE):
                        continue
                    ab_dir = g.mark_at(b, a) == TAIL and g.mark_at(a, b) == ARROW
                    ab_tail_circ = (
                        g.mark_at(b, a) == TAIL and g.mark_at(a, b) == CIRCLE
                    )
                    bc_dir = g.mark_at(c, b) == TAIL and g.mark_at(b, c) == ARROW
                    if (ab_dir or ab_tail_circ) and bc_dir:
                        changed |= self._set(g, c, a, TAIL)
        return changed

    def _uncovered_pd_paths(self, g, a, target, forbid_first=()):
        """Yield uncovered potentially directed paths from a to target with at
        least one edge; first hop never enters forbid_first."""

        def ok_step(u, v):
            return g.mark_at(v, u) != ARROW and g.mark_at(u, v) != TAIL

        def dfs(path):
            u = path[-1]
            if u == target and len(path) >= 2:
                yield list(path)
                return
            for v in g.neighbors(u):
                if v in path or not ok_step(u, v):
                    continue
                if len(path) == 1 and v in forbid_first:
                    continue
                if len(path) >= 2 and g.is_adjacent(path[-2], v):
                    continue  # covered triple
                yield from dfs(path + [v])

        yield from dfs([a])

    def _rule9(self, g):
        # a o-> c and an uncovered p.d. path <a, b, ..., c> with b, c
        # nonadjacent: orient a -> c
        changed = False
        for a in self.nodes:
            for c in g.neighbors(a):
                if not (g.mark_at(a, c) == ARROW and g.mark_at(c, a) == CIRCLE):
                    continue
                forbid = [v for v in g.neighbors(a) if g.is_adjacent(v, c) or v == c]
                for path in self._uncovered_pd_paths(g, a, c, forbid_first=forbid):
                    changed |= self._set(g, c, a, TAIL)
                    break
        return changed

    def _rule10(self, g):
        # a o-> c, b -> c <- d, uncovered p.d. paths a..b and a..d whose first
        # edges leave a towards nonadjacent distinct nodes: orient a -> c
        changed = False
        for a in self.nodes:
            for c in g.neighbors(a):
                if not (g.mark_at(a, c) == ARROW and g.mark_at(c, a) == CIRCLE):
                    continue
                into_c = [
                    b
                    for b in g.neighbors(c)
                    if b != a
                    and g.mark_at(b, c) == ARROW
                    and g.mark_at(c, b) == TAIL
                ]
                done = False
                for b, d in combinations(into_c, 2):
                    if done:
                        break
                    firsts_b = {
                        p[1] for p in self._uncovered_pd_paths(g, a, b)
                    }
                    firsts_d = {
                        p[1] for p in self._uncovered_pd_paths(g, a, d)
                    }
                    for m in firsts_b:
                        for w in firsts_d:
                            if m != w and not g.is_adjacent(m, w):
                                changed |= self._set(g, c, a, TAIL)
                                done = True
                                break
                        if done:
                            break
        return changed


def run_fci(tester, manipulated=(), max_k=5, pds=True, name=""):
    return FciSearch(tester, manipulated, max_k=max_k, pds=pds, name=name).run()
