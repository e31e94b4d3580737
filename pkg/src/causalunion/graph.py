"""Mixed causal graphs: DAGs, SMCMs, MAGs, PAGs and the path primitives on them.

A single class covers every graph kind used by the pipeline.  Endpoint marks
are stored per ordered pair: ``marks[(x, y)]`` is the set of marks sitting at
the ``y`` end of the edges between ``x`` and ``y``.  A plain directed edge
``x -> y`` is ``tail`` at ``x`` and ``arrow`` at ``y``; a bidirected edge has
``arrow`` at both ends; an SMCM double edge (directed plus bidirected) simply
accumulates both marks at the tail-side node.
"""

from __future__ import annotations

import json
from itertools import combinations

ARROW = "arrow"
TAIL = "tail"
CIRCLE = "circle"

KINDS = ("dag", "smcm", "mag", "pag", "search")


class GraphError(ValueError):
    pass


class MixedGraph:
    def __init__(self, nodes, kind="smcm"):
        if kind not in KINDS:
            raise GraphError(f"unknown graph kind {kind!r}")
        self.nodes = list(nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError("duplicate node identifiers")
        self.kind = kind
        self._marks = {}  # (x, y) -> set of marks at the y end
        self._adj = {n: set() for n in self.nodes}

    # -- construction -----------------------------------------------------

    def copy(self, kind=None):
        g = MixedGraph(self.nodes, kind or self.kind)
        g._marks = {k: set(v) for k, v in self._marks.items()}
        g._adj = {n: set(v) for n, v in self._adj.items()}
        return g

    def _require(self, *nodes):
        for n in nodes:
            if n not in self._adj:
                raise GraphError(f"unknown node {n!r}")

    def add_edge(self, x, y, mark_x, mark_y):
        """Add one edge with the given endpoint marks (accumulates for SMCMs)."""
        self._require(x, y)
        if x == y:
            raise GraphError("self loops are not allowed")
        self._marks.setdefault((x, y), set()).add(mark_y)
        self._marks.setdefault((y, x), set()).add(mark_x)
        self._adj[x].add(y)
        self._adj[y].add(x)

    def add_directed(self, x, y):
        self.add_edge(x, y, TAIL, ARROW)

    def add_bidirected(self, x, y):
        self.add_edge(x, y, ARROW, ARROW)

    def remove_pair(self, x, y):
        self._marks.pop((x, y), None)
        self._marks.pop((y, x), None)
        self._adj[x].discard(y)
        self._adj[y].discard(x)

    def set_mark(self, x, y, mark):
        """Overwrite the mark at the y end of the x--y edge (PAG editing)."""
        if not self.is_adjacent(x, y):
            raise GraphError(f"no edge between {x!r} and {y!r}")
        self._marks[(x, y)] = {mark}

    # -- queries ----------------------------------------------------------

    def is_adjacent(self, x, y):
        return y in self._adj[x]

    def neighbors(self, x):
        return sorted(self._adj[x], key=self.nodes.index)

    def marks_at(self, x, y):
        """Marks at the y end of the edges between x and y."""
        return frozenset(self._marks.get((x, y), frozenset()))

    def mark_at(self, x, y):
        """The single mark at the y end (MAG/PAG/DAG graphs)."""
        m = self._marks.get((x, y))
        if not m:
            return None
        if len(m) > 1:
            raise GraphError(f"multiple marks at {y!r} on edge {x!r}--{y!r}")
        return next(iter(m))

    def pairs(self):
        idx = {n: i for i, n in enumerate(self.nodes)}
        out = []
        for x in self.nodes:
            for y in self._adj[x]:
                if idx[x] < idx[y]:
                    out.append((x, y))
        return out

    def primitive_edges(self, x, y):
        """Decompose the edges between x and y into (kind, a, b) primitives.

        kind is 'dir' (a -> b) or 'bi'.  Circle marks are rejected: primitive
        decomposition is only defined for dag/smcm/mag graphs.
        """
        mx, my = self.marks_at(y, x), self.marks_at(x, y)
        if not mx or not my:
            return []
        if CIRCLE in mx or CIRCLE in my:
            raise GraphError("primitive edges are undefined for circle marks")
        out = []
        if TAIL in mx and ARROW in my:
            out.append(("dir", x, y))
            if ARROW in mx:
                out.append(("bi", x, y))
        elif TAIL in my and ARROW in mx:
            out.append(("dir", y, x))
            if ARROW in my:
                out.append(("bi", x, y))
        elif ARROW in mx and ARROW in my:
            out.append(("bi", x, y))
        else:
            raise GraphError(f"invalid mark combination on {x!r}--{y!r}")
        return out

    def has_directed(self, x, y):
        return ARROW in self.marks_at(x, y) and TAIL in self.marks_at(y, x)

    def has_bidirected(self, x, y):
        return any(k == "bi" for k, _, _ in self.primitive_edges(x, y))

    def parents(self, y):
        return [x for x in self.neighbors(y) if self.has_directed(x, y)]

    def children(self, x):
        return [y for y in self.neighbors(x) if self.has_directed(x, y)]

    # -- ancestry ---------------------------------------------------------

    def ancestors(self, x):
        """Reflexive-transitive closure over directed edges, as a set."""
        self._require(x)
        seen = {x}
        stack = [x]
        while stack:
            v = stack.pop()
            for p in self._adj[v]:
                if self.has_directed(p, v) and p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def descendants(self, x):
        self._require(x)
        seen = {x}
        stack = [x]
        while stack:
            v = stack.pop()
            for c in self._adj[v]:
                if self.has_directed(v, c) and c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def has_directed_cycle(self):
        return self._cycle_dfs()

    def _cycle_dfs(self):
        color = {n: 0 for n in self.nodes}

        def visit(v):
            color[v] = 1
            for c in self._adj[v]:
                if self.has_directed(v, c):
                    if color[c] == 1:
                        return True
                    if color[c] == 0 and visit(c):
                        return True
            color[v] = 2
            return False

        return any(color[n] == 0 and visit(n) for n in self.nodes)

    # -- validation -------------------------------------------------------

    def validate(self):
        """Check the invariants of this graph's kind; raise GraphError if broken."""
        for x, y in self.pairs():
            mx, my = self.marks_at(y, x), self.marks_at(x, y)
            if self.kind in ("dag", "smcm", "mag"):
                if CIRCLE in mx or CIRCLE in my:
                    raise GraphError("circle marks only allowed in pag/search graphs")
                if TAIL in mx and TAIL in my:
                    raise GraphError(f"tail-tail edge {x!r}--{y!r}")
                self.primitive_edges(x, y)
            if self.kind == "dag":
                if len(mx) != 1 or len(my) != 1 or (mx, my) not in (
                    ({TAIL}, {ARROW}),
                    ({ARROW}, {TAIL}),
                ):
                    raise GraphError(f"non-directed edge {x!r}--{y!r} in a DAG")
            if self.kind in ("mag", "pag"):
                if len(mx) != 1 or len(my) != 1:
                    raise GraphError("MAG/PAG graphs allow one edge per pair")
        if self.kind in ("dag", "smcm", "mag") and self._cycle_dfs():
            raise GraphError("directed cycle")
        if self.kind == "mag":
            for x, y in self.pairs():
                if self.has_bidirected(x, y):
                    if x in self.ancestors(y) or y in self.ancestors(x):
                        raise GraphError(f"almost directed cycle via {x!r}<->{y!r}")
        return self


# -- m-separation ----------------------------------------------------------


def m_connected(g, x, y, z=()):
    """True iff some m-connecting path joins x and y given conditioning set z.

    Reachability over primitive edges: a walk may pass a collider only if the
    collider is an ancestor of a member of z, and a non-collider only if it is
    outside z.  Walk-level reachability is equivalent to path-level.
    """
    z = set(z)
    g._require(x, y, *z)
    if x == y:
        raise GraphError("endpoints must differ")
    if x in z or y in z:
        raise GraphError("endpoints may not be conditioned on")
    anc_z = set()
    for v in z:
        anc_z |= g.ancestors(v)

    def steps(v):
        # (neighbor, mark at v, mark at neighbor) for each primitive edge at v
        for w in g._adj[v]:
            for kind, a, b in g.primitive_edges(v, w):
                if kind == "bi":
                    yield w, ARROW, ARROW
                elif a == v:
                    yield w, TAIL, ARROW
                else:
                    yield w, ARROW, TAIL

    # state: (node, incoming mark at node)
    frontier = []
    seen = set()
    for w, _, mw in steps(x):
        frontier.append((w, mw))
    while frontier:
        v, m_in = frontier.pop()
        if v == y:
            return True
        if (v, m_in) in seen:
            continue
        seen.add((v, m_in))
        for w, m_out, m_w in steps(v):
            collider = m_in == ARROW and m_out == ARROW
            if collider and v not in anc_z:
                continue
            if not collider and v in z:
                continue
            frontier.append((w, m_w))
    return False


def m_separated(g, x, y, z=()):
    return not m_connected(g, x, y, z)


# -- inducing paths --------------------------------------------------------


def _path_is_inducing(g, path, latents):
    anc_ends = g.ancestors(path[0]) | g.ancestors(path[-1])
    for i in range(1, len(path) - 1):
        a, v, b = path[i - 1], path[i], path[i + 1]
        # collider at v on this path under SOME primitive-edge choice?
        in_arrow = ARROW in g.marks_at(a, v)
        out_arrow = ARROW in g.marks_at(b, v)
        can_collide = in_arrow and out_arrow
        # non-collider possible iff some primitive edge at either side has a
        # tail at v
        can_noncollide = TAIL in g.marks_at(a, v) or TAIL in g.marks_at(b, v)
        ok = (can_collide and v in anc_ends) or (can_noncollide and v in latents)
        if not ok:
            return False
    return True


def has_inducing_path(g, x, y, latents=(), max_len=None):
    """True iff a path of at most max_len edges from x to y is inducing w.r.t.
    the given latent set: every non-collider in latents, every collider an
    ancestor of x or y.  max_len=None means unbounded."""
    latents = set(latents)
    g._require(x, y, *latents)
    if x in latents or y in latents:
        raise GraphError("endpoints may not be latent")
    bound = max_len if max_len is not None else len(g.nodes) - 1

    def dfs(path):
        v = path[-1]
        if v == y:
            return _path_is_inducing(g, path, latents)
        if len(path) - 1 >= bound:
            return False
        for w in g.neighbors(v):
            if w not in path:
                if dfs(path + [w]):
                    return True
        return False

    return dfs([x])


# -- graph surgery and conversions -----------------------------------------


def manipulate(g, targets):
    """Hard manipulation: delete every primitive edge with an arrowhead at a
    target node.  Defined for dag/smcm graphs only."""
    if g.kind not in ("dag", "smcm"):
        raise GraphError("manipulation is only defined for dag/smcm graphs")
    targets = set(targets)
    g._require(*targets)
    out = MixedGraph(g.nodes, "smcm" if g.kind == "smcm" else g.kind)
    for x, y in g.pairs():
        for kind, a, b in g.primitive_edges(x, y):
            if kind == "dir":
                if b not in targets:
                    out.add_directed(a, b)
            else:
                if a not in targets and b not in targets:
                    out.add_bidirected(a, b)
    return out


def smcm_to_mag(g):
    """The unique MAG entailing the same m-separations as the SMCM g.

    Every pair joined by a primitive inducing path becomes adjacent, oriented
    by ancestry; this re-orients existing edges too (a bidirected edge whose
    endpoint is an ancestor of the other end becomes directed)."""
    if g._cycle_dfs():
        raise GraphError("input has a directed cycle")
    mag = MixedGraph(g.nodes, "mag")
    for x, y in combinations(g.nodes, 2):
        if not has_inducing_path(g, x, y, ()):
            continue
        if x in g.ancestors(y):
            mag.add_directed(x, y)
        elif y in g.ancestors(x):
            mag.add_directed(y, x)
        else:
            mag.add_bidirected(x, y)
    return mag


def marginalize_mag(g, latents):
    """Marginal MAG over nodes(g) minus latents (orientation by ancestry)."""
    latents = set(latents)
    g._require(*latents)
    keep = [n for n in g.nodes if n not in latents]
    out = MixedGraph(keep, "mag")
    for x, y in combinations(keep, 2):
        if not has_inducing_path(g, x, y, latents):
            continue
        if x in g.ancestors(y):
            out.add_directed(x, y)
        elif y in g.ancestors(x):
            out.add_directed(y, x)
        else:
            out.add_bidirected(x, y)
    return out


def latent_project_dag(dag, latents):
    """SMCM over the observed nodes of a DAG: X -> Y for a directed path through
    latents only, X <-> Y for a latent common cause through latents only."""
    latents = set(latents)
    dag._require(*latents)
    keep = [n for n in dag.nodes if n not in latents]
    out = MixedGraph(keep, "smcm")

    def reach_through_latents(src):
        # observed nodes reachable from src by directed paths whose interior
        # nodes are all latent
        found = set()
        stack = [src]
        seen = set()
        while stack:
            v = stack.pop()
            for c in dag.children(v):
                if c in latents:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
                else:
                    found.add(c)
        return found

    direct = {n: reach_through_latents(n) for n in dag.nodes}
    for x, y in combinations(keep, 2):
        if y in direct[x]:
            out.add_directed(x, y)
        elif x in direct[y]:
            out.add_directed(y, x)
    for c in latents:
        obs = sorted(direct[c] - latents, key=dag.nodes.index)
        for x, y in combinations(obs, 2):
            if not out.has_bidirected(x, y):
                out.add_bidirected(x, y)
    return out


# -- serialization ----------------------------------------------------------


def to_json(g):
    edges = []
    for x, y in g.pairs():
        mx, my = g.marks_at(y, x), g.marks_at(x, y)
        edges.append(
            {
                "x": x,
                "y": y,
                "mark_at_x": sorted(mx),
                "mark_at_y": sorted(my),
                "double": len(mx) > 1 or len(my) > 1,
            }
        )
    return json.dumps({"kind": g.kind, "nodes": g.nodes, "edges": edges}, indent=2)


def from_json(text):
    doc = json.loads(text)
    g = MixedGraph(doc["nodes"], doc["kind"])
    for e in doc["edges"]:
        x, y = e["x"], e["y"]
        g._marks[(x, y)] = set(e["mark_at_y"])
        g._marks[(y, x)] = set(e["mark_at_x"])
        g._adj[x].add(y)
        g._adj[y].add(x)
    return g


_DOT_ARROW = {ARROW: "normal", TAIL: "none", CIRCLE: "odot", None: "none"}


def to_dot(g, name="G"):
    lines = [f"digraph {name} {{", "  edge [dir=both];"]
    for n in g.nodes:
        lines.append(f'  "{n}";')
    for x, y in g.pairs():
        for prim in _dot_primitives(g, x, y):
            a, b, head_a, head_b = prim
            lines.append(
                f'  "{a}" -> "{b}" [arrowtail={_DOT_ARROW[head_a]}, '
                f"arrowhead={_DOT_ARROW[head_b]}];"
            )
    lines.append("}")
    return "\n".join(lines)


def _dot_primitives(g, x, y):
    mx, my = g.marks_at(y, x), g.marks_at(x, y)
    if CIRCLE in mx or CIRCLE in my or g.kind in ("pag", "search"):
        yield (x, y, next(iter(mx)), next(iter(my)))
        return
    for kind, a, b in g.primitive_edges(x, y):
        if kind == "dir":
            yield (a, b, TAIL, ARROW)
        else:
            yield (a, b, ARROW, ARROW)
