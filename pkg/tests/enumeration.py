"""Independent ground-truth oracle: exhaustive enumeration of small causal
models consistent with a collection of oracle datasets.

Everything here is written from scratch against integer-indexed edge sets so
it shares no code with the library it checks.  A candidate model assigns each
node pair one of six states: no edge, either direction, bidirected, or a
directed edge plus a bidirected one.  A candidate is consistent with a
dataset when, after removing every edge into a manipulated variable, it
implies exactly the same separation facts over the observed variables as the
true generating model does.
"""

from itertools import chain, combinations, product

# per-pair edge states: (x_to_y, y_to_x, bidirected)
PAIR_STATES = [
    (False, False, False),
    (True, False, False),
    (False, True, False),
    (False, False, True),
    (True, False, True),
    (False, True, True),
]


def subsets(items):
    return chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))


class Model:
    """A mixed graph over nodes 0..n-1 as plain edge tuples."""

    __slots__ = ("n", "directed", "bidirected")

    def __init__(self, n, directed, bidirected):
        self.n = n
        self.directed = frozenset(directed)  # (a, b) meaning a -> b
        self.bidirected = frozenset(bidirected)  # frozenset({a, b})

    def acyclic(self):
        children = {a: set() for a in range(self.n)}
        for a, b in self.directed:
            children[a].add(b)
        state = [0] * self.n

        def visit(v):
            if state[v] == 1:
                return False
            if state[v] == 2:
                return True
            state[v] = 1
            ok = all(visit(w) for w in children[v])
            state[v] = 2
            return ok

        return all(visit(v) for v in range(self.n))

    def manipulated(self, targets):
        t = set(targets)
        return Model(
            self.n,
            [(a, b) for a, b in self.directed if b not in t],
            [e for e in self.bidirected if not (e & t)],
        )

    def has_edge(self, x, y):
        return (
            (x, y) in self.directed
            or (y, x) in self.directed
            or frozenset((x, y)) in self.bidirected
        )

    def arrow_at(self, x, y):
        """Some edge between x and y carries an arrowhead at y."""
        return (x, y) in self.directed or frozenset((x, y)) in self.bidirected

    def tail_at(self, x, y):
        """Some edge between x and y leaves y."""
        return (y, x) in self.directed

    def _halfedges(self):
        """Per node: list of (other, head_here, head_there)."""
        out = {v: [] for v in range(self.n)}
        for a, b in self.directed:
            out[a].append((b, False, True))
            out[b].append((a, True, False))
        for e in self.bidirected:
            a, b = tuple(e)
            out[a].append((b, True, True))
            out[b].append((a, True, True))
        return out

    def _ancestors_closure(self, targets):
        """targets plus every node with a directed path into them."""
        parents = {v: set() for v in range(self.n)}
        for a, b in self.directed:
            parents[b].add(a)
        seen = set(targets)
        stack = list(targets)
        while stack:
            v = stack.pop()
            for p in parents[v]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def m_separated(self, x, y, z):
        z = set(z)
        anz = self._ancestors_closure(z)
        half = self._halfedges()
        seen = set()
        stack = [(x, False)]  # (node, arrived with an arrowhead here)
        while stack:
            v, head_in = stack.pop()
            for w, head_v, head_w in half[v]:
                if v != x:
                    collider = head_in and head_v
                    if collider and v not in anz:
                        continue
                    if not collider and v in z:
                        continue
                if w == y:
                    return False
                state = (w, head_w)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
        return True


def all_models(n):
    pairs = list(combinations(range(n), 2))
    for states in product(range(6), repeat=len(pairs)):
        directed, bidirected = [], []
        for (x, y), s in zip(pairs, states):
            xy, yx, bi = PAIR_STATES[s]
            if xy:
                directed.append((x, y))
            if yx:
                directed.append((y, x))
            if bi:
                bidirected.append(frozenset((x, y)))
        m = Model(n, directed, bidirected)
        if m.acyclic():
            yield m


def dataset_queries(observed):
    observed = sorted(observed)
    out = []
    for x, y in combinations(observed, 2):
        rest = [v for v in observed if v not in (x, y)]
        for z in subsets(rest):
            out.append((x, y, z))
    return out


def separation_signature(model, queries):
    return tuple(model.m_separated(x, y, z) for x, y, z in queries)


def matches(model, queries, signature):
    for (x, y, z), expected in zip(queries, signature):
        if model.m_separated(x, y, z) != expected:
            return False
    return True


def classify_by_enumeration(n, true_model, layouts):
    """Ground-truth feature classification for an oracle problem instance.

    layouts: list of (observed, manipulated) index tuples.  Returns
    ({pair: 'solid'|'absent'|'dashed'},
     {(x, y): mark-state dict for arrow/tail at y}) computed over every
    consistent candidate model, plus the number of candidates.
    """
    per_dataset = []
    for observed, manip in layouts:
        queries = dataset_queries(observed)
        truth = separation_signature(true_model.manipulated(manip), queries)
        per_dataset.append((manip, queries, truth))

    n_candidates = 0
    edge_count = {}
    arrow_count = {}
    tail_count = {}
    pairs = list(combinations(range(n), 2))
    for m in all_models(n):
        if not all(
            matches(m.manipulated(manip), queries, truth)
            for manip, queries, truth in per_dataset
        ):
            continue
        n_candidates += 1
        for x, y in pairs:
            edge_count[(x, y)] = edge_count.get((x, y), 0) + m.has_edge(x, y)
            for a, b in ((x, y), (y, x)):
                arrow_count[(a, b)] = arrow_count.get((a, b), 0) + m.arrow_at(a, b)
                tail_count[(a, b)] = tail_count.get((a, b), 0) + m.tail_at(a, b)

    def state(count):
        if count == n_candidates:
            return "always"
        if count == 0:
            return "never"
        return "varies"

    edges = {}
    marks = {}
    for x, y in pairs:
        c = edge_count.get((x, y), 0)
        if c == n_candidates:
            edges[(x, y)] = "solid"
        elif c == 0:
            edges[(x, y)] = "absent"
        else:
            edges[(x, y)] = "dashed"
        for a, b in ((x, y), (y, x)):
            marks[(a, b)] = {
                "arrow": state(arrow_count.get((a, b), 0)),
                "tail": state(tail_count.get((a, b), 0)),
            }
    return edges, marks, n_candidates
