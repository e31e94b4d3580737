"""Shared builders for hand-crafted per-dataset results."""

from causalunion.fci import FciResult, Triple
from causalunion.graph import ARROW, CIRCLE, TAIL, MixedGraph

MARK = {"o": CIRCLE, ">": ARROW, "<": ARROW, "-": TAIL}


def pag_from_edges(nodes, edges, triples=(), manipulated=(), name="", tester=None):
    """edges: list of (x, mark_at_x, mark_at_y, y) with marks 'o', '>', '-'."""
    g = MixedGraph(nodes, "pag")
    for x, mx, my, y in edges:
        g.add_edge(x, y, MARK[mx], MARK[my])
    return FciResult(
        pag=g,
        triples=[Triple(*t) for t in triples],
        tester=tester,
        manipulated=frozenset(manipulated),
        name=name,
    )
