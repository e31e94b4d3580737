"""End-to-end driver: per-dataset searches, constraint solving, and the
summary graph of invariant and variant features.

The summary graph classifies every pair of variables as:

- solid: the edge is present in every model consistent with the accepted
  constraints
- absent: present in none
- dashed: present in some models, absent in others

and each endpoint mark (arrow / tail) as always, never, or varies.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .encode import EncodeResult, encode
from .fci import FciResult, run_fci
from .resolve import ConflictError, ResolveReport, resolve
from .solve import BackboneReport, backbone, solver_for

ALWAYS = "always"
NEVER = "never"
VARIES = "varies"


@dataclass
class Dataset:
    tester: object
    manipulated: tuple = ()
    name: str = ""


class SummaryGraph:
    def __init__(self, nodes):
        self.nodes = list(nodes)
        self.edges = {}  # sorted pair -> {"status", "marks": {node: {..}}}

    def set_edge(self, x, y, status, marks):
        self.edges[tuple(sorted((x, y)))] = {"status": status, "marks": marks}

    def edge_status(self, x, y):
        e = self.edges.get(tuple(sorted((x, y))))
        return e["status"] if e else "absent"

    def mark(self, x, y, end, feature):
        """State of `feature` ('arrow' or 'tail') at node `end` on edge x--y."""
        e = self.edges.get(tuple(sorted((x, y))))
        if e is None:
            return None
        return e["marks"][end][feature]

    def solid_edges(self):
        return [p for p, e in self.edges.items() if e["status"] == "solid"]

    def dashed_edges(self):
        return [p for p, e in self.edges.items() if e["status"] == "dashed"]

    # -- serialization ---------------------------------------------------

    def to_json(self):
        return json.dumps(
            {
                "nodes": self.nodes,
                "edges": [
                    {"x": p[0], "y": p[1], "status": e["status"], "marks": e["marks"]}
                    for p, e in sorted(self.edges.items())
                ],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        g = cls(doc["nodes"])
        for e in doc["edges"]:
            g.set_edge(e["x"], e["y"], e["status"], e["marks"])
        return g

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(
            ["x", "y", "status", "arrow_at_x", "tail_at_x", "arrow_at_y", "tail_at_y"]
        )
        for (x, y), e in sorted(self.edges.items()):
            w.writerow(
                [
                    x,
                    y,
                    e["status"],
                    e["marks"][x]["arrow"],
                    e["marks"][x]["tail"],
                    e["marks"][y]["arrow"],
                    e["marks"][y]["tail"],
                ]
            )
        return buf.getvalue()

    def to_dot(self, name="summary"):
        def head(marks):
            if marks["arrow"] == ALWAYS:
                return "normal"
            if marks["tail"] == ALWAYS and marks["arrow"] == NEVER:
                return "none"
            return "odot"

        lines = [f"digraph {name} {{", "  edge [dir=both];"]
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for (x, y), e in sorted(self.edges.items()):
            style = "solid" if e["status"] == "solid" else "dashed"
            lines.append(
                f'  "{x}" -> "{y}" [style={style}, '
                f"arrowtail={head(e['marks'][x])}, arrowhead={head(e['marks'][y])}];"
            )
        lines.append("}")
        return "\n".join(lines)


@dataclass
class PipelineResult:
    summary: SummaryGraph
    encoded: EncodeResult
    resolution: ResolveReport
    backbone: BackboneReport
    results: list = field(default_factory=list)


def _mark_state(var, bb):
    if var in bb.forced_true:
        return ALWAYS
    if var in bb.forced_false:
        return NEVER
    return VARIES


def build_summary(encoded, bb):
    reg = encoded.cnf.registry
    g = SummaryGraph(encoded.search.nodes)
    for x, y in encoded.search.pairs():
        ev = reg.var(("edge", tuple(sorted((x, y)))))
        if ev in bb.forced_false:
            continue  # absent everywhere
        status = "solid" if ev in bb.forced_true else "dashed"
        marks = {
            end: {
                "arrow": _mark_state(reg.var(("arrow", other, end)), bb),
                "tail": _mark_state(reg.var(("tail", other, end)), bb),
            }
            for end, other in ((x, y), (y, x))
        }
        g.set_edge(x, y, status, marks)
    return g


def combine_results(results, mpl=3, strategy="mmr"):
    """Merge per-dataset search results into a summary graph."""
    encoded = encode(results, mpl=mpl)
    solver = solver_for(encoded.cnf)
    if solver is None or not solver.solve():
        raise ConflictError("hard constraints are unsatisfiable")
    resolution = resolve(encoded, solver, strategy=strategy)
    bb = backbone(solver, encoded.core_vars())
    summary = build_summary(encoded, bb)
    return PipelineResult(
        summary=summary,
        encoded=encoded,
        resolution=resolution,
        backbone=bb,
        results=list(results),
    )


def run_pipeline(datasets, max_k=5, mpl=3, strategy="mmr", pds=True):
    """Run the per-dataset search on each Dataset, then merge."""
    results = []
    for i, d in enumerate(datasets):
        results.append(
            run_fci(
                d.tester,
                manipulated=d.manipulated,
                max_k=max_k,
                pds=pds,
                name=d.name or str(i),
            )
        )
    return combine_results(results, mpl=mpl, strategy=strategy)
