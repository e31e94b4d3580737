"""Command-line interface.

Subcommands:

- run: ingest a manifest of CSV datasets with intervention targets, learn the
  combined summary graph, and write it as JSON/DOT/CSV plus a diagnostics
  sidecar.
- simulate: generate a synthetic multi-dataset study that is itself a valid
  input for `run`.
- report: render a saved summary graph as a figure plus a delimited edge
  table.

Exit codes: 0 success, 2 input error, 3 irreconcilable constraint conflict,
1 unexpected failure.
"""

from __future__ import annotations

import argparse
import csv as csvmod
import json
import pathlib
import sys

import numpy as np

from .pipeline import Dataset, SummaryGraph, run_pipeline
from .resolve import ConflictError
from .simulate import random_dag, sample_study, write_study
from .stats import FisherZTester, GSquaredTester


class InputError(ValueError):
    pass


def load_manifest(path):
    """Manifest: JSON array of {csv_path, intervention_targets, value_kind};
    csv paths are resolved relative to the manifest file."""
    path = pathlib.Path(path)
    try:
        entries = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest is not valid JSON: {exc}")
    if not isinstance(entries, list) or not entries:
        raise InputError("manifest must be a non-empty JSON array")
    out = []
    for i, entry in enumerate(entries):
        try:
            csv_path = path.parent / entry["csv_path"]
            targets = tuple(entry.get("intervention_targets", ()))
            kind = entry.get("value_kind", "continuous")
        except (TypeError, KeyError) as exc:
            raise InputError(f"manifest entry {i} malformed: {exc}")
        if kind not in ("continuous", "discrete"):
            raise InputError(f"manifest entry {i}: unknown value_kind {kind!r}")
        out.append((csv_path, targets, kind))
    return out


def load_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csvmod.reader(fh)
            header = next(reader, None)
            rows = [[float(c) for c in row] for row in reader if row]
    except FileNotFoundError:
        raise InputError(f"dataset not found: {path}")
    except ValueError as exc:
        raise InputError(f"non-numeric cell in {path}: {exc}")
    if not header or not rows:
        raise InputError(f"dataset {path} needs a header row and data rows")
    if any(len(r) != len(header) for r in rows):
        raise InputError(f"ragged rows in {path}")
    return header, np.asarray(rows)


def build_datasets(manifest_entries, alpha, test):
    datasets = []
    for csv_path, targets, kind in manifest_entries:
        header, rows = load_csv(csv_path)
        missing = [t for t in targets if t not in header]
        if missing:
            raise InputError(
                f"intervention targets {missing} not among the columns of {csv_path}"
            )
        choice = test if test != "auto" else (
            "gsquared" if kind == "discrete" else "fisherz"
        )
        if choice == "gsquared":
            tester = GSquaredTester(rows.astype(int), header, alpha=alpha)
        else:
            tester = FisherZTester(rows, header, alpha=alpha)
        datasets.append(Dataset(tester=tester, manipulated=targets, name=csv_path.stem))
    return datasets


def diagnostics_doc(out, args):
    def describe(items, accepted):
        return [
            {
                "kind": s.kind,
                "nodes": list(s.nodes),
                "dataset": s.dataset,
                "p_value": s.pvalue,
                "direction": bool(polarity),
                "accepted": accepted,
            }
            for s, polarity in items
        ]

    res = out.resolution
    return {
        "settings": {
            "alpha": args.alpha,
            "max_k": args.max_k,
            "mpl": args.mpl,
            "strategy": args.strategy,
            "pds": args.pds,
            "test": args.test,
            "seed": args.seed,
        },
        "mixture": {"pi0": res.pi0, "xi": res.xi},
        "n_variables": len(out.summary.nodes),
        "n_clauses": len(out.encoded.cnf.clauses),
        "constraints": describe(res.accepted, True) + describe(res.rejected, False),
        "flipped_pairs": [list(s.nodes) for s in res.flipped],
    }


def cmd_run(args):
    entries = load_manifest(args.manifest)
    datasets = build_datasets(entries, args.alpha, args.test)
    out = run_pipeline(
        datasets,
        max_k=args.max_k,
        mpl=args.mpl,
        strategy=args.strategy,
        pds=args.pds,
    )
    summary = out.summary
    if args.out_json:
        pathlib.Path(args.out_json).write_text(summary.to_json())
    if args.out_dot:
        pathlib.Path(args.out_dot).write_text(summary.to_dot())
    if args.diagnostics:
        pathlib.Path(args.diagnostics).write_text(
            json.dumps(diagnostics_doc(out, args), indent=2)
        )
    sys.stdout.write(summary.to_csv())
    return 0


def cmd_simulate(args):
    dag = random_dag(args.nodes, max_parents=args.max_parents, seed=args.seed)
    study = sample_study(
        dag,
        n_datasets=args.datasets,
        max_latent=args.max_latent,
        max_manip=args.max_manip,
        n_rows=args.rows,
        seed=args.seed,
    )
    manifest = write_study(study, args.out)
    truth_path = pathlib.Path(args.out) / "truth.json"
    from .graph import to_json as graph_to_json

    truth_path.write_text(graph_to_json(study.dag))
    sys.stdout.write(f"{manifest}\n")
    return 0


def cmd_report(args):
    from .plotting import render_summary

    try:
        summary = SummaryGraph.from_json(pathlib.Path(args.summary).read_text())
    except FileNotFoundError:
        raise InputError(f"summary not found: {args.summary}")
    except (json.JSONDecodeError, KeyError) as exc:
        raise InputError(f"summary file malformed: {exc}")
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    figure = out_dir / "summary.png"
    render_summary(summary, figure, title=args.title)
    edges = out_dir / "edges.csv"
    edges.write_text(summary.to_csv())
    sys.stdout.write(f"{figure}\n{edges}\n")
    return 0


def _int_or_none(text):
    if text.lower() in ("none", "unbounded"):
        return None
    return int(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="causalunion",
        description=(
            "Learn the invariant and variant causal features shared by "
            "datasets that measure overlapping variables under different "
            "interventions."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="learn a summary graph from a manifest")
    run.add_argument("--manifest", required=True)
    run.add_argument("--alpha", type=float, default=0.1)
    run.add_argument("--max-k", type=int, default=5)
    run.add_argument(
        "--mpl",
        type=_int_or_none,
        default=3,
        help="maximum path length in edges, or 'none' for unbounded",
    )
    run.add_argument("--test", choices=("auto", "fisherz", "gsquared"), default="auto")
    run.add_argument("--strategy", choices=("mmr", "none"), default="mmr")
    run.add_argument("--pds", action=argparse.BooleanOptionalAction, default=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out-json")
    run.add_argument("--out-dot")
    run.add_argument("--diagnostics")
    run.set_defaults(func=cmd_run)

    sim = sub.add_parser("simulate", help="generate a synthetic study")
    sim.add_argument("--nodes", type=int, default=20)
    sim.add_argument("--max-parents", type=int, default=5)
    sim.add_argument("--datasets", type=int, default=5)
    sim.add_argument("--max-latent", type=int, default=3)
    sim.add_argument("--max-manip", type=int, default=2)
    sim.add_argument("--rows", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    rep = sub.add_parser("report", help="render a saved summary graph")
    rep.add_argument("--summary", required=True)
    rep.add_argument("--out-dir", required=True)
    rep.add_argument("--title", default=None)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except ConflictError as exc:
        sys.stderr.write(f"conflict: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
