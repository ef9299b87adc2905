"""Command-line pipeline: generate, solve, featurize, train, sparsify, evaluate, report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import evaluation as ev
from .exact import (DEFAULT_NODE_BUDGET, DEFAULT_TOUR_CAP, BudgetExhausted, SizeError, TourSet,
                    branch_and_cut, enumerate_optimal_tours, held_karp)
from .features import FeatureConfig, FeatureMatrix, assemble_features
from .graph import double_tree_tours, make_tour
from .sparsifier import (TrainConfig, insert_tour_edges, load_model, mst_only_sparsify, predict_mask,
                         prune_instance, save_model, train_model)
from .tsplib import generate_random_instance, read_instance, read_sparsified, write_instance, write_sparsified

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("tsp_sparsify")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def tours_to_json(ts: TourSet, name: str) -> str:
    doc = {"name": name, "optimal_length": ts.optimal_length, "truncated": ts.truncated,
           "proven": ts.proven, "tours": [[v + 1 for v in t.order] for t in ts.tours]}
    return json.dumps(doc, indent=2)


def tours_from_json(text: str, inst) -> TourSet:
    doc = json.loads(text)
    tours = [make_tour([v - 1 for v in order], inst) for order in doc["tours"]]
    return TourSet(tours, int(doc["optimal_length"]), bool(doc.get("truncated", False)),
                   bool(doc.get("proven", True)))


# --------------------------------------------------------------------------- commands

def cmd_generate(a):
    os.makedirs(a.out_dir, exist_ok=True)
    for i in range(a.count):
        inst = generate_random_instance(a.n, a.seed + i, a.box, name=f"rand{a.n}_{a.seed + i}")
        _write(os.path.join(a.out_dir, f"{inst.name}.tsp"), write_instance(inst))
    return EXIT_OK


def cmd_solve(a):
    inst = read_instance(a.instance)
    if a.all_optimal:
        ts = enumerate_optimal_tours(inst, a.cap, node_budget=a.budget)
    elif a.method == "held-karp":
        t = held_karp(inst)
        ts = TourSet([t], t.length, False, True)
    else:
        res = branch_and_cut(inst, node_budget=a.budget)
        if res.tour is None:
            raise BudgetExhausted("no tour found within the budget")
        ts = TourSet([res.tour], res.tour.length, False, res.proven)
    _write(a.out, tours_to_json(ts, inst.name) + "\n")
    return EXIT_OK if ts.proven else EXIT_BUDGET


def _feature_config(a) -> FeatureConfig:
    return FeatureConfig(a.k_rounds, a.copies, a.mst_k, a.seed, a.perturbation, a.lp_values)


def cmd_features(a):
    inst = read_instance(a.instance)
    tours = None
    if a.labels:
        with open(a.labels) as fh:
            tours = tours_from_json(fh.read(), inst)
    fm = assemble_features(inst, _feature_config(a), tours)
    if fm.solved_at_root:
        log.info("%s: relaxation is already an optimal tour", inst.name)
    _write(a.out, fm.to_csv())
    return EXIT_OK


def cmd_train(a):
    data = []
    for path in a.data:
        with open(path) as fh:
            data.append(FeatureMatrix.from_csv(fh.read(), name=os.path.basename(path)))
    cw = _floats(a.class_weights)
    if len(cw) != 2:
        raise UsageError("--class-weights takes two comma-separated values")
    cfg = TrainConfig(tuple(cw), not a.no_undersample, a.seed, epochs=a.epochs, l2=a.l2)
    model = train_model(data, cfg)
    if a.threshold is not None:
        model.threshold = a.threshold
    save_model(model, a.out)
    print(json.dumps(model.metadata["confusion"]))
    return EXIT_OK


def cmd_sparsify(a):
    inst = read_instance(a.instance)
    if a.mst_only:
        s = mst_only_sparsify(inst, a.k)
    else:
        if not a.model:
            raise UsageError("--model is required unless --mst-only is given")
        model = load_model(a.model)
        fm = assemble_features(inst, _feature_config(a))
        keep, _ = predict_mask(model, fm, a.threshold)
        s = prune_instance(inst, keep)
    if a.insert_double_tree:
        s = insert_tour_edges(s, double_tree_tours(inst))
    _write(a.out, write_sparsified(s))
    log.info("%s: kept %d of %d edges (pruning rate %.4f)", inst.name, s.m_hat, inst.m, s.pruning_rate)
    return EXIT_OK


def cmd_evaluate(a):
    inst = read_instance(a.instance)
    s = read_sparsified(a.pruned)
    if not np.array_equal(s.base.weights, inst.weights):
        raise ValueError("pruned file does not match the instance")
    rep = ev.evaluate_instance(inst, s, a.budget, known_tours=double_tree_tours(inst), group=a.group,
                               timing=a.timing)
    _write(a.out, ev.reports_to_csv([rep], timing=a.timing))
    return EXIT_OK if rep.solver_proven else EXIT_BUDGET


def cmd_report(a):
    reports = []
    for path in a.inputs:
        with open(path) as fh:
            reports.extend(ev.reports_from_csv(fh.read()))
    rows = ev.aggregate_summary(reports, _floats(a.bounds))
    _write(a.out, ev.summary_to_csv(rows))
    if a.plot_out:
        _write(a.plot_out, ev.plot_rows(reports))
    print(ev.summary_to_text(rows))
    return EXIT_OK


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tsp-sparsify", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write random EUC_2D instances")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--box", type=float, default=1e6)
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance exactly")
    s.add_argument("instance")
    s.add_argument("--all-optimal", action="store_true")
    s.add_argument("--cap", type=int, default=DEFAULT_TOUR_CAP)
    s.add_argument("--method", choices=("held-karp", "bc"), default="bc")
    s.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_solve)

    def feature_flags(q):
        q.add_argument("--k-rounds", type=int)
        q.add_argument("--copies", type=int)
        q.add_argument("--mst-k", type=int)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--perturbation", type=float, default=0.1)
        q.add_argument("--lp-values", action="store_true", help="append relaxation values as features")

    f = sub.add_parser("features", help="per-edge feature CSV")
    f.add_argument("instance")
    feature_flags(f)
    f.add_argument("--labels", help="tours JSON from `solve --all-optimal`")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_features)

    t = sub.add_parser("train", help="train the edge classifier")
    t.add_argument("--data", nargs="+", required=True)
    t.add_argument("--class-weights", default="0.01,0.99")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    t.add_argument("--l2", type=float, default=TrainConfig.l2)
    t.add_argument("--threshold", type=float)
    t.add_argument("--no-undersample", action="store_true")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    sp = sub.add_parser("sparsify", help="prune an instance")
    sp.add_argument("instance")
    sp.add_argument("--model")
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--insert-double-tree", action="store_true")
    sp.add_argument("--mst-only", action="store_true")
    sp.add_argument("--k", type=int)
    feature_flags(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sparsify)

    e = sub.add_parser("evaluate", help="optimality ratio of a pruned instance")
    e.add_argument("instance")
    e.add_argument("pruned")
    e.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    e.add_argument("--group", default="")
    e.add_argument("--timing", action="store_true", help="add a wall-clock column (breaks byte-identity)")
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="summarize report CSVs")
    r.add_argument("--in", dest="inputs", nargs="+", required=True)
    r.add_argument("--bounds", default="1.0,1.02,1.05")
    r.add_argument("--out", default="-")
    r.add_argument("--plot-out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "sparsify" and args.mst_only and args.k is None:
        from .lp import default_k
        args.k = default_k(read_instance(args.instance).n)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, KeyError, OSError, SizeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
