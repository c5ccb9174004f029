"""Operator entry points: train, rank, evaluate, offline-risk, report,
replay, serve, compact.

Tables go to stdout as CSV (or JSON lines with --format jsonl); failures
exit nonzero after printing one machine-readable JSON error line to
stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .config import default_config, load_config
from .datasets import load_german_credit
from .errors import CreditGuardError
from .ingest import parse_arff, parse_german_credit, read_transactions
from .mlcore import (
    evaluate,
    info_gain_rank,
    load_model,
    offline_risk_table,
    prediction_report,
    save_model,
    split_dataset,
    train_naive_bayes,
    train_pruned_tree,
    train_random_forest,
)
from .service import Pipeline, replay_clock
from .store import RiskStore, context_from_obj


@dataclasses.dataclass
class ReplayReport:
    processed: int = 0
    passed_screen: int = 0
    scored: int = 0
    flagged: int = 0
    rejected: int = 0
    reason_counts: dict = dataclasses.field(default_factory=dict)
    wall_time_s: float = 0.0


def _fail(code: str, message: str) -> int:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return 1


def _load_dataset(path: str | None):
    if path is None:
        dataset, source = load_german_credit()
        if source == "surrogate":
            print("note: using the bundled surrogate dataset "
                  "(set GERMAN_CREDIT_DATA to use the real file)", file=sys.stderr)
        return dataset
    with open(path, "rb") as fh:
        if path.endswith(".arff"):
            return parse_arff(fh)
        return parse_german_credit(fh)


def _emit_table(rows: list[dict], header: list[str], fmt: str) -> None:
    if fmt == "jsonl":
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(row[column]) for column in header))


def _metrics_rows(name: str, metrics) -> list[dict]:
    return [{
        "classifier": name,
        "cci_pct": f"{metrics.cci_pct:.4f}",
        "ici_pct": f"{metrics.ici_pct:.4f}",
        "avg_tp_rate": f"{metrics.avg_tp_rate:.4f}",
        "avg_fp_rate": f"{metrics.avg_fp_rate:.4f}",
        "precision": f"{metrics.precision:.4f}",
        "recall": f"{metrics.recall:.4f}",
        "train_time_s": f"{metrics.train_time:.4f}",
        "test_time_s": f"{metrics.test_time:.4f}",
    }]

_METRICS_HEADER = ["classifier", "cci_pct", "ici_pct", "avg_tp_rate", "avg_fp_rate",
                   "precision", "recall", "train_time_s", "test_time_s"]


def cmd_rank(args) -> int:
    dataset = _load_dataset(args.data)
    ranking = info_gain_rank(dataset)
    rows = [{"attribute": name, "info_gain_bits": f"{gain:.6f}"} for name, gain in ranking]
    _emit_table(rows, ["attribute", "info_gain_bits"], args.format)
    return 0


def _train_model(dataset, args):
    train, test = split_dataset(dataset, args.train_fraction, args.seed)
    if args.classifier == "forest":
        model = train_random_forest(train, n_trees=args.trees, seed=args.seed)
    elif args.classifier == "bayes":
        model = train_naive_bayes(train)
    else:
        model = train_pruned_tree(train, prune_fraction=args.prune_fraction, seed=args.seed)
    return model, test


def cmd_train(args) -> int:
    dataset = _load_dataset(args.data)
    model, test = _train_model(dataset, args)
    metrics = evaluate(model, test)
    if args.model_out:
        save_model(model, args.model_out)
    _emit_table(_metrics_rows(args.classifier, metrics), _METRICS_HEADER, args.format)
    return 0


def cmd_evaluate(args) -> int:
    dataset = _load_dataset(args.data)
    model = load_model(args.model)
    metrics = evaluate(model, dataset)
    _emit_table(_metrics_rows(type(model).__name__, metrics), _METRICS_HEADER, args.format)
    return 0


def cmd_offline_risk(args) -> int:
    dataset = _load_dataset(args.data)
    model = load_model(args.model)
    records = offline_risk_table(model, dataset)
    rows = [
        {"account_id": r.account_id, "r_offline": f"{r.r_offline:.4f}", "source": r.source}
        for r in records
    ]
    _emit_table(rows, ["account_id", "r_offline", "source"], args.format)
    return 0


def cmd_report(args) -> int:
    dataset = _load_dataset(args.data)
    model = load_model(args.model)
    sys.stdout.write(prediction_report(model, dataset))
    return 0


def _seed_accounts(pipeline: Pipeline, accounts_path: str | None) -> None:
    if not accounts_path:
        return
    import datetime as dt

    from .ingest import parse_money

    spec = json.loads(Path(accounts_path).read_text(encoding="utf-8"))
    for entry in spec:
        account_id = str(entry["account"])
        if pipeline.store.has_account(account_id):
            continue
        history = [
            (dt.date.fromisoformat(h["date"]), parse_money(str(h["amount"])))
            for h in entry.get("history", [])
        ]
        r_offline = entry.get("r_offline")
        pipeline.register_account(
            account_id,
            float(r_offline) if r_offline is not None else None,
            context=context_from_obj(entry.get("context", {})),
            history=history,
            profile=entry.get("profile"),
        )


def run_replay(txn_path, state_dir, config, accounts_path=None,
               strict: bool = False, model=None) -> ReplayReport:
    """Stream a transaction file through the pipeline in file order."""
    store = RiskStore(state_dir, sync=False)
    audit = Path(state_dir) / "audit.jsonl" if state_dir else None
    pipeline = Pipeline(store, config, clock=replay_clock, audit_path=audit, model=model)
    _seed_accounts(pipeline, accounts_path)
    report = ReplayReport()
    started = time.perf_counter()
    try:
        with open(txn_path, encoding="utf-8") as fh:
            for _line_no, item in read_transactions(fh):
                if isinstance(item, Exception):
                    if strict:
                        raise item
                    report.rejected += 1
                    continue
                try:
                    assessment = pipeline.score_transaction(item)
                except (CreditGuardError, ValueError):
                    if strict:
                        raise
                    report.rejected += 1
                    continue
                report.processed += 1
                if assessment.outcome == "passed_screen":
                    report.passed_screen += 1
                else:
                    report.scored += 1
                if assessment.flagged:
                    report.flagged += 1
                for reason in assessment.reasons:
                    code = reason["code"]
                    report.reason_counts[code] = report.reason_counts.get(code, 0) + 1
    finally:
        pipeline.close()
    report.wall_time_s = time.perf_counter() - started
    return report


def cmd_replay(args) -> int:
    config = load_config(args.config) if args.config else default_config()
    if args.strict:
        config = dataclasses.replace(config, strict_categories=True)
    model = load_model(args.model) if args.model else None
    report = run_replay(args.transactions, args.state, config,
                        accounts_path=args.accounts, strict=args.strict, model=model)
    print(json.dumps(dataclasses.asdict(report), sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = load_config(args.config) if args.config else default_config()
    store = RiskStore(args.state, sync=True)
    audit = Path(args.state) / "audit.jsonl" if args.state else None
    model = load_model(args.model) if args.model else None
    pipeline = Pipeline(store, config, audit_path=audit, model=model)
    _seed_accounts(pipeline, args.accounts)
    app = create_app(pipeline, bearer_token=args.token)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_compact(args) -> int:
    store = RiskStore(args.state, sync=False)
    store.compact()
    store.close()
    print(json.dumps({"compacted": True, "covered_seq": store.seq}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="creditguard")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False, model=False):
        p.add_argument("--config", help="rule config JSON path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--state", help="state directory")
        p.add_argument("--strict", action="store_true")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        if data:
            p.add_argument("--data", help="dataset path (.arff or credit summary file); "
                                          "defaults to the bundled dataset")
        if model:
            p.add_argument("--model", required=True, help="trained model path")

    p = sub.add_parser("rank", help="attribute ranking by information gain")
    common(p, data=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train a classifier and print holdout metrics")
    common(p, data=True)
    p.add_argument("--classifier", choices=("forest", "bayes", "tree"), default="forest")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--prune-fraction", type=float, default=0.25)
    p.add_argument("--model-out", help="where to save the trained model")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a dataset")
    common(p, data=True, model=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("offline-risk", help="per-account offline risk table")
    common(p, data=True, model=True)
    p.set_defaults(func=cmd_offline_risk)

    p = sub.add_parser("report", help="per-account probability report CSV")
    common(p, data=True, model=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("replay", help="stream a transaction file through the pipeline")
    common(p)
    p.add_argument("--transactions", required=True, help="line-delimited JSON transactions")
    p.add_argument("--accounts", help="account seed file (JSON)")
    p.add_argument("--model", help="classifier snapshot for profile-based registration")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    common(p)
    p.add_argument("--accounts", help="account seed file (JSON)")
    p.add_argument("--model", help="classifier snapshot for profile-based registration")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8570)
    p.add_argument("--token", help="require this bearer token")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("compact", help="snapshot state and truncate the event log")
    common(p)
    p.set_defaults(func=cmd_compact)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CreditGuardError as exc:
        return _fail(type(exc).__name__, str(exc))
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
