"""Lifelog QA benchmark toolkit.

Thin pythonic layer over the C++ core: JSON strings returned by the
extension are decoded into plain dicts/lists here.
"""

import json

from lifebench import _core
from lifebench._core import (
    Dataset,
    ScriptedBackend,
    Store,
    build_store,
    dataset_from_store,
    export_csv,
    load_csv,
    metric_registry_csv,
    number_matches,
    open_store,
    schema_ddl,
    synthesize,
)

__all__ = [
    "Dataset",
    "ScriptedBackend",
    "Store",
    "build_store",
    "dataset_from_store",
    "evaluate",
    "export_csv",
    "generate_benchmark",
    "load_csv",
    "metric_registry_csv",
    "number_matches",
    "open_store",
    "parse_answer",
    "run_sql",
    "schema_ddl",
    "score_accuracy",
    "synthesize",
    "verify_instance",
]

__version__ = "0.1.0"


def generate_benchmark(dataset, store, total, single, seed=7):
    """Generate a verified benchmark; returns a list of instance dicts."""
    jsonl = _core.generate_benchmark(dataset, store, total, single, seed)
    return [json.loads(line) for line in jsonl.splitlines()]


def verify_instance(instance, dataset, store):
    """Re-run the dual-execution check; returns (ok, diagnostic)."""
    return _core.verify_instance(json.dumps(instance), dataset, store)


def run_sql(store, sql):
    """SELECT-only execution; returns {verdict, message, columns, rows}."""
    return json.loads(store.run(sql))


def parse_answer(text, kind):
    """Extract a typed answer from model text; None when unparseable."""
    raw = _core.parse_answer(text, kind)
    return None if raw is None else json.loads(raw)


def score_accuracy(prediction, ground_truth):
    """Answer correctness between two answer-value dicts."""
    return _core.score_accuracy(json.dumps(prediction), json.dumps(ground_truth))


def evaluate(mode, instances, dataset, store, backend, budget=12, token_budget=8000):
    """Evaluate a scripted backend; returns (report dict, list of prediction dicts)."""
    bench_jsonl = "".join(json.dumps(i) + "\n" for i in instances)
    report, predictions = _core.evaluate(
        mode, bench_jsonl, dataset, store, backend, budget, token_budget
    )
    return json.loads(report), [json.loads(line) for line in predictions.splitlines()]
