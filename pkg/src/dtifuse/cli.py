"""Command-line interface.

Subcommands:
    score        score one drug-target pair and print the report JSON
    batch        score many pairs from a TSV file (one report JSON per line)
    build-kg     build the knowledge-graph cache from edge-list files
    fit-weights  fit fusion weights from a scored-pairs table
    eval         compare prediction and truth tables with regression metrics

Exit codes: 0 success, 1 invalid input, 2 resource error, 3 all scorers
failed for a single-pair score.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import kg as kg_module
from . import metrics as metrics_module
from . import pipeline as pipeline_module
from . import weightfit as weightfit_module
from .core import load_fusion_config, normalize_entity
from .errors import (
    BatchSetupError,
    DegenerateSeries,
    DtiFuseError,
    GraphCacheError,
    IngestError,
    InvalidEntity,
    InvalidProblem,
    InvalidQuery,
    InvalidSeries,
    InvalidWeights,
    PipelineError,
    RetrievalError,
)

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_RESOURCE_ERROR = 2
EXIT_ALL_SCORERS_FAILED = 3

_INVALID_INPUT_ERRORS = (
    InvalidEntity,
    InvalidQuery,
    InvalidWeights,
    InvalidProblem,
    InvalidSeries,
    DegenerateSeries,
    ValueError,
)
_RESOURCE_ERRORS = (
    IngestError,
    RetrievalError,
    GraphCacheError,
    BatchSetupError,
    OSError,
)


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID_INPUT)


def _add_scoring_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None, help="weight for the ML score")
    parser.add_argument("--beta", type=float, default=None, help="weight for the search score")
    parser.add_argument("--config", default=None, help="key/value configuration file")
    parser.add_argument("--kg", default=None, metavar="CACHE", help="knowledge-graph cache file")
    parser.add_argument("--corpus", default=None, help="search corpus JSON file")
    parser.add_argument(
        "--search-backend", choices=("corpus", "http"), default="corpus",
        help="where search results come from (default: corpus)",
    )
    parser.add_argument("--search-url", default=None, help="endpoint for the http search backend")
    parser.add_argument(
        "--predictor", choices=("surrogate", "remote"), default="surrogate",
        help="ML scorer implementation (default: surrogate)",
    )
    parser.add_argument("--remote-url", default=None, help="base URL of the model-serving sidecar")
    parser.add_argument("--drugs", default=None, metavar="TSV", help="drug table: name<TAB>smiles")
    parser.add_argument(
        "--targets", default=None, metavar="FILE", help="target table: FASTA or name<TAB>sequence TSV"
    )
    parser.add_argument("--no-trace", action="store_true", help="omit the workflow trace from output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dtifuse", description="Multi-source drug-target interaction scoring")
    commands = parser.add_subparsers(dest="command", required=True)

    score = commands.add_parser("score", help="score one drug-target pair")
    score.add_argument("--drug", required=True)
    score.add_argument("--target", required=True)
    _add_scoring_options(score)

    batch = commands.add_parser("batch", help="score pairs listed in a TSV file")
    batch.add_argument("--input", required=True, help="TSV: drug<TAB>target[<TAB>alpha<TAB>beta]")
    _add_scoring_options(batch)

    build_kg = commands.add_parser("build-kg", help="build the knowledge-graph cache")
    build_kg.add_argument("--edges", nargs="+", required=True, help="edge-list TSV files")
    build_kg.add_argument("--out", required=True, help="cache file to write")

    fit = commands.add_parser("fit-weights", help="fit fusion weights from scored pairs")
    fit.add_argument("--input", required=True, help="TSV with ml/search/kg scores and ground truth")
    fit.add_argument("--tolerance", type=float, default=weightfit_module.DEFAULT_TOLERANCE)
    fit.add_argument("--max-iterations", type=int, default=weightfit_module.DEFAULT_MAX_ITERATIONS)

    evaluate = commands.add_parser("eval", help="regression metrics for aligned value tables")
    evaluate.add_argument("--pred", required=True, help="TSV: id<TAB>predicted value")
    evaluate.add_argument("--truth", required=True, help="TSV: id<TAB>true value")

    return parser


def _resolve_weights(args) -> tuple[float, float]:
    """Precedence: CLI flag > environment variable > config file > default."""
    config = load_fusion_config(args.config, overrides={"alpha": args.alpha, "beta": args.beta})
    return config.alpha, config.beta


def _query_options(args) -> pipeline_module.QueryOptions:
    return pipeline_module.QueryOptions(
        search_backend=args.search_backend,
        corpus_path=args.corpus,
        search_url=args.search_url,
        kg_cache_path=args.kg,
        predictor=args.predictor,
        remote_url=args.remote_url,
        drug_table=args.drugs,
        target_table=args.targets,
    )


def _cmd_score(args) -> int:
    alpha, beta = _resolve_weights(args)
    query = pipeline_module.Query(
        drug=normalize_entity(args.drug),
        target=normalize_entity(args.target),
        alpha=alpha,
        beta=beta,
        options=_query_options(args),
    )
    try:
        report = pipeline_module.run_query(query)
    except PipelineError as exc:
        if exc.report is not None:
            print(pipeline_module.report_to_json(exc.report, include_trace=not args.no_trace))
        print(f"dtifuse: error: {exc}", file=sys.stderr)
        return EXIT_ALL_SCORERS_FAILED
    print(pipeline_module.report_to_json(report, include_trace=not args.no_trace))
    return EXIT_OK


def _cmd_batch(args) -> int:
    alpha, beta = _resolve_weights(args)
    options = _query_options(args)
    queries = pipeline_module.load_query_file(
        args.input, options, default_alpha=alpha, default_beta=beta
    )
    reports = pipeline_module.run_batch(queries)
    for report in reports:
        print(
            pipeline_module.report_to_json(
                report, include_trace=not args.no_trace, indent=None
            )
        )
    return EXIT_OK


def _cmd_build_kg(args) -> int:
    graph, report = kg_module.build_graph_from_files(args.edges)
    kg_module.save_graph(graph, args.out)
    summary = dict(report.as_dict(), nodes=graph.node_count, edges=graph.edge_count, cache=args.out)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_fit_weights(args) -> int:
    problem = weightfit_module.load_fit_table(args.input)
    result = weightfit_module.fit_weights(
        problem, tolerance=args.tolerance, max_iterations=args.max_iterations
    )
    payload = {
        "weights": {
            "ml": result.weights.ml,
            "search": result.weights.search,
            "kg": result.weights.kg,
        },
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def _cmd_eval(args) -> int:
    print(json.dumps(metrics_module.evaluate_files(args.pred, args.truth), indent=2))
    return EXIT_OK


_COMMANDS = {
    "score": _cmd_score,
    "batch": _cmd_batch,
    "build-kg": _cmd_build_kg,
    "fit-weights": _cmd_fit_weights,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INVALID_INPUT_ERRORS as exc:
        print(f"dtifuse: error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except _RESOURCE_ERRORS as exc:
        print(f"dtifuse: error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_ERROR
    except PipelineError as exc:
        print(f"dtifuse: error: {exc}", file=sys.stderr)
        return EXIT_ALL_SCORERS_FAILED
    except DtiFuseError as exc:
        print(f"dtifuse: error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
