"""Coordinator that runs the three scorers and synthesizes one report.

A query names a drug, a target and the fusion weights. The coordinator
validates it, dispatches the ML, search and knowledge-graph scorers
independently (any execution order gives the same result; they share no
mutable state), merges the three scores when all succeeded, and emits a
structured report with a six-step trace:

    1. query_validation      2. task_allocation     3. agent_processing
    4. score_synthesis       5. result_integration  6. delivery

Failure policy is fail-explicit: a scorer that cannot produce a value is
reported as FAILED with its reason and the merged score is withheld; the
other scores are still reported. Only when all three scorers fail does
run_query raise PipelineError. Batch runs isolate per-query failures into
their reports and never abort the whole batch.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from . import kg as kg_module
from . import search as search_module
from .core import DEFAULT_ALPHA, DEFAULT_BETA, EntityId, FusionConfig, ScoreBundle, normalize_entity
from .errors import (
    BatchSetupError,
    DtiFuseError,
    IngestError,
    InvalidQuery,
    InvalidWeights,
    PipelineError,
)
from .fusion import WeightVector, merge, validate_alpha_beta
from .predictor import (
    EntityCatalog,
    PredictionRequest,
    Predictor,
    RemotePredictor,
    SurrogatePredictor,
    load_catalog,
)
from .search import CorpusSearchBackend, HttpSearchBackend, SearchBackend

__all__ = [
    "AgentState",
    "AgentStatus",
    "TraceRecord",
    "QueryOptions",
    "Query",
    "ScoreReport",
    "Coordinator",
    "build_coordinator",
    "run_query",
    "run_batch",
    "report_to_dict",
    "report_to_json",
]

AGENTS = ("ml", "search", "kg")
DEFAULT_AGENT_ORDER = AGENTS

WORKFLOW_STEPS = (
    "query_validation",
    "task_allocation",
    "agent_processing",
    "score_synthesis",
    "result_integration",
    "delivery",
)


class AgentState(str, Enum):
    OK = "ok"
    FAILED = "failed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class AgentStatus:
    state: AgentState
    reason: str | None = None

    @classmethod
    def ok(cls) -> "AgentStatus":
        return cls(AgentState.OK)

    @classmethod
    def failed(cls, reason: str) -> "AgentStatus":
        return cls(AgentState.FAILED, reason)

    @classmethod
    def skipped(cls, reason: str) -> "AgentStatus":
        return cls(AgentState.SKIPPED, reason)


@dataclass(frozen=True)
class TraceRecord:
    step: str
    inputs: str
    output: str
    duration_s: float


@dataclass(frozen=True)
class QueryOptions:
    """Where each scorer gets its data from."""

    search_backend: str = "corpus"  # "corpus" | "http"
    corpus_path: str | None = None
    search_url: str | None = None
    kg_cache_path: str | None = None
    predictor: str = "surrogate"  # "surrogate" | "remote"
    remote_url: str | None = None
    drug_table: str | None = None
    target_table: str | None = None


@dataclass(frozen=True)
class Query:
    """One scoring request. Validation happens in run_query, not here, so
    invalid queries can still travel through a batch and fail in isolation."""

    drug: EntityId
    target: EntityId
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    options: QueryOptions = field(default_factory=QueryOptions)


@dataclass(frozen=True)
class ScoreReport:
    """Scores, per-agent status and the workflow trace for one query."""

    drug: str
    target: str
    alpha: float
    beta: float
    ml_score: float | None
    search_score: float | None
    kg_score: float | None
    merged_score: float | None
    status: dict[str, AgentStatus]
    trace: tuple[TraceRecord, ...]
    error: str | None = None

    @property
    def bundle(self) -> ScoreBundle | None:
        """The score bundle, present only when every scorer succeeded."""
        if self.merged_score is None:
            return None
        return ScoreBundle(
            ml=self.ml_score,
            search=self.search_score,
            kg=self.kg_score,
            merged=self.merged_score,
            weights_used=WeightVector.from_alpha_beta(self.alpha, self.beta),
        )

    def all_ok(self) -> bool:
        return all(s.state is AgentState.OK for s in self.status.values())


class Coordinator:
    """Holds the loaded resources and runs queries against them.

    The graph, catalog and corpus are immutable once loaded, so one
    coordinator may serve concurrent queries.
    """

    def __init__(
        self,
        *,
        graph: kg_module.KnowledgeGraph,
        search_backend: SearchBackend,
        predictor: Predictor,
        catalog: EntityCatalog,
        config: FusionConfig | None = None,
    ):
        self._graph = graph
        self._search_backend = search_backend
        self._predictor = predictor
        self._catalog = catalog
        self._config = config or FusionConfig()

    # -- individual agents -------------------------------------------------

    def _run_ml(self, query: Query) -> float:
        drug = self._catalog.drug(query.drug)
        target = self._catalog.target(query.target)
        request = PredictionRequest(drug=drug, target=target)
        return self._predictor.predict(request).value

    def _run_search(self, query: Query) -> float:
        text = search_module.formulate_query(query.drug, query.target)
        results = self._search_backend.fetch_results(text, self._config.search_result_count)
        breakdown = search_module.search_dti_score(results, query.drug, query.target, self._config)
        return breakdown.dti_score

    def _run_kg(self, query: Query) -> float:
        return kg_module.kg_dti_score(self._graph, query.drug, query.target)

    # -- workflow ----------------------------------------------------------

    def run_query(self, query: Query, agent_order: tuple[str, ...] = DEFAULT_AGENT_ORDER) -> ScoreReport:
        """Run the six-step workflow for one query.

        ``agent_order`` permutes scorer execution (diagnostic hook; the
        result is order-independent).

        Raises:
            InvalidQuery: weight constraints violated, empty entity, or
                drug == target after normalization.
            PipelineError: all three scorers failed; the exception carries
                the assembled report.
        """
        if sorted(agent_order) != sorted(AGENTS):
            raise ValueError(f"agent_order must permute {AGENTS}, got {agent_order!r}")
        trace: list[TraceRecord] = []

        # Step 1: validate the query.
        started = time.perf_counter()
        inputs = (
            f"drug={query.drug.raw!r}, target={query.target.raw!r}, "
            f"alpha={query.alpha!r}, beta={query.beta!r}"
        )
        if not query.drug.normalized or not query.target.normalized:
            raise InvalidQuery("drug and target names must be non-empty")
        try:
            validate_alpha_beta(query.alpha, query.beta)
        except InvalidWeights as exc:
            raise InvalidQuery(str(exc)) from None
        if query.drug.normalized == query.target.normalized:
            raise InvalidQuery(
                f"drug and target normalize to the same entity: {query.drug.normalized!r}"
            )
        trace.append(
            TraceRecord(
                step="query_validation",
                inputs=inputs,
                output=f"validated pair ({query.drug.normalized!r}, {query.target.normalized!r})",
                duration_s=time.perf_counter() - started,
            )
        )

        # Step 2: allocate tasks to the specialist scorers.
        started = time.perf_counter()
        allocation = {
            "ml": f"predictor={type(self._predictor).__name__}",
            "search": f"backend={type(self._search_backend).__name__}",
            "kg": f"graph with {self._graph.node_count} nodes / {self._graph.edge_count} edges",
        }
        trace.append(
            TraceRecord(
                step="task_allocation",
                inputs=f"execution order {tuple(agent_order)!r}",
                output="; ".join(f"{agent}: {allocation[agent]}" for agent in AGENTS),
                duration_s=time.perf_counter() - started,
            )
        )

        # Step 3: run each scorer independently.
        started = time.perf_counter()
        runners = {"ml": self._run_ml, "search": self._run_search, "kg": self._run_kg}
        scores: dict[str, float | None] = {agent: None for agent in AGENTS}
        status: dict[str, AgentStatus] = {}
        for agent in agent_order:
            try:
                scores[agent] = runners[agent](query)
                status[agent] = AgentStatus.ok()
            except (DtiFuseError, ValueError) as exc:
                status[agent] = AgentStatus.failed(f"{type(exc).__name__}: {exc}")
        status = {agent: status[agent] for agent in AGENTS}  # canonical key order
        summary = "; ".join(
            f"{agent}={scores[agent]!r}" if status[agent].state is AgentState.OK
            else f"{agent}=failed ({status[agent].reason})"
            for agent in AGENTS
        )
        trace.append(
            TraceRecord(
                step="agent_processing",
                inputs="independent scorer runs",
                output=summary,
                duration_s=time.perf_counter() - started,
            )
        )

        # Step 4: merge the scores when all three are available.
        started = time.perf_counter()
        merged: float | None = None
        failed = [agent for agent in AGENTS if status[agent].state is not AgentState.OK]
        if not failed:
            merged = merge(scores["ml"], scores["search"], scores["kg"], query.alpha, query.beta)
            synthesis = f"merged={merged!r} (alpha={query.alpha!r}, beta={query.beta!r})"
        else:
            synthesis = f"merged score withheld; failed agents: {', '.join(failed)}"
        trace.append(
            TraceRecord(
                step="score_synthesis",
                inputs=f"alpha={query.alpha!r}, beta={query.beta!r}",
                output=synthesis,
                duration_s=time.perf_counter() - started,
            )
        )

        # Step 5: integrate results, including per-agent contribution terms.
        started = time.perf_counter()
        if merged is not None:
            weights = WeightVector.from_alpha_beta(query.alpha, query.beta)
            contributions = {
                "ml": weights.ml * scores["ml"],
                "search": weights.search * scores["search"],
                "kg": weights.kg * scores["kg"],
            }
            integration = "contributions " + ", ".join(
                f"{agent}={contributions[agent]!r}" for agent in AGENTS
            )
        else:
            integration = "partial result: component scores only"
        trace.append(
            TraceRecord(
                step="result_integration",
                inputs="scores and weights",
                output=integration,
                duration_s=time.perf_counter() - started,
            )
        )

        # Step 6: deliver.
        started = time.perf_counter()
        ok_count = len(AGENTS) - len(failed)
        trace.append(
            TraceRecord(
                step="delivery",
                inputs="assembled report",
                output=f"{ok_count}/3 scorers succeeded; merged {'included' if merged is not None else 'withheld'}",
                duration_s=time.perf_counter() - started,
            )
        )

        report = ScoreReport(
            drug=query.drug.raw,
            target=query.target.raw,
            alpha=query.alpha,
            beta=query.beta,
            ml_score=scores["ml"],
            search_score=scores["search"],
            kg_score=scores["kg"],
            merged_score=merged,
            status=status,
            trace=tuple(trace),
        )
        if len(failed) == len(AGENTS):
            reasons = "; ".join(f"{agent}: {status[agent].reason}" for agent in AGENTS)
            raise PipelineError(f"all scorers failed ({reasons})", report=replace(report, error="all scorers failed"))
        return report

    def run_batch(self, queries) -> list[ScoreReport]:
        """Run queries in order; per-query failures become error reports."""
        reports: list[ScoreReport] = []
        for query in queries:
            try:
                reports.append(self.run_query(query))
            except PipelineError as exc:
                reports.append(exc.report)
            except DtiFuseError as exc:
                reports.append(_error_report(query, f"{type(exc).__name__}: {exc}"))
        return reports


def _error_report(query: Query, message: str) -> ScoreReport:
    """Report for a query that failed before any scorer ran."""
    return ScoreReport(
        drug=query.drug.raw,
        target=query.target.raw,
        alpha=query.alpha,
        beta=query.beta,
        ml_score=None,
        search_score=None,
        kg_score=None,
        merged_score=None,
        status={agent: AgentStatus.skipped("query rejected") for agent in AGENTS},
        trace=(),
        error=message,
    )


def build_coordinator(options: QueryOptions, config: FusionConfig | None = None) -> Coordinator:
    """Load the resources named by the options and wire up a coordinator."""
    if options.kg_cache_path is not None:
        graph = kg_module.load_graph(options.kg_cache_path)
    else:
        graph = kg_module.KnowledgeGraph({})

    if options.search_backend == "corpus":
        search_backend: SearchBackend = CorpusSearchBackend(options.corpus_path)
    elif options.search_backend == "http":
        if not options.search_url:
            raise ValueError("search backend 'http' requires a search URL")
        search_backend = HttpSearchBackend(options.search_url)
    else:
        raise ValueError(f"unknown search backend {options.search_backend!r}")

    if options.predictor == "surrogate":
        predictor: Predictor = SurrogatePredictor()
    elif options.predictor == "remote":
        if not options.remote_url:
            raise ValueError("predictor 'remote' requires a remote URL")
        predictor = RemotePredictor(options.remote_url)
    else:
        raise ValueError(f"unknown predictor {options.predictor!r}")

    catalog = load_catalog(options.drug_table, options.target_table)
    return Coordinator(
        graph=graph,
        search_backend=search_backend,
        predictor=predictor,
        catalog=catalog,
        config=config,
    )


def run_query(query: Query, coordinator: Coordinator | None = None) -> ScoreReport:
    """Run one query, loading resources from its options when needed."""
    if coordinator is None:
        coordinator = build_coordinator(query.options)
    return coordinator.run_query(query)


def run_batch(queries, coordinator: Coordinator | None = None) -> list[ScoreReport]:
    """Run many queries against shared resources, loaded once up front.

    Shared resources come from the first query's options. Setup failures
    raise BatchSetupError before any query runs; per-query failures are
    isolated into their reports.
    """
    queries = list(queries)
    if not queries:
        return []
    if coordinator is None:
        try:
            coordinator = build_coordinator(queries[0].options)
        except (DtiFuseError, OSError, ValueError) as exc:
            raise BatchSetupError(f"cannot set up batch resources: {exc}") from exc
    return coordinator.run_batch(queries)


def report_to_dict(report: ScoreReport, include_trace: bool = True) -> dict:
    """Serialize a report with stable key order (JSON-ready)."""
    payload = {
        "drug": report.drug,
        "target": report.target,
        "alpha": report.alpha,
        "beta": report.beta,
        "ml_dti_score": report.ml_score,
        "search_dti_score": report.search_score,
        "kg_dti_score": report.kg_score,
        "merged_dti_score": report.merged_score,
        "status": {
            agent: {"state": status.state.value, "reason": status.reason}
            for agent, status in report.status.items()
        },
        "error": report.error,
    }
    if include_trace:
        payload["trace"] = [
            {
                "step": record.step,
                "inputs": record.inputs,
                "output": record.output,
                "duration_s": record.duration_s,
            }
            for record in report.trace
        ]
    return payload


def report_to_json(report: ScoreReport, include_trace: bool = True, indent: int | None = 2) -> str:
    return json.dumps(report_to_dict(report, include_trace=include_trace), indent=indent)


def load_query_file(
    path: str | Path,
    options: QueryOptions,
    default_alpha: float = DEFAULT_ALPHA,
    default_beta: float = DEFAULT_BETA,
) -> list[Query]:
    """Parse a batch query file: ``drug<TAB>target[<TAB>alpha<TAB>beta]`` per line.

    ``#`` comments and blank lines are ignored. Rows that cannot be parsed
    raise InvalidQuery (batch callers decide how to isolate that).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"query file {path} is not UTF-8: {exc}") from exc
    queries: list[Query] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise InvalidQuery(f"{path}:{lineno}: expected drug<TAB>target")
        try:
            drug = normalize_entity(fields[0])
            target = normalize_entity(fields[1])
            alpha = float(fields[2]) if len(fields) > 2 and fields[2].strip() else default_alpha
            beta = float(fields[3]) if len(fields) > 3 and fields[3].strip() else default_beta
        except (DtiFuseError, ValueError) as exc:
            raise InvalidQuery(f"{path}:{lineno}: {exc}") from None
        queries.append(Query(drug=drug, target=target, alpha=alpha, beta=beta, options=options))
    return queries
