"""Coordinator workflow: end-to-end scoring, failure policy, determinism."""

from __future__ import annotations

import itertools
import json

import pytest

from dtifuse.core import normalize_entity
from dtifuse.errors import BatchSetupError, InvalidQuery, PipelineError
from dtifuse.fusion import merge
from dtifuse.pipeline import (
    AgentState,
    Coordinator,
    Query,
    QueryOptions,
    WORKFLOW_STEPS,
    build_coordinator,
    load_query_file,
    report_to_dict,
    report_to_json,
    run_batch,
    run_query,
)
from conftest import fixed_score_server

TABLE1_ML_SCORE = 7.649889945983887


def make_options(corpus_file=None, kg_cache=None, drug_table=None, target_table=None, **extra):
    return QueryOptions(
        corpus_path=str(corpus_file) if corpus_file else None,
        kg_cache_path=str(kg_cache) if kg_cache else None,
        drug_table=str(drug_table) if drug_table else None,
        target_table=str(target_table) if target_table else None,
        **extra,
    )


@pytest.fixture
def kg_cache(fixture_graph, tmp_path):
    from dtifuse.kg import save_graph

    path = tmp_path / "graph.bin"
    save_graph(fixture_graph, path)
    return path


@pytest.fixture
def full_options(corpus_file, kg_cache, drug_table, target_table):
    return make_options(corpus_file, kg_cache, drug_table, target_table)


def topotecan_top1_query(options, alpha=0.3, beta=0.3) -> Query:
    return Query(
        drug=normalize_entity("Topotecan"),
        target=normalize_entity("TOP1"),
        alpha=alpha,
        beta=beta,
        options=options,
    )


class TestRunQuery:
    def test_end_to_end_with_remote_stub(self, corpus_file, kg_cache, drug_table, target_table):
        with fixed_score_server(TABLE1_ML_SCORE) as url:
            options = make_options(
                corpus_file, kg_cache, drug_table, target_table,
                predictor="remote", remote_url=url,
            )
            report = run_query(topotecan_top1_query(options))
        assert report.ml_score == TABLE1_ML_SCORE
        assert report.search_score == 0.27
        assert report.kg_score == 1.0
        assert report.merged_score == pytest.approx(
            merge(TABLE1_ML_SCORE, 0.27, 1.0, 0.3, 0.3), abs=0
        )
        assert report.all_ok()

    def test_surrogate_end_to_end(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        assert report.all_ok()
        assert 4.0 <= report.ml_score <= 10.0
        assert report.search_score == 0.27
        assert report.kg_score == 1.0
        assert report.merged_score == pytest.approx(
            merge(report.ml_score, 0.27, 1.0, 0.3, 0.3), abs=0
        )

    def test_unknown_drug_fails_ml_only(self, full_options):
        query = Query(
            drug=normalize_entity("Imatinib"),
            target=normalize_entity("TOP1"),
            options=full_options,
        )
        report = run_query(query)
        assert report.status["ml"].state is AgentState.FAILED
        assert "UnknownEntity" in report.status["ml"].reason
        assert report.status["search"].state is AgentState.OK
        assert report.status["kg"].state is AgentState.OK
        assert report.search_score == 0.0  # query missing from corpus
        assert report.kg_score == 0.0  # drug absent from the graph
        assert report.merged_score is None
        assert report.bundle is None

    def test_all_scores_equal_passes_through(self, fixture_graph):
        # Every agent returns the same value s => merged == s.
        class ConstantBackend:
            def fetch_results(self, query, n):
                return []

        class ConstantPredictor:
            def predict(self, request):
                from dtifuse.predictor import MlScore, MlScoreSource

                return MlScore(value=0.0, source=MlScoreSource.SURROGATE)

        from dtifuse.predictor import EntityCatalog
        from dtifuse.core import DrugRecord, TargetRecord

        drug = normalize_entity("somedrug")
        target = normalize_entity("sometarget")
        catalog = EntityCatalog(
            drugs={drug.normalized: DrugRecord(id=drug, structure="CC")},
            targets={target.normalized: TargetRecord(id=target, sequence="MK")},
        )
        coordinator = Coordinator(
            graph=fixture_graph,
            search_backend=ConstantBackend(),
            predictor=ConstantPredictor(),
            catalog=catalog,
        )
        report = coordinator.run_query(Query(drug=drug, target=target))
        # ml = search = kg = 0 here: absent from graph and corpus.
        assert report.merged_score == pytest.approx(0.0, abs=1e-15)

    def test_same_entity_rejected(self, full_options):
        query = Query(
            drug=normalize_entity("TOP1"),
            target=normalize_entity(" top1 "),
            options=full_options,
        )
        with pytest.raises(InvalidQuery):
            run_query(query)

    def test_invalid_weights_rejected(self, full_options):
        with pytest.raises(InvalidQuery):
            run_query(topotecan_top1_query(full_options, alpha=0.6, beta=0.5))

    def test_two_failed_agents_still_report_the_third(self):
        from dtifuse.errors import RetrievalError
        from dtifuse.kg import KnowledgeGraph
        from dtifuse.predictor import EntityCatalog, SurrogatePredictor

        class BrokenBackend:
            def fetch_results(self, query, n):
                raise RetrievalError("backend down")

        coordinator = Coordinator(
            graph=KnowledgeGraph({}),
            search_backend=BrokenBackend(),
            predictor=SurrogatePredictor(),
            catalog=EntityCatalog(),
        )
        query = Query(drug=normalize_entity("a"), target=normalize_entity("b"))
        report = coordinator.run_query(query)
        assert report.status["ml"].state is AgentState.FAILED
        assert report.status["search"].state is AgentState.FAILED
        assert report.status["kg"].state is AgentState.OK
        assert report.merged_score is None

    def test_pipeline_error_when_every_agent_fails(self, monkeypatch):
        from dtifuse.errors import RetrievalError, SameEntity
        from dtifuse.kg import KnowledgeGraph
        from dtifuse.predictor import EntityCatalog, SurrogatePredictor

        class BrokenBackend:
            def fetch_results(self, query, n):
                raise RetrievalError("backend down")

        coordinator = Coordinator(
            graph=KnowledgeGraph({}),
            search_backend=BrokenBackend(),
            predictor=SurrogatePredictor(),
            catalog=EntityCatalog(),
        )
        monkeypatch.setattr(
            coordinator, "_run_kg", lambda query: (_ for _ in ()).throw(SameEntity("forced"))
        )
        query = Query(drug=normalize_entity("a"), target=normalize_entity("b"))
        with pytest.raises(PipelineError) as excinfo:
            coordinator.run_query(query)
        report = excinfo.value.report
        assert report is not None
        assert all(s.state is AgentState.FAILED for s in report.status.values())
        assert report.error == "all scorers failed"


class TestDeterminismAndIndependence:
    def test_reruns_are_byte_identical(self, full_options):
        query = topotecan_top1_query(full_options)
        payloads = set()
        for _ in range(5):
            report = run_query(query)
            payloads.add(json.dumps(report_to_dict(report, include_trace=False)))
        assert len(payloads) == 1

    def test_predictor_swap_with_equal_values_changes_nothing(
        self, corpus_file, kg_cache, drug_table, target_table
    ):
        # Remote vs surrogate with identical score values must yield
        # byte-identical bundles: fusion is implementation-agnostic.
        surrogate_options = make_options(corpus_file, kg_cache, drug_table, target_table)
        surrogate_report = run_query(topotecan_top1_query(surrogate_options))
        with fixed_score_server(surrogate_report.ml_score) as url:
            remote_options = make_options(
                corpus_file, kg_cache, drug_table, target_table,
                predictor="remote", remote_url=url,
            )
            remote_report = run_query(topotecan_top1_query(remote_options))
        assert json.dumps(report_to_dict(remote_report, include_trace=False)) == json.dumps(
            report_to_dict(surrogate_report, include_trace=False)
        )

    def test_agent_order_does_not_change_result(self, full_options):
        coordinator = build_coordinator(full_options)
        query = topotecan_top1_query(full_options)
        payloads = set()
        for order in itertools.permutations(("ml", "search", "kg")):
            report = coordinator.run_query(query, agent_order=order)
            payloads.add(json.dumps(report_to_dict(report, include_trace=False)))
        assert len(payloads) == 1

    def test_bad_agent_order_rejected(self, full_options):
        coordinator = build_coordinator(full_options)
        with pytest.raises(ValueError):
            coordinator.run_query(
                topotecan_top1_query(full_options), agent_order=("ml", "ml", "kg")
            )


class TestTrace:
    def test_one_record_per_workflow_step(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        assert tuple(record.step for record in report.trace) == WORKFLOW_STEPS

    def test_integration_step_reports_contributions(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        integration = report.trace[4]
        assert "contributions" in integration.output
        assert "ml=" in integration.output

    def test_durations_are_non_negative(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        assert all(record.duration_s >= 0.0 for record in report.trace)


class TestBatch:
    def test_empty_batch(self):
        assert run_batch([]) == []

    def test_batch_isolates_invalid_query(self, full_options):
        queries = [
            topotecan_top1_query(full_options),
            topotecan_top1_query(full_options, alpha=0.9, beta=0.5),  # invalid weights
            Query(
                drug=normalize_entity("Topotecan"),
                target=normalize_entity("SLFN11"),
                options=full_options,
            ),
        ]
        reports = run_batch(queries)
        assert len(reports) == 3
        assert reports[0].error is None
        assert reports[1].error is not None
        assert "InvalidQuery" in reports[1].error
        assert all(s.state is AgentState.SKIPPED for s in reports[1].status.values())
        assert reports[2].error is None
        assert reports[2].kg_score == pytest.approx(0.7213475204444817, abs=1e-12)

    def test_identical_queries_identical_bundles(self, full_options):
        query = topotecan_top1_query(full_options)
        reports = run_batch([query] * 4)
        payloads = {
            json.dumps(report_to_dict(r, include_trace=False)) for r in reports
        }
        assert len(payloads) == 1

    def test_unreadable_shared_resources(self, tmp_path):
        options = QueryOptions(kg_cache_path=str(tmp_path / "missing.bin"))
        query = Query(
            drug=normalize_entity("a"), target=normalize_entity("b"), options=options
        )
        with pytest.raises(BatchSetupError):
            run_batch([query])

    def test_load_query_file(self, tmp_path, full_options):
        path = tmp_path / "queries.tsv"
        path.write_text(
            "# drug target [alpha beta]\n"
            "Topotecan\tTOP1\n"
            "Topotecan\tSLFN11\t0.2\t0.25\n",
            encoding="utf-8",
        )
        queries = load_query_file(path, full_options)
        assert len(queries) == 2
        assert queries[0].alpha == 0.3
        assert queries[1].alpha == 0.2
        assert queries[1].beta == 0.25

    def test_load_query_file_bad_row(self, tmp_path, full_options):
        path = tmp_path / "queries.tsv"
        path.write_text("just-one-field\n", encoding="utf-8")
        with pytest.raises(InvalidQuery):
            load_query_file(path, full_options)


class TestReportSerialization:
    def test_documented_field_names(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        payload = report_to_dict(report)
        for key in (
            "ml_dti_score",
            "search_dti_score",
            "kg_dti_score",
            "merged_dti_score",
            "status",
            "trace",
        ):
            assert key in payload
        assert payload["status"]["ml"]["state"] == "ok"

    def test_json_round_trips(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        parsed = json.loads(report_to_json(report))
        assert parsed["merged_dti_score"] == report.merged_score
        assert len(parsed["trace"]) == 6

    def test_no_trace_option(self, full_options):
        report = run_query(topotecan_top1_query(full_options))
        assert "trace" not in report_to_dict(report, include_trace=False)


class TestBuildCoordinator:
    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            build_coordinator(QueryOptions(search_backend="carrier-pigeon"))

    def test_http_backend_requires_url(self):
        with pytest.raises(ValueError):
            build_coordinator(QueryOptions(search_backend="http"))

    def test_remote_predictor_requires_url(self):
        with pytest.raises(ValueError):
            build_coordinator(QueryOptions(predictor="remote"))

    def test_defaults_build_empty_resources(self):
        coordinator = build_coordinator(QueryOptions())
        report = coordinator.run_query(
            Query(drug=normalize_entity("a"), target=normalize_entity("b"))
        )
        # Empty graph and corpus give zero scores; no catalog fails ml.
        assert report.kg_score == 0.0
        assert report.search_score == 0.0
        assert report.status["ml"].state is AgentState.FAILED
