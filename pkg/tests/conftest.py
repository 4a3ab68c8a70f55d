"""Shared fixtures: a deterministic search corpus, a tiny interaction graph
and a small drug/target catalog used across the pipeline tests.

The corpus for the Topotecan/TOP1 query is built so the ten records earn
indicator scores [3, 2, 1, 1, 1, 0, 0, 0, 0, 0]: total 8 of a possible 30,
normalizing to 0.27.
"""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from dtifuse.core import FusionConfig, normalize_entity
from dtifuse.kg import build_graph, parse_edge_lines
from dtifuse.search import SearchResultRecord

TOPOTECAN_SMILES = "CCC1(O)C(=O)OCc2c1cc1n(c2=O)Cc2cc3c(CN(C)C)c(O)ccc3nc21"
ASPIRIN_SMILES = "CC(=O)Oc1ccccc1C(=O)O"
TOP1_SEQUENCE = "MSGDHLHNDSQIEADFRLNDSHKHKDKHKDREHRHKEHKKEKDREKSKHSNSEHKDSEKKHKEKEKTKHKD"
SLFN11_SEQUENCE = "MEANQCLSVSELFSPVEGSSFLRPSQSCWEQALRRGA"

# Scores: 3, 2, 1, 1, 1 then five zeros -> T = 8, M = 30, D = 0.27.
TOPOTECAN_TOP1_RECORDS = [
    SearchResultRecord(
        title="Topotecan and TOP1",
        link="https://example.org/1",
        snippet="Topotecan binds TOP1 with potent inhibitory action on DNA religation",
    ),
    SearchResultRecord(
        title="Drug-target study",
        link="https://example.org/2",
        snippet="Topotecan interacts with TOP1 in tumor cells",
    ),
    SearchResultRecord(
        title="Topoisomerase I function",
        link="https://example.org/3",
        snippet="TOP1 modulates DNA supercoiling during replication",
    ),
    SearchResultRecord(
        title="Phase II results",
        link="https://example.org/4",
        snippet="Topotecan shows significant clinical benefit in ovarian cancer",
    ),
    SearchResultRecord(
        title="Review: camptothecins",
        link="https://example.org/5",
        snippet="Camptothecin derivatives are effective chemotherapy agents",
    ),
    SearchResultRecord(
        title="PK study",
        link="https://example.org/6",
        snippet="Pharmacokinetics of camptothecin analogues in plasma",
    ),
    SearchResultRecord(
        title="Guidelines",
        link="https://example.org/7",
        snippet="Ovarian cancer treatment guidelines overview",
    ),
    SearchResultRecord(
        title="Enzymology",
        link="https://example.org/8",
        snippet="Topoisomerase enzyme family and DNA topology",
    ),
    SearchResultRecord(
        title="Dosing",
        link="https://example.org/9",
        snippet="Chemotherapy dosing schedules for solid tumors",
    ),
    SearchResultRecord(
        title="Trials",
        link="https://example.org/10",
        snippet="Clinical trial enrollment criteria for oncology studies",
    ),
]

# topotecan-top1 is a direct edge; topotecan reaches slfn11 and slc26a4 in
# exactly three hops via abcg2 and atm.
EDGE_LINES = [
    "# fixture interaction edges",
    "Topotecan\tTOP1\tDGIDB",
    "Topotecan\tABCG2\tCTD",
    "ABCG2\tATM\tSTITCH",
    "ATM\tSLFN11\tDRUGBANK",
    "ATM\tSLC26A4\tOTHER",
]


def corpus_payload() -> dict:
    return {
        "queries": {
            "Topotecan TOP1 interaction": [
                {"title": r.title, "link": r.link, "snippet": r.snippet}
                for r in TOPOTECAN_TOP1_RECORDS
            ]
        }
    }


@pytest.fixture
def config():
    return FusionConfig()


@pytest.fixture
def topotecan():
    return normalize_entity("Topotecan")


@pytest.fixture
def top1():
    return normalize_entity("TOP1")


@pytest.fixture
def slfn11():
    return normalize_entity("SLFN11")


@pytest.fixture
def fixture_graph():
    edges, _ = parse_edge_lines(EDGE_LINES)
    return build_graph(edges)


@pytest.fixture
def corpus_file(tmp_path) -> Path:
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps(corpus_payload(), indent=2), encoding="utf-8")
    return path


@pytest.fixture
def edge_file(tmp_path) -> Path:
    path = tmp_path / "edges.tsv"
    path.write_text("\n".join(EDGE_LINES) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def drug_table(tmp_path) -> Path:
    path = tmp_path / "drugs.tsv"
    path.write_text(
        f"Topotecan\t{TOPOTECAN_SMILES}\nAspirin\t{ASPIRIN_SMILES}\n", encoding="utf-8"
    )
    return path


@pytest.fixture
def target_table(tmp_path) -> Path:
    path = tmp_path / "targets.fasta"
    path.write_text(
        f">TOP1 DNA topoisomerase 1\n{TOP1_SEQUENCE}\n"
        f">SLFN11 schlafen family member 11\n{SLFN11_SEQUENCE}\n",
        encoding="utf-8",
    )
    return path


@contextmanager
def fixed_score_server(value: float):
    """Serve POST /predict with a fixed ml_dti_score; yields the base URL."""

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            self.rfile.read(length)
            if self.path != "/predict":
                payload, status = {"error": "unknown_model"}, 404
            else:
                payload, status = {"ml_dti_score": value}, 200
            data = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        thread.join(timeout=5)
