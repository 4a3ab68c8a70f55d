"""ML-based interaction scoring behind one interface, two implementations.

SurrogatePredictor is a deterministic stand-in for a trained model: it
hashes the (SMILES, sequence) pair with SHA-256 and maps the digest onto
[4, 10], the binding-affinity magnitude range seen in real model output.
Same inputs give byte-identical scores on every platform; no chemistry is
implied. RemotePredictor talks to a model-serving sidecar over HTTP:

    POST <base-url>/predict
    body     {"drug_name": str, "smiles": str, "target_name": str, "sequence": str}
    success  200 {"ml_dti_score": <number>}
    errors   404 {"error": "unknown_model"} | 422 {"error": "invalid_input"}

The catalog maps normalized drug/target names to their structure strings;
lookups of unknown names raise UnknownEntity, which the pipeline reports
as an ML-agent failure rather than inventing a score.
"""

from __future__ import annotations

import hashlib
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .core import DrugRecord, EntityId, TargetRecord, normalize_entity
from .errors import (
    IngestError,
    InvalidEntity,
    MalformedPrediction,
    PredictorUnavailable,
    UnknownEntity,
)

__all__ = [
    "MlScoreSource",
    "MlScore",
    "PredictionRequest",
    "Predictor",
    "SurrogatePredictor",
    "RemotePredictor",
    "surrogate_score",
    "EntityCatalog",
    "CatalogReport",
    "load_catalog",
]

logger = logging.getLogger(__name__)

SURROGATE_LOW = 4.0
SURROGATE_HIGH = 10.0


class MlScoreSource(str, Enum):
    SURROGATE = "surrogate"
    REMOTE = "remote"


@dataclass(frozen=True)
class MlScore:
    """A finite model score on the binding-affinity scale."""

    value: float
    source: MlScoreSource

    def __post_init__(self):
        if not isinstance(self.value, (int, float)) or isinstance(self.value, bool) \
                or not math.isfinite(self.value):
            raise MalformedPrediction(f"model score must be finite, got {self.value!r}")


@dataclass(frozen=True)
class PredictionRequest:
    drug: DrugRecord
    target: TargetRecord

    def __post_init__(self):
        if not self.drug.structure:
            raise ValueError(f"drug {self.drug.id.raw!r} has no structure string")
        if not self.target.sequence:
            raise ValueError(f"target {self.target.id.raw!r} has no sequence")


class Predictor(ABC):
    """Anything that turns a PredictionRequest into an MlScore."""

    @abstractmethod
    def predict(self, request: PredictionRequest) -> MlScore: ...


def surrogate_score(structure: str, sequence: str) -> float:
    """Deterministic pseudo-score in [4, 10) from a stable hash of the pair.

    Defined as: take the first 8 bytes of SHA-256 over
    ``structure + "\\x1f" + sequence`` (UTF-8) as a big-endian integer u,
    then return 4 + 6 * u / 2**64. The sidecar's stub mode implements the
    identical function.
    """
    digest = hashlib.sha256(f"{structure}\x1f{sequence}".encode("utf-8")).digest()
    unit = int.from_bytes(digest[:8], "big") / 2**64
    return SURROGATE_LOW + (SURROGATE_HIGH - SURROGATE_LOW) * unit


class SurrogatePredictor(Predictor):
    """Pure, deterministic scorer for desk-scale and test runs."""

    def predict(self, request: PredictionRequest) -> MlScore:
        value = surrogate_score(request.drug.structure, request.target.sequence)
        return MlScore(value=value, source=MlScoreSource.SURROGATE)


class RemotePredictor(Predictor):
    """HTTP client for the model-serving sidecar.

    Transport failures are retried once, then raised as
    PredictorUnavailable; any response that is not a 200 with a finite
    ``ml_dti_score`` number raises MalformedPrediction (except 404/5xx,
    which mean the service cannot serve the model at all).
    """

    def __init__(self, base_url: str, *, timeout: float = 30.0, retries: int = 1, client=None):
        import httpx

        self._base_url = base_url.rstrip("/")
        self._retries = retries
        self._client = client or httpx.Client(timeout=timeout)

    def predict(self, request: PredictionRequest) -> MlScore:
        import httpx

        body = {
            "drug_name": request.drug.id.raw,
            "smiles": request.drug.structure,
            "target_name": request.target.id.raw,
            "sequence": request.target.sequence,
        }
        url = f"{self._base_url}/predict"
        last_error: Exception | None = None
        for _ in range(self._retries + 1):
            try:
                response = self._client.post(url, json=body)
                break
            except httpx.HTTPError as exc:
                last_error = exc
        else:
            raise PredictorUnavailable(f"prediction service unreachable at {url}: {last_error}")

        if response.status_code == 404:
            raise PredictorUnavailable(f"prediction service cannot serve the model: {response.text}")
        if response.status_code >= 500:
            raise PredictorUnavailable(f"prediction service error HTTP {response.status_code}")
        if response.status_code != 200:
            raise MalformedPrediction(
                f"prediction request rejected: HTTP {response.status_code} {response.text}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedPrediction(f"prediction response is not JSON: {exc}") from exc
        if not isinstance(payload, dict) or "ml_dti_score" not in payload:
            raise MalformedPrediction(f"prediction response missing ml_dti_score: {payload!r}")
        value = payload["ml_dti_score"]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise MalformedPrediction(f"ml_dti_score is not a finite number: {value!r}")
        return MlScore(value=float(value), source=MlScoreSource.REMOTE)


@dataclass(frozen=True)
class CatalogReport:
    """Row accounting for catalog ingestion."""

    drug_rows: int = 0
    target_rows: int = 0
    skipped: int = 0
    duplicates: int = 0
    problems: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntityCatalog:
    """Normalized-name lookup for drug structures and target sequences."""

    drugs: dict[str, DrugRecord] = field(default_factory=dict)
    targets: dict[str, TargetRecord] = field(default_factory=dict)
    report: CatalogReport = CatalogReport()

    def drug(self, entity: EntityId) -> DrugRecord:
        record = self.drugs.get(entity.normalized)
        if record is None:
            raise UnknownEntity(f"drug {entity.raw!r} not found in catalog")
        return record

    def target(self, entity: EntityId) -> TargetRecord:
        record = self.targets.get(entity.normalized)
        if record is None:
            raise UnknownEntity(f"target {entity.raw!r} not found in catalog")
        return record


def _parse_tsv_records(path: Path, kind: str):
    """Yield (lineno, name, value) rows from a 2-column TSV; track problems."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {kind} table {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise IngestError(f"{kind} table {path} is not UTF-8: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        yield lineno, fields


def _load_drug_table(path: Path, problems: list[str]) -> tuple[dict[str, DrugRecord], int, int, int]:
    drugs: dict[str, DrugRecord] = {}
    rows = skipped = duplicates = 0
    for lineno, fields in _parse_tsv_records(path, "drug"):
        rows += 1
        if len(fields) < 2 or not fields[0].strip() or not fields[1].strip():
            skipped += 1
            problems.append(f"{path}:{lineno}: expected name<TAB>smiles")
            continue
        try:
            entity = normalize_entity(fields[0])
        except InvalidEntity:
            skipped += 1
            problems.append(f"{path}:{lineno}: empty drug name")
            continue
        if entity.normalized in drugs:
            duplicates += 1
            logger.info("duplicate drug %r at %s:%d; last record wins", entity.raw, path, lineno)
        drugs[entity.normalized] = DrugRecord(id=entity, structure=fields[1].strip())
    return drugs, rows, skipped, duplicates


def _load_target_tsv(path: Path, problems: list[str]) -> tuple[dict[str, TargetRecord], int, int, int]:
    targets: dict[str, TargetRecord] = {}
    rows = skipped = duplicates = 0
    for lineno, fields in _parse_tsv_records(path, "target"):
        rows += 1
        if len(fields) < 2 or not fields[0].strip() or not fields[1].strip():
            skipped += 1
            problems.append(f"{path}:{lineno}: expected name<TAB>sequence")
            continue
        try:
            entity = normalize_entity(fields[0])
            record = TargetRecord(id=entity, sequence=fields[1].strip().upper())
        except (InvalidEntity, ValueError) as exc:
            skipped += 1
            problems.append(f"{path}:{lineno}: {exc}")
            continue
        if entity.normalized in targets:
            duplicates += 1
            logger.info("duplicate target %r at %s:%d; last record wins", entity.raw, path, lineno)
        targets[entity.normalized] = record
    return targets, rows, skipped, duplicates


def _load_target_fasta(path: Path, problems: list[str]) -> tuple[dict[str, TargetRecord], int, int, int]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read target table {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise IngestError(f"target table {path} is not UTF-8: {exc}") from exc
    targets: dict[str, TargetRecord] = {}
    rows = skipped = duplicates = 0
    name: str | None = None
    chunks: list[str] = []

    def flush(lineno: int):
        nonlocal rows, skipped, duplicates
        if name is None:
            return
        rows += 1
        sequence = "".join(chunks).upper()
        try:
            entity = normalize_entity(name)
            record = TargetRecord(id=entity, sequence=sequence)
        except (InvalidEntity, ValueError) as exc:
            skipped += 1
            problems.append(f"{path}:{lineno}: {exc}")
            return
        if not sequence:
            skipped += 1
            problems.append(f"{path}:{lineno}: empty sequence for {name!r}")
            return
        if entity.normalized in targets:
            duplicates += 1
            logger.info("duplicate target %r in %s; last record wins", entity.raw, path)
        targets[entity.normalized] = record

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(">"):
            flush(lineno)
            # header is ">NAME optional description"
            name = stripped[1:].split(None, 1)[0] if stripped[1:].strip() else ""
            chunks = []
        else:
            chunks.append(stripped)
    flush(len(text.splitlines()) + 1)
    return targets, rows, skipped, duplicates


def load_catalog(drug_table: str | Path | None, target_table: str | Path | None) -> EntityCatalog:
    """Load drug and target tables into a catalog.

    Drug table: TSV ``name<TAB>smiles``. Target table: FASTA (detected by
    a leading ``>``) or TSV ``name<TAB>sequence``. Bad rows are skipped and
    counted; duplicate names keep the last record. Either path may be None
    for an empty side.
    """
    problems: list[str] = []
    drugs: dict[str, DrugRecord] = {}
    targets: dict[str, TargetRecord] = {}
    drug_rows = target_rows = skipped = duplicates = 0

    if drug_table is not None:
        drugs, drug_rows, s, d = _load_drug_table(Path(drug_table), problems)
        skipped += s
        duplicates += d

    if target_table is not None:
        path = Path(target_table)
        try:
            head = path.read_text(encoding="utf-8").lstrip()[:1]
        except OSError as exc:
            raise IngestError(f"cannot read target table {path}: {exc}") from exc
        except UnicodeDecodeError as exc:
            raise IngestError(f"target table {path} is not UTF-8: {exc}") from exc
        loader = _load_target_fasta if head == ">" else _load_target_tsv
        targets, target_rows, s, d = loader(path, problems)
        skipped += s
        duplicates += d

    report = CatalogReport(
        drug_rows=drug_rows,
        target_rows=target_rows,
        skipped=skipped,
        duplicates=duplicates,
        problems=tuple(problems),
    )
    return EntityCatalog(drugs=drugs, targets=targets, report=report)
