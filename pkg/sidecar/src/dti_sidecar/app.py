"""FastAPI service wrapping a pretrained drug-target affinity predictor.

Wire contract (shared with the dtifuse scoring engine's remote predictor):

    POST /predict
    body     {"drug_name": str, "smiles": str, "target_name": str, "sequence": str}
    success  200 {"ml_dti_score": <finite number>}
    errors   404 {"error": "unknown_model"}   when the served tag is unknown
             422 {"error": "invalid_input"}   for malformed request bodies
             503 {"error": "model_not_loaded"} while weights are loading

    GET /health -> 200 {"status": "ok", "model": <tag>} once loaded.

Stub mode substitutes the real model with a deterministic fake: the first 8
bytes of SHA-256 over ``smiles + "\\x1f" + sequence`` (UTF-8), read as a
big-endian integer u, mapped to 4 + 6 * u / 2**64. That is the identical
pseudo-score the scoring engine's built-in surrogate computes, so wire-level
integration tests need no model download.
"""

from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass, field
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

__all__ = ["ServedModel", "build_app", "stub_score", "SUPPORTED_MODELS", "ModelLoadError"]

# Pretrained tags the real backend knows how to load (drug-encoder,
# target-encoder and training set are encoded in the tag).
SUPPORTED_MODELS = ("MPNN_CNN_BindingDB",)
STUB_MODEL_TAG = "stub"

SCORE_LOW = 4.0
SCORE_HIGH = 10.0


class ModelLoadError(RuntimeError):
    """Raised when pretrained weights cannot be loaded."""


def stub_score(smiles: str, sequence: str) -> float:
    """Deterministic stand-in score in [4, 10); same algorithm on every platform."""
    digest = hashlib.sha256(f"{smiles}\x1f{sequence}".encode("utf-8")).digest()
    unit = int.from_bytes(digest[:8], "big") / 2**64
    return SCORE_LOW + (SCORE_HIGH - SCORE_LOW) * unit


@dataclass
class ServedModel:
    """The one model instance behind the service.

    ``loaded`` guards /predict: requests are rejected until it is true.
    Inference runs under a lock because the underlying model handle is not
    assumed thread-safe.
    """

    identifier: str
    loaded: bool = False
    known: bool = True
    _predict: Callable[[str, str], float] | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def predict(self, smiles: str, sequence: str) -> float:
        with self._lock:
            return self._predict(smiles, sequence)


def _load_real_backend(tag: str) -> Callable[[str, str], float]:
    """Load a pretrained DeepPurpose model; requires the optional extra."""
    try:
        from DeepPurpose import DTI as dp_models
        from DeepPurpose import utils as dp_utils
    except ImportError as exc:
        raise ModelLoadError(
            f"model backend unavailable ({exc}); install the 'model' extra or use --stub"
        ) from exc

    drug_encoding, target_encoding = tag.split("_")[:2]
    try:
        net = dp_models.model_pretrained(model=tag)
    except Exception as exc:
        raise ModelLoadError(f"cannot load pretrained model {tag!r}: {exc}") from exc

    def predict(smiles: str, sequence: str) -> float:
        data = dp_utils.data_process(
            X_drug=[smiles],
            X_target=[sequence],
            y=[0.0],
            drug_encoding=drug_encoding,
            target_encoding=target_encoding,
            split_method="no_split",
        )
        return float(net.predict(data)[0])

    return predict


def load_model(tag: str, stub: bool = False) -> ServedModel:
    """Prepare the served model.

    Stub mode loads instantly for any tag. In real mode an unknown tag
    yields a ServedModel with known=False (requests get 404); a known tag
    that fails to load raises ModelLoadError.
    """
    model = ServedModel(identifier=tag)
    if stub:
        model._predict = stub_score
        model.loaded = True
        return model
    if tag not in SUPPORTED_MODELS:
        model.known = False
        return model
    model._predict = _load_real_backend(tag)
    model.loaded = True
    return model


class PredictionBody(BaseModel):
    drug_name: str = Field(min_length=1)
    smiles: str = Field(min_length=1)
    target_name: str = Field(min_length=1)
    sequence: str = Field(min_length=1)


def build_app(model: ServedModel) -> FastAPI:
    app = FastAPI(title="dti-sidecar", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def invalid_input_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": "invalid_input"})

    @app.get("/health")
    async def health():
        if not model.known:
            return JSONResponse(
                status_code=503, content={"status": "unknown_model", "model": model.identifier}
            )
        if not model.loaded:
            return JSONResponse(
                status_code=503, content={"status": "loading", "model": model.identifier}
            )
        return {"status": "ok", "model": model.identifier}

    @app.post("/predict")
    async def predict(body: PredictionBody):
        if not model.known:
            return JSONResponse(status_code=404, content={"error": "unknown_model"})
        if not model.loaded:
            return JSONResponse(status_code=503, content={"error": "model_not_loaded"})
        value = model.predict(body.smiles, body.sequence)
        if not math.isfinite(value):
            # Fail loudly rather than ship a NaN across the wire.
            return JSONResponse(status_code=500, content={"error": "non_finite_prediction"})
        return {"ml_dti_score": value}

    return app
