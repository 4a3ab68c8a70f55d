"""HTTP model-serving sidecar for drug-target affinity prediction."""

from .app import ModelLoadError, ServedModel, SUPPORTED_MODELS, build_app, load_model, stub_score

__version__ = "0.1.0"

__all__ = [
    "ServedModel",
    "SUPPORTED_MODELS",
    "ModelLoadError",
    "build_app",
    "load_model",
    "stub_score",
]
