"""Entry point: load the model, then serve the prediction API."""

from __future__ import annotations

import argparse
import sys

from .app import ModelLoadError, SUPPORTED_MODELS, build_app, load_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dti-sidecar",
        description="HTTP serving for a pretrained drug-target affinity predictor",
    )
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument(
        "--model",
        default=SUPPORTED_MODELS[0],
        help=f"pretrained model tag (known: {', '.join(SUPPORTED_MODELS)})",
    )
    parser.add_argument(
        "--stub",
        action="store_true",
        help="serve a deterministic fake instead of real weights (no download)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model, stub=args.stub)
    except ModelLoadError as exc:
        print(f"dti-sidecar: fatal: {exc}", file=sys.stderr)
        return 1
    if not model.known:
        print(
            f"dti-sidecar: warning: unknown model tag {args.model!r}; "
            "serving 404 unknown_model responses",
            file=sys.stderr,
        )
    uvicorn.run(build_app(model), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
