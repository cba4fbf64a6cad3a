"""CLI entry point; flags override the PORT / MODEL environment variables."""

import argparse
import os
import sys

from .service import BackendConfig, serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="embed-backend", description="Embedding microservice")
    parser.add_argument(
        "--model",
        default=os.environ.get("MODEL", "dummy:64"),
        help="pretrained model name, or dummy:<dim> for the deterministic mode",
    )
    parser.add_argument("--host", default=os.environ.get("HOST", "127.0.0.1"))
    parser.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8800")))
    parser.add_argument("--max-seq-len", type=int, default=4096)
    parser.add_argument("--max-texts", type=int, default=1024)
    parser.add_argument("--salt", type=int, default=0, help="dummy-mode hashing salt")
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = BackendConfig(
            model=args.model,
            max_seq_len=args.max_seq_len,
            device=args.device,
            host=args.host,
            port=args.port,
            max_texts=args.max_texts,
            salt=args.salt,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    serve(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
