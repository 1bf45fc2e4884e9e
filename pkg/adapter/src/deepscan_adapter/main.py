"""Server entry point: `deepscan-adapter --config server.yaml --port 8711`."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .config import load_config
from .server import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="deepscan expert adapter server")
    parser.add_argument("--config", help="YAML config (backend, device, limits)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8711)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        app = create_app(cfg)
    except (ValueError, OSError) as exc:
        print(f"startup failed: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
