"""`python -m embedsvc` starts the service on EMBEDSVC_PORT (default 8901)."""

from __future__ import annotations

import logging
import os

import uvicorn

from .app import create_app


def main() -> None:
    logging.basicConfig(level=logging.INFO)
    port = int(os.environ.get("EMBEDSVC_PORT", "8901"))
    uvicorn.run(create_app(), host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
