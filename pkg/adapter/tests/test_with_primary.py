"""End-to-end against the primary CLI over a live HTTP server.

The adapter talks to the pipeline only through the wire protocol: these tests
boot a real uvicorn server with the stub backend, then drive the installed
`deepscan` CLI as a subprocess (serve-check conformance probe plus one full
pipeline run).
"""

import shutil
import socket
import subprocess
import threading
import time

import numpy as np
import pytest
import uvicorn
from PIL import Image

from deepscan_adapter.config import BackendConfig
from deepscan_adapter.server import create_app

deepscan_cli = shutil.which("deepscan")
pytestmark = pytest.mark.skipif(
    deepscan_cli is None, reason="primary `deepscan` CLI is not installed"
)


@pytest.fixture(scope="module")
def live_server():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    config = uvicorn.Config(
        create_app(BackendConfig()), host="127.0.0.1", port=port, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    import requests

    url = f"http://127.0.0.1:{port}"
    while time.time() < deadline:
        try:
            if requests.get(f"{url}/v1/health", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.05)
    else:
        raise RuntimeError("server did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=5)


def test_serve_check_passes(live_server):
    proc = subprocess.run(
        [deepscan_cli, "serve-check", "--url", live_server],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "[FAIL]" not in proc.stdout


def test_full_pipeline_run_against_stub_models(live_server, tmp_path):
    rng = np.random.default_rng(4)
    img = rng.integers(0, 256, (320, 320, 3), dtype=np.uint8)
    img_path = tmp_path / "scene.png"
    Image.fromarray(img).save(img_path)
    trace_path = tmp_path / "trace.json"
    proc = subprocess.run(
        [
            deepscan_cli, "run",
            "--image", str(img_path),
            "--question", "What is at the center of the image?",
            "--options", "a widget,a gadget",
            "--experts", f"remote:{live_server}",
            "--trace", str(trace_path),
        ],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert proc.stdout.strip()  # an answer was printed
    assert trace_path.exists()
    import json

    trace = json.loads(trace_path.read_text())
    assert trace["scan"]["judge_calls"] >= 1
    assert trace["answer"]
