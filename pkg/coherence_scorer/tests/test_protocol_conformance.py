"""Run the segmentation toolkit's external-scorer contract suite, unmodified,
against a live instance of this server."""

import os
import socket
import subprocess
import sys
import threading
import time
from pathlib import Path

import numpy as np
import pytest
import requests
import torch
import uvicorn

from coherence_scorer.serve import create_app
from coherence_scorer.train import BuiltinScorer, TrainerConfig

from .conftest import toy_triplets

TOOLKIT_ROOT = Path(__file__).resolve().parents[2]
CONTRACT_SUITE = TOOLKIT_ROOT / "tests" / "test_external_protocol.py"


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def live_server():
    torch.manual_seed(0)
    texts = [t[f] for t in toy_triplets(50, np.random.default_rng(0))
             for f in ("anchor", "pos", "neg_same", "neg_cross")]
    app = create_app(BuiltinScorer.fresh(texts, TrainerConfig(seed=0)))
    port = _free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            if requests.get(url + "/health", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.1)
    else:
        raise RuntimeError("server did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=5)


@pytest.mark.skipif(not CONTRACT_SUITE.exists(), reason="toolkit contract suite not present")
def test_passes_toolkit_contract_suite(live_server):
    result = subprocess.run(
        [sys.executable, "-m", "pytest", str(CONTRACT_SUITE), "-v", "-p", "no:cacheprovider"],
        cwd=TOOLKIT_ROOT,
        env={**os.environ, "DIALSEG_SCORER_URL": live_server},
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert result.returncode == 0, f"contract suite failed:\n{result.stdout}\n{result.stderr}"
    print("\nPASS [SECONDARY] protocol conformance: toolkit contract suite green against the live server")
