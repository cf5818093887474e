"""Acceptance: the live service satisfies the wire contract end to end,
including driving the evaluation harness's metrics over real HTTP.
"""

from __future__ import annotations

import math
import socket
import threading
import time

import pytest
import requests
import uvicorn

from embed_service.app import create_app
from embed_service.encoders import EncoderConfig

fusionqa_embeddings = pytest.importorskip(
    "fusionqa.embeddings", reason="the evaluation harness must be installed for this test"
)
from fusionqa.embeddings import EmbeddingProviderRef, Granularity, HttpEmbeddingProvider  # noqa: E402
from fusionqa.metrics import bertscore, cosine_sim  # noqa: E402


@pytest.fixture(scope="module")
def live_service():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(
        create_app(EncoderConfig(dimension=48)),
        host="127.0.0.1",
        port=port,
        log_level="error",
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{port}"
    for _ in range(100):
        try:
            if requests.get(f"{base_url}/healthz", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            time.sleep(0.05)
    else:
        raise RuntimeError("embed service did not come up")
    yield base_url
    server.should_exit = True
    thread.join(timeout=5)


def _cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))


def test_acceptance_info_matches_embed_dimensions(live_service):
    declared = requests.get(f"{live_service}/info", timeout=5).json()["dimension"]
    reply = requests.post(
        f"{live_service}/embed",
        json={"texts": ["dimension contract check"], "granularity": "sentence"},
        timeout=5,
    ).json()
    assert reply["dimension"] == declared
    assert all(len(vector) == declared for vector in reply["vectors"])
    print("\nACCEPTANCE PASS: /info dimension matches /embed vectors")


def test_acceptance_self_cosine_over_http(live_service):
    reply = requests.post(
        f"{live_service}/embed",
        json={"texts": ["the very same sentence", "the very same sentence"],
              "granularity": "sentence"},
        timeout=5,
    ).json()
    assert _cosine(reply["vectors"][0], reply["vectors"][1]) == pytest.approx(1.0, abs=1e-5)
    print("\nACCEPTANCE PASS: self-cosine via the live service is 1.0 within 1e-5")


def test_acceptance_token_alignment(live_service):
    reply = requests.post(
        f"{live_service}/embed",
        json={"texts": ["align these tokens", "and these"], "granularity": "token"},
        timeout=5,
    ).json()
    for tokens, vectors in zip(reply["tokens"], reply["vectors"]):
        assert len(tokens) == len(vectors)
    print("\nACCEPTANCE PASS: token-granularity responses align token and vector counts")


def test_acceptance_metrics_module_against_live_service(live_service):
    token_provider = HttpEmbeddingProvider(
        EmbeddingProviderRef(base_url=live_service, granularity=Granularity.TOKEN, dimension=48)
    )
    sentence_provider = HttpEmbeddingProvider(
        EmbeddingProviderRef(base_url=live_service, granularity=Granularity.SENTENCE, dimension=48)
    )
    pairs = [f"identical instrumentation text number {i}" for i in range(20)]
    for text in pairs:
        p, r, f1 = bertscore(text, text, token_provider)
        assert (p, r, f1) == pytest.approx((1.0, 1.0, 1.0), abs=1e-9)
        assert cosine_sim(text, text, sentence_provider) == pytest.approx(1.0, abs=1e-5)
    print("\nACCEPTANCE PASS: harness metrics pointed at the live service score "
          "BERTScore (1,1,1) on 20 identical-text pairs")
