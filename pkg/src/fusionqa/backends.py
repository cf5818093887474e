"""Chat-completion wire client, retry policy, and the content-addressed response cache.

Wire contract (both backend roles): HTTP POST of a JSON document
``{model, messages:[{role, content}], temperature, max_tokens}`` returning
``{content: text}``. An adapter in front of a concrete vendor API is expected
to speak this dialect; the client itself stays vendor-neutral.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 1024
DEFAULT_RETRIES = 2  # extra attempts after the first, i.e. 3 attempts total
DEFAULT_BACKOFF_S = 1.0


class BackendError(Exception):
    """Base class for backend call failures."""


class TransientBackendError(BackendError):
    """Transport or throttle failure worth retrying."""


class ProtocolError(BackendError):
    """The backend replied, but not in the wire contract shape."""


class Role(Enum):
    LLM = "LLM"
    EXPERT = "EXPERT"


@dataclass(frozen=True)
class GenBackend:
    """Descriptor of one generation endpoint. Stateless and safe to share."""

    base_url: str
    model: str
    role: Role
    auth_env: str | None = None
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "base_url": self.base_url,
                "model": self.model,
                "role": self.role.value,
                "temperature": self.temperature,
                "max_tokens": self.max_tokens,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _http_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    import requests

    try:
        response = requests.post(url, json=payload, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise TransientBackendError(f"transport failure: {exc}") from exc
    if response.status_code == 429 or response.status_code >= 500:
        raise TransientBackendError(f"HTTP {response.status_code}: {response.text[:200]}")
    if response.status_code >= 400:
        raise BackendError(f"HTTP {response.status_code}: {response.text[:200]}")
    try:
        return response.json()
    except ValueError as exc:
        raise ProtocolError(f"non-JSON reply: {response.text[:200]}") from exc


Transport = Callable[[str, dict, dict, float], dict]


class ChatClient:
    """Executes backend calls with bounded retries and exponential backoff.

    Only transient transport/throttle errors are retried; protocol errors and
    other HTTP client errors fail immediately. ``calls_made`` counts transport
    invocations (cache hits upstream never reach the client).
    """

    def __init__(
        self,
        transport: Transport | None = None,
        retries: int = DEFAULT_RETRIES,
        backoff_s: float = DEFAULT_BACKOFF_S,
        timeout_s: float = 60.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._transport = transport or _http_transport
        self.retries = retries
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._sleep = sleep
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls_made(self) -> int:
        return self._calls

    def complete(self, backend: GenBackend, messages: list[dict]) -> str:
        payload = {
            "model": backend.model,
            "messages": messages,
            "temperature": backend.temperature,
            "max_tokens": backend.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if backend.auth_env:
            key = os.environ.get(backend.auth_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                with self._lock:
                    self._calls += 1
                reply = self._transport(backend.base_url, payload, headers, self.timeout_s)
                content = reply.get("content") if isinstance(reply, dict) else None
                if not isinstance(content, str):
                    raise ProtocolError(f"reply missing text content field: {reply!r:.200}")
                if not content:
                    raise ProtocolError("backend returned empty content")
                return content
            except TransientBackendError as exc:
                last_error = exc
                if attempt < self.retries:
                    wait = self.backoff_s * (2 ** attempt)
                    log.warning(
                        "transient backend error (attempt %d/%d), retrying in %.1fs: %s",
                        attempt + 1,
                        self.retries + 1,
                        wait,
                        exc,
                    )
                    self._sleep(wait)
        raise TransientBackendError(
            f"backend {backend.model} failed after {self.retries + 1} attempts: {last_error}"
        )


class ResponseCache:
    """Content-addressed JSON file cache for generation responses.

    A cached response is returned only on an exact key match over
    (question_id, strategy, backend_fingerprint, prompt hash). Reads are
    lock-free; writes are serialized and atomic (temp file + rename).
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    @staticmethod
    def key(question_id: str, strategy: str, backend_fingerprint: str, prompt: str) -> str:
        prompt_sha = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        raw = "\x1f".join((question_id, strategy, backend_fingerprint, prompt_sha))
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as f:
            return json.load(f)

    def put(self, key: str, entry: dict) -> None:
        path = self._path(key)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(entry, f, ensure_ascii=False, sort_keys=True)
            os.replace(tmp, path)


def cached_complete(
    client: ChatClient,
    backend: GenBackend,
    messages: list[dict],
    cache: ResponseCache | None,
    *,
    question_id: str,
    strategy: str,
    prompt_key: str | None = None,
) -> tuple[str, int]:
    """Complete through the cache; returns (content, latency_ms).

    ``prompt_key`` defaults to the concatenated message contents; latency is
    replayed from the cache on hits so reruns reproduce records byte-for-byte.
    """
    prompt = prompt_key if prompt_key is not None else "\x1e".join(m["content"] for m in messages)
    key = None
    if cache is not None:
        key = ResponseCache.key(question_id, strategy, backend.fingerprint, prompt)
        hit = cache.get(key)
        if hit is not None:
            return hit["response"], int(hit.get("latency_ms", 0))

    started = time.monotonic()
    content = client.complete(backend, messages)
    latency_ms = int((time.monotonic() - started) * 1000)
    if cache is not None and key is not None:
        cache.put(
            key,
            {
                "question_id": question_id,
                "strategy": strategy,
                "backend_fingerprint": backend.fingerprint,
                "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
                "response": content,
                "latency_ms": latency_ms,
            },
        )
    return content, latency_ms
