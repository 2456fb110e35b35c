"""Translation backend dispatch.

Three backend kinds share one entry point:

* ``http_chat``          — a chat-completion HTTP endpoint, single user
                           message, retried with exponential backoff.
* ``mock_echo_neutral``  — deterministic offline stand-in that answers with
                           a fixture neutral reference wrapped in the
                           template kind's expected answer shape.
* ``mock_fixed``         — answers a configured constant.

The credential for http_chat is read from an environment variable at call
time and travels only in the Authorization header, never in the request
body or in any persisted config.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from .prompts import PromptBundle

BACKEND_KINDS = ("http_chat", "mock_echo_neutral", "mock_fixed")

COT_ANSWER_SHAPE = "The final gender-neutral translation is [{neutral}]."
CONTR_ANSWER_SHAPE = "[Italian, neutral]: {neutral}"

# HTTP statuses worth retrying; everything else 4xx is a hard failure.
RETRYABLE_STATUSES = (429, 500, 502, 503, 504)


class ConfigurationError(ValueError):
    pass


class BackendError(RuntimeError):
    def __init__(self, message: str, attempts: int = 0, last_status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.last_status = last_status


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    model_name: str = "unknown"
    # 0.0 is the pinned default; changing it requires an explicit argument.
    temperature: float = 0.0
    endpoint_url: str = ""
    credential_env_var: str = ""
    max_attempts: int = 3
    max_in_flight: int = 4
    timeout_s: float = 60.0
    retry_base_s: float = 1.0
    retry_cap_s: float = 30.0
    system_message: str | None = None
    fixed_text: str = ""
    # mock_echo_neutral side channel: query source sentence -> neutral reference
    neutral_fixture: dict[str, str] = field(default_factory=dict)
    # query source sentences the mock should fail on, for batch isolation tests
    mock_fail_queries: frozenset[str] = frozenset()
    mock_delay_max_s: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ConfigurationError(f"unknown backend kind {self.kind!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigurationError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.max_attempts < 1:
            raise ConfigurationError("max_attempts must be positive")
        if self.max_in_flight < 1:
            raise ConfigurationError("max_in_flight must be positive")
        if self.kind == "http_chat" and not self.endpoint_url:
            raise ConfigurationError("http_chat requires endpoint_url")


@dataclass(frozen=True)
class RawResponse:
    entry_id: str
    request_fingerprint: str
    text: str
    latency_ms: int
    prompt_chars: int
    completion_chars: int
    attempt: int


@dataclass(frozen=True)
class BatchResult:
    entry_id: str
    response: RawResponse | None = None
    error: str | None = None


def fingerprint(prompt_text: str) -> str:
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


def _mock_answer(bundle: PromptBundle, config: BackendConfig) -> str:
    if config.kind == "mock_fixed":
        if not config.fixed_text:
            raise ConfigurationError("mock_fixed requires fixed_text")
        return config.fixed_text
    if bundle.query_src in config.mock_fail_queries:
        raise BackendError(f"mock failure injected for query {bundle.query_src!r}", attempts=1)
    try:
        neutral = config.neutral_fixture[bundle.query_src]
    except KeyError:
        raise BackendError(
            f"mock_echo_neutral has no fixture for query {bundle.query_src!r}", attempts=1
        ) from None
    if bundle.template_kind == "contr":
        return CONTR_ANSWER_SHAPE.format(neutral=neutral)
    if bundle.template_kind in ("cot_src", "cot_tgt"):
        return COT_ANSWER_SHAPE.format(neutral=neutral)
    return neutral


def _backoff_delay(attempt: int, config: BackendConfig) -> float:
    # Exponential backoff with full jitter: uniform over [0, min(cap, base*2^n)].
    ceiling = min(config.retry_cap_s, config.retry_base_s * (2 ** (attempt - 1)))
    return random.uniform(0.0, ceiling)


def _http_answer(bundle: PromptBundle, config: BackendConfig, client: httpx.Client | None) -> tuple[str, int]:
    """Returns (answer text, attempt number that succeeded)."""
    if not config.credential_env_var:
        raise ConfigurationError("http_chat requires credential_env_var")
    credential = os.environ.get(config.credential_env_var)
    if not credential:
        raise ConfigurationError(
            f"environment variable {config.credential_env_var} is not set"
        )
    messages = []
    if config.system_message is not None:
        messages.append({"role": "system", "content": config.system_message})
    messages.append({"role": "user", "content": bundle.rendered_text})
    body = {
        "model": config.model_name,
        "temperature": config.temperature,
        "messages": messages,
    }
    headers = {"Authorization": f"Bearer {credential}"}
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=config.timeout_s)
    last_error = "no attempt made"
    last_status: int | None = None
    try:
        for attempt in range(1, config.max_attempts + 1):
            try:
                resp = client.post(config.endpoint_url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                last_status = None
            else:
                if resp.status_code == 200:
                    data = resp.json()
                    text = data["choices"][0]["message"]["content"]
                    if not text:
                        raise BackendError("backend returned empty answer", attempts=attempt, last_status=200)
                    return text, attempt
                last_error = f"HTTP {resp.status_code}"
                last_status = resp.status_code
                if resp.status_code not in RETRYABLE_STATUSES:
                    raise BackendError(
                        f"backend request failed with {last_error}",
                        attempts=attempt,
                        last_status=last_status,
                    )
            if attempt < config.max_attempts:
                time.sleep(_backoff_delay(attempt, config))
        raise BackendError(
            f"backend request failed after {config.max_attempts} attempts ({last_error})",
            attempts=config.max_attempts,
            last_status=last_status,
        )
    finally:
        if own_client:
            client.close()


def translate(
    bundle: PromptBundle,
    config: BackendConfig,
    entry_id: str = "",
    client: httpx.Client | None = None,
) -> RawResponse:
    if config.kind == "http_chat":
        started = time.monotonic()
        text, attempt = _http_answer(bundle, config, client)
        latency_ms = int((time.monotonic() - started) * 1000)
    else:
        if config.mock_delay_max_s > 0:
            time.sleep(random.uniform(0.0, config.mock_delay_max_s))
        text = _mock_answer(bundle, config)
        # mocks report zero latency so repeated runs are byte-identical
        latency_ms = 0
        attempt = 1
    return RawResponse(
        entry_id=entry_id,
        request_fingerprint=fingerprint(bundle.rendered_text),
        text=text,
        latency_ms=latency_ms,
        prompt_chars=len(bundle.rendered_text),
        completion_chars=len(text),
        attempt=attempt,
    )


def run_batch(entries, bundles: list[PromptBundle], config: BackendConfig) -> list[BatchResult]:
    """Translate a corpus batch concurrently, preserving input order.

    ``entries`` only needs an ``id`` attribute per element (CorpusEntry
    satisfies this). Per-entry failures become BatchResult.error without
    aborting the rest of the batch.
    """
    if len(entries) != len(bundles):
        raise ValueError(f"{len(entries)} entries but {len(bundles)} bundles")
    if not entries:
        return []
    client = httpx.Client(timeout=config.timeout_s) if config.kind == "http_chat" else None

    def one(entry_id: str, bundle: PromptBundle) -> BatchResult:
        try:
            return BatchResult(entry_id, response=translate(bundle, config, entry_id, client))
        except (BackendError, ConfigurationError) as exc:
            return BatchResult(entry_id, error=str(exc))

    try:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            return list(pool.map(one, [e.id for e in entries], bundles))
    finally:
        if client is not None:
            client.close()
