import json
import random

import httpx
import pytest

from gntbench.backend import (
    BackendConfig,
    BackendError,
    BatchResult,
    ConfigurationError,
    _backoff_delay,
    fingerprint,
    run_batch,
    translate,
)
from gntbench.prompts import ExemplarSet, ExemplarTriplet, build_few_shot, build_zero_shot

EXEMPLAR = ExemplarTriplet(
    src_en="The teachers have arrived .",
    gendered_it="Gli insegnanti sono arrivati .",
    neutral_it="Il personale docente è arrivato .",
    term_pairs=(("Gli insegnanti sono arrivati", "Il personale docente è arrivato"),),
)
QUERY = "The voters decided ."
NEUTRAL = "L' elettorato ha deciso ."


def mock_config(**overrides) -> BackendConfig:
    base = dict(kind="mock_echo_neutral", neutral_fixture={QUERY: NEUTRAL})
    base.update(overrides)
    return BackendConfig(**base)


class TestConfigValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError, match="kind"):
            BackendConfig(kind="grpc")

    @pytest.mark.parametrize("temp", [-0.5, 2.5])
    def test_temperature_range(self, temp):
        with pytest.raises(ConfigurationError, match="temperature"):
            BackendConfig(kind="mock_fixed", temperature=temp)

    def test_max_attempts_positive(self):
        with pytest.raises(ConfigurationError, match="max_attempts"):
            BackendConfig(kind="mock_fixed", max_attempts=0)

    def test_max_in_flight_positive(self):
        with pytest.raises(ConfigurationError, match="max_in_flight"):
            BackendConfig(kind="mock_fixed", max_in_flight=0)

    def test_http_requires_endpoint(self):
        with pytest.raises(ConfigurationError, match="endpoint_url"):
            BackendConfig(kind="http_chat", credential_env_var="K")


class TestFingerprint:
    def test_known_sha256(self):
        assert fingerprint("abc") == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )

    def test_utf8_sensitivity(self):
        assert fingerprint("è") != fingerprint("e")


class TestMockBackends:
    def test_zero_shot_answer_is_bare_neutral(self):
        bundle = build_zero_shot(QUERY, "Italian")
        resp = translate(bundle, mock_config(), entry_id="e1")
        assert resp.text == NEUTRAL
        assert resp.entry_id == "e1"
        assert resp.latency_ms == 0
        assert resp.attempt == 1
        assert resp.prompt_chars == len(bundle.rendered_text)
        assert resp.completion_chars == len(NEUTRAL)
        assert resp.request_fingerprint == fingerprint(bundle.rendered_text)

    def test_contr_answer_shape(self):
        bundle = build_few_shot("contr", ExemplarSet("custom:x", (EXEMPLAR,)), QUERY)
        resp = translate(bundle, mock_config())
        assert resp.text == f"[Italian, neutral]: {NEUTRAL}"

    @pytest.mark.parametrize("kind", ["cot_src", "cot_tgt"])
    def test_cot_answer_shape(self, kind):
        bundle = build_few_shot(kind, ExemplarSet("custom:x", (EXEMPLAR,)), QUERY)
        resp = translate(bundle, mock_config())
        assert resp.text == f"The final gender-neutral translation is [{NEUTRAL}]."

    def test_missing_fixture_entry(self):
        bundle = build_zero_shot("Unmapped sentence .", "Italian")
        with pytest.raises(BackendError, match="no fixture"):
            translate(bundle, mock_config())

    def test_injected_failure(self):
        bundle = build_zero_shot(QUERY, "Italian")
        config = mock_config(mock_fail_queries=frozenset({QUERY}))
        with pytest.raises(BackendError, match="injected"):
            translate(bundle, config)

    def test_fixed_text(self):
        bundle = build_zero_shot(QUERY, "Italian")
        config = BackendConfig(kind="mock_fixed", fixed_text="always this")
        assert translate(bundle, config).text == "always this"

    def test_fixed_without_text_rejected(self):
        bundle = build_zero_shot(QUERY, "Italian")
        with pytest.raises(ConfigurationError, match="fixed_text"):
            translate(bundle, BackendConfig(kind="mock_fixed"))

    def test_repeat_calls_identical(self):
        bundle = build_zero_shot(QUERY, "Italian")
        config = mock_config()
        assert translate(bundle, config, "e1") == translate(bundle, config, "e1")


class TestBackoff:
    def test_full_jitter_bounds(self):
        config = BackendConfig(kind="mock_fixed", fixed_text="x", retry_base_s=1.0, retry_cap_s=30.0)
        random.seed(11)
        for attempt in range(1, 10):
            ceiling = min(30.0, 2.0 ** (attempt - 1))
            for _ in range(50):
                delay = _backoff_delay(attempt, config)
                assert 0.0 <= delay <= ceiling

    def test_cap_applies(self):
        config = BackendConfig(kind="mock_fixed", fixed_text="x", retry_base_s=1.0, retry_cap_s=2.0)
        random.seed(11)
        assert all(_backoff_delay(a, config) <= 2.0 for a in range(1, 12) for _ in range(20))


def http_config(**overrides) -> BackendConfig:
    base = dict(
        kind="http_chat",
        model_name="test-model",
        endpoint_url="https://api.example.test/v1/chat",
        credential_env_var="GNT_TEST_KEY",
        max_attempts=3,
        retry_base_s=0.0,
    )
    base.update(overrides)
    return BackendConfig(**base)


def ok_payload(content: str) -> dict:
    return {"choices": [{"message": {"content": content}}]}


class TestHttpBackend:
    def test_success_request_shape(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "sekret-token")
        seen = []

        def handler(request: httpx.Request) -> httpx.Response:
            seen.append(request)
            return httpx.Response(200, json=ok_payload("ciao"))

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        resp = translate(bundle, http_config(), entry_id="e9", client=client)
        assert resp.text == "ciao"
        assert resp.attempt == 1
        assert resp.entry_id == "e9"
        assert len(seen) == 1
        request = seen[0]
        assert request.method == "POST"
        assert str(request.url) == "https://api.example.test/v1/chat"
        assert request.headers["authorization"] == "Bearer sekret-token"
        body = json.loads(request.content)
        assert body == {
            "model": "test-model",
            "temperature": 0.0,
            "messages": [{"role": "user", "content": bundle.rendered_text}],
        }
        # the credential travels only in the header
        assert "sekret-token" not in request.content.decode("utf-8")

    def test_system_message_prepended(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")
        seen = []

        def handler(request):
            seen.append(json.loads(request.content))
            return httpx.Response(200, json=ok_payload("ciao"))

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        translate(bundle, http_config(system_message="Reply in Italian."), client=client)
        assert seen[0]["messages"][0] == {"role": "system", "content": "Reply in Italian."}
        assert seen[0]["messages"][1]["role"] == "user"

    def test_retry_then_success(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json=ok_payload("ciao"))

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        resp = translate(bundle, http_config(), client=client)
        assert resp.text == "ciao"
        assert resp.attempt == 3
        assert len(calls) == 3

    def test_retries_exhausted(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(429)

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(BackendError, match="after 3 attempts") as info:
            translate(bundle, http_config(), client=client)
        assert len(calls) == 3
        assert info.value.attempts == 3
        assert info.value.last_status == 429

    def test_non_retryable_status_fails_fast(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(400)

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(BackendError, match="400") as info:
            translate(bundle, http_config(), client=client)
        assert len(calls) == 1
        assert info.value.attempts == 1
        assert info.value.last_status == 400

    def test_transport_errors_retried(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")
        calls = []

        def handler(request):
            calls.append(1)
            raise httpx.ConnectError("refused")

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(BackendError, match="transport error") as info:
            translate(bundle, http_config(), client=client)
        assert len(calls) == 3
        assert info.value.last_status is None

    def test_missing_credential_blocks_before_network(self, monkeypatch):
        monkeypatch.delenv("GNT_TEST_KEY", raising=False)
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(200, json=ok_payload("ciao"))

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(ConfigurationError, match="GNT_TEST_KEY"):
            translate(bundle, http_config(), client=client)
        assert calls == []

    def test_unset_env_var_name_rejected(self, monkeypatch):
        bundle = build_zero_shot(QUERY, "Italian")
        with pytest.raises(ConfigurationError, match="credential_env_var"):
            translate(bundle, http_config(credential_env_var=""))

    def test_empty_answer_rejected(self, monkeypatch):
        monkeypatch.setenv("GNT_TEST_KEY", "k")

        def handler(request):
            return httpx.Response(200, json=ok_payload(""))

        bundle = build_zero_shot(QUERY, "Italian")
        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(BackendError, match="empty"):
            translate(bundle, http_config(), client=client)


class TestRunBatch:
    def build(self, entries):
        bundles = [build_zero_shot(e.src_en, "Italian") for e in entries]
        fixture = {e.src_en: e.ref_neutral for e in entries}
        return bundles, fixture

    def test_order_preserved(self, fixture_entries):
        bundles, fixture = self.build(fixture_entries)
        config = BackendConfig(kind="mock_echo_neutral", neutral_fixture=fixture, max_in_flight=8)
        results = run_batch(fixture_entries, bundles, config)
        assert [r.entry_id for r in results] == [e.id for e in fixture_entries]
        assert all(r.error is None for r in results)
        assert [r.response.text for r in results] == [e.ref_neutral for e in fixture_entries]

    def test_failure_isolation(self, fixture_entries):
        bundles, fixture = self.build(fixture_entries)
        bad = fixture_entries[1].src_en
        config = BackendConfig(
            kind="mock_echo_neutral",
            neutral_fixture=fixture,
            mock_fail_queries=frozenset({bad}),
        )
        results = run_batch(fixture_entries, bundles, config)
        assert results[1].response is None
        assert "injected" in results[1].error
        assert all(r.response is not None for i, r in enumerate(results) if i != 1)

    def test_batch_deterministic(self, fixture_entries):
        bundles, fixture = self.build(fixture_entries)
        config = BackendConfig(kind="mock_echo_neutral", neutral_fixture=fixture, max_in_flight=6)
        assert run_batch(fixture_entries, bundles, config) == run_batch(
            fixture_entries, bundles, config
        )

    def test_determinism_with_mock_delays(self, fixture_entries):
        # delays shuffle completion order; results must still be input-ordered
        bundles, fixture = self.build(fixture_entries)
        config = BackendConfig(
            kind="mock_echo_neutral",
            neutral_fixture=fixture,
            max_in_flight=8,
            mock_delay_max_s=0.01,
        )
        assert run_batch(fixture_entries, bundles, config) == run_batch(
            fixture_entries, bundles, config
        )

    def test_length_mismatch_rejected(self, fixture_entries):
        bundles, fixture = self.build(fixture_entries)
        config = BackendConfig(kind="mock_echo_neutral", neutral_fixture=fixture)
        with pytest.raises(ValueError, match="entries"):
            run_batch(fixture_entries, bundles[:-1], config)

    def test_empty_batch(self):
        config = BackendConfig(kind="mock_fixed", fixed_text="x")
        assert run_batch([], [], config) == []

    def test_batch_result_shape(self, fixture_entries):
        bundles, fixture = self.build(fixture_entries)
        config = BackendConfig(kind="mock_echo_neutral", neutral_fixture=fixture)
        result = run_batch(fixture_entries[:1], bundles[:1], config)[0]
        assert isinstance(result, BatchResult)
        assert result.entry_id == fixture_entries[0].id
        assert result.error is None
