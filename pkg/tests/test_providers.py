import json

import pytest

from spokenfields.providers import (
    ChatRequest,
    EmbeddingVector,
    HttpProvider,
    MalformedOutputError,
    MockChatProvider,
    MockEmbeddingProvider,
    ProviderError,
    ProviderProfile,
    Shape,
    UsageError,
    parse_shape,
    strip_fences,
)


# -- shape parsing ------------------------------------------------------------


def test_strip_fences():
    assert strip_fences('```json\n{"values": []}\n```') == '{"values": []}'
    assert strip_fences('{"values": []}') == '{"values": []}'


def test_parse_values_payload():
    assert parse_shape('{"values": ["12345", "54321"]}', Shape.VALUES_PAYLOAD) == [
        "12345",
        "54321",
    ]


def test_parse_values_payload_fenced():
    text = '```json\n{"values": ["12345"]}\n```'
    assert parse_shape(text, Shape.VALUES_PAYLOAD) == ["12345"]


def test_parse_transcripts_payload():
    payload = {
        "transcripts": [
            {"transcript": "one two three four five", "variation_types": ["digit_by_digit"]}
        ]
    }
    parsed = parse_shape(json.dumps(payload), Shape.TRANSCRIPTS_PAYLOAD)
    assert parsed == [("one two three four five", ["digit_by_digit"])]


def test_parse_transcripts_rejects_bad_entries():
    with pytest.raises(MalformedOutputError):
        parse_shape('{"transcripts": [{"transcript": 5}]}', Shape.TRANSCRIPTS_PAYLOAD)


@pytest.mark.parametrize(
    "text,expected",
    [("true", True), ("True.", True), ("FALSE", False), ('"true"', True), ("false!", False)],
)
def test_parse_boolean_verdict(text, expected):
    assert parse_shape(text, Shape.BOOLEAN_VERDICT) is expected


def test_parse_boolean_verdict_rejects_waffle():
    with pytest.raises(MalformedOutputError):
        parse_shape("probably true", Shape.BOOLEAN_VERDICT)


def test_parse_tag_array_variants():
    assert parse_shape('["a", "b"]', Shape.TAG_ARRAY) == ["a", "b"]
    assert parse_shape('{"variation_types": ["a"]}', Shape.TAG_ARRAY) == ["a"]
    with pytest.raises(MalformedOutputError):
        parse_shape('{"nope": 1}', Shape.TAG_ARRAY)


def test_parse_free_text_passthrough():
    assert parse_shape("  anything\n", Shape.FREE_TEXT) == "anything"


def test_parse_markdown_garbage_is_malformed():
    with pytest.raises(MalformedOutputError):
        parse_shape("Here you go:\n- one\n- two", Shape.VALUES_PAYLOAD)


def test_chat_request_validates_retries():
    with pytest.raises(UsageError):
        ChatRequest(system_text="s", user_text="u", max_retries=-1)


def test_chat_request_paper_defaults():
    request = ChatRequest(system_text="s", user_text="u")
    assert request.temperature == 0.0
    assert request.top_p == 1.0


# -- HttpProvider retry behavior ----------------------------------------------


def _openai_response(content: str) -> dict:
    return {"choices": [{"message": {"content": content}}]}


class FlakyTransport:
    """Fails `failures` times, then returns each payload in order."""

    def __init__(self, failures: int, payloads: list[dict]):
        self.failures = failures
        self.payloads = list(payloads)
        self.calls = 0

    def __call__(self, url, headers, body, timeout):
        self.calls += 1
        if self.failures > 0:
            self.failures -= 1
            raise ConnectionError("boom")
        return self.payloads.pop(0)


def _profile() -> ProviderProfile:
    return ProviderProfile(
        backend="openai_chat",
        endpoint="https://example.invalid/v1/chat/completions",
        model="test-model",
    )


def test_http_provider_retries_then_succeeds():
    transport = FlakyTransport(2, [_openai_response('{"values": ["12345"]}')])
    provider = HttpProvider(_profile(), transport=transport, sleeper=lambda s: None)
    request = ChatRequest(
        system_text="s", user_text="u", expected_shape=Shape.VALUES_PAYLOAD, max_retries=3
    )
    assert provider.chat(request) == ["12345"]
    assert transport.calls == 3


def test_http_provider_exhausts_retries():
    transport = FlakyTransport(10, [])
    provider = HttpProvider(_profile(), transport=transport, sleeper=lambda s: None)
    request = ChatRequest(system_text="s", user_text="u", max_retries=2)
    with pytest.raises(ProviderError):
        provider.chat(request)
    assert transport.calls == 3  # initial + 2 retries, never more


def test_http_provider_malformed_output_distinct():
    transport = FlakyTransport(0, [_openai_response("not json at all")] * 2)
    provider = HttpProvider(_profile(), transport=transport, sleeper=lambda s: None)
    request = ChatRequest(
        system_text="s", user_text="u", expected_shape=Shape.VALUES_PAYLOAD, max_retries=1
    )
    with pytest.raises(MalformedOutputError):
        provider.chat(request)


def test_http_provider_fence_stripping_end_to_end():
    transport = FlakyTransport(0, [_openai_response('```json\n{"values": ["1"]}\n```')])
    provider = HttpProvider(_profile(), transport=transport, sleeper=lambda s: None)
    request = ChatRequest(system_text="s", user_text="u", expected_shape=Shape.VALUES_PAYLOAD)
    assert provider.chat(request) == ["1"]


def test_http_provider_missing_credential():
    profile = ProviderProfile(
        backend="openai_chat",
        endpoint="https://example.invalid/x",
        model="m",
        credential_env="SPOKENFIELDS_TEST_NO_SUCH_VAR",
    )
    provider = HttpProvider(profile, transport=lambda *a: {}, sleeper=lambda s: None)
    with pytest.raises(ProviderError):
        provider.chat(ChatRequest(system_text="s", user_text="u", max_retries=0))


def test_profile_never_exposes_secret(monkeypatch):
    monkeypatch.setenv("SPOKENFIELDS_TEST_SECRET", "hunter2")
    profile = ProviderProfile(
        backend="openai_chat",
        endpoint="https://example.invalid/x",
        model="m",
        credential_env="SPOKENFIELDS_TEST_SECRET",
    )
    assert "hunter2" not in repr(profile)
    assert "hunter2" not in json.dumps(profile.__dict__)


def test_embed_requires_texts():
    with pytest.raises(UsageError):
        MockEmbeddingProvider().embed([])


def test_http_provider_rate_limit_spaces_calls():
    sleeps = []
    transport = FlakyTransport(0, [_openai_response('{"values": ["1"]}')] * 3)
    profile = ProviderProfile(
        backend="openai_chat",
        endpoint="https://example.invalid/x",
        model="m",
        max_requests_per_s=100.0,
    )
    provider = HttpProvider(profile, transport=transport, sleeper=sleeps.append)
    request = ChatRequest(system_text="s", user_text="u", expected_shape=Shape.VALUES_PAYLOAD)
    for _ in range(3):
        provider.chat(request)
    # second and third calls had to wait for their slots
    assert len(sleeps) >= 2
    assert all(s > 0 for s in sleeps)


def test_http_provider_thread_safe():
    import threading

    transport = FlakyTransport(0, [_openai_response('{"values": ["1"]}')] * 16)
    provider = HttpProvider(_profile(), transport=transport, sleeper=lambda s: None)
    request = ChatRequest(system_text="s", user_text="u", expected_shape=Shape.VALUES_PAYLOAD)
    results = []
    threads = [
        threading.Thread(target=lambda: results.append(provider.chat(request)))
        for _ in range(8)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [["1"]] * 8


# -- mock determinism ----------------------------------------------------------


def test_mock_chat_values_deterministic():
    request = ChatRequest(
        system_text="s",
        user_text="- Field Name: zip_code\n- Number of Values: 3\n- Kind: zip_code",
        expected_shape=Shape.VALUES_PAYLOAD,
    )
    a = MockChatProvider(seed=4).chat(request)
    b = MockChatProvider(seed=4).chat(request)
    assert a == b
    assert len(set(a)) == 3


def test_mock_embed_deterministic_and_identical_texts_match():
    provider = MockEmbeddingProvider()
    va, vb = provider.embed(["a b c", "a b c"])
    assert va == vb
    assert va.dimension == 256


def test_mock_embed_orders_preserved():
    provider = MockEmbeddingProvider()
    vectors = provider.embed(["first", "second"])
    assert vectors[0] != vectors[1]
    again = provider.embed(["first", "second"])
    assert vectors == again


def test_embedding_vector_rejects_non_finite():
    with pytest.raises(ValueError):
        EmbeddingVector(values=(float("nan"),), model_id="x")
