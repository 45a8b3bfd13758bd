"""Chat-completion and embedding backends behind one interface.

Live backends speak HTTP (OpenAI-compatible chat/embeddings and Google
Generative Language endpoints); the mock backend is a pure function of
(request, seed) and is what every test and offline run uses. Responses are
parsed strictly against the shape the caller expects - the only leniency is
stripping markdown code fences, since the prompts demand raw JSON payloads
and silent best-effort parsing would mask generation defects.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Protocol, Sequence

from .domain import EntityValue, FieldSpec
from .render import MAX_VARIATIONS_PER_RENDER, RenderRequest, render
from .seeding import derive_seed, rng_for


class ProviderError(RuntimeError):
    """Transport, auth, or timeout failure after retry exhaustion."""


class MalformedOutputError(ValueError):
    """Backend answered, but the payload never parsed against the shape."""


class UsageError(ValueError):
    """Caller violated a provider precondition (e.g. empty text list)."""


class Shape(str, Enum):
    VALUES_PAYLOAD = "values_payload"
    TRANSCRIPTS_PAYLOAD = "transcripts_payload"
    BOOLEAN_VERDICT = "boolean_verdict"
    TAG_ARRAY = "tag_array"
    FREE_TEXT = "free_text"


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    expected_shape: Shape = Shape.FREE_TEXT
    temperature: float = 0.0
    top_p: float = 1.0
    max_retries: int = 3

    def __post_init__(self):
        if self.max_retries < 0:
            raise UsageError("max_retries must be >= 0")


@dataclass(frozen=True)
class ProviderProfile:
    """Where a backend lives and which env var holds its credential.

    The credential itself is never stored, logged, or serialized.
    max_requests_per_s throttles calls per profile (0 disables).
    """

    backend: str
    endpoint: str
    model: str
    credential_env: str = ""
    timeout_s: float = 30.0
    max_requests_per_s: float = 0.0

    def credential(self) -> str:
        if not self.credential_env:
            return ""
        value = os.environ.get(self.credential_env, "")
        if not value:
            raise ProviderError(
                f"credential env var {self.credential_env!r} is not set"
            )
        return value


_FENCE_RE = re.compile(r"^\s*```(?:json)?\s*(.*?)\s*```\s*$", re.DOTALL)


def strip_fences(text: str) -> str:
    m = _FENCE_RE.match(text)
    return m.group(1) if m else text.strip()


def parse_shape(raw_text: str, shape: Shape) -> Any:
    """Parse backend text strictly against the expected shape.

    Raises MalformedOutputError on any deviation.
    """
    text = strip_fences(raw_text)
    if shape is Shape.FREE_TEXT:
        return text
    if shape is Shape.BOOLEAN_VERDICT:
        verdict = text.strip().strip(".!,\"'").lower()
        if verdict == "true":
            return True
        if verdict == "false":
            return False
        raise MalformedOutputError(f"expected true/false, got {raw_text!r}")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedOutputError(f"not valid JSON: {raw_text!r}") from exc
    if shape is Shape.VALUES_PAYLOAD:
        if not isinstance(payload, dict) or not isinstance(payload.get("values"), list):
            raise MalformedOutputError("expected {\"values\": [...]}")
        return [str(v) for v in payload["values"]]
    if shape is Shape.TAG_ARRAY:
        if isinstance(payload, dict):
            payload = payload.get("variation_types", payload.get("tags"))
        if not isinstance(payload, list) or not all(isinstance(t, str) for t in payload):
            raise MalformedOutputError("expected a JSON array of tag strings")
        return payload
    if shape is Shape.TRANSCRIPTS_PAYLOAD:
        if not isinstance(payload, dict) or not isinstance(payload.get("transcripts"), list):
            raise MalformedOutputError("expected {\"transcripts\": [...]}")
        out = []
        for item in payload["transcripts"]:
            if (
                not isinstance(item, dict)
                or not isinstance(item.get("transcript"), str)
                or not isinstance(item.get("variation_types"), list)
            ):
                raise MalformedOutputError(f"bad transcript entry: {item!r}")
            out.append((item["transcript"], [str(t) for t in item["variation_types"]]))
        return out
    raise MalformedOutputError(f"unknown shape {shape!r}")


class ChatProvider(Protocol):
    def chat(self, request: ChatRequest) -> Any: ...


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> list["EmbeddingVector"]: ...


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_id: str

    @property
    def dimension(self) -> int:
        return len(self.values)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding entries must be finite")


# ---------------------------------------------------------------------------
# Live HTTP backends


def _chat_body(profile: ProviderProfile, request: ChatRequest) -> dict:
    if profile.backend == "google_generative":
        return {
            "system_instruction": {"parts": [{"text": request.system_text}]},
            "contents": [{"role": "user", "parts": [{"text": request.user_text}]}],
            "generationConfig": {
                "temperature": request.temperature,
                "topP": request.top_p,
            },
        }
    # openai_chat covers OpenAI, Azure OpenAI, and compatible gateways
    return {
        "model": profile.model,
        "temperature": request.temperature,
        "top_p": request.top_p,
        "messages": [
            {"role": "system", "content": request.system_text},
            {"role": "user", "content": request.user_text},
        ],
    }


def _chat_text_from_response(profile: ProviderProfile, payload: dict) -> str:
    try:
        if profile.backend == "google_generative":
            return payload["candidates"][0]["content"]["parts"][0]["text"]
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedOutputError(f"unexpected response envelope: {payload!r}") from exc


def _embed_body(profile: ProviderProfile, texts: Sequence[str]) -> dict:
    if profile.backend == "google_embeddings":
        return {
            "requests": [
                {"model": f"models/{profile.model}", "content": {"parts": [{"text": t}]}}
                for t in texts
            ]
        }
    return {"model": profile.model, "input": list(texts)}


def _vectors_from_response(profile: ProviderProfile, payload: dict) -> list[list[float]]:
    try:
        if profile.backend == "google_embeddings":
            return [e["values"] for e in payload["embeddings"]]
        return [e["embedding"] for e in payload["data"]]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedOutputError(f"unexpected embedding envelope: {payload!r}") from exc


class HttpProvider:
    """Chat + embeddings over HTTP with bounded retries and backoff.

    A transport callable can be injected for testing; by default httpx is
    used. Retries cover transport errors and malformed payloads alike, up
    to request.max_retries additional attempts. One handle is safe to
    share across threads; the optional per-profile rate limit is enforced
    under a lock.
    """

    def __init__(
        self,
        profile: ProviderProfile,
        transport: Callable[[str, dict, dict, float], dict] | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        backoff_s: float = 0.5,
    ):
        self.profile = profile
        self._transport = transport or self._httpx_post
        self._sleeper = sleeper
        self._backoff_s = backoff_s
        self._lock = threading.Lock()
        self._next_slot = 0.0

    @staticmethod
    def _httpx_post(url: str, headers: dict, body: dict, timeout: float) -> dict:
        import httpx

        response = httpx.post(url, headers=headers, json=body, timeout=timeout)
        response.raise_for_status()
        return response.json()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        credential = self.profile.credential()
        if credential:
            if self.profile.backend.startswith("google"):
                headers["x-goog-api-key"] = credential
            else:
                headers["Authorization"] = f"Bearer {credential}"
        return headers

    def _throttle(self) -> None:
        if self.profile.max_requests_per_s <= 0:
            return
        interval = 1.0 / self.profile.max_requests_per_s
        with self._lock:
            now = time.monotonic()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + interval
        if wait > 0:
            self._sleeper(wait)

    def _call(self, body: dict, parse: Callable[[dict], Any], max_retries: int) -> Any:
        last_error: Exception | None = None
        for attempt in range(max_retries + 1):
            if attempt:
                self._sleeper(self._backoff_s * (2 ** (attempt - 1)))
            self._throttle()
            try:
                payload = self._transport(
                    self.profile.endpoint, self._headers(), body, self.profile.timeout_s
                )
            except Exception as exc:  # transport/auth/timeout
                last_error = ProviderError(f"{self.profile.backend}: {exc}")
                continue
            try:
                return parse(payload)
            except MalformedOutputError as exc:
                last_error = exc
                continue
        assert last_error is not None
        raise last_error

    def chat(self, request: ChatRequest) -> Any:
        body = _chat_body(self.profile, request)

        def parse(payload: dict) -> Any:
            text = _chat_text_from_response(self.profile, payload)
            return parse_shape(text, request.expected_shape)

        return self._call(body, parse, request.max_retries)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise UsageError("embed needs at least one text")
        body = _embed_body(self.profile, texts)

        def parse(payload: dict) -> list[EmbeddingVector]:
            rows = _vectors_from_response(self.profile, payload)
            if len(rows) != len(texts):
                raise MalformedOutputError("embedding count != text count")
            return [
                EmbeddingVector(values=tuple(float(x) for x in row), model_id=self.profile.model)
                for row in rows
            ]

        return self._call(body, parse, max_retries=2)


# ---------------------------------------------------------------------------
# Deterministic mock backends


_FIELD_RE = re.compile(r"^(?:- )?(?P<key>[A-Za-z ]+): (?P<value>.*)$", re.MULTILINE)


def _request_fields(request: ChatRequest) -> dict[str, str]:
    fields: dict[str, str] = {}
    for m in _FIELD_RE.finditer(request.user_text):
        fields[m.group("key").strip().lower()] = m.group("value").strip()
    return fields


class MockChatProvider:
    """Rule-based stand-in for a chat backend: value generation delegates to
    seeded samplers, transcript generation to the renderer, verification to
    the spoken-form parser. Pure function of (request, seed)."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.calls = 0

    def chat(self, request: ChatRequest) -> Any:
        self.calls += 1
        if request.expected_shape is Shape.VALUES_PAYLOAD:
            return self._values(request)
        if request.expected_shape is Shape.TRANSCRIPTS_PAYLOAD:
            return self._transcripts(request)
        if request.expected_shape is Shape.BOOLEAN_VERDICT:
            return self._verdict(request)
        if request.expected_shape is Shape.TAG_ARRAY:
            return self._tags(request)
        return "ok"

    def _values(self, request: ChatRequest) -> list[str]:
        from .render import sample_value

        if "current instruction:" in request.user_text.lower():
            return self._mutations(request)
        fields = _request_fields(request)
        kind = fields.get("kind", "")
        count = int(fields.get("number of values", "1"))
        rng = rng_for(self.seed, "mock-values", kind, fields.get("field name", ""))
        out: list[str] = []
        seen: set[str] = set()
        guard = 0
        while len(out) < count and guard < count * 20:
            guard += 1
            value = sample_value(kind, None, rng)
            if value.canonical not in seen:
                seen.add(value.canonical)
                out.append(value.raw)
        return out

    # Signature-neutral surface variants so retries for single-template
    # variations still produce fresh text. Several variation ids can
    # degenerate to the same base words on pathological values (up to six,
    # needing 18 distinct texts at target 3), so the cycle holds 24.
    _VARIANTS = (
        "{t}",
        "{t}.",
        "so, {t}",
        "{t}, thanks",
        "sure, {t}",
        "{t}, got it",
        "okay, {t}",
        "alright, {t}",
        "right, {t}",
        "{t}, all right",
        "{t} then",
        "so, {t}, thanks",
        "okay so {t}",
        "{t}, okay",
        "alright, {t}, got it",
        "{t}, that was it",
        "{t}, done",
        "so {t}",
        "right then, {t}",
        "{t}, if that helps",
        "there you go, {t}",
        "{t}, as said",
        "anyway, {t}",
        "{t}, over",
    )

    def _transcripts(self, request: ChatRequest) -> list[tuple[str, list[str]]]:
        fields = _request_fields(request)
        kind = fields["kind"]
        target = fields["target value"]
        tags = [t.strip() for t in fields["variation types"].split(",") if t.strip()]
        count = int(fields.get("count", "1"))
        attempt = int(fields.get("attempt", "0"))
        try:
            taken = set(json.loads(fields.get("existing transcripts", "[]")))
        except json.JSONDecodeError:
            taken = set()
        base = derive_seed(self.seed, "mock-transcript", kind, target, *tags)
        out = []
        for i in range(count):
            transcript = render(
                RenderRequest(
                    value=EntityValue.from_raw(kind, target),
                    variation_ids=tuple(tags[:MAX_VARIATIONS_PER_RENDER]),
                    seed=base + attempt + i,
                )
            )
            # honor the Existing Transcripts field: scan decorations for one
            # not already produced for this value
            text = None
            for k in range(len(self._VARIANTS)):
                idx = (base + attempt + i + k) % len(self._VARIANTS)
                candidate = self._VARIANTS[idx].format(t=transcript.text)
                if candidate not in taken:
                    text = candidate
                    break
            if text is None:
                text = self._VARIANTS[(base + attempt + i) % len(self._VARIANTS)].format(
                    t=transcript.text
                )
            taken.add(text)
            out.append((text, list(tags)))
        return out

    def _mutations(self, request: ChatRequest) -> list[str]:
        """Mutator stand-in: extend the instruction with vocabulary drawn
        from the reported failure transcripts."""
        lines = request.user_text.splitlines()
        instruction = ""
        for i, line in enumerate(lines):
            if line.lower().startswith("current instruction:") and i + 1 < len(lines):
                instruction = lines[i + 1].strip()
                break
        m = re.search(r"Propose (\d+)", request.user_text)
        count = int(m.group(1)) if m else 1
        words = sorted(
            {
                w
                for line in lines
                if line.startswith("- transcript:")
                for w in re.findall(r"[a-z]{3,}", line.lower())
                if w not in instruction.lower() and w not in ("transcript", "expected", "got")
            }
        )
        fallbacks = [
            "Return only the extracted value.",
            "Resolve self-corrections before answering.",
            "Read digit words as digits.",
        ]
        out = [f"{instruction} {w}" for w in words[:count]]
        for extra in fallbacks:
            if len(out) >= count:
                break
            out.append(f"{instruction} {extra}")
        return out[:count] if instruction else fallbacks[:count]

    def _verdict(self, request: ChatRequest) -> bool:
        from .parse import extract
        from .domain import values_equivalent, FormatError

        fields = _request_fields(request)
        kind = fields["kind"]
        truth = fields["ground truth"]
        transcript = fields["transcript"]
        spec = FieldSpec(
            field_name=fields.get("field name", kind),
            kind=kind,
            output_type="string",
            question="?",
            description="-",
        )
        got = extract(spec, transcript)
        if got is None:
            return False
        try:
            return values_equivalent(kind, got.canonical, truth)
        except FormatError:
            return False

    def _tags(self, request: ChatRequest) -> list[str]:
        from .taxonomy import classify_rule

        fields = _request_fields(request)
        kind = fields.get("kind", "zip_code")
        m = re.search(r"^Transcript: (.*)$", request.user_text, re.MULTILINE)
        text = m.group(1) if m else request.user_text
        return sorted(classify_rule(text, kind))


class MockEmbeddingProvider:
    """Hashed bag-of-tokens vectors: deterministic, offline, fixed dimension."""

    def __init__(self, dimension: int = 256, model_id: str = "mock-bow-256"):
        self.dimension = dimension
        self.model_id = model_id

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise UsageError("embed needs at least one text")
        return [self._one(t) for t in texts]

    def _one(self, text: str) -> EmbeddingVector:
        values = [0.0] * self.dimension
        for token in text.lower().split():
            token = token.strip(".,!?;:\"'()")
            if not token:
                continue
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dimension
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            values[index] += sign
        if not any(values):
            values[0] = 1.0
        return EmbeddingVector(values=tuple(values), model_id=self.model_id)
