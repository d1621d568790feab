"""Chat-completion backends.

Two backends sit behind one ``complete()`` entry point: an HTTP client for
any OpenAI-style chat API, and a deterministic scripted mock that every
offline test uses. Both return whole messages; there is no streaming.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import requests

from .errors import AuthFailure, BackendUnavailable, InvalidRequest, ScriptExhausted

ROLES = ("system", "user", "assistant")
WILDCARD = "*"
FINISH_REASONS = ("stop", "length", "other")


@dataclass
class ChatMessage:
    role: str
    content: str


@dataclass
class ChatRequest:
    model: str
    messages: list[ChatMessage] = field(default_factory=list)
    temperature: float = 0.0
    max_tokens: int = 1024
    stop_markers: list[str] = field(default_factory=list)


@dataclass
class ChatResponse:
    content: str
    finish_reason: str  # "stop" | "length" | "other"
    usage: dict[str, int] = field(default_factory=dict)


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def validate_request(request: ChatRequest) -> None:
    """Raise InvalidRequest unless the request satisfies its invariants."""
    if not request.messages:
        raise InvalidRequest("request has no messages")
    for message in request.messages:
        if message.role not in ROLES:
            raise InvalidRequest(f"unknown role {message.role!r}")
        if message.role in ("user", "assistant") and not message.content:
            raise InvalidRequest(f"empty content for {message.role} message")
    if not 0.0 <= request.temperature <= 2.0:
        raise InvalidRequest(f"temperature {request.temperature} outside [0, 2]")
    if request.max_tokens < 1:
        raise InvalidRequest("max_tokens must be positive")


def complete(request: ChatRequest, backend: Backend) -> ChatResponse:
    """Validate the request and return the backend's next completion."""
    validate_request(request)
    return backend.complete(request)


def _word_count(text: str) -> int:
    return len(text.split())


@dataclass
class ScriptEntry:
    """One scripted reply: the matcher constrains which requests it may answer."""

    matcher: str = WILDCARD
    response: str = ""
    finish_reason: str = "stop"


class MockBackend:
    """Replays scripted entries in order.

    On each call the first unconsumed entry whose matcher occurs in the
    request text (or is the wildcard ``"*"``) is consumed and returned.
    Earlier entries whose matchers do not match are left for later calls so
    that out-of-order arrival of distinct prompts still resolves; wildcard
    scripts behave as strict FIFO. Calls are serialized internally.
    """

    def __init__(self, entries: Sequence[ScriptEntry | tuple]):
        self._entries = [
            entry if isinstance(entry, ScriptEntry) else ScriptEntry(*entry)
            for entry in entries
        ]
        self._consumed = [False] * len(self._entries)
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        text = "\n".join(m.content for m in request.messages)
        with self._lock:
            for i, entry in enumerate(self._entries):
                if self._consumed[i]:
                    continue
                if entry.matcher == WILDCARD or entry.matcher in text:
                    self._consumed[i] = True
                    prompt_tokens = _word_count(text)
                    completion_tokens = _word_count(entry.response)
                    return ChatResponse(
                        content=entry.response,
                        finish_reason=entry.finish_reason,
                        usage={
                            "prompt_tokens": prompt_tokens,
                            "completion_tokens": completion_tokens,
                            "total_tokens": prompt_tokens + completion_tokens,
                        },
                    )
        raise ScriptExhausted("no unconsumed script entry matches the request")

    @property
    def remaining(self) -> int:
        with self._lock:
            return self._consumed.count(False)


def script_mock(entries: Sequence[ScriptEntry | tuple]) -> MockBackend:
    """Build a mock backend from (matcher, response[, finish_reason]) entries."""
    return MockBackend(entries)


def load_mock_script(path) -> MockBackend:
    """Load a mock script from a JSON file.

    The file holds a list of objects with keys ``response`` (required),
    ``matcher`` (default wildcard) and ``finish_reason`` (default "stop").
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = [
        ScriptEntry(
            matcher=item.get("matcher", WILDCARD),
            response=item["response"],
            finish_reason=item.get("finish_reason", "stop"),
        )
        for item in raw
    ]
    return MockBackend(entries)


_FINISH_MAP = {"stop": "stop", "length": "length"}


class HttpBackend:
    """OpenAI-style chat-completions client.

    Retries transport errors and HTTP 429/5xx with exponential backoff
    (three attempts by default). Auth and validation failures are never
    retried. Safe to share across worker threads.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        model: str = "",
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        transport=None,
    ):
        self._base_url = base_url.rstrip("/")
        self._api_key = api_key
        self._model = model
        self._timeout = timeout
        self._max_attempts = max(1, max_attempts)
        self._backoff_base = backoff_base
        self._transport = transport if transport is not None else requests.Session()

    @classmethod
    def from_env(cls) -> "HttpBackend":
        """Build a backend from STAGECRAFT_* environment variables."""
        base = os.environ.get("STAGECRAFT_API_BASE_URL")
        if not base:
            raise BackendUnavailable("STAGECRAFT_API_BASE_URL is not set")
        return cls(
            base_url=base,
            api_key=os.environ.get("STAGECRAFT_API_KEY"),
            model=os.environ.get("STAGECRAFT_MODEL", ""),
            timeout=float(os.environ.get("STAGECRAFT_TIMEOUT", "30")),
        )

    def complete(self, request: ChatRequest) -> ChatResponse:
        model = request.model or self._model
        if not model:
            raise InvalidRequest("no model configured")
        payload = {
            "model": model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.stop_markers:
            payload["stop"] = list(request.stop_markers)
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"

        url = f"{self._base_url}/chat/completions"
        last_error: str | None = None
        delay = self._backoff_base
        for attempt in range(self._max_attempts):
            try:
                resp = self._transport.post(url, json=payload, headers=headers, timeout=self._timeout)
            except requests.RequestException as err:
                last_error = f"transport error: {err}"
            else:
                if resp.status_code == 200:
                    return self._parse(resp)
                if resp.status_code in (401, 403):
                    raise AuthFailure(f"backend returned {resp.status_code}")
                if resp.status_code == 400:
                    raise InvalidRequest(f"backend rejected request: {resp.text[:200]}")
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                else:
                    raise BackendUnavailable(f"unexpected HTTP {resp.status_code}")
            if attempt + 1 < self._max_attempts:
                time.sleep(delay)
                delay *= 2
        raise BackendUnavailable(f"retries exhausted ({last_error})")

    @staticmethod
    def _parse(resp) -> ChatResponse:
        try:
            data = resp.json()
            choice = data["choices"][0]
            content = choice["message"]["content"]
            finish = _FINISH_MAP.get(choice.get("finish_reason"), "other")
            usage = data.get("usage", {}) or {}
        except (KeyError, IndexError, TypeError, ValueError) as err:
            raise BackendUnavailable(f"malformed backend response: {err}") from err
        return ChatResponse(content=content, finish_reason=finish, usage=dict(usage))
