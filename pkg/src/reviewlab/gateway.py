"""Uniform chat-completion interface: providers, retries, parse-retry loop.

Providers expose one method, ``send(ChatRequest) -> ChatResponse``, raising
classified errors.  ``complete`` adds bounded retries with exponential
backoff for transient failures; ``complete_parsed`` layers a
parse-and-correct loop on top for callers that need structured output.
A deterministic scripted provider makes every pipeline bit-reproducible
in tests.
"""

from __future__ import annotations

import json
import os
import threading
import time
from contextlib import nullcontext
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import requests

from .errors import (
    ParseExhaustionError,
    ProviderRejectionError,
    ProviderTimeoutError,
    ReviewFormatError,
    ThrottleError,
    TransportError,
)

DEFAULT_MAX_IN_FLIGHT = 4


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 0.7
    max_output_tokens: int = 2048
    model_name: str = ""

    def __post_init__(self) -> None:
        if not self.user_prompt:
            raise ValueError("user_prompt must be non-empty")
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: tuple[int, int]  # (prompt_tokens, completion_tokens)
    latency: float  # seconds


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.5
    retryable_classes: tuple[type[Exception], ...] = (TransportError,)

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


class AuditLog:
    """Append-only JSONL log of prompts, outputs, and token usage."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")


class ChatProvider:
    """Base provider: concurrency slot management plus the send contract."""

    name = "provider"
    model_name = ""

    def __init__(self, max_in_flight: int = DEFAULT_MAX_IN_FLIGHT) -> None:
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def slot(self):
        return self._slots if hasattr(self, "_slots") else nullcontext()

    def send(self, request: ChatRequest) -> ChatResponse:
        raise NotImplementedError


class ScriptedProvider(ChatProvider):
    """Deterministic mock provider driven by content-keyed scripts.

    ``rules`` is a sequence of (matcher, outputs) pairs.  A matcher is a
    substring of the user prompt or a callable on the request; outputs is
    a list of strings and/or exceptions consumed in order per rule (the
    last entry repeats once exhausted).  Requests matching no rule fall
    through to ``default``.  Because queues are keyed by rule rather than
    arrival order, concurrent interleavings cannot change what any given
    request receives.
    """

    name = "scripted"

    def __init__(
        self,
        default: str | Exception | Sequence[str | Exception] | None = None,
        rules: Sequence[tuple[str | Callable[[ChatRequest], bool], Sequence[str | Exception]]] = (),
        model_name: str = "scripted",
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    ) -> None:
        super().__init__(max_in_flight)
        self.model_name = model_name
        self._lock = threading.Lock()
        self._rules = [(matcher, list(outputs)) for matcher, outputs in rules]
        if default is None:
            self._default: list[str | Exception] | None = None
        elif isinstance(default, (str, Exception)):
            self._default = [default]
        else:
            self._default = list(default)
        self.calls: list[ChatRequest] = []

    @staticmethod
    def _matches(matcher, request: ChatRequest) -> bool:
        if callable(matcher):
            return bool(matcher(request))
        return matcher in request.user_prompt

    def send(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls.append(request)
            queue: list[str | Exception] | None = None
            for matcher, outputs in self._rules:
                if self._matches(matcher, request):
                    queue = outputs
                    break
            if queue is None:
                queue = self._default
            if queue is None:
                raise ProviderRejectionError("scripted provider has no rule for request")
            output = queue.pop(0) if len(queue) > 1 else queue[0]
        if isinstance(output, Exception):
            raise output
        return ChatResponse(
            text=output,
            usage=(len(request.user_prompt) // 4, len(output) // 4),
            latency=0.0,
        )


class OpenAIChatProvider(ChatProvider):
    """OpenAI-style chat-completion HTTP provider.

    Speaks the ``{"messages": [...]} -> {"choices": [...]}`` JSON shape
    that the mainstream providers and proxies expose.  Endpoint, API key,
    and model come from constructor arguments or, per profile, from
    REVIEWLAB_<PROFILE>_ENDPOINT / _API_KEY / _MODEL environment
    variables.
    """

    name = "openai-style"

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        model_name: str = "",
        session: requests.Session | None = None,
        timeout: float = 120.0,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
    ) -> None:
        super().__init__(max_in_flight)
        self.endpoint = endpoint.rstrip("/")
        self.api_key = api_key
        self.model_name = model_name
        self.session = session or requests.Session()
        self.timeout = timeout

    @classmethod
    def from_env(cls, profile: str, **kwargs) -> "OpenAIChatProvider":
        prefix = f"REVIEWLAB_{profile.upper()}"
        endpoint = os.environ.get(f"{prefix}_ENDPOINT")
        if not endpoint:
            raise ProviderRejectionError(
                f"provider profile {profile!r} requires {prefix}_ENDPOINT"
            )
        return cls(
            endpoint=endpoint,
            api_key=os.environ.get(f"{prefix}_API_KEY", ""),
            model_name=os.environ.get(f"{prefix}_MODEL", ""),
            **kwargs,
        )

    def send(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": request.model_name or self.model_name,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.monotonic()
        try:
            response = self.session.post(
                f"{self.endpoint}/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.Timeout as exc:
            raise ProviderTimeoutError(f"provider timed out: {exc}") from exc
        except requests.RequestException as exc:
            raise TransportError(f"provider request failed: {exc}") from exc
        latency = time.monotonic() - started

        if response.status_code == 429:
            raise ThrottleError("provider throttled the request")
        if response.status_code >= 500:
            raise TransportError(f"provider returned HTTP {response.status_code}")
        if response.status_code >= 400:
            raise ProviderRejectionError(
                f"provider rejected the request: HTTP {response.status_code}"
            )
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
            usage = payload.get("usage", {})
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected provider payload: {exc}") from exc
        return ChatResponse(
            text=text,
            usage=(
                int(usage.get("prompt_tokens", 0)),
                int(usage.get("completion_tokens", 0)),
            ),
            latency=latency,
        )


def complete(
    provider: ChatProvider,
    request: ChatRequest,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
) -> ChatResponse:
    """Send a request with bounded retries; the text comes back verbatim."""
    last_error: Exception | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            with provider.slot():
                response = provider.send(request)
        except policy.retryable_classes as exc:
            last_error = exc
            if audit is not None:
                audit.append(
                    {
                        "event": "retryable_failure",
                        "provider": provider.name,
                        "model": request.model_name or provider.model_name,
                        "attempt": attempt,
                        "error": str(exc),
                    }
                )
            if attempt < policy.max_attempts:
                time.sleep(policy.backoff_base * 2 ** (attempt - 1))
            continue
        if audit is not None:
            audit.append(
                {
                    "event": "completion",
                    "provider": provider.name,
                    "model": request.model_name or provider.model_name,
                    "attempt": attempt,
                    "system_prompt": request.system_prompt,
                    "user_prompt": request.user_prompt,
                    "output": response.text,
                    "usage": list(response.usage),
                    "latency": response.latency,
                }
            )
        return response
    raise TransportError(
        f"provider failed after {policy.max_attempts} attempts: {last_error}"
    ) from last_error


def default_correction(error: Exception) -> str:
    """Fixed corrective instruction appended after a parse failure."""
    return (
        "\n\nYour previous reply could not be used: "
        f"{error}. Reply again and follow the required output format exactly."
    )


def complete_parsed(
    provider: ChatProvider,
    request: ChatRequest,
    parser: Callable[[str], object],
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
    correction: Callable[[Exception], str] = default_correction,
):
    """Complete and parse, re-prompting with a corrective note on failure.

    Makes at most ``1 + max_parse_retries`` provider completions; raises
    ParseExhaustionError carrying the final raw text when none parse.
    """
    if max_parse_retries < 0:
        raise ValueError("max_parse_retries must be >= 0")
    current = request
    last_text = ""
    last_error: Exception | None = None
    attempts = 0
    for _ in range(max_parse_retries + 1):
        response = complete(provider, current, policy, audit)
        attempts += 1
        last_text = response.text
        try:
            return parser(response.text)
        except ReviewFormatError as exc:
            last_error = exc
            current = replace(
                request, user_prompt=request.user_prompt + correction(exc)
            )
    raise ParseExhaustionError(
        f"output unparseable after {attempts} attempts: {last_error}",
        last_text=last_text,
        attempts=attempts,
    )
