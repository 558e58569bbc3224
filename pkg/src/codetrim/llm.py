"""Chat-completion client: sampling controls, a deterministic scripted mock
transport, a provider-compatible live transport, and response parsing."""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AuthError, RateLimited, TransportError

API_KEY_ENV = "CODETRIM_API_KEY"
_FALLBACK_KEY_ENV = "OPENAI_API_KEY"


@dataclass(frozen=True)
class LlmRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = 1.0
    n: int = 5
    model_id: str = "gpt-3.5-turbo"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")


@dataclass
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass
class LlmResponse:
    completions: list[str]
    usage: Usage
    latency: float


class MockTransport:
    """Deterministic offline transport replaying scripted fixtures.

    ``rules`` is an ordered list of (matcher, response_sets) pairs; the first
    rule whose matcher substring occurs in the user prompt is used (matcher
    "*" matches anything). Each response set is a list of completions,
    consumed once per matching request in order.
    """

    def __init__(self, rules):
        self._rules = [(m, list(sets)) for m, sets in rules]
        self._lock = threading.Lock()

    @classmethod
    def from_fixture_dir(cls, path):
        """Load fixtures from a directory with ``manifest.json``:
        ``{"rules": [{"match": "...", "responses": [["f1.txt", ...], ...]}]}``;
        response entries are file names relative to the directory."""
        path = Path(path)
        manifest = json.loads((path / "manifest.json").read_text())
        rules = []
        for rule in manifest["rules"]:
            sets = [[(path / name).read_text() for name in names]
                    for names in rule["responses"]]
            rules.append((rule["match"], sets))
        return cls(rules)

    def send(self, request: LlmRequest) -> LlmResponse:
        with self._lock:
            for matcher, sets in self._rules:
                if matcher == "*" or matcher in request.user_prompt:
                    if not sets:
                        raise TransportError(f"fixture underflow for matcher {matcher!r}")
                    completions = sets.pop(0)
                    if len(completions) < request.n:
                        raise TransportError(
                            f"fixture for {matcher!r} has {len(completions)} "
                            f"completions, {request.n} requested")
                    usage = Usage(
                        prompt_tokens=len(request.user_prompt.split()),
                        completion_tokens=sum(len(c.split()) for c in completions[:request.n]),
                    )
                    return LlmResponse(list(completions[:request.n]), usage, 0.0)
            raise TransportError("no fixture rule matches the prompt")


class LiveTransport:
    """Provider-compatible chat-completion endpoint. The API key comes from
    the environment only; it is never read from config files."""

    def __init__(self, base_url="https://api.openai.com/v1", timeout=120.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._api_key = os.environ.get(API_KEY_ENV) or os.environ.get(_FALLBACK_KEY_ENV)

    def send(self, request: LlmRequest) -> LlmResponse:
        if not self._api_key:
            raise AuthError(f"no API key in ${API_KEY_ENV} or ${_FALLBACK_KEY_ENV}")
        import httpx

        messages = []
        if request.system_prompt:
            messages.append({"role": "system", "content": request.system_prompt})
        messages.append({"role": "user", "content": request.user_prompt})
        payload = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "n": request.n,
        }
        start = time.monotonic()
        try:
            resp = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        latency = time.monotonic() - start
        if resp.status_code in (401, 403):
            raise AuthError(f"provider rejected credentials ({resp.status_code})")
        if resp.status_code == 429:
            raise RateLimited("rate limited")
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        completions = [c["message"]["content"] for c in body.get("choices", [])]
        usage = body.get("usage", {})
        return LlmResponse(
            completions=completions,
            usage=Usage(usage.get("prompt_tokens", 0), usage.get("completion_tokens", 0)),
            latency=latency,
        )


@dataclass
class QueryStats:
    queries: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_total: float = 0.0


class LlmClient:
    """Issues requests through a transport with retry on transient failures
    and accumulates usage accounting."""

    def __init__(self, transport, max_retries=3, backoff=1.0, sleep=time.sleep):
        self.transport = transport
        self.max_retries = max_retries
        self.backoff = backoff
        self._sleep = sleep
        self._lock = threading.Lock()
        self.stats = QueryStats()

    def complete(self, request: LlmRequest) -> LlmResponse:
        attempt = 0
        while True:
            try:
                response = self.transport.send(request)
                break
            except (RateLimited, TransportError):
                attempt += 1
                if attempt > self.max_retries:
                    raise
                self._sleep(self.backoff * (2 ** (attempt - 1)))
            # AuthError is never retried.
        with self._lock:
            self.stats.queries += 1
            self.stats.prompt_tokens += response.usage.prompt_tokens
            self.stats.completion_tokens += response.usage.completion_tokens
            self.stats.latency_total += response.latency
        return response


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_code(completion: str) -> str:
    """Content of the first fenced code block; the whole completion,
    trimmed, when there is no fence."""
    m = _FENCE_RE.search(completion)
    if m:
        return m.group(1).strip()
    return completion.strip()


_BULLET_RE = re.compile(r"^\s*(?:\d+[.)]|[-*•])\s*")


def parse_target_list(completion: str) -> list[str]:
    """Parse a target list from free text: numbered/bulleted/plain lines or
    a single bracketed comma list. Unparseable text yields []."""
    text = completion.strip()
    if not text:
        return []
    stripped = text
    m = _FENCE_RE.search(text)
    if m:
        stripped = m.group(1).strip()
    items: list[str]
    if stripped.startswith("[") and stripped.endswith("]"):
        items = _split_bracketed(stripped[1:-1])
    else:
        items = [_BULLET_RE.sub("", line).strip() for line in stripped.splitlines()]
    seen = set()
    out = []
    for item in items:
        item = item.strip()
        if not item or item in seen:
            continue
        # Prose lines ("I found no candidates.") are not targets.
        if " " in item and item.rstrip().endswith((".", "!", ":")):
            continue
        seen.add(item)
        out.append(item)
    return out


def _split_bracketed(inner: str) -> list[str]:
    """Split a bracketed list on top-level commas only."""
    parts = []
    depth = 0
    current = []
    for ch in inner:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth = max(depth - 1, 0)
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts
