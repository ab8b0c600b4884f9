"""Chat-completion client used by dataset generation and judging.

Wraps an OpenAI-compatible endpoint with bounded retries (exponential
backoff with jitter on rate limits, 5xx, and timeouts), a hard request
budget, a concurrency ceiling for batches, and a JSONL audit trail of
every attempt. Credentials travel only in request headers; they never
appear in audit lines or error messages.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import httpx

from .errors import (
    BudgetExceededError,
    EmptyResponseError,
    PermanentRequestError,
    TransportError,
    ValidationError,
)


@dataclass(frozen=True)
class TemperatureProfile:
    """Sampling temperatures per task family."""

    train_gen: float = 1.0
    eval_gen: float = 0.7
    judge: float = 0.2


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 5
    base_backoff_s: float = 2.0
    jitter_frac: float = 0.2

    def backoff(self, attempt: int, rand: Callable[[], float]) -> float:
        """Delay before retry `attempt` (1-based). Doubles per attempt;
        jitter stays small enough that the sequence is non-decreasing."""
        base = self.base_backoff_s * (2.0 ** (attempt - 1))
        return base * (1.0 + self.jitter_frac * (2.0 * rand() - 1.0))


@dataclass
class ClientConfig:
    endpoint: str
    api_key: str
    model: str = "gpt-4-0314"
    timeout_s: float = 60.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_in_flight: int = 4
    budget_requests: int | None = None
    audit_path: str | Path | None = None

    @classmethod
    def from_env(
        cls,
        endpoint_env: str = "TRFORGE_LLM_ENDPOINT",
        api_key_env: str = "TRFORGE_LLM_API_KEY",
        **kwargs,
    ) -> "ClientConfig":
        endpoint = os.environ.get(endpoint_env, "")
        api_key = os.environ.get(api_key_env, "")
        if not endpoint:
            raise ValidationError(f"environment variable {endpoint_env} is not set")
        return cls(endpoint=endpoint, api_key=api_key, **kwargs)


@dataclass
class ChatRequest:
    messages: list[dict]
    temperature: float
    model: str = ""
    max_tokens: int | None = None
    request_id: str = ""


@dataclass
class ChatResult:
    request_id: str
    text: str
    attempts: int
    latency_ms: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ChatClient:
    """Synchronous client; batch_chat fans out over a bounded thread pool
    and returns results in input order."""

    def __init__(
        self,
        config: ClientConfig,
        *,
        transport: httpx.BaseTransport | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        rand: Callable[[], float] | None = None,
    ):
        self.config = config
        self.model = config.model
        self._http = httpx.Client(transport=transport, timeout=config.timeout_s)
        self._sleep = sleeper
        self._rand = rand if rand is not None else random.Random(0).random
        self._lock = threading.Lock()
        self._spent = 0

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _take_budget(self) -> None:
        budget = self.config.budget_requests
        with self._lock:
            if budget is not None and self._spent >= budget:
                raise BudgetExceededError(
                    f"request budget of {budget} exhausted"
                )
            self._spent += 1

    @property
    def requests_spent(self) -> int:
        with self._lock:
            return self._spent

    def _audit(self, row: dict) -> None:
        path = self.config.audit_path
        if path is None:
            return
        line = json.dumps(row, ensure_ascii=False, separators=(",", ":"))
        with self._lock:
            with open(path, "a", encoding="utf-8") as f:
                f.write(line + "\n")

    def chat(self, req: ChatRequest) -> ChatResult:
        """One logical request; retries transient failures with backoff.
        Raises TransportError when retries are exhausted,
        PermanentRequestError on non-retryable statuses, and
        EmptyResponseError on a blank completion."""
        self._take_budget()
        model = req.model or self.config.model
        payload = {
            "model": model,
            "messages": req.messages,
            "temperature": req.temperature,
        }
        if req.max_tokens is not None:
            payload["max_tokens"] = req.max_tokens
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"

        policy = self.config.retry
        last_status: int | None = None
        for attempt in range(1, policy.max_attempts + 1):
            t0 = time.perf_counter()
            status: int | None = None
            err: str | None = None
            body = None
            try:
                resp = self._http.post(self.config.endpoint, json=payload, headers=headers)
                status = resp.status_code
                if status == 200:
                    body = resp.json()
            except httpx.HTTPError as e:
                err = f"{type(e).__name__}"
            latency_ms = (time.perf_counter() - t0) * 1000.0

            self._audit(
                {
                    "request_id": req.request_id,
                    "attempt": attempt,
                    "status": status,
                    "error": err,
                    "latency_ms": round(latency_ms, 3),
                    "model": model,
                    "temperature": req.temperature,
                }
            )

            if status == 200:
                try:
                    choice = body["choices"][0]
                    text = choice["message"]["content"]
                    usage = body.get("usage", {})
                except (KeyError, IndexError, TypeError) as e:
                    raise PermanentRequestError(
                        f"malformed completion body for {req.request_id!r}: {e}"
                    ) from e
                if not text or not text.strip():
                    raise EmptyResponseError(
                        f"empty completion for request {req.request_id!r}"
                    )
                return ChatResult(
                    request_id=req.request_id,
                    text=text,
                    attempts=attempt,
                    latency_ms=latency_ms,
                    prompt_tokens=int(usage.get("prompt_tokens", 0)),
                    completion_tokens=int(usage.get("completion_tokens", 0)),
                )

            retryable = err is not None or status == 429 or (status is not None and status >= 500)
            if not retryable:
                raise PermanentRequestError(
                    f"request {req.request_id!r} rejected with status {status}"
                )
            last_status = status
            if attempt < policy.max_attempts:
                self._sleep(policy.backoff(attempt, self._rand))

        raise TransportError(
            f"request {req.request_id!r} failed after {policy.max_attempts} attempts "
            f"(last status {last_status})",
            attempts=policy.max_attempts,
        )

    def batch_chat(self, requests: Sequence[ChatRequest]) -> list[ChatResult]:
        """Run requests with at most max_in_flight concurrent; failures
        come back as error-carrying results in the same positions."""

        def run(req: ChatRequest) -> ChatResult:
            try:
                return self.chat(req)
            except (TransportError, PermanentRequestError, EmptyResponseError,
                    BudgetExceededError) as e:
                return ChatResult(
                    request_id=req.request_id,
                    text="",
                    attempts=getattr(e, "attempts", 0),
                    error=f"{type(e).__name__}: {e}",
                )

        if not requests:
            return []
        with ThreadPoolExecutor(max_workers=self.config.max_in_flight) as pool:
            return list(pool.map(run, requests))


class ReplayClient:
    """Deterministic stand-in for ChatClient that replays recorded
    responses keyed by request_id. Used for offline reruns and tests."""

    def __init__(self, responses: Mapping[str, str], model: str = "replay"):
        self._responses = dict(responses)
        self.model = model

    def chat(self, req: ChatRequest) -> ChatResult:
        if req.request_id not in self._responses:
            raise ValidationError(f"no recorded response for {req.request_id!r}")
        return ChatResult(
            request_id=req.request_id,
            text=self._responses[req.request_id],
            attempts=1,
        )

    def batch_chat(self, requests: Sequence[ChatRequest]) -> list[ChatResult]:
        out = []
        for req in requests:
            try:
                out.append(self.chat(req))
            except ValidationError as e:
                out.append(
                    ChatResult(request_id=req.request_id, text="", attempts=0, error=str(e))
                )
        return out


def load_transcript(path: str | Path, *, key: str = "id") -> dict[str, str]:
    """JSONL of {key, response} rows -> mapping for ReplayClient."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            try:
                rid, text = obj[key], obj["response"]
            except KeyError as e:
                raise ValidationError(f"transcript line {lineno}: missing {e}") from e
            if rid in out:
                raise ValidationError(f"transcript line {lineno}: duplicate id {rid!r}")
            out[rid] = text
    return out
