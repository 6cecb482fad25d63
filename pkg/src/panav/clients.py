"""Selector clients: a scripted mock for offline runs and a wire client
speaking the common chat-completion shape with base-64 image parts.

A client is anything with ``complete(request) -> str`` taking a
:class:`panav.selection.VlmRequest` and returning the assistant text.
"""

from __future__ import annotations

import base64
import os

import requests

from .errors import ClientTransportError, UnauthorizedError

ENV_VLM_KEY = "PANAV_VLM_KEY"

DEFAULT_TIMEOUT_S = 60.0


class ScriptedVlmClient:
    """Replays a fixed list of replies, one per call.

    A reply may be a string (returned as the transcript) or an exception
    instance (raised). Running past the script is a test bug and raises
    RuntimeError. Calls are recorded on ``requests`` for assertions.
    """

    def __init__(self, replies):
        self._replies = list(replies)
        self._cursor = 0
        self.requests = []

    def complete(self, request) -> str:
        self.requests.append(request)
        if self._cursor >= len(self._replies):
            raise RuntimeError("scripted replies exhausted")
        reply = self._replies[self._cursor]
        self._cursor += 1
        if isinstance(reply, BaseException):
            raise reply
        return reply


class HttpVlmClient:
    """POSTs chat-completion requests to an HTTP endpoint.

    The credential comes from the constructor or the PANAV_VLM_KEY
    environment variable; 401/403 responses surface as Unauthorized, other
    transport problems as ClientTransport.
    """

    def __init__(self, endpoint: str, api_key: str | None = None,
                 timeout: float = DEFAULT_TIMEOUT_S):
        if not endpoint:
            raise ValueError("endpoint must be non-empty")
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(ENV_VLM_KEY)
        self.timeout = timeout

    def _payload(self, request) -> dict:
        parts = [{"type": "text", "text": request.user_text}]
        for png in request.images:
            b64 = base64.b64encode(png).decode("ascii")
            parts.append(
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/png;base64,{b64}"},
                }
            )
        return {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": parts},
            ],
        }

    def complete(self, request) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                self.endpoint,
                json=self._payload(request),
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ClientTransportError(f"request failed: {exc}") from exc
        if resp.status_code in (401, 403):
            raise UnauthorizedError(
                f"endpoint rejected the credential (HTTP {resp.status_code})"
            )
        if resp.status_code != 200:
            raise ClientTransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ClientTransportError(f"malformed response: {exc}") from exc
        if not isinstance(text, str):
            raise ClientTransportError("assistant content is not text")
        return text
