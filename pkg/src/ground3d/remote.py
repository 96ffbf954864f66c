"""HTTP backend client speaking the ground/reason wire protocol.

POST {base_url}/ground   {"question": str, "scene": <scene.json schema>}
  -> {"boxes": [{"box": {...}, "confidence": float, "label"?: str}]}
POST {base_url}/reason   {"question": str, "scene_summary": {...}}
  -> {"answer_text": str, "intent": str}

Non-2xx responses and malformed bodies raise BackendError.  The base URL and
bearer token default to the GROUND3D_REMOTE_URL / GROUND3D_REMOTE_TOKEN
environment variables.
"""

from __future__ import annotations

import os
from typing import Optional

import requests

from .backends import BackendError, ReasonResult
from .io import scene_to_dict
from .scene import GroundedBox, Scene, SchemaError

URL_ENV = "GROUND3D_REMOTE_URL"
TOKEN_ENV = "GROUND3D_REMOTE_TOKEN"
DEFAULT_TIMEOUT = 30.0


class RemoteBackend:
    """A Grounder and Reasoner backed by a remote service.

    Safe for concurrent in-flight requests: each call uses an isolated
    request; the shared session only pools connections.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        token: Optional[str] = None,
        timeout: float = DEFAULT_TIMEOUT,
        session: Optional[requests.Session] = None,
    ):
        base_url = base_url or os.environ.get(URL_ENV)
        if not base_url:
            raise BackendError(f"remote backend needs a base URL (flag or ${URL_ENV})")
        self.base_url = base_url.rstrip("/")
        self.token = token if token is not None else os.environ.get(TOKEN_ENV)
        self.timeout = timeout
        self._session = session or requests.Session()

    def _post(self, endpoint: str, payload: dict) -> dict:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = self._session.post(
                f"{self.base_url}{endpoint}",
                json=payload,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise BackendError(f"POST {endpoint}: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise BackendError(f"POST {endpoint}: HTTP {resp.status_code}")
        try:
            data = resp.json()
        except ValueError as exc:
            raise BackendError(f"POST {endpoint}: malformed JSON response") from exc
        if not isinstance(data, dict):
            raise BackendError(f"POST {endpoint}: expected a JSON object")
        return data

    def ground(self, question: str, scene: Scene) -> list[GroundedBox]:
        data = self._post("/ground", {"question": question, "scene": scene_to_dict(scene)})
        if "boxes" not in data or not isinstance(data["boxes"], list):
            raise BackendError("POST /ground: response missing 'boxes' list")
        try:
            return [GroundedBox.from_dict(b) for b in data["boxes"]]
        except SchemaError as exc:
            raise BackendError(f"POST /ground: bad box in response: {exc}") from exc

    def reason(self, question: str, scene_summary: dict) -> ReasonResult:
        data = self._post("/reason", {"question": question, "scene_summary": scene_summary})
        if "answer_text" not in data or "intent" not in data:
            raise BackendError("POST /reason: response missing 'answer_text' or 'intent'")
        return ReasonResult(answer_text=str(data["answer_text"]), intent=str(data["intent"]))
