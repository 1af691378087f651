"""Thin client for the experiment service.

Without a base URL the request runs in-process against the FastAPI app
(no socket, no server to start) — that is how the CLI normally works.
With a base URL the same request goes over HTTP to a remote `serve`
instance.
"""
from __future__ import annotations

from typing import Optional


class ServiceError(RuntimeError):
    """Non-2xx reply; carries the machine-readable error body."""

    def __init__(self, status_code: int, body):
        self.status_code = status_code
        self.body = body
        super().__init__(f"service returned {status_code}: {body}")


def post_experiment(path: str, payload: dict,
                    base_url: Optional[str] = None) -> dict:
    """POST a request model dump to an endpoint, return the parsed table."""
    if not path.startswith("/"):
        path = "/" + path
    if base_url is None:
        import warnings
        with warnings.catch_warnings():
            # some starlette builds warn about their httpx-based TestClient
            # (a custom warning category); irrelevant to in-process use and
            # noisy on the CLI's stderr
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

        from .service.app import app
        with TestClient(app, raise_server_exceptions=True) as tc:
            resp = tc.post(path, json=payload)
            status, body = resp.status_code, _body(resp)
    else:
        import httpx
        try:
            resp = httpx.post(base_url.rstrip("/") + path, json=payload,
                              timeout=None)
        except httpx.HTTPError as exc:
            raise ServiceError(0, {"error": "connection",
                                   "message": f"{base_url}: {exc}"}) from exc
        status, body = resp.status_code, _body(resp)
    if status != 200:
        raise ServiceError(status, body)
    return body


def _body(resp):
    try:
        return resp.json()
    except ValueError:
        return {"error": "non-json response", "message": resp.text}
