"""Clients the CLI uses to reach the simulation service.

LocalClient calls the handler functions in-process (the default, no
server needed); HttpClient speaks to a running instance. Both expose the
same typed methods and raise the same ConfigError/DataError exceptions,
so callers never branch on transport.
"""

from __future__ import annotations

import httpx

from ..errors import ConfigError, DataError
from . import handlers, schemas


class LocalClient:
    def simulate(self, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return handlers.simulate(req)

    def power(self, req: schemas.PowerRequest) -> schemas.PowerResponse:
        return handlers.power(req)

    def cosim(self, req: schemas.CosimRequest) -> schemas.CosimResponse:
        return handlers.cosim(req)

    def experiment(self, name: str, req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        return handlers.experiment(name, req)

    def gpus(self) -> list[str]:
        return handlers.list_gpus()

    def models(self) -> list[str]:
        return handlers.list_models()


class HttpClient:
    """Thin JSON client for a remote service; long sweeps disable the read timeout."""

    def __init__(self, base_url: str, transport: httpx.BaseTransport | None = None):
        self._client = httpx.Client(
            base_url=base_url,
            timeout=httpx.Timeout(10.0, read=None),
            transport=transport,
        )

    def _raise_for(self, response: httpx.Response) -> None:
        if response.is_success:
            return
        try:
            body = response.json()
        except ValueError:
            body = {}
        detail = body.get("detail", response.text)
        if not isinstance(detail, str):
            detail = str(detail)
        if body.get("kind") == "data":
            raise DataError(detail)
        raise ConfigError(detail)

    def _post(self, path: str, payload) -> dict:
        response = self._client.post(path, json=payload.model_dump(mode="json"))
        self._raise_for(response)
        return response.json()

    def _get(self, path: str) -> dict | list:
        response = self._client.get(path)
        self._raise_for(response)
        return response.json()

    def simulate(self, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return schemas.SimulateResponse(**self._post("/simulate", req))

    def power(self, req: schemas.PowerRequest) -> schemas.PowerResponse:
        return schemas.PowerResponse(**self._post("/power", req))

    def cosim(self, req: schemas.CosimRequest) -> schemas.CosimResponse:
        return schemas.CosimResponse(**self._post("/cosim", req))

    def experiment(self, name: str, req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        return schemas.ExperimentResponse(**self._post(f"/experiments/{name}", req))

    def gpus(self) -> list[str]:
        return list(self._get("/profiles/gpus"))

    def models(self) -> list[str]:
        return list(self._get("/profiles/models"))


def make_client(server: str | None) -> LocalClient | HttpClient:
    return HttpClient(server) if server else LocalClient()
