"""GraphQL-over-HTTP service for a generated wrapper.

POST /graphql executes queries (HTTP 200 even for execution errors, 400 for
request errors); GET /sdl returns the schema text; GET /report the generation
report.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping

from .engine import Executor, parse_query, validate_query
from .engine.execution import RequestFailed
from .errors import CoercionError, GraphQLSyntaxError
from .generator import GeneratedWrapper
from .report import finalize_report
from .resolver_runtime import DEFAULT_TIMEOUT, ExecutionContext, HttpClient

logger = logging.getLogger("oaswrap.service")


class GraphQLService:
    """Stateless request handling around one immutable generated wrapper."""

    def __init__(self, wrapper: GeneratedWrapper, extra_headers: Mapping[str, str] | None = None,
                 token_store: Any = None, timeout: float = DEFAULT_TIMEOUT,
                 max_parallel: int = 8, client: HttpClient | None = None):
        if not wrapper.ok:
            raise ValueError("cannot serve a wrapper whose generation failed")
        self.wrapper = wrapper
        self.executor = Executor(
            wrapper.schema, wrapper.plans, wrapper.pre.sanmap,
            client or HttpClient(timeout=timeout), max_parallel=max_parallel,
        )
        self.base_context = ExecutionContext(
            credentials={}, token_store=token_store, used_params={},
            extra_headers=dict(extra_headers or {}),
        )

    def handle_graphql(self, payload: Any) -> tuple[int, dict]:
        if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
            return 400, {"errors": [{"message": "request body must be a JSON object "
                                                "with a string 'query' member"}]}
        query = payload["query"]
        variables = payload.get("variables")
        operation_name = payload.get("operationName")
        if variables is not None and not isinstance(variables, dict):
            return 400, {"errors": [{"message": "'variables' must be an object"}]}

        try:
            doc = parse_query(query)
        except GraphQLSyntaxError as exc:
            return 400, {"errors": [{"message": str(exc)}]}
        validation_errors = validate_query(doc, self.wrapper.schema)
        if validation_errors:
            return 400, {"errors": [{"message": message} for message in validation_errors]}
        try:
            result = self.executor.execute(doc, operation_name, variables, self.base_context)
        except (RequestFailed, CoercionError) as exc:
            return 400, {"errors": [{"message": str(exc)}]}
        return 200, result.to_payload()

    def sdl_text(self) -> str:
        return self.wrapper.sdl or ""

    def report_json(self) -> str:
        return finalize_report(self.wrapper.report)


def make_server(service: GraphQLService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):  # route through logging, not stderr
            logger.debug("%s " + fmt, self.address_string(), *args)

        def _send(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/sdl":
                self._send(200, service.sdl_text().encode("utf-8"),
                           "text/plain; charset=utf-8")
            elif self.path == "/report":
                self._send(200, service.report_json().encode("utf-8"), "application/json")
            else:
                self._send(404, b'{"errors": [{"message": "not found"}]}', "application/json")

        def do_POST(self):
            if self.path != "/graphql":
                self._send(404, b'{"errors": [{"message": "not found"}]}', "application/json")
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                payload = json.loads(raw.decode("utf-8")) if raw else None
            except (json.JSONDecodeError, UnicodeDecodeError):
                self._send(400, b'{"errors": [{"message": "request body is not valid JSON"}]}',
                           "application/json")
                return
            status, body = service.handle_graphql(payload)
            self._send(status, json.dumps(body).encode("utf-8"), "application/json")

    return ThreadingHTTPServer((host, port), Handler)


def serve_forever(service: GraphQLService, host: str, port: int) -> None:
    server = make_server(service, host, port)
    logger.info("serving GraphQL wrapper on http://%s:%d/graphql", host, server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
