"""GraphQL-over-HTTP service endpoints."""

import json
import threading

import pytest
import requests

from oaswrap.generator import GenerationOptions, generate
from oaswrap.service import GraphQLService, make_server


def build_wrapper(upstream, token_path=None):
    root = {
        "openapi": "3.0.0",
        "info": {"title": "Svc", "version": "1"},
        "servers": [{"url": upstream.base_url}],
        "paths": {
            "/user/{id}": {"get": {
                "operationId": "getUserById",
                "parameters": [{"name": "id", "in": "path", "required": True,
                                "schema": {"type": "string"}}],
                "responses": {"200": {"description": "ok", "content": {
                    "application/json": {"schema": {
                        "$ref": "#/components/schemas/User"}}}}},
            }},
        },
        "components": {"schemas": {"User": {"type": "object", "properties": {
            "id": {"type": "string"}, "name": {"type": "string"}}}}},
    }
    wrapper = generate(json.dumps(root).encode(),
                       GenerationOptions(token_path=token_path))
    assert wrapper.ok
    return wrapper


@pytest.fixture
def service_url(upstream):
    upstream.static("GET", "/user/{id}", {"id": "u1", "name": "Uma"})
    wrapper = build_wrapper(upstream)
    service = GraphQLService(wrapper, extra_headers={"X-Static": "on"})
    server = make_server(service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}", wrapper, upstream
    server.shutdown()
    server.server_close()


def post_graphql(url, payload):
    return requests.post(f"{url}/graphql", json=payload, timeout=5)


def test_post_graphql_success(service_url):
    url, wrapper, upstream = service_url
    response = post_graphql(url, {"query": '{ user(id: "u1") { name } }'})
    assert response.status_code == 200
    assert response.json() == {"data": {"user": {"name": "Uma"}}}


def test_execution_error_still_200(service_url):
    url, wrapper, upstream = service_url
    upstream.route("GET", "/user/{id}",
                   lambda req, p: (500, {"boom": True}))
    upstream.routes.reverse()  # newest route first
    response = post_graphql(url, {"query": '{ user(id: "u1") { name } }'})
    assert response.status_code == 200
    payload = response.json()
    assert payload["data"] == {"user": None}
    assert payload["errors"]


def test_parse_error_is_400(service_url):
    url, _, _ = service_url
    response = post_graphql(url, {"query": "{ user(id: }"})
    assert response.status_code == 400
    assert "errors" in response.json()


def test_validation_error_is_400(service_url):
    url, _, _ = service_url
    response = post_graphql(url, {"query": "{ nonsense }"})
    assert response.status_code == 400


def test_unknown_operation_name_is_400(service_url):
    url, _, _ = service_url
    response = post_graphql(url, {
        "query": 'query A { user(id: "u1") { name } }', "operationName": "B"})
    assert response.status_code == 400


def test_malformed_body_is_400(service_url):
    url, _, _ = service_url
    response = requests.post(f"{url}/graphql", data=b"not json",
                             headers={"Content-Type": "application/json"}, timeout=5)
    assert response.status_code == 400


def test_missing_query_member_is_400(service_url):
    url, _, _ = service_url
    assert post_graphql(url, {"variables": {}}).status_code == 400


def test_variables_must_be_object(service_url):
    url, _, _ = service_url
    response = post_graphql(url, {"query": "{ placeholder }", "variables": [1]})
    assert response.status_code == 400


def test_get_sdl_matches_generated(service_url):
    url, wrapper, _ = service_url
    response = requests.get(f"{url}/sdl", timeout=5)
    assert response.status_code == 200
    assert response.text == wrapper.sdl


def test_get_report_is_generation_report(service_url):
    url, wrapper, _ = service_url
    response = requests.get(f"{url}/report", timeout=5)
    assert response.status_code == 200
    payload = response.json()
    assert payload["outcome"] == "success"
    assert payload["stats"]["operations_total"] == 1


def test_unknown_route_404(service_url):
    url, _, _ = service_url
    assert requests.get(f"{url}/nope", timeout=5).status_code == 404


def test_static_extra_headers_reach_upstream(service_url):
    url, _, upstream = service_url
    post_graphql(url, {"query": '{ user(id: "u1") { name } }'})
    sent = [r for r in upstream.requests if r.path == "/user/u1"]
    assert sent and sent[-1].headers.get("X-Static") == "on"


def test_variables_flow_through_service(service_url):
    url, _, _ = service_url
    response = post_graphql(url, {
        "query": "query Q($i: String!) { user(id: $i) { id } }",
        "variables": {"i": "u1"},
    })
    assert response.status_code == 200
    assert response.json()["data"] == {"user": {"id": "u1"}}


def test_bearer_token_from_context_file(upstream):
    upstream.static("GET", "/private", {"v": "s3cret-data"})
    root = {
        "openapi": "3.0.0",
        "info": {"title": "Tok", "version": "1"},
        "servers": [{"url": upstream.base_url}],
        "paths": {"/private": {"get": {
            "security": [{"oauth": []}],
            "responses": {"200": {"description": "ok", "content": {"application/json": {
                "schema": {"type": "object", "properties": {"v": {"type": "string"}}}}}}},
        }}},
        "components": {"securitySchemes": {"oauth": {"type": "oauth2", "flows": {}}}},
    }
    wrapper = generate(json.dumps(root).encode(),
                       GenerationOptions(token_path="security.oauthToken"))
    assert wrapper.ok
    service = GraphQLService(wrapper,
                             token_store={"security": {"oauthToken": "tok-42"}})
    status, payload = service.handle_graphql({"query": "{ getPrivate { v } }"})
    assert status == 200
    assert payload["data"] == {"getPrivate": {"v": "s3cret-data"}}
    sent = upstream.requests[-1]
    assert sent.headers.get("Authorization") == "Bearer tok-42"
