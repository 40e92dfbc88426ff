"""Loading, version detection, 2.0 upconversion, validation, reference
resolution, and allOf merging."""

import json

import pytest

from oaswrap.errors import InvalidOasError, MissingRefError, ParseError, UpconvertError
from oaswrap.oas_ingest import (
    OasDocument,
    convert_v2_dict,
    detect_version,
    ingest,
    load_document,
    normalize,
    parse_schema,
    template_params,
    upconvert,
    validate,
)
from oaswrap.report import Report, STRICT
from oaswrap.errors import StrictModeAbort


def make_doc(paths=None, components=None, servers=None, title="T", version="1.0.0",
             report=None) -> OasDocument:
    root = {
        "openapi": "3.0.0",
        "info": {"title": title, "version": version},
        "servers": servers or [{"url": "https://api.example.com"}],
        "paths": paths or {},
    }
    if components:
        root["components"] = components
    return normalize(root, "<test>", report or Report(source="<test>"))


# -- load_document -----------------------------------------------------------


def test_load_json_document():
    raw = load_document(b'{"swagger": "2.0", "info": {}}')
    assert raw.format == "json"
    assert raw.root["swagger"] == "2.0"


def test_load_truncated_json_is_parse_error():
    with pytest.raises(ParseError):
        load_document(b'{"swagger":')


def test_load_yaml_autodetected():
    raw = load_document(b"openapi: 3.0.0\ninfo:\n  title: Y\n")
    assert raw.format == "yaml"
    assert raw.root["openapi"] == "3.0.0"


def test_load_scalar_root_rejected():
    with pytest.raises(ParseError):
        load_document(b"just a string")


def test_load_empty_rejected():
    with pytest.raises(ParseError):
        load_document(b"   ")


def test_yaml_anchors_are_expanded():
    text = b"openapi: 3.0.0\nx-shared: &s {a: 1}\nother: *s\n"
    raw = load_document(text, format_hint="yaml")
    assert raw.root["other"] == {"a": 1}


# -- detect_version ------------------------------------------------------------


def test_detect_v2():
    assert detect_version(load_document(b'{"swagger": "2.0"}')) == "v2"


def test_detect_v3():
    assert detect_version(load_document(b'{"openapi": "3.0.0"}')) == "v3"
    assert detect_version(load_document(b'{"openapi": "3.1.0"}')) == "v3"


def test_detect_unknown():
    assert detect_version(load_document(b'{"info": {}}')) == "unknown"


def test_ingest_unknown_version_is_invalid_oas():
    with pytest.raises(InvalidOasError):
        ingest(load_document(b'{"info": {}}'), Report(source="x"))


# -- upconvert: expected values frozen from a reference v2->v3 converter run ----


V2_MIN = {
    "swagger": "2.0",
    "info": {"title": "Pets", "version": "1.0.0"},
    "host": "api.example.com",
    "basePath": "/v2",
    "schemes": ["https", "http"],
    "paths": {
        "/pets": {
            "post": {
                "operationId": "createPet",
                "consumes": ["application/json"],
                "parameters": [{"name": "pet", "in": "body", "required": True,
                                "schema": {"$ref": "#/definitions/Pet"}}],
                "responses": {"200": {"description": "ok",
                                      "schema": {"$ref": "#/definitions/Pet"}}},
            },
        },
    },
    "definitions": {
        "Pet": {"type": "object", "required": ["name"],
                "properties": {"name": {"type": "string"}, "tag": {"type": "string"}}},
    },
    "securityDefinitions": {
        "keyAuth": {"type": "apiKey", "name": "X-Api-Key", "in": "header"},
        "basicAuth": {"type": "basic"},
    },
}


def test_upconvert_server_from_host_basepath_schemes():
    # Reference converter output for the same fixture: first server URL is
    # "https://api.example.com/v2" (one entry per scheme; we keep the first).
    converted = convert_v2_dict(V2_MIN)
    assert converted["servers"] == [{"url": "https://api.example.com/v2"}]


def test_upconvert_body_param_to_request_body():
    converted = convert_v2_dict(V2_MIN)
    body = converted["paths"]["/pets"]["post"]["requestBody"]
    # Frozen from the reference converter: content keyed by the consumes media
    # type, schema preserved (ref rewritten), required hoisted.
    assert body["required"] is True
    assert body["content"]["application/json"]["schema"] == {
        "$ref": "#/components/schemas/Pet"
    }


def test_upconvert_definitions_and_security():
    converted = convert_v2_dict(V2_MIN)
    assert converted["components"]["schemas"]["Pet"]["required"] == ["name"]
    schemes = converted["components"]["securitySchemes"]
    assert schemes["keyAuth"] == {"type": "apiKey", "name": "X-Api-Key", "in": "header"}
    assert schemes["basicAuth"] == {"type": "http", "scheme": "basic"}


def test_upconvert_formdata_to_urlencoded_body():
    # Frozen from the reference converter run on the formData fixture.
    v2 = {
        "swagger": "2.0",
        "info": {"title": "Form", "version": "1.0.0"},
        "host": "api.example.com",
        "paths": {"/upload": {"post": {
            "operationId": "upload",
            "produces": ["application/json"],
            "parameters": [
                {"name": "field-one", "in": "formData", "type": "string", "required": True},
                {"name": "count", "in": "formData", "type": "integer"},
            ],
            "responses": {"201": {"description": "ok", "schema": {
                "type": "object", "properties": {"ok": {"type": "boolean"}}}}},
        }}},
    }
    converted = convert_v2_dict(v2)
    body = converted["paths"]["/upload"]["post"]["requestBody"]
    schema = body["content"]["application/x-www-form-urlencoded"]["schema"]
    assert schema == {
        "type": "object",
        "properties": {"field-one": {"type": "string"}, "count": {"type": "integer"}},
        "required": ["field-one"],
    }
    assert body["required"] is True
    response = converted["paths"]["/upload"]["post"]["responses"]["201"]
    assert "application/json" in response["content"]


def test_upconvert_no_definitions_gives_empty_components():
    v2 = {"swagger": "2.0", "info": {"title": "X", "version": "0"}, "paths": {}}
    doc = upconvert(load_document(json.dumps(v2).encode()))
    assert doc.schemas == {}
    assert doc.operations == []


def test_upconvert_rejects_two_body_params():
    v2 = {
        "swagger": "2.0", "info": {"title": "X", "version": "0"},
        "paths": {"/x": {"post": {
            "parameters": [
                {"name": "a", "in": "body", "schema": {}},
                {"name": "b", "in": "body", "schema": {}},
            ],
            "responses": {"200": {"description": "ok"}},
        }}},
    }
    with pytest.raises(UpconvertError):
        convert_v2_dict(v2)


def test_upconverted_doc_passes_validate():
    doc = upconvert(load_document(json.dumps(V2_MIN).encode()))
    assert [i for i in validate(doc) if i.severity == "fatal"] == []


# -- validate -----------------------------------------------------------------


def test_validate_minimal_doc_clean():
    doc = make_doc(paths={"/x": {"get": {"responses": {"200": {
        "description": "ok",
        "content": {"application/json": {"schema": {"type": "string"}}}}}}}})
    assert [i for i in validate(doc) if i.severity == "fatal"] == []


def test_validate_undeclared_path_param_is_fatal():
    # Checked by hand against the OpenAPI 3.0 path-templating rules: every
    # template expression must have a corresponding declared path parameter.
    doc = make_doc(paths={"/users/{id}": {"get": {"responses": {"200": {
        "description": "ok",
        "content": {"application/json": {"schema": {"type": "string"}}}}}}}})
    fatal = [i for i in validate(doc) if i.severity == "fatal"]
    assert len(fatal) == 1
    assert "{id}" in fatal[0].message


def test_validate_missing_title_is_fatal():
    # OpenAPI 3.0 required fields: info.title and info.version.
    doc = make_doc(title=None)
    fatal = [i for i in validate(doc) if i.severity == "fatal"]
    assert any("title" in issue.message for issue in fatal)


def test_validate_bad_status_pattern_is_fatal():
    doc = make_doc(paths={"/x": {"get": {"responses": {"20": {"description": "?"}}}}})
    fatal = [i for i in validate(doc) if i.severity == "fatal"]
    assert any("20" in issue.message for issue in fatal)


def test_validate_notes_unrecognized_top_level_field():
    report = Report(source="<test>")
    root = {"openapi": "3.0.0", "info": {"title": "T", "version": "1"},
            "paths": {}, "wild": True}
    doc = normalize(root, "<test>", report)
    issues = validate(doc)
    assert any(i.severity == "note" and "wild" in i.message for i in issues)
    assert not any(i.severity == "fatal" for i in issues)


# -- resolve_ref ---------------------------------------------------------------


def test_resolve_ref_components_schema():
    doc = make_doc(components={"schemas": {"User": {"type": "object", "properties": {
        "id": {"type": "string"}}}}})
    schema = doc.resolve_ref("#/components/schemas/User")
    assert schema.type == "object"
    assert "id" in schema.properties


def test_resolve_ref_memoized_identity():
    doc = make_doc(components={"schemas": {"User": {"type": "object", "properties": {
        "id": {"type": "string"}}}}})
    first = doc.resolve_ref("#/components/schemas/User")
    second = doc.resolve_ref("#/components/schemas/User")
    assert first is second


def test_resolve_ref_external_document_is_missing_ref():
    doc = make_doc()
    with pytest.raises(MissingRefError):
        doc.resolve_ref("./other.json#/Foo")


def test_resolve_ref_absent_target_is_missing_ref():
    doc = make_doc()
    with pytest.raises(MissingRefError):
        doc.resolve_ref("#/components/schemas/Nope")


def test_resolve_ref_cycle_returns_self_referential_handle():
    doc = make_doc(components={"schemas": {"Node": {
        "type": "object",
        "properties": {"next": {"$ref": "#/components/schemas/Node"}},
    }}})
    node = doc.resolve_ref("#/components/schemas/Node")
    assert doc.deref(node.properties["next"]) is node


# -- merge_all_of -----------------------------------------------------------------


def brute_force_merge(members):
    """Independent oracle: plain dict union with later-wins override."""
    props = {}
    required = set()
    for member in members:
        props.update(member.get("properties", {}))
        required |= set(member.get("required", []))
    return props, sorted(required)


def test_merge_all_of_union():
    members = [
        {"type": "object", "properties": {"a": {"type": "string"}}},
        {"type": "object", "properties": {"b": {"type": "integer"}}},
    ]
    expected_props, expected_required = brute_force_merge(members)
    schema = parse_schema({"allOf": members}, "#/x")
    doc = make_doc()
    merged = doc.merge_all_of(schema, Report(source="<test>"))
    assert merged.type == "object"
    assert set(merged.properties) == set(expected_props)
    assert merged.properties["a"].type == "string"
    assert merged.properties["b"].type == "integer"
    assert merged.required == expected_required


def test_merge_all_of_single_member_identity():
    inner = {"type": "object", "properties": {"only": {"type": "string"}}}
    schema = parse_schema({"allOf": [inner]}, "#/x")
    doc = make_doc()
    merged = doc.merge_all_of(schema, Report(source="<test>"))
    assert merged.type == "object"
    assert set(merged.properties) == {"only"}


def test_merge_all_of_conflict_non_strict_falls_back_to_string():
    members = [
        {"type": "object", "properties": {"a": {"type": "string"}}},
        {"type": "object", "properties": {"a": {"type": "integer"}}},
    ]
    schema = parse_schema({"allOf": members}, "#/x")
    doc = make_doc()
    report = Report(source="<test>")
    merged = doc.merge_all_of(schema, report)
    assert merged.properties["a"].type == "string"
    assert [w.kind for w in report.warnings] == ["InvalidSchemaType"]


def test_merge_all_of_conflict_strict_aborts():
    members = [
        {"type": "object", "properties": {"a": {"type": "string"}}},
        {"type": "object", "properties": {"a": {"type": "integer"}}},
    ]
    schema = parse_schema({"allOf": members}, "#/x")
    doc = make_doc()
    with pytest.raises(StrictModeAbort):
        doc.merge_all_of(schema, Report(source="<test>", mode=STRICT))


# -- normalization details ------------------------------------------------------


def test_cookie_parameter_warned_and_ignored():
    report = Report(source="<test>")
    doc = make_doc(paths={"/x": {"get": {
        "parameters": [{"name": "sid", "in": "cookie", "schema": {"type": "string"}}],
        "responses": {"200": {"description": "ok", "content": {
            "application/json": {"schema": {"type": "string"}}}}},
    }}}, report=report)
    assert doc.operations[0].parameters == []
    assert [w.kind for w in report.warnings] == ["UnsupportedFeature"]


def test_path_level_parameters_are_merged():
    doc = make_doc(paths={"/u/{id}": {
        "parameters": [{"name": "id", "in": "path", "required": True,
                        "schema": {"type": "string"}}],
        "get": {"responses": {"200": {"description": "ok", "content": {
            "application/json": {"schema": {"type": "string"}}}}}},
    }})
    op = doc.operations[0]
    assert [p.name for p in op.parameters] == ["id"]
    assert op.parameters[0].required is True


def test_content_negotiation_prefers_json():
    doc = make_doc(paths={"/x": {"get": {"responses": {"200": {
        "description": "ok",
        "content": {
            "text/plain": {"schema": {"type": "string"}},
            "application/json": {"schema": {"type": "integer"}},
        },
    }}}}})
    response = doc.operations[0].responses["200"]
    assert response.content_type == "application/json"
    assert response.schema.type == "integer"


def test_content_negotiation_accepts_json_variant():
    doc = make_doc(paths={"/x": {"get": {"responses": {"200": {
        "description": "ok",
        "content": {"application/hal+json": {"schema": {"type": "string"}}},
    }}}}})
    assert doc.operations[0].responses["200"].content_type == "application/hal+json"


def test_unique_path_method_pairs():
    doc = make_doc(paths={
        "/a": {"get": {"responses": {"200": {"description": "ok", "content": {
            "application/json": {"schema": {"type": "string"}}}}}},
               "post": {"responses": {"200": {"description": "ok", "content": {
                   "application/json": {"schema": {"type": "string"}}}}}}},
    })
    keys = [op.key for op in doc.operations]
    assert len(keys) == len(set(keys)) == 2


def test_template_params():
    assert template_params("/user/{id}/pets/{petId}") == ["id", "petId"]
    assert template_params("/plain") == []
