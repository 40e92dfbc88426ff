"""OpenAPI ingestion: load, version-detect, upconvert 2.0 docs, validate,
and normalize into an in-memory model with memoized reference resolution.

The normalized :class:`OasDocument` is the only shape downstream modules see;
OAS 2.0 input is structurally translated to 3.0 before normalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import InvalidOasError, MissingRefError, ParseError, UpconvertError
from .report import (
    INVALID_SCHEMA_TYPE,
    UNSUPPORTED_FEATURE,
    Report,
    record_warning,
)

HTTP_METHODS = ("get", "put", "post", "delete", "options", "head", "patch", "trace")

JSON_MEDIA = "application/json"
FORM_MEDIA = "application/x-www-form-urlencoded"


@dataclass
class RawDocument:
    source_path: str
    format: str  # "json" | "yaml"
    root: dict


@dataclass
class SchemaObject:
    """JSON-Schema-like payload shape. ``ref`` nodes stay unresolved until
    dereferenced through the owning document (cycle-safe, memoized)."""

    type: str | None = None
    properties: dict[str, "SchemaObject"] = field(default_factory=dict)
    items: "SchemaObject | None" = None
    required: list[str] = field(default_factory=list)
    enum: list | None = None
    title: str | None = None
    description: str | None = None
    ref: str | None = None
    all_of: list["SchemaObject"] | None = None
    composed_with: str | None = None  # "oneOf" | "anyOf" | "not" when present
    default: Any = None
    pointer: str = ""


@dataclass
class OasParameter:
    name: str
    location: str  # path | query | header
    schema: SchemaObject | None
    required: bool = False
    default: Any = None
    description: str | None = None
    pointer: str = ""


@dataclass
class RequestBody:
    content_type: str | None
    schema: SchemaObject | None
    required: bool = False
    description: str | None = None
    pointer: str = ""


@dataclass
class LinkDefinition:
    name: str
    operation_id: str | None = None
    operation_ref: str | None = None
    parameters: dict[str, str] = field(default_factory=dict)
    request_body: Any = None
    description: str | None = None
    pointer: str = ""


@dataclass
class OasResponse:
    status: str
    content_type: str | None
    schema: SchemaObject | None
    links: dict[str, LinkDefinition] = field(default_factory=dict)
    description: str | None = None
    pointer: str = ""


@dataclass
class SecurityScheme:
    name: str
    type: str  # apiKey | http | oauth2 | openIdConnect
    location: str | None = None  # apiKey: header | query
    param_name: str | None = None  # apiKey: raw upstream name
    http_scheme: str | None = None  # http: basic | bearer | ...
    description: str | None = None
    pointer: str = ""


@dataclass
class OasOperation:
    method: str
    path: str
    operation_id: str | None = None
    description: str | None = None
    parameters: list[OasParameter] = field(default_factory=list)
    request_body: RequestBody | None = None
    responses: dict[str, OasResponse] = field(default_factory=dict)
    security: list[str] = field(default_factory=list)
    pointer: str = ""

    @property
    def key(self) -> str:
        return f"{self.method.upper()} {self.path}"

    def path_param_names(self) -> list[str]:
        return template_params(self.path)

    def links(self) -> dict[str, LinkDefinition]:
        """Links declared on any success response, first declaration wins."""
        merged: dict[str, LinkDefinition] = {}
        for status in sorted(self.responses):
            if not is_success_status(status):
                continue
            for name, link in self.responses[status].links.items():
                merged.setdefault(name, link)
        return merged


@dataclass
class ValidationIssue:
    severity: str  # "fatal" | "note"
    location: str
    message: str


@dataclass
class OasDocument:
    version: str
    title: str | None
    api_version: str | None
    description: str | None
    servers: list[str]
    operations: list[OasOperation]
    schemas: dict[str, str]  # component name -> pointer
    security_schemes: dict[str, SecurityScheme]
    raw_root: dict
    source: str = ""

    def __post_init__(self):
        self._ref_cache: dict[str, SchemaObject] = {}
        self._allof_cache: dict[int, SchemaObject] = {}

    # -- reference resolution -------------------------------------------------

    def resolve_ref(self, pointer: str) -> SchemaObject:
        """Dereference an internal JSON pointer to its canonical SchemaObject.

        Resolution is memoized: the same pointer always yields the same object
        identity, which is what makes reference cycles representable.
        """
        if pointer in self._ref_cache:
            return self._ref_cache[pointer]
        if not isinstance(pointer, str) or not pointer.startswith("#/"):
            raise MissingRefError(
                str(pointer),
                f"reference {pointer!r} targets a relative or external document",
            )
        node = navigate_pointer(self.raw_root, pointer)
        if not isinstance(node, dict):
            raise MissingRefError(pointer, f"reference {pointer!r} does not target a schema object")
        schema = parse_schema(node, pointer)
        self._ref_cache[pointer] = schema
        return schema

    def deref(self, schema: SchemaObject) -> SchemaObject:
        """Follow ref chains to the underlying schema (cycle-guarded)."""
        seen: set[str] = set()
        while schema.ref is not None:
            if schema.ref in seen:
                break
            seen.add(schema.ref)
            schema = self.resolve_ref(schema.ref)
        return schema

    def merge_all_of(self, schema: SchemaObject, report: Report) -> SchemaObject:
        if id(schema) not in self._allof_cache:
            self._allof_cache[id(schema)] = _merge_all_of(self, schema, report)
        return self._allof_cache[id(schema)]

    def canonical_schema(self, schema: SchemaObject) -> SchemaObject:
        """Deref plus memoized allOf merge: the node identity every index
        (dictionary decisions, bindings) is keyed on."""
        s = self.deref(schema)
        if s.all_of and id(s) in self._allof_cache:
            s = self._allof_cache[id(s)]
        return s

    def find_operation(self, operation_id: str | None = None,
                       method: str | None = None, path: str | None = None) -> OasOperation | None:
        for op in self.operations:
            if operation_id is not None and op.operation_id == operation_id:
                return op
            if method is not None and op.method == method and op.path == path:
                return op
        return None


# -- loading and version detection --------------------------------------------


def load_document(data: bytes | str, format_hint: str | None = None,
                  source_path: str = "<bytes>") -> RawDocument:
    """Parse OAS bytes as JSON or YAML; without a hint, JSON is tried first."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{source_path}: not valid UTF-8: {exc}") from exc
    else:
        text = data
    if not text.strip():
        raise ParseError(f"{source_path}: document is empty")

    attempts = {"json": [("json", json.loads)],
                "yaml": [("yaml", yaml.safe_load)],
                None: [("json", json.loads), ("yaml", yaml.safe_load)]}[format_hint]
    last_error: Exception | None = None
    for fmt, loader in attempts:
        try:
            root = loader(text)
        except Exception as exc:  # json.JSONDecodeError or yaml.YAMLError
            last_error = exc
            continue
        if not isinstance(root, dict):
            raise ParseError(f"{source_path}: document root must be a mapping")
        return RawDocument(source_path=source_path, format=fmt, root=root)
    raise ParseError(f"{source_path}: cannot parse as JSON or YAML: {last_error}")


def detect_version(doc: RawDocument) -> str:
    """Classify a raw document as "v2", "v3", or "unknown"."""
    if doc.root.get("swagger") == "2.0":
        return "v2"
    openapi = doc.root.get("openapi")
    if isinstance(openapi, str) and openapi.startswith("3."):
        return "v3"
    return "unknown"


def ingest(doc: RawDocument, report: Report) -> OasDocument:
    """Version-detect and produce a normalized 3.x document model."""
    version = detect_version(doc)
    if version == "v2":
        return upconvert(doc, report)
    if version == "v3":
        return normalize(doc.root, doc.source_path, report)
    raise InvalidOasError(
        f"{doc.source_path}: neither 'swagger: 2.0' nor an 'openapi: 3.*' version marker found"
    )


# -- OAS 2.0 -> 3.0 structural translation -------------------------------------


def upconvert(doc: RawDocument, report: Report | None = None) -> OasDocument:
    """Losslessly translate a Swagger 2.0 document and normalize it."""
    if report is None:
        report = Report(source=doc.source_path)
    v3_root = convert_v2_dict(doc.root)
    return normalize(v3_root, doc.source_path, report)


def convert_v2_dict(root: dict) -> dict:
    """Structural 2.0 -> 3.0 mapping for the supported v2 feature subset."""
    out: dict = {"openapi": "3.0.0", "info": root.get("info", {})}

    schemes = root.get("schemes") or []
    scheme = schemes[0] if schemes else "https"
    host = root.get("host")
    base_path = root.get("basePath", "")
    if host:
        out["servers"] = [{"url": f"{scheme}://{host}{base_path}"}]
    elif base_path:
        out["servers"] = [{"url": base_path}]

    components: dict = {}
    if "definitions" in root:
        components["schemas"] = root["definitions"]
    if "securityDefinitions" in root:
        components["securitySchemes"] = {
            name: _convert_v2_security(name, node)
            for name, node in root["securityDefinitions"].items()
        }
    out["components"] = components

    global_consumes = root.get("consumes") or []
    global_produces = root.get("produces") or []

    paths_out: dict = {}
    for path, path_item in (root.get("paths") or {}).items():
        if not isinstance(path_item, dict):
            raise UpconvertError(f"path item for {path!r} is not a mapping")
        item_out: dict = {}
        shared_params = [
            _resolve_v2_param(root, p) for p in path_item.get("parameters", [])
        ]
        for method, op in path_item.items():
            if method not in HTTP_METHODS:
                continue
            if not isinstance(op, dict):
                raise UpconvertError(f"operation {method.upper()} {path} is not a mapping")
            op_params = shared_params + [
                _resolve_v2_param(root, p) for p in op.get("parameters", [])
            ]
            item_out[method] = _convert_v2_operation(
                op, op_params,
                consumes=op.get("consumes") or global_consumes,
                produces=op.get("produces") or global_produces,
            )
        paths_out[path] = item_out
    out["paths"] = paths_out

    if "security" in root:
        out["security"] = root["security"]

    _rewrite_refs(out)
    return out


def _resolve_v2_param(root: dict, param: Any) -> dict:
    if isinstance(param, dict) and "$ref" in param:
        ref = param["$ref"]
        if not isinstance(ref, str) or not ref.startswith("#/parameters/"):
            raise UpconvertError(f"unsupported parameter reference {ref!r}")
        name = ref[len("#/parameters/"):]
        target = (root.get("parameters") or {}).get(name)
        if target is None:
            raise UpconvertError(f"parameter reference {ref!r} has no target")
        return target
    if not isinstance(param, dict) or "name" not in param or "in" not in param:
        raise UpconvertError(f"malformed v2 parameter: {param!r}")
    return param


def _convert_v2_operation(op: dict, params: list[dict],
                          consumes: list[str], produces: list[str]) -> dict:
    out = {
        key: op[key]
        for key in ("operationId", "summary", "description", "security", "deprecated")
        if key in op
    }

    body_params = [p for p in params if p.get("in") == "body"]
    form_params = [p for p in params if p.get("in") == "formData"]
    plain_params = [p for p in params if p.get("in") not in ("body", "formData")]

    if body_params and form_params:
        raise UpconvertError("operation declares both body and formData parameters")
    if len(body_params) > 1:
        raise UpconvertError("operation declares more than one body parameter")

    if body_params:
        body = body_params[0]
        media = consumes[0] if consumes else JSON_MEDIA
        out["requestBody"] = {
            "content": {media: {"schema": body.get("schema", {})}},
            "required": bool(body.get("required", False)),
        }
        if body.get("description"):
            out["requestBody"]["description"] = body["description"]
    elif form_params:
        properties = {}
        required = []
        for p in form_params:
            properties[p["name"]] = {
                key: p[key]
                for key in ("type", "format", "items", "enum", "default", "description")
                if key in p
            }
            if p.get("required"):
                required.append(p["name"])
        schema: dict = {"type": "object", "properties": properties}
        if required:
            schema["required"] = required
        out["requestBody"] = {
            "content": {FORM_MEDIA: {"schema": schema}},
            "required": bool(required),
        }

    converted_params = []
    for p in plain_params:
        q = {key: p[key] for key in ("name", "in", "required", "description") if key in p}
        schema_keys = ("type", "format", "items", "enum", "default",
                       "minimum", "maximum", "pattern")
        q["schema"] = {key: p[key] for key in schema_keys if key in p}
        converted_params.append(q)
    if converted_params:
        out["parameters"] = converted_params

    responses_out = {}
    for status, resp in (op.get("responses") or {}).items():
        if not isinstance(resp, dict):
            raise UpconvertError(f"response {status!r} is not a mapping")
        r_out = {"description": resp.get("description", "")}
        if "schema" in resp:
            media_types = produces or [JSON_MEDIA]
            r_out["content"] = {media: {"schema": resp["schema"]} for media in media_types}
        responses_out[str(status)] = r_out
    out["responses"] = responses_out
    return out


def _convert_v2_security(name: str, node: dict) -> dict:
    kind = node.get("type")
    if kind == "basic":
        return {"type": "http", "scheme": "basic",
                **({"description": node["description"]} if "description" in node else {})}
    if kind == "apiKey":
        return {key: node[key] for key in ("type", "name", "in", "description") if key in node}
    if kind == "oauth2":
        flow_names = {"implicit": "implicit", "password": "password",
                      "application": "clientCredentials", "accessCode": "authorizationCode"}
        flow = flow_names.get(node.get("flow", ""), "implicit")
        detail = {
            key_out: node[key_in]
            for key_in, key_out in (("authorizationUrl", "authorizationUrl"),
                                    ("tokenUrl", "tokenUrl"))
            if key_in in node
        }
        detail["scopes"] = node.get("scopes", {})
        return {"type": "oauth2", "flows": {flow: detail}}
    raise UpconvertError(f"security definition {name!r} has unsupported type {kind!r}")


def _rewrite_refs(node: Any) -> None:
    """Rewrite '#/definitions/...' pointers to their components location."""
    if isinstance(node, dict):
        ref = node.get("$ref")
        if isinstance(ref, str) and ref.startswith("#/definitions/"):
            node["$ref"] = "#/components/schemas/" + ref[len("#/definitions/"):]
        for value in node.values():
            _rewrite_refs(value)
    elif isinstance(node, list):
        for value in node:
            _rewrite_refs(value)


# -- normalization of 3.x documents --------------------------------------------


def normalize(root: dict, source: str, report: Report) -> OasDocument:
    """Build the document model from a raw 3.x mapping.

    Grossly malformed structure raises InvalidOas; semantic problems are left
    for :func:`validate` so they can all be reported together.
    """
    info = root.get("info") if isinstance(root.get("info"), dict) else {}
    servers = []
    for server in root.get("servers") or []:
        if isinstance(server, dict) and isinstance(server.get("url"), str):
            servers.append(server["url"])

    components = root.get("components") if isinstance(root.get("components"), dict) else {}
    schemas = {
        name: f"#/components/schemas/{escape_pointer_token(name)}"
        for name in (components.get("schemas") or {})
    }
    security_schemes = _parse_security_schemes(components.get("securitySchemes") or {}, report)

    global_security = _security_names(root.get("security"))
    operations: list[OasOperation] = []
    paths = root.get("paths")
    if paths is not None and not isinstance(paths, dict):
        raise InvalidOasError(f"{source}: 'paths' must be a mapping")
    for path, path_item in (paths or {}).items():
        if not isinstance(path_item, dict):
            raise InvalidOasError(f"{source}: path item {path!r} must be a mapping")
        path_ptr = f"#/paths/{escape_pointer_token(path)}"
        shared_params = path_item.get("parameters") or []
        for method in HTTP_METHODS:
            if method not in path_item:
                continue
            op_node = path_item[method]
            if not isinstance(op_node, dict):
                raise InvalidOasError(f"{source}: operation {method.upper()} {path} must be a mapping")
            operations.append(
                _parse_operation(
                    root, method, path, op_node, shared_params,
                    f"{path_ptr}/{method}", global_security, security_schemes, report,
                )
            )

    return OasDocument(
        version=str(root.get("openapi", "")),
        title=info.get("title"),
        api_version=info.get("version"),
        description=info.get("description"),
        servers=servers,
        operations=operations,
        schemas=schemas,
        security_schemes=security_schemes,
        raw_root=root,
        source=source,
    )


def _parse_security_schemes(nodes: dict, report: Report) -> dict[str, SecurityScheme]:
    schemes: dict[str, SecurityScheme] = {}
    for name, node in nodes.items():
        if not isinstance(node, dict):
            continue
        pointer = f"#/components/securitySchemes/{escape_pointer_token(name)}"
        kind = node.get("type")
        if kind == "apiKey":
            location = node.get("in", "header")
            if location not in ("header", "query"):
                record_warning(report, UNSUPPORTED_FEATURE, pointer,
                               f"apiKey location {location!r} unsupported; scheme ignored")
                continue
            schemes[name] = SecurityScheme(
                name=name, type="apiKey", location=location,
                param_name=node.get("name", name),
                description=node.get("description"), pointer=pointer,
            )
        elif kind == "http":
            schemes[name] = SecurityScheme(
                name=name, type="http", http_scheme=str(node.get("scheme", "")).lower(),
                description=node.get("description"), pointer=pointer,
            )
        elif kind in ("oauth2", "openIdConnect"):
            schemes[name] = SecurityScheme(
                name=name, type=kind, description=node.get("description"), pointer=pointer,
            )
        else:
            record_warning(report, UNSUPPORTED_FEATURE, pointer,
                           f"security scheme type {kind!r} unsupported; scheme ignored")
    return schemes


def _security_names(requirements: Any) -> list[str]:
    names: list[str] = []
    for requirement in requirements or []:
        if isinstance(requirement, dict):
            for name in requirement:
                if name not in names:
                    names.append(name)
    return names


def _parse_operation(root: dict, method: str, path: str, node: dict, shared_params: list,
                     pointer: str, global_security: list[str],
                     known_schemes: dict[str, SecurityScheme], report: Report) -> OasOperation:
    params: list[OasParameter] = []
    seen: set[tuple[str, str]] = set()
    own_params = node.get("parameters") or []
    for index, param_node in enumerate(list(own_params) + list(shared_params)):
        origin = pointer if index < len(own_params) else pointer.rsplit("/", 1)[0]
        param = _parse_parameter(root, param_node, f"{origin}/parameters", report)
        if param is None:
            continue
        if (param.name, param.location) in seen:
            continue
        seen.add((param.name, param.location))
        params.append(param)

    request_body = None
    body_node = node.get("requestBody")
    if isinstance(body_node, dict):
        body_node = _deref_raw(root, body_node)
        content_type, schema = _select_content(body_node.get("content"), f"{pointer}/requestBody/content")
        request_body = RequestBody(
            content_type=content_type,
            schema=schema,
            required=bool(body_node.get("required", False)),
            description=body_node.get("description"),
            pointer=f"{pointer}/requestBody",
        )

    responses: dict[str, OasResponse] = {}
    for status, resp_node in (node.get("responses") or {}).items():
        status = str(status)
        resp_ptr = f"{pointer}/responses/{status}"
        if not isinstance(resp_node, dict):
            continue
        resp_node = _deref_raw(root, resp_node)
        content_type, schema = _select_content(resp_node.get("content"), f"{resp_ptr}/content")
        links = {}
        for link_name, link_node in (resp_node.get("links") or {}).items():
            if isinstance(link_node, dict):
                link_node = _deref_raw(root, link_node)
                links[link_name] = LinkDefinition(
                    name=link_name,
                    operation_id=link_node.get("operationId"),
                    operation_ref=link_node.get("operationRef"),
                    parameters={
                        str(k): str(v) for k, v in (link_node.get("parameters") or {}).items()
                    },
                    request_body=link_node.get("requestBody"),
                    description=link_node.get("description"),
                    pointer=f"{resp_ptr}/links/{escape_pointer_token(link_name)}",
                )
        responses[status] = OasResponse(
            status=status, content_type=content_type, schema=schema, links=links,
            description=resp_node.get("description"), pointer=resp_ptr,
        )

    security = global_security
    if "security" in node:
        security = _security_names(node.get("security"))
    # Drop schemes the components section does not define or we do not support.
    kept = []
    for name in security:
        if name in known_schemes:
            kept.append(name)
        else:
            record_warning(report, UNSUPPORTED_FEATURE, f"{pointer}/security",
                           f"security scheme {name!r} is not defined or unsupported; "
                           f"requirement dropped")
    return OasOperation(
        method=method, path=path, operation_id=node.get("operationId"),
        description=node.get("description") or node.get("summary"),
        parameters=params, request_body=request_body, responses=responses,
        security=kept, pointer=pointer,
    )


def _parse_parameter(root: dict, node: Any, pointer: str, report: Report) -> OasParameter | None:
    if not isinstance(node, dict):
        return None
    node = _deref_raw(root, node)
    name = node.get("name")
    location = node.get("in")
    if not isinstance(name, str) or not isinstance(location, str):
        raise InvalidOasError(f"parameter at {pointer} lacks 'name' or 'in'")
    param_ptr = f"{pointer}/{escape_pointer_token(name)}"
    if location not in ("path", "query", "header"):
        record_warning(report, UNSUPPORTED_FEATURE, param_ptr,
                       f"parameter location {location!r} unsupported; parameter ignored")
        return None
    schema = None
    if isinstance(node.get("schema"), dict):
        schema = parse_schema(node["schema"], f"{param_ptr}/schema")
    elif isinstance(node.get("content"), dict):
        _, schema = _select_content(node["content"], f"{param_ptr}/content")
    default = schema.default if schema is not None else None
    required = bool(node.get("required", False)) or location == "path"
    return OasParameter(
        name=name, location=location, schema=schema, required=required,
        default=default, description=node.get("description"), pointer=param_ptr,
    )


def _deref_raw(root: dict, node: dict) -> dict:
    """Follow a raw-tree $ref (components.parameters/responses/requestBodies/links)."""
    seen: set[str] = set()
    while isinstance(node, dict) and isinstance(node.get("$ref"), str):
        ref = node["$ref"]
        if ref in seen:
            raise InvalidOasError(f"circular non-schema reference chain at {ref!r}")
        seen.add(ref)
        if not ref.startswith("#/"):
            raise MissingRefError(ref, f"reference {ref!r} targets a relative or external document")
        target = navigate_pointer(root, ref)
        if not isinstance(target, dict):
            raise MissingRefError(ref)
        node = target
    return node


def _select_content(content: Any, pointer: str) -> tuple[str | None, SchemaObject | None]:
    """Pick one media type: application/json, then any application/*json*,
    then the first declared."""
    if not isinstance(content, dict) or not content:
        return None, None

    def media_key(name: str) -> str:
        return name.split(";", 1)[0].strip().lower()

    chosen = None
    for name in content:
        if media_key(name) == JSON_MEDIA:
            chosen = name
            break
    if chosen is None:
        for name in content:
            base = media_key(name)
            if base.startswith("application/") and "json" in base:
                chosen = name
                break
    if chosen is None:
        chosen = next(iter(content))
    node = content[chosen] if isinstance(content[chosen], dict) else {}
    schema = None
    if isinstance(node.get("schema"), dict):
        schema = parse_schema(node["schema"], f"{pointer}/{escape_pointer_token(chosen)}/schema")
    return media_key(chosen), schema


# -- schema object parsing ------------------------------------------------------


def parse_schema(node: dict, pointer: str) -> SchemaObject:
    """Parse one schema mapping; $ref children stay unresolved."""
    ref = node.get("$ref")
    if ref is not None:
        if not isinstance(ref, str):
            raise InvalidOasError(f"$ref at {pointer} must be a string")
        return SchemaObject(ref=ref, pointer=pointer)

    composed = next((key for key in ("oneOf", "anyOf", "not") if key in node), None)

    properties = {}
    if isinstance(node.get("properties"), dict):
        for key, child in node["properties"].items():
            if isinstance(child, dict):
                properties[key] = parse_schema(
                    child, f"{pointer}/properties/{escape_pointer_token(key)}"
                )
    items = None
    if isinstance(node.get("items"), dict):
        items = parse_schema(node["items"], f"{pointer}/items")
    all_of = None
    if isinstance(node.get("allOf"), list):
        all_of = [
            parse_schema(member, f"{pointer}/allOf/{i}")
            for i, member in enumerate(node["allOf"])
            if isinstance(member, dict)
        ]

    schema_type = node.get("type")
    return SchemaObject(
        type=schema_type if isinstance(schema_type, str) else None,
        properties=properties,
        items=items,
        required=[name for name in node.get("required", []) if isinstance(name, str)],
        enum=list(node["enum"]) if isinstance(node.get("enum"), list) else None,
        title=node.get("title") if isinstance(node.get("title"), str) else None,
        description=node.get("description") if isinstance(node.get("description"), str) else None,
        all_of=all_of,
        composed_with=composed,
        default=node.get("default"),
        pointer=pointer,
    )


# -- allOf merging ----------------------------------------------------------------


def _merge_all_of(doc: OasDocument, schema: SchemaObject, report: Report) -> SchemaObject:
    members: list[SchemaObject] = []

    def collect(s: SchemaObject) -> None:
        s = doc.deref(s)
        if s.all_of:
            for member in s.all_of:
                collect(member)
        else:
            members.append(s)

    for member in schema.all_of or []:
        collect(member)
    if not members:
        return SchemaObject(pointer=schema.pointer, title=schema.title,
                            description=schema.description)

    declared_types = {m.type for m in members if m.type is not None}
    if len(declared_types) > 1:
        record_warning(report, INVALID_SCHEMA_TYPE, schema.pointer,
                       f"allOf members disagree on type ({sorted(declared_types)}); "
                       f"falling back to string")
        return SchemaObject(type="string", pointer=schema.pointer, title=schema.title)

    if declared_types and declared_types != {"object"} and not any(m.properties for m in members):
        merged = members[0]
        if len(members) == 1:
            return merged
        return SchemaObject(
            type=merged.type, enum=merged.enum, items=merged.items,
            title=schema.title or merged.title,
            description=_join_descriptions(schema, members), pointer=schema.pointer,
        )

    properties: dict[str, SchemaObject] = {}
    required: list[str] = []
    for member in members:
        for key, child in member.properties.items():
            if key in properties:
                previous = doc.deref(properties[key])
                incoming = doc.deref(child)
                if (previous.type is not None and incoming.type is not None
                        and previous.type != incoming.type):
                    record_warning(
                        report, INVALID_SCHEMA_TYPE, child.pointer,
                        f"allOf members assign conflicting types to property {key!r} "
                        f"({previous.type} vs {incoming.type}); falling back to string",
                    )
                    properties[key] = SchemaObject(type="string", pointer=child.pointer)
                    continue
            properties[key] = child
        for name in member.required:
            if name not in required:
                required.append(name)

    return SchemaObject(
        type="object", properties=properties, required=sorted(required),
        title=schema.title or next((m.title for m in members if m.title), None),
        description=_join_descriptions(schema, members),
        pointer=schema.pointer,
    )


def _join_descriptions(schema: SchemaObject, members: list[SchemaObject]) -> str | None:
    parts = [schema.description] + [m.description for m in members]
    joined = " ".join(p for p in parts if p)
    return joined or None


# -- validation --------------------------------------------------------------------


KNOWN_TOP_LEVEL = {
    "openapi", "info", "servers", "paths", "components", "security", "tags",
    "externalDocs",
}


def validate(doc: OasDocument) -> list[ValidationIssue]:
    """Structural checks over a normalized document.

    An empty result means generation may proceed; any fatal issue means the
    document is rejected as InvalidOas.
    """
    issues: list[ValidationIssue] = []

    if not doc.title:
        issues.append(ValidationIssue("fatal", "#/info/title", "info.title is required"))
    if not doc.api_version:
        issues.append(ValidationIssue("fatal", "#/info/version", "info.version is required"))
    if "paths" not in doc.raw_root:
        issues.append(ValidationIssue("fatal", "#/paths", "paths object is required"))

    for key in doc.raw_root:
        if key not in KNOWN_TOP_LEVEL and not key.startswith("x-"):
            issues.append(ValidationIssue("note", f"#/{key}", f"unrecognized top-level field {key!r}"))

    seen_ops: set[tuple[str, str]] = set()
    for op in doc.operations:
        if (op.method, op.path) in seen_ops:
            issues.append(ValidationIssue("fatal", op.pointer,
                                          f"duplicate operation {op.key}"))
        seen_ops.add((op.method, op.path))

        template = template_params(op.path)
        declared = [p.name for p in op.parameters if p.location == "path"]
        for name in template:
            if declared.count(name) != 1:
                issues.append(ValidationIssue(
                    "fatal", op.pointer,
                    f"path parameter {{{name}}} of {op.key} must be declared exactly once "
                    f"(found {declared.count(name)})",
                ))
        for name in declared:
            if name not in template:
                issues.append(ValidationIssue(
                    "fatal", op.pointer,
                    f"declared path parameter {name!r} does not appear in {op.path!r}",
                ))

        for status in op.responses:
            if not _valid_status_pattern(status):
                issues.append(ValidationIssue(
                    "fatal", f"{op.pointer}/responses/{status}",
                    f"response key {status!r} is not a 3-digit code, wildcard pattern, or 'default'",
                ))
    return issues


def _valid_status_pattern(status: str) -> bool:
    if status == "default":
        return True
    if len(status) != 3:
        return False
    return all(c.isdigit() or c in "Xx" for c in status) and status[0].isdigit()


def is_success_status(status: str) -> bool:
    return status.startswith("2") and status != "default"


# -- pointer helpers ------------------------------------------------------------


def escape_pointer_token(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def unescape_pointer_token(token: str) -> str:
    return token.replace("~1", "/").replace("~0", "~")


def navigate_pointer(root: Any, pointer: str) -> Any:
    """Walk a '#/a/b/0' pointer through a raw JSON tree; raises MissingRef."""
    if not pointer.startswith("#/"):
        raise MissingRefError(pointer)
    node = root
    for raw_token in pointer[2:].split("/"):
        token = unescape_pointer_token(raw_token)
        if isinstance(node, dict):
            if token not in node:
                raise MissingRefError(pointer)
            node = node[token]
        elif isinstance(node, list):
            if not token.isdigit() or int(token) >= len(node):
                raise MissingRefError(pointer)
            node = node[int(token)]
        else:
            raise MissingRefError(pointer)
    return node


def template_params(path: str) -> list[str]:
    """Names of {param} segments in declaration order."""
    names = []
    rest = path
    while "{" in rest:
        _, _, rest = rest.partition("{")
        name, brace, rest = rest.partition("}")
        if not brace:
            break
        if name:
            names.append(name)
    return names
