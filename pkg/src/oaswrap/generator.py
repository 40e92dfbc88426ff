"""End-to-end generation pipeline: OAS file in, GraphQL wrapper out.

Errors from the taxonomy (InvalidOas, SanitationError, MissingRef, strict-mode
aborts) are captured into the report rather than raised, so callers inspect
``wrapper.ok`` / ``wrapper.report``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidOasError, OaswrapError, StrictModeAbort
from .oas_ingest import OasDocument, ingest, load_document, validate
from .preprocessing import CAMEL, PreprocessResult, preprocess
from .report import NON_STRICT, Report
from .resolver_runtime import ResolvePlan, make_resolve_plan
from .schema_gen import SchemaIR, assemble_schema, print_sdl


@dataclass
class GenerationOptions:
    strict: bool = False
    casing: str = CAMEL
    token_path: str | None = None

    @property
    def mode(self) -> str:
        return "strict" if self.strict else NON_STRICT


@dataclass
class GeneratedWrapper:
    report: Report
    document: OasDocument | None = None
    pre: PreprocessResult | None = None
    schema: SchemaIR | None = None
    plans: dict[str, ResolvePlan] = field(default_factory=dict)
    sdl: str | None = None

    @property
    def ok(self) -> bool:
        return self.report.outcome == "success"


def generate(source: str | Path | bytes, options: GenerationOptions | None = None,
             source_name: str | None = None) -> GeneratedWrapper:
    """Run the whole pipeline; the returned wrapper's report tells the outcome."""
    options = options or GenerationOptions()
    if isinstance(source, (str, Path)) and not source_name:
        source_name = str(source)
    report = Report(source=source_name or "<bytes>", mode=options.mode)
    wrapper = GeneratedWrapper(report=report)
    try:
        _run_pipeline(source, source_name, options, report, wrapper)
    except StrictModeAbort as exc:
        report.fail(exc.kind, str(exc))
    except OaswrapError as exc:
        report.fail(exc.kind, str(exc))
    except RecursionError:
        report.fail("InternalError", "recursion limit exceeded during generation")
    return wrapper


def _run_pipeline(source, source_name, options: GenerationOptions, report: Report,
                  wrapper: GeneratedWrapper) -> None:
    data = source if isinstance(source, bytes) else Path(source).read_bytes()
    raw = load_document(data, None, report.source)
    doc = ingest(raw, report)
    _finish(doc, options, report, wrapper)


def _finish(doc: OasDocument, options: GenerationOptions, report: Report,
            wrapper: GeneratedWrapper) -> None:
    wrapper.document = doc
    issues = validate(doc)
    fatal = [issue for issue in issues if issue.severity == "fatal"]
    if fatal:
        raise InvalidOasError(f"{fatal[0].message} (at {fatal[0].location})")

    pre = preprocess(doc, report, options.casing)
    wrapper.pre = pre

    plans: dict[str, ResolvePlan] = {}
    for op in doc.operations:
        binding = pre.bindings[op.key]
        if binding.skipped:
            continue
        plans[op.key] = make_resolve_plan(op, doc, binding, pre, options.casing,
                                          options.token_path)
    wrapper.plans = plans

    schema = assemble_schema(doc, pre, plans, report, options.casing)
    wrapper.schema = schema
    wrapper.sdl = print_sdl(schema)
