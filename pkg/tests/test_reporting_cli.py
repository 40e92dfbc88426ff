"""Report behavior, strict-mode semantics, CLI exit codes, and corpus eval."""

import json

import pytest
from click.testing import CliRunner

from conftest import CORPUS_DIR, corpus_path, load_manifest
from oaswrap.cli import main
from oaswrap.errors import StrictModeAbort
from oaswrap.evaluate import evaluate_corpus, render_tables
from oaswrap.generator import GenerationOptions, generate
from oaswrap.report import (
    STRICT,
    WARNING_KINDS,
    Report,
    finalize_report,
    record_warning,
)


# -- record_warning ------------------------------------------------------------


def test_record_warning_non_strict_appends():
    report = Report(source="s")
    record_warning(report, "MissingResponseSchema", "#/paths/~1x/get",
                   "operation skipped")
    assert len(report.warnings) == 1
    assert report.warnings[0].kind == "MissingResponseSchema"


def test_record_warning_strict_aborts_with_same_cause():
    report = Report(source="s", mode=STRICT)
    with pytest.raises(StrictModeAbort) as excinfo:
        record_warning(report, "MultipleResponses", "#/paths/~1x/get/responses",
                       "selected lowest status 200")
    assert excinfo.value.kind == "MultipleResponses"
    assert report.warnings == []


def test_record_warning_rejects_unknown_kind():
    with pytest.raises(ValueError):
        record_warning(Report(source="s"), "NotAKind", "#/", "nope")


# -- finalize_report --------------------------------------------------------------


def test_finalize_report_clean_run():
    report = Report(source="api.json")
    payload = json.loads(finalize_report(report))
    assert payload["outcome"] == "success"
    assert payload["warnings"] == []
    assert payload["error"] is None
    assert set(payload["stats"]) == {
        "operations_total", "operations_skipped", "types_created",
        "links_attached", "viewers_created",
    }


def test_finalize_report_counts_and_order_deterministic():
    wrapper = generate(corpus_path("warn_multiple_responses.json"))
    first = finalize_report(wrapper.report)
    second = finalize_report(generate(corpus_path("warn_multiple_responses.json")).report)
    assert first == second
    payload = json.loads(first)
    assert payload["warning_counts"] == {"MultipleResponses": 1}
    assert payload["warnings"][0]["location"].startswith("#/paths/")


def test_finalize_report_timestamp_excluded_by_default():
    report = Report(source="x")
    assert "generated_at" not in json.loads(finalize_report(report))
    stamped = json.loads(finalize_report(report, timestamp="2020-01-01T00:00:00Z"))
    assert stamped["generated_at"] == "2020-01-01T00:00:00Z"


def test_aborted_strict_run_echoes_warning_kind():
    wrapper = generate(corpus_path("warn_multiple_responses.json"),
                       GenerationOptions(strict=True))
    payload = json.loads(finalize_report(wrapper.report))
    assert payload["outcome"] == "error"
    assert payload["error"]["kind"] == "MultipleResponses"


def test_taxonomy_closure_on_corpus():
    manifest = load_manifest()
    for name in manifest["files"]:
        wrapper = generate(corpus_path(name))
        for warning in wrapper.report.warnings:
            assert warning.kind in WARNING_KINDS
            assert warning.location.startswith("#/")
            assert warning.mitigation


def test_skip_accounting_matches_root_fields():
    wrapper = generate(corpus_path("warn_missing_response_schema.json"))
    stats = wrapper.report.stats
    placed = stats.operations_total - stats.operations_skipped
    assert placed == len(wrapper.plans) == 1


def test_skip_accounting_invariant_across_corpus():
    # operations_total - operations_skipped equals the number of operation
    # root fields, counting a viewer-wrapped operation once
    for name in load_manifest()["files"]:
        wrapper = generate(corpus_path(name))
        if not wrapper.ok:
            continue
        schema = wrapper.schema
        placed: set[str] = set()
        for fields in (schema.query_fields, schema.mutation_fields):
            for field in fields.values():
                if field.binding is None:
                    continue
                if field.binding.kind == "operation":
                    placed.add(field.binding.plan_key)
                elif field.binding.kind == "viewer":
                    viewer_type = schema.types[field.type.unwrap().name]
                    for inner in viewer_type.fields.values():
                        if inner.binding and inner.binding.kind == "operation":
                            placed.add(inner.binding.plan_key)
        stats = wrapper.report.stats
        assert len(placed) == stats.operations_total - stats.operations_skipped, name


# -- CLI ---------------------------------------------------------------------------


def test_cmd_generate_success_writes_sdl_and_report(tmp_path):
    sdl = tmp_path / "schema.graphql"
    report = tmp_path / "report.json"
    runner = CliRunner()
    result = runner.invoke(main, [
        "generate", str(corpus_path("clean_links.json")),
        "--sdl", str(sdl), "--report", str(report),
    ])
    assert result.exit_code == 0, result.output
    assert "type Query" in sdl.read_text()
    payload = json.loads(report.read_text())
    assert payload["outcome"] == "success"


def test_cmd_generate_strict_failure_exit_1(tmp_path):
    report = tmp_path / "report.json"
    runner = CliRunner()
    result = runner.invoke(main, [
        "generate", str(corpus_path("warn_multiple_responses.json")),
        "--strict", "--report", str(report),
    ])
    assert result.exit_code == 1
    assert json.loads(report.read_text())["outcome"] == "error"


def test_cmd_generate_nonexistent_path_exit_2():
    runner = CliRunner()
    result = runner.invoke(main, ["generate", "/no/such/file.json"])
    assert result.exit_code == 2


def test_cmd_generate_error_document_exit_1():
    runner = CliRunner()
    result = runner.invoke(main, ["generate", str(corpus_path("error_malformed.json"))])
    assert result.exit_code == 1
    assert "InvalidOas" in result.output


def test_cmd_generate_preserve_casing(tmp_path):
    sdl = tmp_path / "schema.graphql"
    runner = CliRunner()
    result = runner.invoke(main, [
        "generate", str(corpus_path("clean_minimal.json")),
        "--casing", "preserve", "--sdl", str(sdl),
    ])
    assert result.exit_code == 0
    assert "type Query" in sdl.read_text()


def test_cmd_serve_rejects_malformed_header():
    runner = CliRunner()
    result = runner.invoke(main, [
        "serve", str(corpus_path("clean_minimal.json")), "--header", "novalue",
    ])
    assert result.exit_code == 2
    assert "Name: value" in result.output


def test_cmd_eval_writes_stats(tmp_path):
    out = tmp_path / "stats.json"
    runner = CliRunner()
    result = runner.invoke(main, ["eval", str(CORPUS_DIR), "--out", str(out)])
    assert result.exit_code == 0, result.output
    stats = json.loads(out.read_text())
    manifest = load_manifest()["files"]
    assert stats["total"] == len(manifest)
    assert "Overall results" in result.output
    assert "Errors by kind" in result.output


def test_cmd_eval_strict_also_table(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, [
        "eval", str(CORPUS_DIR), "--strict-also", "--out", str(tmp_path / "s.json"),
    ])
    assert result.exit_code == 0
    assert "strict" in result.output


# -- evaluate_corpus --------------------------------------------------------------


def test_eval_counts_match_manifest_exactly():
    manifest = load_manifest()["files"]
    stats = evaluate_corpus(CORPUS_DIR)
    expected_errors: dict[str, int] = {}
    expected_warnings: dict[str, int] = {}
    expected_successes = 0
    for spec in manifest.values():
        if spec["outcome"] == "success":
            expected_successes += 1
            for kind, count in spec.get("warnings", {}).items():
                expected_warnings[kind] = expected_warnings.get(kind, 0) + count
        else:
            kind = spec["error_kind"]
            expected_errors[kind] = expected_errors.get(kind, 0) + 1
    assert stats.total == len(manifest)
    assert stats.successes == expected_successes
    assert stats.errors_by_kind == expected_errors
    assert stats.warnings_by_kind == expected_warnings


def test_eval_per_file_isolation(tmp_path):
    (tmp_path / "fine.json").write_text(json.dumps({
        "openapi": "3.0.0", "info": {"title": "F", "version": "1"},
        "servers": [{"url": "https://f.example.com"}],
        "paths": {"/x": {"get": {"responses": {"200": {"description": "ok", "content": {
            "application/json": {"schema": {"type": "string"}}}}}}}},
    }))
    (tmp_path / "broken.json").write_text("{{{{")
    stats = evaluate_corpus(tmp_path)
    assert stats.total == 2
    assert stats.successes == 1
    assert stats.errors_by_kind == {"InvalidOas": 1}


def test_eval_invariant_successes_plus_errors_is_total():
    stats = evaluate_corpus(CORPUS_DIR)
    assert stats.successes + sum(stats.errors_by_kind.values()) == stats.total


def test_render_tables_shape():
    stats = evaluate_corpus(CORPUS_DIR, strict_also=True)
    text = render_tables(stats)
    assert "non-strict" in text
    assert "strict" in text
    assert "Skipped-operation ratio" in text
