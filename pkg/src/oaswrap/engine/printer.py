"""Canonical query document printer; print(parse(print(x))) is a fixed point."""

from __future__ import annotations

import json

from .ast import (
    FieldNode,
    FragmentSpreadNode,
    InlineFragmentNode,
    OperationNode,
    QueryDocument,
    ValueNode,
)

INDENT = "  "


def print_query(doc: QueryDocument) -> str:
    blocks = [_operation(op) for op in doc.operations]
    blocks += [_fragment(f) for f in doc.fragments.values()]
    return "\n\n".join(blocks) + "\n"


def _operation(op: OperationNode) -> str:
    head = ""
    if op.kind != "query" or op.name or op.variable_definitions:
        head = op.kind
        if op.name:
            head += f" {op.name}"
        if op.variable_definitions:
            defs = ", ".join(
                f"${d.name}: {d.type}" + (f" = {_value(d.default)}" if d.default else "")
                for d in op.variable_definitions
            )
            head += f"({defs})"
        head += " "
    return head + _selection_set(op.selection_set, 0)


def _fragment(fragment) -> str:
    return (f"fragment {fragment.name} on {fragment.type_condition} "
            + _selection_set(fragment.selection_set, 0))


def _selection_set(selections: list, depth: int) -> str:
    inner = "\n".join(_selection(s, depth + 1) for s in selections)
    pad = INDENT * depth
    return "{\n" + inner + "\n" + pad + "}"


def _selection(node, depth: int) -> str:
    pad = INDENT * depth
    if isinstance(node, FieldNode):
        text = pad
        if node.alias:
            text += f"{node.alias}: "
        text += node.name
        if node.arguments:
            args = ", ".join(f"{k}: {_value(v)}" for k, v in node.arguments.items())
            text += f"({args})"
        if node.selection_set is not None:
            text += " " + _selection_set(node.selection_set, depth)
        return text
    if isinstance(node, FragmentSpreadNode):
        return f"{pad}...{node.name}"
    if isinstance(node, InlineFragmentNode):
        condition = f" on {node.type_condition}" if node.type_condition else ""
        return f"{pad}...{condition} " + _selection_set(node.selection_set, depth)
    raise TypeError(f"unknown selection node {node!r}")


def _value(node: ValueNode) -> str:
    if node.kind == "variable":
        return f"${node.value}"
    if node.kind == "int":
        return str(node.value)
    if node.kind == "float":
        return repr(node.value)
    if node.kind == "string":
        return json.dumps(node.value)
    if node.kind == "boolean":
        return "true" if node.value else "false"
    if node.kind == "null":
        return "null"
    if node.kind == "enum":
        return node.value
    if node.kind == "list":
        return "[" + ", ".join(_value(v) for v in node.values) + "]"
    if node.kind == "object":
        inner = ", ".join(f"{k}: {_value(v)}" for k, v in node.fields.items())
        return "{" + inner + "}"
    raise TypeError(f"unknown value node {node.kind!r}")
