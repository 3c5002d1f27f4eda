"""Solidity frontend: lexer, parser, AST nodes, and small AST helpers."""

from __future__ import annotations

import re
from typing import Iterator, Optional

from .lexer import strip_comments
from .nodes import (
    ContractDef,
    Expression,
    FunctionRecord,
    LineIndex,
    ModifierDef,
    SourceFile,
    SourceUnit,
    Statement,
    VarDecl,
)
from .parser import enumerate_functions, parse_source, parse_text

__all__ = [
    "ContractDef",
    "Expression",
    "FunctionRecord",
    "LineIndex",
    "ModifierDef",
    "SourceFile",
    "SourceUnit",
    "Statement",
    "VarDecl",
    "parse_source",
    "parse_text",
    "enumerate_functions",
    "strip_comments",
    "iter_calls",
    "call_name",
    "base_identifier",
    "used_names",
    "target_names",
    "identifier_token_re",
]


def iter_calls(expr: Expression) -> Iterator[Expression]:
    for node in expr.walk():
        if node.kind == "call":
            yield node


def call_name(call: Expression) -> str:
    """Simple callee name: last member segment, or the identifier itself."""
    callee = call.callee
    if callee is None:
        return ""
    if callee.kind == "identifier":
        return callee.name
    if callee.kind == "member-access":
        return callee.name
    return ""


def base_identifier(expr: Expression) -> Optional[str]:
    """Root identifier of a member/index chain; None for anything else."""
    node = expr
    while node is not None and node.kind in ("member-access", "index"):
        node = node.callee
    if node is not None and node.kind == "identifier":
        return node.name
    return None


def used_names(expr: Expression) -> list[str]:
    """Names an expression reads: identifiers, chain roots, callee names.

    Call expressions contribute their simple callee name too, so value
    sources like ``totalSupply()`` participate in dataflow.
    """
    names: list[str] = []
    seen = set()

    def add(name: str) -> None:
        if name and name not in seen:
            seen.add(name)
            names.append(name)

    def visit(node: Optional[Expression]) -> None:
        if node is None:
            return
        if node.kind == "identifier":
            add(node.name)
            return
        if node.kind == "call":
            add(call_name(node))
            root = base_identifier(node.callee) if node.callee else None
            if root:
                add(root)
            for a in node.args:
                visit(a)
            return
        if node.kind in ("member-access", "index"):
            root = base_identifier(node)
            if root:
                add(root)
            if node.kind == "index":
                for a in node.args:
                    visit(a)
            return
        if node.callee is not None:
            visit(node.callee)
        for a in node.args:
            visit(a)

    visit(expr)
    return names


def target_names(expr: Expression) -> list[str]:
    """Assignment-target base names: x, a.b -> a, m[k] -> m, tuples flatten."""
    if expr is None:
        return []
    if expr.kind == "tuple":
        out = []
        for a in expr.args:
            if a is not None:
                out.extend(target_names(a))
        return out
    root = base_identifier(expr)
    return [root] if root else []


def identifier_token_re(name: str) -> "re.Pattern[str]":
    return re.compile(r"(?<![A-Za-z0-9_$])" + re.escape(name) + r"(?![A-Za-z0-9_$])")


def contains_identifier(text: str, name: str) -> bool:
    """Case-sensitive identifier-token match; substring for non-identifiers."""
    if re.fullmatch(r"[A-Za-z_$][A-Za-z0-9_$]*", name):
        return identifier_token_re(name).search(text) is not None
    return name in text
