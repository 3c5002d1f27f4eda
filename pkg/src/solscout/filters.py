"""Pre-LLM function filtering: nine textual/structural directive kinds.

All text matching is case-insensitive plain substring over the
comment-stripped function body (FCE family) or the function name (FNK);
fragment payloads like "total"/"supply" are meant to catch identifiers
such as ``totalSupply``, so no word boundaries are applied.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .callgraph import DEFAULT_ACL_MODIFIERS
from .frontend import FunctionRecord
from .rules import VulnRule


@dataclass
class FilterOutcome:
    function_id: str
    rule_id: str
    passed: bool
    failed_directive: tuple | None = None  # (kind, payload) of first failure


def _body(fn: FunctionRecord) -> str:
    return fn.body_text().lower()


def _canonical_param_types(fn: FunctionRecord) -> set:
    return {re.sub(r"\s+", "", t).lower() for t, _ in fn.params}


def directive_passes(fn: FunctionRecord, kind: str, payload, acl_modifiers) -> bool:
    if kind == "FNK":
        name = fn.name.lower()
        return any(k.lower() in name for k in payload)
    if kind == "FCE":
        body = _body(fn)
        return any(e.lower() in body for e in payload)
    if kind == "FCNE":
        body = _body(fn)
        return not any(e.lower() in body for e in payload)
    if kind == "FCCE":
        body = _body(fn)
        return any(all(m.lower() in body for m in combo) for combo in payload)
    if kind == "FCNCE":
        body = _body(fn)
        return not any(all(m.lower() in body for m in combo) for combo in payload)
    if kind == "FPT":
        have = _canonical_param_types(fn)
        return all(t.lower().replace(" ", "") in have for t in payload)
    if kind == "FPNC":
        return fn.visibility == "public"
    if kind == "FNM":
        return not any(m in acl_modifiers for m in fn.modifiers)
    if kind == "CFN":
        return True  # context-policy side effect only
    raise ValueError(f"unknown filter kind {kind!r}")


def apply_filters(fn: FunctionRecord, rule: VulnRule,
                  acl_modifiers=DEFAULT_ACL_MODIFIERS,
                  function_id: str = "") -> FilterOutcome:
    """Evaluate the rule's directives in order with AND semantics."""
    for directive in rule.filters:
        if not directive_passes(fn, directive.kind, directive.payload, acl_modifiers):
            return FilterOutcome(
                function_id=function_id,
                rule_id=rule.id,
                passed=False,
                failed_directive=(directive.kind, directive.payload),
            )
    return FilterOutcome(function_id=function_id, rule_id=rule.id, passed=True)


def candidates_for_rule(functions: list, rule: VulnRule,
                        acl_modifiers=DEFAULT_ACL_MODIFIERS) -> list:
    """Functions passing every directive, in input order, with the rule's policy."""
    out = []
    for fn in functions:
        if apply_filters(fn, rule, acl_modifiers).passed:
            out.append((fn, rule.context_policy))
    return out
