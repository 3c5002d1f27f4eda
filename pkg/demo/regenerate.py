#!/usr/bin/env python3
"""Rebuild demo/transcript.jsonl from scripted answers.

The transcript is keyed by prompt hash, so it must be regenerated
whenever prompt construction changes. Run from the repository root:

    python demo/regenerate.py
"""

import json
import os

from solscout.callgraph import assemble_context
from solscout.config import ScanConfig
from solscout.errors import ContextOverflow
from solscout.filters import candidates_for_rule
from solscout.gateway import (
    LlmExchange,
    Transcript,
    build_property_prompt,
    build_recognition_prompt,
    build_scenario_prompt,
    estimate_tokens,
    system_prompt,
)
from solscout.pipeline import prepare_scan

HERE = os.path.dirname(os.path.abspath(__file__))

# the one candidate a reviewer should see confirmed, with its recognition
TARGET = ("risky-first-deposit", "YaxisVault.deposit")
RECOGNITION = {
    "VariableA": ("_shares", "the total minted share"),
    "VariableB": ("totalSupply", "total supply checked against zero"),
    "VariableC": ("_amount", "the deposit amount"),
}


def exchange(purpose, rule_id, fid, user, response):
    system = system_prompt()
    return LlmExchange(
        purpose=purpose, rule_id=rule_id, function_id=fid,
        system=system, user=user, response=response,
        tokens_in=estimate_tokens(system) + estimate_tokens(user),
        tokens_out=estimate_tokens(response),
    )


def main():
    config = ScanConfig(project_root=os.path.join(HERE, "project"), mode="replay",
                        transcript_path="unused", project_name="demo")
    prepared = prepare_scan(config)
    transcript = Transcript()
    for rule in prepared.rules:
        for fn, policy in candidates_for_rule(prepared.scannable, rule,
                                              set(config.acl_modifiers)):
            fid = prepared.graph.id_of(fn)
            try:
                ctx = assemble_context(fn, prepared.graph, policy,
                                       config.token_budget, estimate_tokens)
            except ContextOverflow:
                continue
            is_target = (rule.id, fid) == TARGET
            verdict = "Yes" if is_target else "No"
            scenario = json.dumps(
                {str(i): verdict for i in range(1, len(rule.scenarios) + 1)}
            )
            transcript.append(exchange(
                "scenario", rule.id, fid,
                build_scenario_prompt(rule.scenarios, ctx.text), scenario,
            ))
            if not is_target:
                continue
            transcript.append(exchange(
                "property", rule.id, fid,
                build_property_prompt(rule, ctx.text, 0), "Yes",
            ))
            answer = json.dumps({s: {n: d} for s, (n, d) in RECOGNITION.items()})
            transcript.append(exchange(
                "recognition", rule.id, fid,
                build_recognition_prompt(rule.recognition, ctx.text), answer,
            ))
    out = os.path.join(HERE, "transcript.jsonl")
    transcript.save(out)
    print(f"wrote {len(transcript)} exchanges to {out}")


if __name__ == "__main__":
    main()
