"""Shared test scaffolding: scripted answers and transcript authoring.

Transcripts are authored with the same prompt builders the pipeline
uses, so replay-mode scans exercise the real hash-keyed lookup path.
"""

from __future__ import annotations

import json

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


class ScriptedAnswers:
    """Answers keyed by (rule_id, function_id); raw strings pass through."""

    def __init__(self, default_scenario=False, default_property=True):
        self.scenario = {}
        self.property = {}
        self.recognition = {}
        self.default_scenario = default_scenario
        self.default_property = default_property


def make_exchange(purpose, rule_id, fid, user, response) -> LlmExchange:
    system = system_prompt()
    return LlmExchange(
        purpose=purpose,
        rule_id=rule_id,
        function_id=fid,
        system=system,
        user=user,
        response=response,
        tokens_in=estimate_tokens(system) + estimate_tokens(user),
        tokens_out=estimate_tokens(response),
    )


def scenario_json(rule, yes: bool) -> str:
    return json.dumps(
        {str(i): ("Yes" if yes else "No") for i in range(1, len(rule.scenarios) + 1)}
    )


def recognition_json(slot_answers: dict) -> str:
    return json.dumps(
        {slot: {name: desc} for slot, (name, desc) in slot_answers.items()}
    )


def build_transcript(config: ScanConfig, answers: ScriptedAnswers) -> Transcript:
    """Author a transcript covering every candidate the scan will query."""
    prepared = prepare_scan(config)
    transcript = Transcript()
    acl = set(config.acl_modifiers)
    for rule in prepared.rules:
        for fn, policy in candidates_for_rule(prepared.scannable, rule, acl):
            fid = prepared.graph.id_of(fn)
            try:
                ctx = assemble_context(
                    fn, prepared.graph, policy, config.token_budget, estimate_tokens
                )
            except ContextOverflow:
                continue
            key = (rule.id, fid)

            s_answer = answers.scenario.get(key, answers.default_scenario)
            s_resp = s_answer if isinstance(s_answer, str) else scenario_json(rule, s_answer)
            transcript.append(make_exchange(
                "scenario", rule.id, fid,
                build_scenario_prompt(rule.scenarios, ctx.text), s_resp,
            ))
            if not isinstance(s_answer, str) and not s_answer:
                continue

            p_answer = answers.property.get(key, answers.default_property)
            p_resp = p_answer if isinstance(p_answer, str) else ("Yes" if p_answer else "No")
            transcript.append(make_exchange(
                "property", rule.id, fid,
                build_property_prompt(rule, ctx.text, 0), p_resp,
            ))
            if not isinstance(p_answer, str) and not p_answer:
                continue

            if rule.recognition.questions:
                r_answer = answers.recognition.get(key, {})
                r_resp = r_answer if isinstance(r_answer, str) else recognition_json(r_answer)
                transcript.append(make_exchange(
                    "recognition", rule.id, fid,
                    build_recognition_prompt(rule.recognition, ctx.text), r_resp,
                ))
    return transcript


class FakeResponse:
    def __init__(self, content: str):
        self.status_code = 200
        self.text = content
        self._content = content

    def json(self):
        return {"choices": [{"message": {"content": self._content}}], "usage": {}}


def fake_post_from(transcript: Transcript):
    """An HTTP stand-in answering by prompt hash, for record-mode tests."""
    from solscout.gateway import prompt_sha256

    by_digest = {
        ex.prompt_sha256: ex.response for ex in transcript.entries.values()
    }

    def _post(url, json=None, headers=None, timeout=None):
        system = json["messages"][0]["content"]
        user = json["messages"][1]["content"]
        digest = prompt_sha256(system, user)
        if digest not in by_digest:
            raise AssertionError(f"fake provider has no answer for this prompt: {user[:80]!r}")
        return FakeResponse(by_digest[digest])

    return _post


def replay_config(project_root: str, transcript_path: str, **kw) -> ScanConfig:
    config = ScanConfig(
        project_root=project_root,
        mode="replay",
        transcript_path=transcript_path,
        **kw,
    )
    return config


def write_transcript(config: ScanConfig, answers: ScriptedAnswers, path: str) -> Transcript:
    transcript = build_transcript(config, answers)
    transcript.save(path)
    return transcript
