"""End-to-end scan orchestration.

discover -> parse -> whitelist filter -> call graph -> reachability ->
per-rule filtering -> scenario matching -> property matching ->
recognition -> validation -> static confirmation -> report.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .callgraph import assemble_context, build_call_graph, compute_reachability
from .config import ScanConfig
from .confirm import confirm_candidate
from .errors import ContextOverflow, SoliditySyntaxError, UnparseableAnswer
from .filters import candidates_for_rule
from .frontend import enumerate_functions, parse_source
from .gateway import (
    LlmGateway,
    RecognitionAbort,
    Transcript,
    build_property_prompt,
    build_recognition_prompt,
    build_scenario_prompt,
    estimate_tokens,
    parse_recognition_answer,
    parse_scenario_answer,
    parse_yes_no,
    validate_recognition,
)
from .project import discover_sources, filter_openzeppelin, load_signature_set
from .report import Finding, count_kloc, emit_report, summarize_cost
from .rules import load_rules


@dataclass
class PreparedScan:
    """Everything the scan knows before the first LLM query."""

    config: ScanConfig
    layout: object
    parse_failures: list
    functions: list
    survivors: list
    graph: object
    reach: object
    rules: list
    scannable: list
    prep_seconds: float = 0.0


def prepare_scan(config: ScanConfig) -> PreparedScan:
    started = time.perf_counter()
    layout = discover_sources(config.project_root, set(config.excluded_segments))

    units = []
    parse_failures = []
    for src in layout.included:
        try:
            units.append(parse_source(src))
        except SoliditySyntaxError as exc:
            parse_failures.append((src.path, str(exc)))

    functions = [fn for unit in units for fn in enumerate_functions(unit)]
    contracts_by_name = {}
    for unit in units:
        for contract in unit.contracts:
            contracts_by_name.setdefault(contract.name, contract)

    whitelist = load_signature_set(config.whitelist_path)
    survivors = filter_openzeppelin(functions, whitelist, contracts_by_name)
    graph = build_call_graph(survivors)
    reach = compute_reachability(graph, survivors, set(config.acl_modifiers))
    rules = load_rules(config.rules_dir)
    scannable = [
        fn for fn in survivors
        if fn.body is not None and graph.id_of(fn) in reach.reachable
    ]
    return PreparedScan(
        config=config,
        layout=layout,
        parse_failures=parse_failures,
        functions=functions,
        survivors=survivors,
        graph=graph,
        reach=reach,
        rules=rules,
        scannable=scannable,
        prep_seconds=time.perf_counter() - started,
    )


@dataclass
class ScanResult:
    findings: list = field(default_factory=list)
    ledger: object = None
    meta: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    transcript: Transcript = None
    exchanges: list = field(default_factory=list)
    static_seconds: float = 0.0

    @property
    def confirmed(self) -> list:
        return [f for f in self.findings if f.verdict == "confirmed"]

    def report(self, fmt: str) -> str:
        return emit_report(self.findings, self.ledger, fmt, self.meta)


def _key_string(exchange) -> str:
    return "|".join(exchange.key)


def scan(config: ScanConfig, gateway: LlmGateway | None = None) -> ScanResult:
    """Run a full scan. A pre-built gateway may be injected for testing."""
    started = time.perf_counter()
    prepared = prepare_scan(config)
    graph, reach = prepared.graph, prepared.reach
    acl = set(config.acl_modifiers)

    if gateway is None:
        transcript = (
            Transcript.load(config.transcript_path)
            if config.mode == "replay"
            else Transcript()
        )
        gateway = LlmGateway(
            config.provider,
            mode=config.mode,
            transcript=transcript,
            record_path=config.transcript_path if config.mode == "record" else None,
        )

    stats = {
        "files_included": len(prepared.layout.included),
        "files_excluded": len(prepared.layout.excluded),
        "parse_failures": len(prepared.parse_failures),
        "functions_total": len(prepared.functions),
        "functions_after_whitelist": len(prepared.survivors),
        "functions_reachable": len(prepared.scannable),
        "candidates_filtered": 0,
        "scenario_matched": 0,
        "property_matched": 0,
        "recognized": 0,
        "confirmed": 0,
        "rejected": 0,
        "skipped": 0,
    }
    static_seconds = prepared.prep_seconds

    findings: list[Finding] = []
    workers = max(1, config.provider.max_in_flight) if gateway.mode != "replay" else 1
    for rule in prepared.rules:
        candidates = candidates_for_rule(prepared.scannable, rule, acl)
        stats["candidates_filtered"] += len(candidates)

        def process(candidate, rule=rule):
            fn, policy = candidate
            return _process_candidate(fn, rule, policy, config, graph, reach, gateway)

        if workers > 1 and len(candidates) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(process, candidates))
        else:
            outcomes = [process(c) for c in candidates]

        for finding, spent_static, stages in outcomes:
            static_seconds += spent_static
            for stage in stages:
                stats[stage] += 1
            if finding is not None:
                findings.append(finding)
                stats[finding.verdict] += 1

    stats["recognized"] = sum(1 for f in findings if f.recognized)

    kloc = count_kloc(prepared.layout.included)
    wall = time.perf_counter() - started
    if config.mode == "replay":
        # replay is deterministic: report time is the recorded latency sum
        wall = round(sum(e.latency for e in gateway.exchanges), 6)
    ledger = summarize_cost(
        gateway.exchanges, wall, kloc,
        config.provider.price_in_per_1k, config.provider.price_out_per_1k,
    )

    meta = {
        "tool": "solscout",
        "version": 1,
        "project_root": config.project_root,
        "project": config.project_name,
        "mode": config.mode,
        "config_fingerprint": config.fingerprint(),
        "rules": [r.id for r in prepared.rules],
        "context_depth": "direct-neighbors",
        "loc_counting": "non-blank, non-comment lines of included files",
        "files": {
            "included": [src.path for src in prepared.layout.included],
            "excluded": [[path, reason] for path, reason in prepared.layout.excluded],
        },
        "parse_failures": [[path, msg] for path, msg in prepared.parse_failures],
        "stats": stats,
    }
    result = ScanResult(
        findings=findings,
        ledger=ledger,
        meta=meta,
        stats=stats,
        transcript=gateway.transcript,
        exchanges=list(gateway.exchanges),
        static_seconds=static_seconds,
    )
    gateway.close()
    return result


def _finding_shell(fn, rule, graph, config, verdict, reason="", **kw) -> Finding:
    return Finding(
        rule_id=rule.id,
        project=config.project_name,
        file=fn.file.path if fn.file else "",
        function_id=graph.id_of(fn),
        contract=fn.contract,
        function=fn.display_name,
        span=fn.span,
        verdict=verdict,
        reason=reason,
        excerpt=fn.source(),
        **kw,
    )


def _process_candidate(fn, rule, policy, config, graph, reach, gateway):
    """Returns (finding or None, static seconds spent, stage names hit)."""
    fid = graph.id_of(fn)
    stages = []
    static_spent = 0.0
    t0 = time.perf_counter()
    try:
        context = assemble_context(fn, graph, policy, config.token_budget, estimate_tokens)
    except ContextOverflow as exc:
        static_spent += time.perf_counter() - t0
        return (
            _finding_shell(fn, rule, graph, config, "skipped",
                           reason=f"too large: {exc.estimate} tokens > {exc.budget}"),
            static_spent,
            stages,
        )
    static_spent += time.perf_counter() - t0

    keys = []
    # scenario matching: all of a rule's scenarios in one prompt
    prompt = build_scenario_prompt(rule.scenarios, context.text)
    try:
        answers, exchange = gateway.ask(
            "scenario", rule.id, fid, prompt,
            lambda text: parse_scenario_answer(text, len(rule.scenarios)),
        )
    except UnparseableAnswer:
        return (
            _finding_shell(fn, rule, graph, config, "skipped", reason="llm-format"),
            static_spent,
            stages,
        )
    keys.append(_key_string(exchange))
    matched = [i for i, yes in sorted(answers.items()) if yes]
    if not matched:
        return None, static_spent, stages
    stages.append("scenario_matched")

    # property matching double-confirms scenario + property together
    prompt = build_property_prompt(rule, context.text, matched[0] - 1)
    try:
        is_match, exchange = gateway.ask("property", rule.id, fid, prompt, parse_yes_no)
    except UnparseableAnswer:
        return (
            _finding_shell(fn, rule, graph, config, "skipped", reason="llm-format",
                           transcript_keys=keys),
            static_spent,
            stages,
        )
    keys.append(_key_string(exchange))
    if not is_match:
        return None, static_spent, stages
    stages.append("property_matched")

    recognized = {}
    if rule.recognition.questions:
        prompt = build_recognition_prompt(rule.recognition, context.text)
        slots = rule.recognition.slots
        try:
            answer, exchange = gateway.ask(
                "recognition", rule.id, fid, prompt,
                lambda text: parse_recognition_answer(text, slots),
            )
        except UnparseableAnswer:
            return (
                _finding_shell(fn, rule, graph, config, "skipped", reason="llm-format",
                               transcript_keys=keys),
                static_spent,
                stages,
            )
        keys.append(_key_string(exchange))
        t1 = time.perf_counter()
        validated = validate_recognition(answer, context, slots)
        if isinstance(validated, RecognitionAbort):
            static_spent += time.perf_counter() - t1
            return (
                _finding_shell(
                    fn, rule, graph, config, "rejected",
                    reason=f"recognition abort: {validated.slot}: {validated.reason}",
                    transcript_keys=keys,
                ),
                static_spent,
                stages,
            )
        recognized = {
            slot: {"name": name, "description": desc}
            for slot, (name, desc) in validated.items()
        }
        static_spent += time.perf_counter() - t1

    finding = _finding_shell(
        fn, rule, graph, config, "rejected",
        recognized=recognized, transcript_keys=keys,
    )
    t2 = time.perf_counter()
    confirm_candidate(finding, rule, context, reach)
    static_spent += time.perf_counter() - t2
    return finding, static_spent, stages
