"""Project call graph, attacker reachability, and LLM context assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ContextOverflow
from .frontend import FunctionRecord, call_name, iter_calls

DEFAULT_ACL_MODIFIERS = frozenset({"onlyOwner", "onlyAdmin", "onlyGovernance", "onlyRole"})


def build_function_ids(functions: list) -> dict:
    """Stable, human-readable ids: Contract.name, disambiguated as needed."""
    ids: dict[int, str] = {}
    base_of = {}
    for fn in functions:
        contract = fn.contract or (fn.file.path if fn.file else "<file>")
        base_of[id(fn)] = f"{contract}.{fn.display_name}"

    def group(keyfn):
        groups: dict[str, list] = {}
        for fn in functions:
            groups.setdefault(keyfn(fn), []).append(fn)
        return groups

    current = dict(base_of)
    for keyed in (
        lambda fn: f"{current[id(fn)]}#{fn.arity}",
        lambda fn: f"{fn.file.path if fn.file else '?'}:{current[id(fn)]}",
    ):
        groups = group(lambda fn: current[id(fn)])
        done = True
        for name, members in groups.items():
            if len(members) > 1:
                done = False
                for fn in members:
                    current[id(fn)] = keyed(fn)
        if done:
            break
    # last resort: positional suffix
    groups = group(lambda fn: current[id(fn)])
    for name, members in groups.items():
        if len(members) > 1:
            for i, fn in enumerate(members):
                current[id(fn)] = f"{name}~{i}"
    for fn in functions:
        ids[id(fn)] = current[id(fn)]
    return ids


@dataclass
class CallGraph:
    nodes: list = field(default_factory=list)  # function ids
    edges: list = field(default_factory=list)  # (caller id, callee id, seq)
    unresolved: list = field(default_factory=list)  # (caller id, name, arity)
    functions: dict = field(default_factory=dict)  # id -> FunctionRecord
    _ids: dict = field(default_factory=dict)  # id(record) -> id

    def id_of(self, fn: FunctionRecord) -> str:
        return self._ids[id(fn)]

    def callees_of(self, fid: str) -> list:
        seen = set()
        out = []
        for caller, callee, _seq in self.edges:
            if caller == fid and callee not in seen:
                seen.add(callee)
                out.append(callee)
        return out

    def callers_of(self, fid: str) -> list:
        seen = set()
        out = []
        for caller, callee, _seq in self.edges:
            if callee == fid and caller not in seen:
                seen.add(caller)
                out.append(caller)
        return out

    def to_dot(self) -> str:
        lines = ["digraph callgraph {"]
        for node in self.nodes:
            lines.append(f'  "{node}";')
        for caller, callee in sorted({(c, e) for c, e, _ in self.edges}):
            lines.append(f'  "{caller}" -> "{callee}";')
        lines.append("}")
        return "\n".join(lines)


def _linearized_contracts(fn: FunctionRecord, contracts_by_name: dict) -> list:
    """Own contract, then bases depth-first in reversed declaration order."""
    order = []
    seen = set()

    def visit(name: str):
        if name in seen:
            return
        seen.add(name)
        defs = contracts_by_name.get(name)
        if defs is None:
            return
        if len(defs) > 1:
            return  # ambiguous contract name: do not resolve through it
        order.append(defs[0])
        for base in reversed(defs[0].bases):
            visit(base)

    visit(fn.contract)
    return order


def build_call_graph(functions: list) -> CallGraph:
    """Resolve calls by (name, arity): own contract, bases, then global unique."""
    ids = build_function_ids(functions)
    graph = CallGraph(_ids=ids)
    graph.nodes = [ids[id(fn)] for fn in functions]
    graph.functions = {ids[id(fn)]: fn for fn in functions}

    contracts_by_name: dict[str, list] = {}
    for fn in functions:
        if fn.contract_def is not None:
            bucket = contracts_by_name.setdefault(fn.contract, [])
            if fn.contract_def not in bucket:
                bucket.append(fn.contract_def)

    by_contract: dict[int, dict] = {}  # id(contract) -> {(name, arity): [fn]}
    global_index: dict[tuple, list] = {}
    for fn in functions:
        key = (fn.name, fn.arity)
        if fn.contract_def is not None:
            by_contract.setdefault(id(fn.contract_def), {}).setdefault(key, []).append(fn)
        global_index.setdefault(key, []).append(fn)

    seen_edges = set()
    for fn in functions:
        caller_id = ids[id(fn)]
        chain = _linearized_contracts(fn, contracts_by_name)
        for stmt in fn.statements():
            for expr in stmt.expressions():
                for call in iter_calls(expr):
                    name = call_name(call)
                    if not name:
                        continue
                    arity = len(call.args)
                    target = _resolve(name, arity, chain, by_contract, global_index)
                    if target is None:
                        graph.unresolved.append((caller_id, name, arity))
                        continue
                    edge = (caller_id, ids[id(target)], stmt.seq)
                    if edge not in seen_edges:
                        seen_edges.add(edge)
                        graph.edges.append(edge)
    return graph


def _resolve(name, arity, chain, by_contract, global_index):
    key = (name, arity)
    for contract in chain:
        hits = by_contract.get(id(contract), {}).get(key, [])
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            return None
    hits = global_index.get(key, [])
    if len(hits) == 1:
        return hits[0]
    return None


@dataclass
class ReachabilitySet:
    reachable: set = field(default_factory=set)
    roots: set = field(default_factory=set)
    blocked: dict = field(default_factory=dict)  # id -> blocking modifier


def compute_reachability(graph: CallGraph, functions: list,
                         acl_modifiers=DEFAULT_ACL_MODIFIERS) -> ReachabilitySet:
    """Entry points are public/external functions without an ACL modifier.

    Blocked functions neither join the reachable set nor forward
    reachability to their callees; constructors are never entry points.
    """
    acl = set(acl_modifiers)
    result = ReachabilitySet()
    for fn in functions:
        fid = graph.id_of(fn)
        hit = next((m for m in fn.modifiers if m in acl), None)
        if hit is not None:
            result.blocked[fid] = hit
            continue
        if fn.kind == "constructor":
            continue
        if fn.visibility in ("public", "external"):
            result.roots.add(fid)

    adjacency: dict[str, list] = {}
    for caller, callee, _seq in graph.edges:
        adjacency.setdefault(caller, []).append(callee)

    queue = sorted(result.roots)
    result.reachable = set(result.roots)
    while queue:
        fid = queue.pop(0)
        for nxt in adjacency.get(fid, []):
            if nxt in result.reachable or nxt in result.blocked:
                continue
            result.reachable.add(nxt)
            queue.append(nxt)
    return result


@dataclass
class CodeContext:
    focus: FunctionRecord
    focus_id: str
    callers: list = field(default_factory=list)  # included caller ids
    callees: list = field(default_factory=list)  # included callee ids
    records: list = field(default_factory=list)  # (fid, FunctionRecord), focus first
    text: str = ""
    token_estimate: int = 0


def assemble_context(focus: FunctionRecord, graph: CallGraph, policy,
                     token_budget: int, estimator) -> CodeContext:
    """Focus + direct callees (always) + direct callers (policy permitting).

    Neighbors are appended greedily until the budget would be exceeded;
    the focus function itself is never truncated.
    """
    fid = graph.id_of(focus)
    focus_text = focus.source()
    total = estimator(focus_text)
    if total > token_budget:
        raise ContextOverflow(fid, total, token_budget)

    ctx = CodeContext(focus=focus, focus_id=fid)
    ctx.records.append((fid, focus))
    parts = [focus_text]

    neighbor_ids = [("callee", nid) for nid in graph.callees_of(fid)]
    if getattr(policy, "include_callers", True):
        neighbor_ids += [("caller", nid) for nid in graph.callers_of(fid)]
    if not getattr(policy, "include_callees", True):
        neighbor_ids = [(k, n) for k, n in neighbor_ids if k != "callee"]

    included = {fid}
    for role, nid in neighbor_ids:
        if nid in included:
            continue
        record = graph.functions.get(nid)
        if record is None:
            continue
        text = record.source()
        add = estimator("\n\n" + text)
        if total + add > token_budget:
            break
        total += add
        included.add(nid)
        parts.append(text)
        ctx.records.append((nid, record))
        (ctx.callees if role == "callee" else ctx.callers).append(nid)

    ctx.text = "\n\n".join(parts)
    ctx.token_estimate = total
    return ctx
