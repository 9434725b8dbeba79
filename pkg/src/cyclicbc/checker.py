"""Global conditions on proof graphs: progress, safety, left-leaning, rule
freeness, classification, and factoring rule-free parts into oracle leaves.

On a finite presentation a branch crosses a node infinitely often iff the
node lies on a directed cycle, so safety and left-leaning are questions
about strongly connected components.  Progress is decided by size-change
closure over the trace relations of the edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .kernel import N, NUB_RULESET, SMALLER, Node, OracleDef, ProofGraph, RuleTag, ancestry_edges, validate_graph

CB = "CB"
NUB = "nuB-presentation"
BDER = "B-derivation"
REJECTED = "rejected"

DEFAULT_CLOSURE_BUDGET = 10**6


class ClosureOverflow(RuntimeError):
    """Trace closure grew past its budget.  Not a verdict."""


class NotProgressing(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: tuple[str, ...] | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class TraceRelation:
    """Box-position threads from ``source`` to ``target``: (p, strict, q)."""

    source: str
    target: str
    triples: frozenset[tuple[int, bool, int]]

    def compose(self, other: "TraceRelation") -> "TraceRelation":
        return TraceRelation(self.source, other.target, _compose(self.triples, other.triples))


def _normalise(triples) -> frozenset:
    best: dict[tuple[int, int], bool] = {}
    for p, s, q in triples:
        best[(p, q)] = best.get((p, q), False) or s
    return frozenset((p, s, q) for (p, q), s in best.items())


def _compose(a, b) -> frozenset:
    out = []
    for p, s1, q in a:
        for q2, s2, r in b:
            if q == q2:
                out.append((p, s1 or s2, r))
    return _normalise(out)


def _digraph(g: ProofGraph) -> nx.DiGraph:
    dg = nx.DiGraph()
    dg.add_nodes_from(nd.id for nd in g.nodes)
    dg.add_edges_from((s, d) for s, _, d in g.edges())
    return dg


def _components(g: ProofGraph) -> dict[str, int]:
    """Node -> SCC index, only for nodes on some cycle."""
    dg = _digraph(g)
    comp: dict[str, int] = {}
    for i, scc in enumerate(nx.strongly_connected_components(dg)):
        if len(scc) > 1 or any(dg.has_edge(v, v) for v in scc):
            for v in scc:
                comp[v] = i
    return comp


def _cycle_through(g: ProofGraph, src: str, dst: str) -> tuple[str, ...]:
    """A cycle src -> dst -> ... -> src."""
    dg = _digraph(g)
    back = nx.shortest_path(dg, dst, src)
    return (src, *back)


def edge_relation(g: ProofGraph, src: str, k: int) -> TraceRelation:
    e = ancestry_edges(g, src)[k]
    triples = [
        (p[1], flag == SMALLER, q[1])
        for p, q, flag in e.mapping
        if p[0] == "box" and q[0] == "box"
    ]
    return TraceRelation(src, e.premise, _normalise(triples))


def check_safe(g: ProofGraph) -> CheckResult:
    comp = _components(g)
    for nd in g.nodes:
        if nd.rule.kind == "cut_box" and nd.id in comp:
            for p in nd.premises:
                if comp.get(p) == comp[nd.id]:
                    return CheckResult(False, _cycle_through(g, nd.id, p), f"cut_box {nd.id} lies on a cycle")
    return CheckResult(True)


def check_left_leaning(g: ProofGraph) -> CheckResult:
    comp = _components(g)
    for nd in g.nodes:
        if nd.rule.kind == "cut_n" and nd.id in comp:
            right = nd.premises[1]
            if comp.get(right) == comp[nd.id]:
                return CheckResult(
                    False, _cycle_through(g, nd.id, right), f"a cycle enters the right premise of cut_n {nd.id}"
                )
    return CheckResult(True)


def trace_closure(g: ProofGraph, budget: int = DEFAULT_CLOSURE_BUDGET):
    """All composites of edge relations along paths inside one SCC, each
    with a witness path.  Returns {(src, dst, triples): path}."""
    comp = _components(g)
    out_edges: dict[str, list[TraceRelation]] = {}
    closure: dict[tuple, tuple[str, ...]] = {}
    by_src: dict[str, list[tuple]] = {}
    todo = []
    for s, k, d in g.edges():
        if s in comp and comp.get(d) == comp[s]:
            rel = edge_relation(g, s, k)
            out_edges.setdefault(s, []).append(rel)
            key = (s, d, rel.triples)
            if key not in closure:
                closure[key] = (s, d)
                todo.append(key)
    # extend every element by single edges; this reaches every composite
    while todo:
        key = todo.pop()
        src, dst, triples = key
        for rel in out_edges.get(dst, ()):
            nk = (src, rel.target, _compose(triples, rel.triples))
            if nk not in closure:
                closure[nk] = closure[key] + (rel.target,)
                if len(closure) > budget:
                    raise ClosureOverflow(f"trace closure exceeded {budget} elements")
                todo.append(nk)
    return closure


def check_progressing(g: ProofGraph, budget: int = DEFAULT_CLOSURE_BUDGET) -> CheckResult:
    closure = trace_closure(g, budget)
    for (src, dst, triples), path in sorted(closure.items(), key=lambda kv: (len(kv[1]), kv[1])):
        if src != dst or _compose(triples, triples) != triples:
            continue
        if not any(p == q and s for p, s, q in triples):
            return CheckResult(False, path, f"loop at {src} has no progressing thread")
    return CheckResult(True)


def rule_free(g: ProofGraph, nid: str, ruleset=NUB_RULESET) -> bool:
    ruleset = set(ruleset)
    return not any(g[v].rule.kind in ruleset for v in g.reachable(nid))


def _closed_subtree(g: ProofGraph, nid: str) -> bool:
    kept = set(g.tree_nodes(nid))
    return all(p in kept for v in kept for p in g[v].premises)


def minimal_free_nodes(g: ProofGraph, ruleset=NUB_RULESET) -> set[str]:
    """Topmost reachable nodes whose whole coderivation avoids ``ruleset``.
    Only nodes with succedent N whose subtree keeps its back-references
    inside are candidates, since those are the ones an oracle leaf can
    replace."""
    ruleset = set(ruleset)
    free_memo: dict[str, bool] = {}

    def candidate(v: str) -> bool:
        if v not in free_memo:
            free_memo[v] = (
                g[v].sequent.succedent == N and rule_free(g, v, ruleset) and _closed_subtree(g, v)
            )
        return free_memo[v]

    out: set[str] = set()
    todo = [g.root]
    while todo:
        v = todo.pop()
        if candidate(v):
            out.add(v)
            continue
        todo.extend(p for p in g[v].premises if not g.is_back_edge(v, p))
    return out


def factor(g: ProofGraph, ruleset=NUB_RULESET) -> tuple[ProofGraph, list[OracleDef]]:
    """Replace every minimal rule-free subtree by an oracle leaf backed by
    the excised subgraph."""
    prog = check_progressing(g)
    if not prog:
        raise NotProgressing(f"{g.name}: {prog.detail}")
    cut = minimal_free_nodes(g, ruleset)
    drop: set[str] = set()
    new_defs: list[OracleDef] = []
    replace: dict[str, Node] = {}
    taken = {o.name for o in g.oracles}
    for v in sorted(cut, key=g.order.__getitem__):
        sub = g.subgraph(v, name=f"{g.name}_{v}")
        name = f"r_{v}"
        while name in taken:
            name += "_"
        taken.add(name)
        seqt = g[v].sequent
        new_defs.append(OracleDef(name, seqt.normals, seqt.safes, "length-relation", f"subgraph:{v}", sub))
        drop.update(set(g.tree_nodes(v)) - {v})
        replace[v] = Node(v, seqt, RuleTag("oracle", name))
    nodes = tuple(replace.get(nd.id, nd) for nd in g.nodes if nd.id not in drop)
    used = {nd.rule.arg for nd in nodes if nd.rule.kind == "oracle"}
    oracles = tuple(o for o in g.oracles if o.name in used) + tuple(new_defs)
    return ProofGraph(g.name, nodes, oracles), new_defs


@dataclass(frozen=True)
class Verdict:
    progressing: CheckResult
    safe: CheckResult
    left_leaning: CheckResult
    classification: str
    reasons: tuple[str, ...] = ()
    cb_relative: bool = False
    diagnostics: tuple = field(default=(), compare=False)

    @property
    def accepted(self) -> bool:
        return self.classification in (CB, NUB, BDER)

    def report(self) -> str:
        lines = [f"classification: {self.classification}"]
        for label, res in (("progressing", self.progressing), ("safe", self.safe), ("left-leaning", self.left_leaning)):
            line = f"{label}: {'yes' if res.ok else 'no'}"
            if res.witness:
                line += "  witness: " + " -> ".join(res.witness)
            lines.append(line)
        if self.cb_relative and self.classification != CB:
            lines.append("CB relative to its oracle leaves: yes")
        for r in self.reasons:
            lines.append(f"reason: {r}")
        for d in self.diagnostics:
            lines.append(f"diagnostic: {d}")
        return "\n".join(lines)


def classify(g: ProofGraph, budget: int = DEFAULT_CLOSURE_BUDGET) -> Verdict:
    diags = tuple(validate_graph(g))
    if diags:
        bad = CheckResult(False, None, "invalid graph")
        return Verdict(bad, bad, bad, REJECTED, tuple(f"invalid: {d}" for d in diags), False, diags)
    prog, safe, left = check_progressing(g, budget), check_safe(g), check_left_leaning(g)
    reach = g.reachable(g.root)
    kinds = {g[v].rule.kind for v in reach}
    cyclic = bool(g.back_edges())
    reasons: list[str] = []
    if "srec" in kinds:
        if not cyclic:
            return Verdict(prog, safe, left, BDER, (), False)
        reasons.append("srec inside a cyclic graph")
    if not prog:
        reasons.append("not progressing: " + " -> ".join(prog.witness or ()))
    if not safe:
        reasons.append("not safe: " + " -> ".join(safe.witness or ()))
    if not left:
        reasons.append("not left-leaning: " + " -> ".join(left.witness or ()))
    relative = not reasons
    if reasons:
        return Verdict(prog, safe, left, REJECTED, tuple(reasons), False)
    leaves = [g[v] for v in reach if g[v].rule.kind == "oracle"]
    if not leaves:
        return Verdict(prog, safe, left, CB, (), True)
    table = g.oracle_table
    odd = sorted({nd.rule.arg for nd in leaves if table[nd.rule.arg].kind != "length-relation"})
    if odd:
        return Verdict(prog, safe, left, REJECTED, tuple(f"oracle {o} is not a length relation" for o in odd), relative)
    return Verdict(prog, safe, left, NUB, (), relative)
