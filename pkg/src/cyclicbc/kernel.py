"""Sequents, rule tags and finite proof graphs with back-references.

A proof graph is a finite tree of rule nodes in declaration order.  An edge
to a node declared no later than its source is a back-reference (a bud); its
target must be a ``dis`` node below the bud.  Everything else is a tree edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

N = "N"
BOX = "BoxN"

EQUAL = "equal"
SMALLER = "strictly-smaller"

RULE_ARITY = {
    "id": 0,
    "zero": 0,
    "one": 0,
    "oracle": 0,
    "s0": 1,
    "s1": 1,
    "w_n": 1,
    "w_box": 1,
    "e_n": 1,
    "e_box": 1,
    "box_l": 1,
    "box_r": 1,
    "dis": 1,
    "cut_n": 2,
    "cut_box": 2,
    "pcond_n": 2,
    "pcond_box": 2,
    "srec": 3,
    "cond_n": 3,
    "cond_box": 3,
}

INDEXED_RULES = ("e_n", "e_box")

# ruleset whose absence characterises the advice part of a nuB presentation
NUB_RULESET = frozenset({"cond_box", "cond_n", "s0", "s1", "id"})


class IncompatibleSequent(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Sequent:
    normals: int
    safes: int
    succedent: str = N

    def __post_init__(self):
        if self.normals < 0 or self.safes < 0:
            raise ValueError(f"negative zone count in {self}")
        if self.succedent not in (N, BOX):
            raise ValueError(f"unknown succedent {self.succedent!r}")

    def __str__(self) -> str:
        succ = "boxN" if self.succedent == BOX else "N"
        return f"seq {self.normals} {self.safes} {succ}"

    def pretty(self) -> str:
        ante = ["□N"] * self.normals + ["N"] * self.safes
        succ = "□N" if self.succedent == BOX else "N"
        return f"{', '.join(ante)} ⇒ {succ}".strip()


def seq(m: int, n: int, succedent: str = N) -> Sequent:
    return Sequent(m, n, succedent)


@dataclass(frozen=True)
class RuleTag:
    """A rule name plus its parameter: the swap index of e_n/e_box, or the
    oracle name of an oracle leaf."""

    kind: str
    arg: int | str | None = None

    def __post_init__(self):
        if self.kind not in RULE_ARITY:
            raise ValueError(f"unknown rule {self.kind!r}")
        if self.kind in INDEXED_RULES and not isinstance(self.arg, int):
            raise ValueError(f"{self.kind} needs an integer swap index")
        if self.kind == "oracle" and not isinstance(self.arg, str):
            raise ValueError("oracle leaf needs a name")
        if self.kind not in INDEXED_RULES and self.kind != "oracle" and self.arg is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @property
    def arity(self) -> int:
        return RULE_ARITY[self.kind]

    def __str__(self) -> str:
        return self.kind if self.arg is None else f"{self.kind} {self.arg}"


def tag(kind: str, arg: int | str | None = None) -> RuleTag:
    return RuleTag(kind, arg)


def rule_signature(rule: RuleTag, conclusion: Sequent) -> list[Sequent]:
    """Premise sequents of ``rule`` applied with the given conclusion."""
    m, n, a = conclusion.normals, conclusion.safes, conclusion.succedent
    k = rule.kind

    def need(cond: bool, why: str) -> None:
        if not cond:
            raise IncompatibleSequent(f"{rule} cannot conclude {conclusion}: {why}")

    if k == "id":
        need((m, n, a) == (0, 1, N), "id concludes N ⇒ N")
        return []
    if k in ("zero", "one"):
        need((m, n, a) == (0, 0, N), "constants conclude ⇒ N")
        return []
    if k == "oracle":
        need(a == N, "oracle leaves conclude N")
        return []
    if k in ("s0", "s1", "dis"):
        return [conclusion]
    if k == "cut_n":
        return [Sequent(m, n, N), Sequent(m, n + 1, a)]
    if k == "cut_box":
        return [Sequent(m, n, BOX), Sequent(m + 1, n, a)]
    if k == "w_n":
        need(n >= 1, "no safe position to weaken")
        return [Sequent(m, n - 1, a)]
    if k == "w_box":
        need(m >= 1, "no normal position to weaken")
        return [Sequent(m - 1, n, a)]
    if k == "e_n":
        need(0 <= rule.arg < n - 1, "swap index outside the safe zone")
        return [conclusion]
    if k == "e_box":
        need(0 <= rule.arg < m - 1, "swap index outside the normal zone")
        return [conclusion]
    if k == "box_l":
        need(m >= 1, "no normal position to unbox")
        return [Sequent(m - 1, n + 1, a)]
    if k == "box_r":
        need(a == BOX, "box_r concludes □N")
        need(n == 0, "box_r context must be all-modal")
        return [Sequent(m, 0, N)]
    if k == "srec":
        need(m >= 1 and a == N, "srec needs a normal recursion argument and succedent N")
        return [Sequent(m - 1, n, N), Sequent(m, n + 1, N), Sequent(m, n + 1, N)]
    if k in ("cond_n", "pcond_n"):
        need(n >= 1 and a == N, "cond_n needs a safe argument and succedent N")
        prem = [Sequent(m, n - 1, N), Sequent(m, n, N), Sequent(m, n, N)]
        return prem if k == "cond_n" else prem[:2]
    if k in ("cond_box", "pcond_box"):
        need(m >= 1 and a == N, "cond_box needs a normal argument and succedent N")
        prem = [Sequent(m - 1, n, N), Sequent(m, n, N), Sequent(m, n, N)]
        return prem if k == "cond_box" else prem[:2]
    raise AssertionError(k)


@dataclass(frozen=True)
class OracleDef:
    """Declared oracle leaf.  ``kind`` is one of length-relation, host,
    subgraph; ``source`` is a path, ``builtin:<name>`` or a free-form label."""

    name: str
    normals: int
    safes: int
    kind: str = "length-relation"
    source: str = ""
    subgraph: "ProofGraph | None" = field(default=None, compare=False, repr=False)

    @property
    def sequent(self) -> Sequent:
        return Sequent(self.normals, self.safes, N)


@dataclass(frozen=True)
class Node:
    id: str
    sequent: Sequent
    rule: RuleTag
    premises: tuple[str, ...] = ()


@dataclass(frozen=True)
class Diagnostic:
    node: str
    kind: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.node}: {self.detail}"


@dataclass(frozen=True)
class ProofGraph:
    name: str
    nodes: tuple[Node, ...]
    oracles: tuple[OracleDef, ...] = ()

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("a proof graph needs at least one node")
        ids = [nd.id for nd in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")

    @cached_property
    def by_id(self) -> dict[str, Node]:
        return {nd.id: nd for nd in self.nodes}

    @cached_property
    def order(self) -> dict[str, int]:
        return {nd.id: i for i, nd in enumerate(self.nodes)}

    @property
    def root(self) -> str:
        return self.nodes[0].id

    def __getitem__(self, nid: str) -> Node:
        return self.by_id[nid]

    def __contains__(self, nid: str) -> bool:
        return nid in self.by_id

    @cached_property
    def oracle_table(self) -> dict[str, OracleDef]:
        return {o.name: o for o in self.oracles}

    def is_back_edge(self, src: str, dst: str) -> bool:
        return self.order[dst] <= self.order[src]

    def edges(self) -> Iterable[tuple[str, int, str]]:
        for nd in self.nodes:
            for k, p in enumerate(nd.premises):
                if p in self.by_id:
                    yield nd.id, k, p

    @cached_property
    def parent(self) -> dict[str, str]:
        """Tree parent of each node (first forward edge into it)."""
        par: dict[str, str] = {}
        for src, _, dst in self.edges():
            if not self.is_back_edge(src, dst) and dst not in par:
                par[dst] = src
        return par

    @cached_property
    def backrefs(self) -> dict[str, frozenset[str]]:
        """For each dis node, the buds (nodes holding a back-edge to it)."""
        out: dict[str, set[str]] = {nd.id: set() for nd in self.nodes if nd.rule.kind == "dis"}
        for src, _, dst in self.edges():
            if self.is_back_edge(src, dst):
                out.setdefault(dst, set()).add(src)
        return {k: frozenset(v) for k, v in out.items()}

    def back_edges(self) -> list[tuple[str, int, str]]:
        return [e for e in self.edges() if self.is_back_edge(e[0], e[2])]

    def is_tree_ancestor(self, anc: str, nid: str) -> bool:
        cur: str | None = nid
        seen = set()
        while cur is not None and cur not in seen:
            if cur == anc:
                return True
            seen.add(cur)
            cur = self.parent.get(cur)
        return False

    def reachable(self, start: str) -> set[str]:
        seen = {start}
        todo = [start]
        while todo:
            cur = todo.pop()
            for p in self[cur].premises:
                if p in self.by_id and p not in seen:
                    seen.add(p)
                    todo.append(p)
        return seen

    def tree_nodes(self, start: str) -> list[str]:
        """Nodes of the subtree at ``start`` (tree edges only), preorder."""
        out = []
        todo = [start]
        while todo:
            cur = todo.pop()
            out.append(cur)
            kids = [p for p in self[cur].premises if p in self.by_id and not self.is_back_edge(cur, p)]
            todo.extend(reversed(kids))
        return out

    def rules_used(self, start: str | None = None) -> set[str]:
        ids = self.reachable(start or self.root)
        return {self[i].rule.kind for i in ids}

    def oracle_leaves(self, start: str | None = None) -> list[Node]:
        ids = self.reachable(start or self.root)
        return [nd for nd in self.nodes if nd.id in ids and nd.rule.kind == "oracle"]

    def subgraph(self, start: str, name: str | None = None) -> "ProofGraph":
        """The subtree at ``start`` as a graph of its own.  Back-edges must
        stay inside the subtree."""
        keep = self.tree_nodes(start)
        kept = set(keep)
        for nid in keep:
            for p in self[nid].premises:
                if p not in kept:
                    raise ValueError(f"back-reference from {nid} to {p} leaves the subtree at {start}")
        nodes = tuple(self[i] for i in sorted(keep, key=self.order.__getitem__))
        names = {nd.rule.arg for nd in nodes if nd.rule.kind == "oracle"}
        oracles = tuple(o for o in self.oracles if o.name in names)
        return ProofGraph(name or f"{self.name}@{start}", nodes, oracles)


def validate_graph(g: ProofGraph) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    add = lambda nid, kind, detail: diags.append(Diagnostic(nid, kind, detail))
    tree_parents: dict[str, list[str]] = {}
    for nd in g.nodes:
        if len(nd.premises) != nd.rule.arity:
            add(nd.id, "arity", f"{nd.rule.kind} takes {nd.rule.arity} premises, got {len(nd.premises)}")
        try:
            expected = rule_signature(nd.rule, nd.sequent)
        except IncompatibleSequent as exc:
            add(nd.id, "signature", str(exc))
            expected = None
        for k, p in enumerate(nd.premises):
            if p not in g:
                add(nd.id, "dangling", f"premise {k} names undeclared node {p}")
                continue
            if expected is not None and k < len(expected) and g[p].sequent != expected[k]:
                add(nd.id, "signature", f"premise {k} ({p}) has {g[p].sequent}, rule needs {expected[k]}")
            if g.is_back_edge(nd.id, p):
                if g[p].rule.kind != "dis":
                    add(nd.id, "missing-dis", f"cycle through {p}, which is not a dis node")
            else:
                tree_parents.setdefault(p, []).append(nd.id)
        if nd.rule.kind == "oracle":
            decl = g.oracle_table.get(nd.rule.arg)
            if decl is None:
                add(nd.id, "oracle", f"oracle {nd.rule.arg} is not declared")
            elif (decl.normals, decl.safes) != (nd.sequent.normals, nd.sequent.safes):
                add(nd.id, "oracle", f"oracle {decl.name} declared with arity ({decl.normals};{decl.safes})")
    for nid, parents in tree_parents.items():
        if len(parents) > 1:
            add(nid, "shared", f"node has several tree parents {parents}")
    if g.root in tree_parents:
        add(g.root, "shared", "root has a parent")
    reach = g.reachable(g.root)
    for nd in g.nodes:
        if nd.id not in reach:
            add(nd.id, "unreachable", "node not reachable from the root")
    if not any(d.kind in ("dangling", "shared") for d in diags):
        for src, _, dst in g.back_edges():
            if g[dst].rule.kind == "dis" and not g.is_tree_ancestor(dst, src):
                add(src, "companion", f"dis node {dst} is not below its bud {src}")
        for d, buds in g.backrefs.items():
            if g[d].rule.kind == "dis" and not buds:
                add(d, "dis", "dis node without buds")
    return diags


@dataclass(frozen=True)
class AncestryEdge:
    """Immediate ancestry from a conclusion to one premise.  Positions are
    ("box", i) or ("safe", j); each entry carries an EQUAL/SMALLER flag."""

    parent: str
    premise_index: int
    premise: str
    mapping: tuple[tuple[tuple[str, int], tuple[str, int], str], ...]

    def as_dict(self) -> dict[tuple[str, int], tuple[tuple[str, int], str]]:
        return {src: (dst, flag) for src, dst, flag in self.mapping}


def position_map(rule: RuleTag, conclusion: Sequent, k: int):
    """Ancestry of antecedent positions from the conclusion to premise k."""
    m, n = conclusion.normals, conclusion.safes
    kind = rule.kind
    boxes = {i: ("box", i) for i in range(m)}
    safes = {j: ("safe", j) for j in range(n)}
    flags = {}

    if kind in ("s0", "s1", "dis", "box_r") or (kind == "cut_n") or (kind in ("cond_n", "pcond_n") and k >= 1):
        pass
    elif kind in ("cond_n", "pcond_n") and k == 0:
        del safes[n - 1]
    elif kind == "cut_box" and k == 1:
        boxes = {i: ("box", i + 1) for i in range(m)}
    elif kind == "cut_box":
        pass
    elif kind == "w_n":
        del safes[n - 1]
    elif kind == "w_box" or (kind in ("cond_box", "pcond_box", "srec") and k == 0):
        boxes = {i: ("box", i - 1) for i in range(1, m)}
    elif kind == "e_n":
        i = rule.arg
        safes[i], safes[i + 1] = ("safe", i + 1), ("safe", i)
    elif kind == "e_box":
        i = rule.arg
        boxes[i], boxes[i + 1] = ("box", i + 1), ("box", i)
    elif kind == "box_l":
        boxes = {i: ("box", i - 1) for i in range(1, m)}
        boxes[0] = ("safe", n)
    elif kind in ("cond_box", "pcond_box"):
        flags[("box", 0)] = SMALLER
    elif kind == "srec":
        pass
    else:
        raise AssertionError(kind)
    out = []
    for i, dst in sorted(boxes.items()):
        out.append((("box", i), dst, flags.get(("box", i), EQUAL)))
    for j, dst in sorted(safes.items()):
        out.append((("safe", j), dst, EQUAL))
    return tuple(out)


def ancestry_edges(g: ProofGraph, nid: str) -> list[AncestryEdge]:
    nd = g[nid]
    return [
        AncestryEdge(nid, k, p, position_map(nd.rule, nd.sequent, k))
        for k, p in enumerate(nd.premises)
    ]


@dataclass
class UnfoldNode:
    node: str
    path: str
    sequent: Sequent
    rule: RuleTag
    children: list["UnfoldNode"] = field(default_factory=list)

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def truncate(self, depth: int) -> "UnfoldNode":
        kids = [c.truncate(depth - 1) for c in self.children] if depth > 0 else []
        return UnfoldNode(self.node, self.path, self.sequent, self.rule, kids)

    def shape(self):
        return (self.node, str(self.rule), tuple(c.shape() for c in self.children))


def unfold(g: ProofGraph, nid: str, depth: int) -> UnfoldNode:
    """Depth-bounded prefix of the coderivation at ``nid``; back-references
    are followed into their companions."""
    if depth < 0:
        raise ValueError("depth must be non-negative")

    def go(cur: str, path: str, d: int) -> UnfoldNode:
        nd = g[cur]
        out = UnfoldNode(cur, path, nd.sequent, nd.rule)
        if d > 0:
            out.children = [go(p, f"{path}.{k}", d - 1) for k, p in enumerate(nd.premises)]
        return out

    return go(nid, nid, depth)
