"""From cyclic proof graphs to algebra terms, and from safe recursion to cycles.

Each companion (a ``dis`` node with buds) becomes a recursion whose bound
oracle answers the bud calls; everything else is a direct case analysis on
the rule.  Because a bud's arguments come from its companion's through cond
steps, exchanges and left cut premises only, the bud call always lands
strictly below the companion in the prefix order, so the guard never cuts
off a call that the graph semantics needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (
    S0,
    S1,
    Comp,
    CompNormal,
    CompSafe,
    Cond,
    InitialRelation,
    OracleCall,
    Pred,
    ProjN,
    ProjS,
    RecPP,
    Term,
    numeral,
    weaken,
)
from .checker import CB, NUB, NotProgressing, check_progressing, classify
from .kernel import BOX, N, Node, ProofGraph, RuleTag, Sequent, validate_graph


class ClassificationError(ValueError):
    pass


class StrictnessViolation(AssertionError):
    pass


class NotCycleNormal(ValueError):
    def __init__(self, msg: str, pair: tuple[str, str] | None = None):
        super().__init__(msg)
        self.pair = pair


Bud = tuple[str, int]  # (node holding the back-reference, premise index)


@dataclass
class CycleAnalysis:
    graph: ProofGraph
    buds: frozenset[Bud]
    companion: dict[Bud, str]
    tree: tuple[str, ...]
    close: dict[str, frozenset[str]] = field(repr=False)
    open: dict[str, frozenset[Bud]] = field(repr=False)

    def path(self, bud: Bud) -> list[tuple[str, int]]:
        """Steps (node, premise index) from the companion to the bud."""
        g = self.graph
        src, k = bud
        steps = [(src, k)]
        cur = src
        comp = self.companion[bud]
        while cur != comp:
            par = g.parent[cur]
            steps.append((par, g[par].premises.index(cur)))
            cur = par
        return steps[::-1]

    def as_dict(self) -> dict:
        return {
            "buds": sorted(f"{s}.{k}" for s, k in self.buds),
            "companions": {f"{s}.{k}": d for (s, k), d in sorted(self.companion.items())},
            "close": {v: sorted(c) for v, c in self.close.items() if c},
            "open": {v: sorted(f"{s}.{k}" for s, k in o) for v, o in self.open.items() if o},
        }


def _effective(g: ProofGraph, v: str) -> str:
    seen = set()
    while g[v].rule.kind == "dis" and v not in seen:
        seen.add(v)
        v = g[v].premises[0]
    return v


def _bisimulation(g: ProofGraph) -> dict[str, int]:
    """Block index per node: equal blocks iff equal unfoldings (dis steps
    are transparent)."""
    ids = [nd.id for nd in g.nodes if nd.rule.kind != "dis"]
    kids = {v: tuple(_effective(g, p) for p in g[v].premises) for v in ids}
    label = {v: (g[v].sequent, str(g[v].rule)) for v in ids}
    names = {lab: i for i, lab in enumerate(sorted(set(label.values()), key=str))}
    block = {v: names[label[v]] for v in ids}
    while True:
        sig = {v: (block[v], tuple(block[c] for c in kids[v])) for v in ids}
        renum = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: renum[sig[v]] for v in ids}
        if len(renum) == len(set(block.values())):
            return new
        block = new


def cycle_nf(g: ProofGraph) -> CycleAnalysis:
    diags = [d for d in validate_graph(g) if d.kind in ("companion", "missing-dis", "dangling", "shared")]
    if diags:
        raise NotCycleNormal(f"not a cycle normal form: {diags[0]}", (diags[0].node, ""))
    back = g.back_edges()
    buds = frozenset((s, k) for s, k, _ in back)
    companion = {(s, k): d for s, k, d in back}
    tree = tuple(g.tree_nodes(g.root))
    block = _bisimulation(g)
    for v in tree:
        ev = _effective(g, v)
        a = g.parent.get(v)
        while a is not None:
            ea = _effective(g, a)
            if ea != ev and block[ea] == block[ev]:
                raise NotCycleNormal(f"nodes {a} and {v} carry equal coderivations", (a, v))
            a = g.parent.get(a)
    close: dict[str, frozenset[str]] = {}
    opened: dict[str, frozenset[Bud]] = {}
    for v in tree:
        sub = set(g.tree_nodes(v))
        close[v] = frozenset(d for d in sub if g[d].rule.kind == "dis" and g.backrefs.get(d))
        opened[v] = frozenset(b for b in buds if b[0] in sub and companion[b] not in sub)
    return CycleAnalysis(g, buds, companion, tree, close, opened)


@dataclass
class PathReport:
    bud: Bud
    companion: str
    has_cond_box: bool
    failures: tuple[str, ...]


@dataclass
class StructureReport:
    paths: list[PathReport]

    @property
    def ok(self) -> bool:
        return all(p.has_cond_box and not p.failures for p in self.paths)

    def failures(self) -> list[str]:
        out = []
        for p in self.paths:
            where = f"{p.companion} -> {p.bud[0]}.{p.bud[1]}"
            if not p.has_cond_box:
                out.append(f"{where}: no cond_box/pcond_box conclusion")
            out.extend(f"{where}: {f}" for f in p.failures)
        return out


def structure_check(a: CycleAnalysis) -> StructureReport:
    g = a.graph
    reports = []
    for bud in sorted(a.buds):
        steps = a.path(bud)
        has_cond = False
        fails = []
        for v, k in steps:
            kind = g[v].rule.kind
            if kind in ("cond_box", "pcond_box"):
                if k == 0:
                    fails.append(f"leftmost premise of {kind} {v}")
                else:
                    has_cond = True
            if kind in ("cut_box", "box_l", "w_box", "w_n"):
                fails.append(f"{kind} {v}")
            if kind in ("cond_n", "pcond_n") and k == 0:
                fails.append(f"leftmost premise of {kind} {v}")
            if kind == "cut_n" and k == 1:
                fails.append(f"right premise of cut_n {v}")
        reports.append(PathReport(bud, a.companion[bud], has_cond, tuple(fails)))
    return StructureReport(reports)


# -- cutbox transform ----------------------------------------------------------


def cutbox_star(g: ProofGraph, nid: str) -> ProofGraph:
    """A graph with conclusion □Γ ⇒ □N computing the same value as the node
    ``nid`` (conclusion □Γ, N⃗ ⇒ □N) while ignoring the safe arguments."""
    sub = g.subgraph(nid)
    prog = check_progressing(sub)
    if not prog:
        raise NotProgressing(f"subgraph at {nid}: {prog.detail}")
    top = g[nid].sequent
    if top.succedent != BOX:
        raise ValueError(f"{nid} does not conclude □N")
    if top.safes == 0:
        return sub
    out: list[Node] = []
    counter = iter(range(10**9))

    def fresh(base: str) -> str:
        return f"{base}*{next(counter)}"

    def copy(v: str) -> str:
        for u in g.tree_nodes(v):
            out.append(g[u])
        return v

    def star(v: str) -> str:
        nd = g[v]
        m, n = nd.sequent.normals, nd.sequent.safes
        k = nd.rule.kind
        P = nd.premises
        seqt = Sequent(m, 0, BOX)
        if n == 0:
            return copy(v)
        if k in ("w_n", "e_n"):
            return star(P[0])
        if k == "cut_n":
            return star(P[1])
        if k == "dis":
            if g.backrefs.get(v):
                raise NotProgressing(f"cycle at {v} concludes □N")
            return star(P[0])
        nid2 = fresh(v)
        idx = len(out)
        out.append(None)
        if k in ("w_box", "e_box", "s0", "s1"):
            out[idx] = Node(nid2, seqt, nd.rule, (star(P[0]),))
        elif k == "box_l":
            out[idx] = Node(nid2, seqt, RuleTag("w_box"), (star(P[0]),))
        elif k == "cut_box":
            a = star(P[0])
            b = star(P[1])
            out[idx] = Node(nid2, seqt, nd.rule, (a, b))
        else:
            raise AssertionError(f"{k} cannot conclude □N with safe context")
        return nid2

    root = star(nid)
    out = [nd for nd in out if nd is not None]
    names = {nd.rule.arg for nd in out if nd.rule.kind == "oracle"}
    oracles = tuple(o for o in g.oracles if o.name in names)
    res = ProofGraph(f"{g.name}*{nid}", tuple(out), oracles)
    assert res.root == root
    return res


# -- translation -----------------------------------------------------------------


def _rec_name(d: str) -> str:
    return f"a_{d}"


def _check_strict(g: ProofGraph, bud: Bud, comp: str) -> None:
    src, k = bud
    steps = [(src, k)]
    cur = src
    while cur != comp:
        par = g.parent[cur]
        steps.append((par, g[par].premises.index(cur)))
        cur = par
    if not any(g[v].rule.kind in ("cond_box", "pcond_box") and i >= 1 for v, i in steps):
        raise StrictnessViolation(f"bud {src}.{k} reaches {comp} without crossing a conditional on □N")


def _translate_graph(g: ProofGraph) -> Term:
    cache: dict[str, Term] = {}

    def prem(v: str, k: int) -> Term:
        p = g[v].premises[k]
        if g.is_back_edge(v, p):
            _check_strict(g, (v, k), p)
            s = g[p].sequent
            return OracleCall(_rec_name(p), s.normals, s.safes)
        return T(p)

    def T(v: str) -> Term:
        if v in cache:
            return cache[v]
        nd = g[v]
        m, n = nd.sequent.normals, nd.sequent.safes
        k = nd.rule.kind
        if k == "id":
            t = ProjS(0, 1, 0)
        elif k == "zero":
            t = numeral(0)
        elif k == "one":
            t = numeral(1)
        elif k == "oracle":
            t = InitialRelation(nd.rule.arg, m, n)
        elif k in ("s0", "s1"):
            t = Comp(S0() if k == "s0" else S1(), (), (prem(v, 0),), m, n)
        elif k == "box_r":
            t = prem(v, 0)
        elif k == "dis":
            body = prem(v, 0)
            t = RecPP(_rec_name(v), body) if g.backrefs.get(v) else body
        elif k == "cut_n":
            t = CompSafe(prem(v, 0), prem(v, 1))
        elif k == "cut_box":
            p0 = nd.premises[0]
            left = T(p0) if g[p0].sequent.safes == 0 else _translate_graph(cutbox_star(g, p0))
            t = CompNormal(left, prem(v, 1))
        elif k == "w_n":
            t = weaken(prem(v, 0), m, n, range(m), range(n - 1))
        elif k == "w_box":
            t = weaken(prem(v, 0), m, n, range(1, m), range(n))
        elif k == "e_n":
            i = nd.rule.arg
            order = list(range(n))
            order[i], order[i + 1] = order[i + 1], order[i]
            t = weaken(prem(v, 0), m, n, range(m), order)
        elif k == "e_box":
            i = nd.rule.arg
            order = list(range(m))
            order[i], order[i + 1] = order[i + 1], order[i]
            t = weaken(prem(v, 0), m, n, order, range(n))
        elif k == "box_l":
            t = Comp(
                prem(v, 0),
                tuple(ProjN(m, 0, i) for i in range(1, m)),
                tuple(ProjS(m, n, j) for j in range(n)) + (ProjN(m, n, 0),),
                m,
                n,
            )
        elif k in ("cond_box", "pcond_box"):
            base = weaken(prem(v, 0), m, n, range(1, m), range(n))
            pred_x = (Comp(Pred(), (), (ProjN(m, 0, 0),), m, 0),) + tuple(ProjN(m, 0, i) for i in range(1, m))
            safes = tuple(ProjS(m, n, j) for j in range(n))
            even = Comp(prem(v, 1), pred_x, safes, m, n)
            odd = even if k == "pcond_box" else Comp(prem(v, 2), pred_x, safes, m, n)
            t = Comp(Cond(), (), (ProjN(m, n, 0), base, even, odd), m, n)
        elif k in ("cond_n", "pcond_n"):
            base = weaken(prem(v, 0), m, n, range(m), range(n - 1))
            normals = tuple(ProjN(m, 0, i) for i in range(m))
            safes = tuple(ProjS(m, n, j) for j in range(n - 1)) + (Comp(Pred(), (), (ProjS(m, n, n - 1),), m, n),)
            even = Comp(prem(v, 1), normals, safes, m, n)
            odd = even if k == "pcond_n" else Comp(prem(v, 2), normals, safes, m, n)
            t = Comp(Cond(), (), (ProjS(m, n, n - 1), base, even, odd), m, n)
        elif k == "srec":
            raise ClassificationError("srec nodes must be desugared with srec_to_cycle first")
        else:
            raise AssertionError(k)
        cache[v] = t
        return t

    return T(g.root)


def translate(g: ProofGraph) -> Term:
    """Algebra term computing the same function as g, with g's oracle leaves
    as initial relations."""
    verdict = classify(g)
    if verdict.classification not in (CB, NUB):
        raise ClassificationError(f"{g.name} is {verdict.classification}: " + "; ".join(verdict.reasons))
    analysis = cycle_nf(g)
    report = structure_check(analysis)
    if not report.ok:
        raise ClassificationError("; ".join(report.failures()))
    return _translate_graph(g)


# -- safe recursion as a cycle -------------------------------------------------------


def srec_to_cycle(g: ProofGraph) -> ProofGraph:
    """Replace every srec node by a dis/cond_box cycle whose recursive
    premises cut the bud into the step derivations."""
    if not any(nd.rule.kind == "srec" for nd in g.nodes):
        return g
    used = {nd.id for nd in g.nodes}

    def fresh(base: str) -> str:
        name = base
        while name in used:
            name += "'"
        used.add(name)
        return name

    out: list[Node] = []
    for nd in g.nodes:
        if nd.rule.kind != "srec":
            out.append(nd)
            continue
        g0, h0, h1 = nd.premises
        s = nd.sequent
        cond, k0, k1 = fresh(f"{nd.id}_cond"), fresh(f"{nd.id}_step0"), fresh(f"{nd.id}_step1")
        out.append(Node(nd.id, s, RuleTag("dis"), (cond,)))
        out.append(Node(cond, s, RuleTag("cond_box"), (g0, k0, k1)))
        out.append(Node(k0, s, RuleTag("cut_n"), (nd.id, h0)))
        out.append(Node(k1, s, RuleTag("cut_n"), (nd.id, h1)))
    return ProofGraph(g.name, tuple(out), g.oracles)
