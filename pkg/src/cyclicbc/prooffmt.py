"""Text formats: proof graphs (.cbp), advice tables (.adv), netlists (.circ).

Proof grammar, one declaration per line, ``#`` starts a comment::

    proof <name>
    oracle <name> normal <m> safe <n> kind <kind> source <path|builtin:name>
    node <id> seq <m> <n> <N|boxN> rule <tag>[ <index>] [prem <id> ...]

The first node is the root.  A premise naming an earlier node is a
back-reference and must point at a ``dis`` node.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .kernel import BOX, N, RULE_ARITY, Node, OracleDef, ProofGraph, RuleTag, Sequent

ORACLE_KINDS = ("length-relation", "host", "subgraph")


class ProofFormatError(ValueError):
    pass


class ProofSyntaxError(ProofFormatError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class UnknownRule(ProofFormatError):
    pass


class DanglingId(ProofFormatError):
    pass


class FormatError(ValueError):
    """Malformed advice table or netlist."""


class UnknownBuiltin(ValueError):
    pass


@dataclass(frozen=True)
class ProofDocument:
    name: str
    nodes: tuple[Node, ...]
    oracles: tuple[OracleDef, ...] = ()

    def to_graph(self) -> ProofGraph:
        return ProofGraph(self.name, self.nodes, self.oracles)

    @classmethod
    def from_graph(cls, g: ProofGraph) -> "ProofDocument":
        return cls(g.name, g.nodes, tuple(OracleDef(o.name, o.normals, o.safes, o.kind, o.source) for o in g.oracles))

    def back_references(self) -> list[tuple[str, str]]:
        order = {nd.id: i for i, nd in enumerate(self.nodes)}
        return [(nd.id, p) for nd in self.nodes for p in nd.premises if order[p] <= order[nd.id]]


_NAT = re.compile(r"\d+\Z")


def _nat(tok: str, line: int, what: str) -> int:
    if not _NAT.match(tok):
        raise ProofSyntaxError(line, f"{what} must be a natural number, got {tok!r}")
    return int(tok)


def _strip(raw: str) -> list[str]:
    return raw.split("#", 1)[0].split()


def _parse_node(toks: list[str], line: int) -> tuple[Node, int]:
    if len(toks) < 8 or toks[2] != "seq" or toks[6] != "rule":
        raise ProofSyntaxError(line, "expected: node <id> seq <m> <n> <N|boxN> rule <tag> ...")
    nid = toks[1]
    m = _nat(toks[3], line, "normal count")
    n = _nat(toks[4], line, "safe count")
    succ = {"N": N, "boxN": BOX}.get(toks[5])
    if succ is None:
        raise ProofSyntaxError(line, f"succedent must be N or boxN, got {toks[5]!r}")
    kind = toks[7]
    if kind not in RULE_ARITY:
        raise UnknownRule(f"line {line}: unknown rule {kind!r}")
    rest = toks[8:]
    arg: int | str | None = None
    if kind in ("e_n", "e_box"):
        if not rest:
            raise ProofSyntaxError(line, f"{kind} needs a swap index")
        arg = _nat(rest[0], line, "swap index")
        rest = rest[1:]
    elif kind == "oracle":
        if not rest or rest[0] == "prem":
            raise ProofSyntaxError(line, "oracle leaf needs a name")
        arg, rest = rest[0], rest[1:]
    prems: tuple[str, ...] = ()
    if rest:
        if rest[0] != "prem":
            raise ProofSyntaxError(line, f"unexpected token {rest[0]!r}")
        prems = tuple(rest[1:])
    return Node(nid, Sequent(m, n, succ), RuleTag(kind, arg), prems), line


def _parse_oracle(toks: list[str], line: int) -> OracleDef:
    shape = ["oracle", None, "normal", None, "safe", None, "kind", None, "source", None]
    if len(toks) != len(shape) or any(s is not None and s != t for s, t in zip(shape, toks)):
        raise ProofSyntaxError(line, "expected: oracle <name> normal <m> safe <n> kind <kind> source <src>")
    if toks[7] not in ORACLE_KINDS:
        raise ProofSyntaxError(line, f"unknown oracle kind {toks[7]!r}")
    return OracleDef(toks[1], _nat(toks[3], line, "normal arity"), _nat(toks[5], line, "safe arity"), toks[7], toks[9])


def parse_proof(text: str) -> ProofDocument:
    name = None
    nodes: list[tuple[Node, int]] = []
    oracles: list[OracleDef] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        toks = _strip(raw)
        if not toks:
            continue
        head = toks[0]
        if head == "proof":
            if name is not None or len(toks) != 2:
                raise ProofSyntaxError(ln, "expected a single 'proof <name>' line")
            name = toks[1]
        elif head == "node":
            nodes.append(_parse_node(toks, ln))
        elif head == "oracle":
            oracles.append(_parse_oracle(toks, ln))
        else:
            raise ProofSyntaxError(ln, f"unknown declaration {head!r}")
    if name is None:
        raise ProofSyntaxError(1, "missing 'proof <name>' line")
    if not nodes:
        raise ProofSyntaxError(1, "proof has no nodes")
    order: dict[str, int] = {}
    for i, (nd, ln) in enumerate(nodes):
        if nd.id in order:
            raise ProofSyntaxError(ln, f"duplicate node id {nd.id!r}")
        order[nd.id] = i
    if len({o.name for o in oracles}) != len(oracles):
        raise ProofSyntaxError(1, "duplicate oracle declaration")
    for i, (nd, ln) in enumerate(nodes):
        for p in nd.premises:
            if p not in order:
                raise DanglingId(f"line {ln}: premise {p!r} is not declared")
            if order[p] <= i and nodes[order[p]][0].rule.kind != "dis":
                raise ProofSyntaxError(ln, f"back-reference to {p!r}, which is not a dis node")
    return ProofDocument(name, tuple(nd for nd, _ in nodes), tuple(oracles))


def serialize_proof(doc: ProofDocument | ProofGraph) -> str:
    lines = [f"proof {doc.name}"]
    for o in doc.oracles:
        lines.append(f"oracle {o.name} normal {o.normals} safe {o.safes} kind {o.kind} source {o.source or '-'}")
    for nd in doc.nodes:
        s = f"node {nd.id} {nd.sequent} rule {nd.rule}"
        if nd.premises:
            s += " prem " + " ".join(nd.premises)
        lines.append(s)
    return "\n".join(lines) + "\n"


_SCHEME = re.compile(r"^[a-z]+:")


def load_proof(path: str | Path) -> ProofGraph:
    """Read a .cbp file.  Relative oracle sources are resolved against the
    file's directory."""
    path = Path(path)
    doc = parse_proof(path.read_text(encoding="utf-8"))
    oracles = []
    for o in doc.oracles:
        src = o.source
        if src and not _SCHEME.match(src) and src != "-" and not Path(src).is_absolute():
            src = str((path.parent / src).resolve())
        oracles.append(OracleDef(o.name, o.normals, o.safes, o.kind, src))
    return ProofGraph(doc.name, doc.nodes, tuple(oracles))


# -- advice ------------------------------------------------------------------

# Arbitrary fixed bits standing in for advice nobody can compute.
_HALTING_BITS = 0xB7E151628AED2A6ABF7158809CF4F3C7


@dataclass(frozen=True)
class AdviceSource:
    """Length-determined Boolean advice: a bit per tuple of argument lengths."""

    table: tuple[tuple[tuple[int, ...], int], ...] = ()
    default: int = 0
    builtin: str | None = None

    def lookup(self, lengths: tuple[int, ...]) -> int:
        lengths = tuple(lengths)
        if self.builtin == "parity-len":
            return sum(lengths) % 2
        if self.builtin == "halting-stub":
            k = sum(lengths)
            return (_HALTING_BITS >> k) & 1 if k < 128 else 0
        return dict(self.table).get(lengths, self.default)

    def __call__(self, normals, safes=()) -> int:
        return self.lookup(tuple(int(v).bit_length() for v in (*normals, *safes)))

    @property
    def arity(self) -> int | None:
        return len(self.table[0][0]) if self.table else None


BUILTIN_ADVICE = ("parity-len", "halting-stub")


def parse_advice(text: str) -> AdviceSource:
    table: dict[tuple[int, ...], int] = {}
    default = None
    width = None
    for ln, raw in enumerate(text.splitlines(), 1):
        toks = _strip(raw)
        if not toks:
            continue
        if toks[0] == "default":
            if len(toks) != 2 or toks[1] not in ("0", "1"):
                raise FormatError(f"line {ln}: expected 'default <0|1>'")
            if default is not None:
                raise FormatError(f"line {ln}: second default line")
            default = int(toks[1])
            continue
        if "->" not in toks or toks.count("->") != 1 or toks.index("->") != len(toks) - 2:
            raise FormatError(f"line {ln}: expected '<n1> ... -> <0|1>'")
        key, bit = toks[:-2], toks[-1]
        if bit not in ("0", "1") or not all(_NAT.match(t) for t in key):
            raise FormatError(f"line {ln}: lengths must be naturals and the bit 0 or 1")
        if width is None:
            width = len(key)
        elif len(key) != width:
            raise FormatError(f"line {ln}: {len(key)} lengths, earlier lines have {width}")
        lk = tuple(int(t) for t in key)
        if lk in table and table[lk] != int(bit):
            raise FormatError(f"line {ln}: conflicting entry for {lk}")
        table[lk] = int(bit)
    return AdviceSource(tuple(sorted(table.items())), default or 0)


def load_advice(source: str | Path) -> AdviceSource:
    s = str(source)
    if s.startswith("builtin:"):
        name = s[len("builtin:"):]
        if name not in BUILTIN_ADVICE:
            raise UnknownBuiltin(name)
        return AdviceSource(builtin=name)
    return parse_advice(Path(s).read_text(encoding="utf-8"))


def serialize_advice(adv: AdviceSource) -> str:
    if adv.builtin:
        raise ValueError("builtin advice has no table form")
    lines = [" ".join(map(str, k)) + (" " if k else "") + f"-> {b}" for k, b in adv.table]
    lines.append(f"default {adv.default}")
    return "\n".join(lines) + "\n"


# -- netlists ----------------------------------------------------------------

GATE_WORDS = ("and", "or", "not", "c0", "c1")
_GATE_ARITY = {"and": 2, "or": 2, "not": 1, "c0": 0, "c1": 0}


@dataclass(frozen=True)
class Netlist:
    inputs: int
    gates: tuple[tuple[str, str, tuple[str, ...]], ...]
    output: str


def parse_netlist(text: str) -> Netlist:
    """Operands name earlier gates or inputs ``x0 .. x<n-1>``."""
    inputs = None
    gates: list[tuple[str, str, tuple[str, ...]]] = []
    output = None
    known: set[str] = set()
    for ln, raw in enumerate(text.splitlines(), 1):
        toks = _strip(raw)
        if not toks:
            continue
        if toks[0] == "inputs" and len(toks) == 2 and _NAT.match(toks[1]) and inputs is None:
            inputs = int(toks[1])
            known = {f"x{i}" for i in range(inputs)}
        elif toks[0] == "gate" and len(toks) >= 3 and inputs is not None:
            gid, word, ops = toks[1], toks[2], tuple(toks[3:])
            if word not in GATE_WORDS or len(ops) != _GATE_ARITY[word]:
                raise FormatError(f"line {ln}: bad gate {' '.join(toks[2:])!r}")
            if gid in known:
                raise FormatError(f"line {ln}: duplicate id {gid!r}")
            for op in ops:
                if op not in known:
                    raise FormatError(f"line {ln}: operand {op!r} is not an input or earlier gate")
            gates.append((gid, word, ops))
            known.add(gid)
        elif toks[0] == "output" and len(toks) == 2 and output is None:
            output = toks[1]
        else:
            raise FormatError(f"line {ln}: cannot parse {raw.strip()!r}")
    if inputs is None or output is None:
        raise FormatError("netlist needs 'inputs' and 'output' lines")
    if output not in known:
        raise FormatError(f"output {output!r} is not defined")
    return Netlist(inputs, tuple(gates), output)


def serialize_netlist(net: Netlist) -> str:
    lines = [f"inputs {net.inputs}"]
    for gid, word, ops in net.gates:
        lines.append(" ".join(["gate", gid, word, *ops]))
    lines.append(f"output {net.output}")
    return "\n".join(lines) + "\n"
