"""Circuit families as length-indexed advice.

A family C_0, C_1, ... is turned into a length relation c(y, z;) giving the
|z|-th bit of the description of C_|y|.  A safe recursion on z over c then
rebuilds the whole description, and a host-side evaluator runs it on the
input bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

from .algebra import (
    S0,
    S1,
    Comp,
    Cond,
    InitialRelation,
    OracleCall,
    Poly,
    Pred,
    ProjN,
    ProjS,
    RecPP,
    Term,
    eval_term,
    numeral,
)
from .evaluator import ArityMismatch, OracleEnv, OracleEntry
from .kernel import Node, OracleDef, ProofGraph, RuleTag, Sequent
from .prooffmt import Netlist, parse_netlist, serialize_netlist
from .translator import srec_to_cycle

AND, OR, NOT, CONST0, CONST1 = "AND", "OR", "NOT", "CONST0", "CONST1"
KIND_CODE = {AND: 0, OR: 1, NOT: 2, CONST0: 3, CONST1: 4}
CODE_KIND = {v: k for k, v in KIND_CODE.items()}
FAN_IN = {AND: 2, OR: 2, NOT: 1, CONST0: 0, CONST1: 0}
_WORDS = {"and": AND, "or": OR, "not": NOT, "c0": CONST0, "c1": CONST1}


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    ops: tuple[int, ...] = ()


@dataclass(frozen=True)
class Circuit:
    """Wires 0..inputs-1 are the inputs, wire inputs+i is gate i."""

    inputs: int
    gates: tuple[Gate, ...]
    output: int

    def __post_init__(self):
        for i, gt in enumerate(self.gates):
            if gt.kind not in FAN_IN or len(gt.ops) != FAN_IN[gt.kind]:
                raise ValueError(f"gate {i}: bad kind or fan-in")
            if any(not 0 <= o < self.inputs + i for o in gt.ops):
                raise ValueError(f"gate {i}: operand does not precede the gate")
        if not 0 <= self.output < self.inputs + len(self.gates):
            raise ValueError("output wire out of range")

    @property
    def size(self) -> int:
        return len(self.gates)


def _bits(bits) -> list[int]:
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"not a bit string: {bits!r}")
        return [int(ch) for ch in bits]
    return [int(b) for b in bits]


def value_bits(y: int) -> str:
    """Binary notation of y, most significant bit first; empty for 0."""
    return bin(y)[2:] if y else ""


def circuit_eval(c: Circuit, bits) -> int:
    xs = _bits(bits)
    if len(xs) != c.inputs:
        raise ArityMismatch(f"circuit has {c.inputs} inputs, got {len(xs)} bits")
    wires = list(xs)
    for gt in c.gates:
        a = [wires[o] for o in gt.ops]
        if gt.kind == AND:
            wires.append(a[0] & a[1])
        elif gt.kind == OR:
            wires.append(a[0] | a[1])
        elif gt.kind == NOT:
            wires.append(1 - a[0])
        else:
            wires.append(int(gt.kind == CONST1))
    return wires[c.output]


# -- prefix-free descriptions ------------------------------------------------------


def gamma(k: int) -> str:
    if k < 1:
        raise ValueError("gamma code needs k >= 1")
    b = bin(k)[2:]
    return "0" * (len(b) - 1) + b


def _width(c_inputs: int, gates: int) -> int:
    return max(1, math.ceil(math.log2(max(2, c_inputs + gates))))


def encode(c: Circuit) -> str:
    """gamma(n+1) gamma(g+1), then per gate a 3-bit kind and fixed-width
    operands, then the output wire."""
    w = _width(c.inputs, c.size)
    out = [gamma(c.inputs + 1), gamma(c.size + 1)]
    for gt in c.gates:
        out.append(format(KIND_CODE[gt.kind], "03b"))
        out.extend(format(o, f"0{w}b") for o in gt.ops)
    out.append(format(c.output, f"0{w}b"))
    return "".join(out)


def decode(bits) -> Circuit:
    """Inverse of encode; bits past the encoded length are ignored."""
    s = "".join(map(str, _bits(bits)))
    pos = 0

    def read(k: int) -> str:
        nonlocal pos
        if pos + k > len(s):
            raise DecodeError(f"description ends at bit {len(s)}, needed {pos + k}")
        pos += k
        return s[pos - k : pos]

    def read_gamma() -> int:
        zeros = 0
        while read(1) == "0":
            zeros += 1
            if zeros > 64:
                raise DecodeError("gamma prefix too long")
        return int("1" + read(zeros), 2) if zeros else 1

    n = read_gamma() - 1
    g = read_gamma() - 1
    w = _width(n, g)
    gates = []
    for i in range(g):
        code = int(read(3), 2)
        if code not in CODE_KIND:
            raise DecodeError(f"gate {i}: unknown kind code {code}")
        kind = CODE_KIND[code]
        ops = tuple(int(read(w), 2) for _ in range(FAN_IN[kind]))
        if any(o >= n + i for o in ops):
            raise DecodeError(f"gate {i}: operand refers forward")
        gates.append(Gate(kind, ops))
    out = int(read(w), 2)
    if out >= n + g:
        raise DecodeError("output wire out of range")
    return Circuit(n, tuple(gates), out)


# -- netlists ---------------------------------------------------------------------


def from_netlist(net: Netlist) -> Circuit:
    index = {f"x{i}": i for i in range(net.inputs)}
    gates = []
    for gid, word, ops in net.gates:
        gates.append(Gate(_WORDS[word], tuple(index[o] for o in ops)))
        index[gid] = net.inputs + len(gates) - 1
    return Circuit(net.inputs, tuple(gates), index[net.output])


def to_netlist(c: Circuit) -> Netlist:
    names = [f"x{i}" for i in range(c.inputs)] + [f"g{i}" for i in range(c.size)]
    words = {v: k for k, v in _WORDS.items()}
    gates = tuple((f"g{i}", words[gt.kind], tuple(names[o] for o in gt.ops)) for i, gt in enumerate(c.gates))
    return Netlist(c.inputs, gates, names[c.output])


def load_circuit(path: str | Path) -> Circuit:
    return from_netlist(parse_netlist(Path(path).read_text(encoding="utf-8")))


def dump_circuit(c: Circuit) -> str:
    return serialize_netlist(to_netlist(c))


# -- builtin families ---------------------------------------------------------------


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.gates: list[Gate] = []

    def add(self, kind: str, *ops: int) -> int:
        self.gates.append(Gate(kind, ops))
        return self.n + len(self.gates) - 1

    def done(self, out: int) -> Circuit:
        return Circuit(self.n, tuple(self.gates), out)


def parity_circuit(n: int) -> Circuit:
    b = _Builder(n)
    if n == 0:
        return b.done(b.add(CONST0))
    acc = 0
    for i in range(1, n):
        either = b.add(OR, acc, i)
        both = b.add(AND, acc, i)
        acc = b.add(AND, either, b.add(NOT, both))
    return b.done(acc)


def majority_circuit(n: int) -> Circuit:
    """1 iff more than half of the inputs are 1."""
    b = _Builder(n)
    k = n // 2 + 1
    if k > n:
        return b.done(b.add(CONST0))
    zero = None
    # at_least[j]: wire saying at least j of the inputs seen so far are 1
    at_least: list[int | None] = [None] * (k + 1)
    for i in range(n):
        new = list(at_least)
        for j in range(1, min(i + 1, k) + 1):
            prev = at_least[j]
            lower = at_least[j - 1]
            take = i if j == 1 else b.add(AND, lower, i)
            new[j] = take if prev is None else b.add(OR, prev, take)
        at_least = new
    out = at_least[k]
    if out is None:
        zero = b.add(CONST0)
        out = zero
    return b.done(out)


def constant_circuit(bit: int) -> Callable[[int], Circuit]:
    def make(n: int) -> Circuit:
        b = _Builder(n)
        return b.done(b.add(CONST1 if bit else CONST0))

    return make


def fit_size_poly(lengths: Callable[[int], int], degree: int, upto: int = 64) -> Poly:
    """A polynomial b + a n^degree with p(n) >= lengths(n) for n <= upto,
    choosing (a, b) with the least total relative slack p(n) / lengths(n)."""
    ls = [lengths(n) for n in range(upto + 1)]
    if degree == 0 or upto == 0:
        return Poly.const(max(ls))
    best = None
    for b in range(ls[0], max(ls) + 1):
        a = max(max(0, -(-(ls[n] - b) // n**degree)) for n in range(1, upto + 1))
        total = sum((b + a * n**degree) / max(ls[n], 1) for n in range(upto + 1))
        if best is None or total < best[0]:
            best = (total, a, b)
    _, a, b = best
    return Poly.const(b) + Poly((0,) * degree + (a,))


@dataclass
class CircuitFamily:
    name: str
    generator: Callable[[int], Circuit]
    size_poly: Poly | None = None
    degree: int = 2
    fit_range: int = 64
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.size_poly is None:
            self.size_poly = fit_size_poly(lambda n: len(self.description(n)), self.degree, self.fit_range)

    def __call__(self, n: int) -> Circuit:
        if n not in self._cache:
            c = self.generator(n)
            if c.inputs != n:
                raise ValueError(f"{self.name}: C_{n} has {c.inputs} inputs")
            self._cache[n] = c
        return self._cache[n]

    def description(self, n: int) -> str:
        return encode(self(n))

    def p(self, n: int) -> int:
        return self.size_poly(n)


def family_from_dir(path: str | Path) -> CircuitFamily:
    path = Path(path)
    files = {int(f.stem[1:]): f for f in path.glob("C*.circ") if f.stem[1:].isdigit()}
    if not files:
        raise FileNotFoundError(f"no C<n>.circ files in {path}")

    def gen(n: int) -> Circuit:
        if n not in files:
            raise KeyError(f"{path} has no circuit for length {n}")
        return load_circuit(files[n])

    top = max(files)
    fam = CircuitFamily(path.name, gen, Poly.const(1))
    longest = max(len(fam.description(n)) for n in files)
    fam.size_poly = Poly.const(longest)
    fam.fit_range = top
    return fam


BUILTIN_FAMILIES = {
    "parity": lambda: CircuitFamily("parity", parity_circuit, degree=2),
    "majority": lambda: CircuitFamily("majority", majority_circuit, degree=3),
    "constant-0": lambda: CircuitFamily("constant-0", constant_circuit(0), degree=0),
    "constant-1": lambda: CircuitFamily("constant-1", constant_circuit(1), degree=0),
}


@lru_cache(maxsize=None)
def _builtin(name: str) -> CircuitFamily:
    return BUILTIN_FAMILIES[name]()


def get_family(which: str) -> CircuitFamily:
    if which in BUILTIN_FAMILIES:
        return _builtin(which)
    if Path(which).is_dir():
        return family_from_dir(which)
    raise KeyError(f"unknown family {which!r}")


# -- the advice oracle ---------------------------------------------------------------

ORACLE_NAME = "c"


@dataclass(frozen=True)
class FamilyOracle:
    """c(y, z;) = the |z|-th bit of encode(C_|y|), 0 past its end."""

    family: CircuitFamily
    name: str = ORACLE_NAME

    def __call__(self, xs, ys=()) -> int:
        y, z = xs
        desc = self.family.description(int(y).bit_length())
        k = int(z).bit_length()
        return int(desc[k]) if k < len(desc) else 0

    @property
    def definition(self) -> OracleDef:
        return OracleDef(self.name, 2, 0, "length-relation", f"family:{self.family.name}")

    def env(self) -> OracleEnv:
        return OracleEnv({self.name: OracleEntry(self, "length-relation")})


def family_oracle(fam: CircuitFamily, name: str = ORACLE_NAME) -> FamilyOracle:
    return FamilyOracle(fam, name)


# -- the description term --------------------------------------------------------------


def description_recursion(name: str = ORACLE_NAME) -> Term:
    """C(y, 0;) = 0, C(y, s_i z;) = cond(; c(y, z;), s0 C(y, z;), s0 C(y, z;), s1 C(y, z;))."""
    y, z = ProjN(2, 0, 0), ProjN(2, 0, 1)
    args = (y, Comp(Pred(), (), (z,), 2, 0))
    bit = Comp(InitialRelation(name, 2, 0), args, (), 2, 0)
    rec = Comp(OracleCall("crec", 2, 0), args, (), 2, 0)
    s0 = Comp(S0(), (), (rec,), 2, 0)
    s1 = Comp(S1(), (), (rec,), 2, 0)
    step = Comp(Cond(), (), (bit, s0, s0, s1), 2, 0)
    return RecPP("crec", Comp(Cond(), (), (z, numeral(0, 2, 0), step, step), 2, 0))


def _append_ones(k: int) -> Term:
    """P_k(y; w): w followed by |y|^k ones."""
    if k == 0:
        return Comp(S1(), (), (ProjS(1, 1, 0),), 1, 1)
    inner = _append_ones(k - 1)
    name = f"ones{k}"
    u, y, w = ProjN(2, 1, 0), ProjN(2, 0, 1), ProjS(2, 1, 0)
    call = Comp(OracleCall(name, 2, 1), (Comp(Pred(), (), (ProjN(2, 0, 0),), 2, 0), ProjN(2, 0, 1)), (w,), 2, 1)
    step = Comp(inner, (y,), (call,), 2, 1)
    body = Comp(Cond(), (), (u, w, step, step), 2, 1)
    rec = RecPP(name, body)
    # run the recursion with u = y
    return Comp(rec, (ProjN(1, 0, 0), ProjN(1, 0, 0)), (ProjS(1, 1, 0),), 1, 1)


@lru_cache(maxsize=None)
def _ones_const(b: int) -> Term:
    """1^b at arity (1; 0), built by doubling so the term has depth O(log b)."""
    if b == 0:
        return numeral(0, 1, 0)
    if b % 2:
        return Comp(S1(), (), (_ones_const(b - 1),), 1, 0)
    half = _ones_const(b // 2)
    return Comp(_append_ones(1), (half,), (half,), 1, 0)


def ones_term(p: Poly) -> Term:
    """O(y;) = 1^{p(|y|)}, the numeral made of p(|y|) ones."""
    coeffs = p.coeffs or (0,)
    t: Term = _ones_const(coeffs[0])
    for k, a in enumerate(coeffs):
        if k == 0:
            continue
        step = _append_ones(k)
        for _ in range(a):
            t = Comp(step, (ProjN(1, 0, 0),), (t,), 1, 0)
    return t


def build_description_term(fam: CircuitFamily, name: str = ORACLE_NAME) -> Term:
    """C(y;) = C(y, 1^{p(|y|)};)."""
    return Comp(description_recursion(name), (ProjN(1, 0, 0), ones_term(fam.size_poly)), (), 1, 0)


def description_bits(fam: CircuitFamily, value: int, n: int) -> str:
    """The description read off a value of the recursion: its p(n)-bit
    binary notation, first description bit most significant."""
    k = fam.p(n)
    return format(value, f"0{k}b") if k else ""


_desc_cache: dict = {}


def _described_circuit(fam: CircuitFamily, n: int) -> Circuit:
    key = (fam.name, id(fam), n)
    if key not in _desc_cache:
        term = build_description_term(fam)
        witness = 0 if n == 0 else 1 << (n - 1)
        value = eval_term(term, (witness,), (), family_oracle(fam).env())
        _desc_cache[key] = decode(description_bits(fam, value, n))
    return _desc_cache[key]


def pipeline_eval(fam: CircuitFamily, y) -> int:
    """Evaluate the circuit described by the description term at |y| on the
    bits of y.  ``y`` is a natural (its binary notation) or a bit string.

    The term's value depends on |y| only, so it is evaluated once per length
    at the smallest value of that length."""
    bits = value_bits(y) if isinstance(y, int) else "".join(map(str, _bits(y)))
    c = _described_circuit(fam, len(bits))
    return circuit_eval(c, bits)


# -- as a proof graph --------------------------------------------------------------------


def _step_nodes(prefix: str) -> list[Node]:
    """h(z', y; r) = cond(; c(y, z';), s0 r, s0 r, s1 r) at sequent (2, 1)."""
    P = prefix

    def sel(tag: str, succ: str, drop_last: bool) -> list[Node]:
        ids = [f"{P}{tag}{i}" for i in range(6)]
        out = []
        seq_top = Sequent(2, 2 if drop_last else 1)
        chain = []
        if drop_last:
            chain.append(("w_n", Sequent(2, 2)))
        chain += [("w_box", Sequent(2, 1)), ("w_box", Sequent(1, 1)), (succ, Sequent(0, 1)), ("id", Sequent(0, 1))]
        for i, (rule, s) in enumerate(chain):
            nxt = (ids[i + 1],) if i + 1 < len(chain) else ()
            out.append(Node(ids[i], s, RuleTag(rule), nxt))
        assert out[0].sequent == seq_top
        return out

    nodes = [
        Node(f"{P}cut", Sequent(2, 1), RuleTag("cut_n"), (f"{P}wk", f"{P}sel")),
        Node(f"{P}wk", Sequent(2, 1), RuleTag("w_n"), (f"{P}sw",)),
        Node(f"{P}sw", Sequent(2, 0), RuleTag("e_box", 0), (f"{P}c",)),
        Node(f"{P}c", Sequent(2, 0), RuleTag("oracle", ORACLE_NAME)),
        Node(f"{P}sel", Sequent(2, 2), RuleTag("cond_n"), (f"{P}z0", f"{P}e0", f"{P}o0")),
    ]
    nodes += sel("z", "s0", False)
    nodes += sel("e", "s0", True)
    nodes += sel("o", "s1", True)
    return nodes


def description_derivation(fam: CircuitFamily) -> ProofGraph:
    """Finite derivation with one srec computing C(y, z;)."""
    nodes = [
        Node("root", Sequent(2, 0), RuleTag("e_box", 0), ("rec",)),
        Node("rec", Sequent(2, 0), RuleTag("srec"), ("base", "h0cut", "h1cut")),
        Node("base", Sequent(1, 0), RuleTag("w_box"), ("zero",)),
        Node("zero", Sequent(0, 0), RuleTag("zero")),
    ]
    nodes += _step_nodes("h0")
    nodes += _step_nodes("h1")
    oracle = family_oracle(fam).definition
    return ProofGraph(f"describe_{fam.name}", tuple(nodes), (oracle,))


def compile_family_to_proof(fam: CircuitFamily) -> tuple[ProofGraph, OracleDef]:
    g = srec_to_cycle(description_derivation(fam))
    return g, family_oracle(fam).definition


def compiled_eval(fam: CircuitFamily, g: ProofGraph, bits) -> int:
    """Run the compiled graph at (y, 1^{p(|y|)}), decode, evaluate."""
    from .evaluator import evaluate

    s = "".join(map(str, _bits(bits)))
    n = len(s)
    key = ("graph", id(g), n)
    if key not in _desc_cache:
        witness = 0 if n == 0 else 1 << (n - 1)
        ones = (1 << fam.p(n)) - 1
        value = evaluate(g, g.root, (witness, ones), (), family_oracle(fam).env())
        _desc_cache[key] = decode(description_bits(fam, value, n))
    return circuit_eval(_desc_cache[key], s)
