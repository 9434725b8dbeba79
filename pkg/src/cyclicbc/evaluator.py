"""Equational semantics of proof graphs over the naturals.

Evaluation is an explicit-stack trampoline: every rule is a generator that
yields (node, normals, safes) requests for its premises and returns its
value.  Results are memoised on exact arguments, and each rule application
that misses the memo costs one unit of fuel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable

from .kernel import Node, OracleDef, ProofGraph, RuleTag, Sequent

DEFAULT_FUEL = 10**7


class EvalError(Exception):
    pass


class FuelExhausted(EvalError):
    """Ran out of fuel.  Says nothing about totality."""


class MissingOracle(EvalError):
    pass


class ArityMismatch(EvalError, ValueError):
    pass


def length(v: int) -> int:
    return int(v).bit_length()


def pred(v: int) -> int:
    return v >> 1


@dataclass(frozen=True)
class OracleEntry:
    fn: Callable
    kind: str = "host"


class OracleEnv(dict):
    """name -> callable(normals, safes) or OracleEntry."""

    def call(self, name: str, xs: tuple, ys: tuple) -> int:
        try:
            entry = self[name]
        except KeyError:
            raise MissingOracle(name) from None
        fn = entry.fn if isinstance(entry, OracleEntry) else entry
        return int(fn(xs, ys))

    def kind(self, name: str) -> str:
        entry = self.get(name)
        return entry.kind if isinstance(entry, OracleEntry) else "host"


@dataclass
class EvalBudget:
    fuel: int = DEFAULT_FUEL
    memo: dict = field(default_factory=dict)
    steps: int = 0


def _check_args(seqt: Sequent, xs, ys, where: str) -> None:
    if len(xs) != seqt.normals or len(ys) != seqt.safes:
        raise ArityMismatch(
            f"{where} expects ({seqt.normals};{seqt.safes}) arguments, got ({len(xs)};{len(ys)})"
        )
    for v in (*xs, *ys):
        if not isinstance(v, int) or v < 0:
            raise ArityMismatch(f"arguments must be naturals, got {v!r}")


def _rule(nd: Node, xs: tuple, ys: tuple, env: OracleEnv):
    k = nd.rule.kind
    P = nd.premises
    if k == "id":
        return ys[0]
    if k == "zero":
        return 0
    if k == "one":
        return 1
    if k == "oracle":
        return env.call(nd.rule.arg, xs, ys)
    if k in ("s0", "s1"):
        v = yield P[0], xs, ys
        return 2 * v + (k == "s1")
    if k in ("dis", "box_r"):
        return (yield P[0], xs, ys)
    if k == "cut_n":
        a = yield P[0], xs, ys
        return (yield P[1], xs, ys + (a,))
    if k == "cut_box":
        a = yield P[0], xs, ys
        return (yield P[1], (a,) + xs, ys)
    if k == "w_n":
        return (yield P[0], xs, ys[:-1])
    if k == "w_box":
        return (yield P[0], xs[1:], ys)
    if k == "e_n":
        i = nd.rule.arg
        s = list(ys)
        s[i], s[i + 1] = s[i + 1], s[i]
        return (yield P[0], xs, tuple(s))
    if k == "e_box":
        i = nd.rule.arg
        s = list(xs)
        s[i], s[i + 1] = s[i + 1], s[i]
        return (yield P[0], tuple(s), ys)
    if k == "box_l":
        return (yield P[0], xs[1:], ys + (xs[0],))
    if k == "srec":
        x, rest = xs[0], xs[1:]
        if x == 0:
            return (yield P[0], rest, ys)
        r = yield nd.id, (pred(x),) + rest, ys
        return (yield P[1 + (x & 1)], (pred(x),) + rest, ys + (r,))
    if k in ("cond_n", "pcond_n"):
        v, rest = ys[-1], ys[:-1]
        if v == 0:
            return (yield P[0], xs, rest)
        idx = 1 if k == "pcond_n" else 1 + (v & 1)
        return (yield P[idx], xs, rest + (pred(v),))
    if k in ("cond_box", "pcond_box"):
        v, rest = xs[0], xs[1:]
        if v == 0:
            return (yield P[0], rest, ys)
        idx = 1 if k == "pcond_box" else 1 + (v & 1)
        return (yield P[idx], (pred(v),) + rest, ys)
    raise AssertionError(k)


def evaluate(
    g: ProofGraph,
    nid: str | None = None,
    normals: Iterable[int] = (),
    safes: Iterable[int] = (),
    env: OracleEnv | dict | None = None,
    budget: EvalBudget | None = None,
    fuel: int | None = None,
) -> int:
    """Value of the coderivation at ``nid`` (root by default)."""
    nid = nid or g.root
    env = env if isinstance(env, OracleEnv) else OracleEnv(env or {})
    if budget is None:
        budget = EvalBudget(DEFAULT_FUEL if fuel is None else fuel)
    xs, ys = tuple(normals), tuple(safes)
    _check_args(g[nid].sequent, xs, ys, nid)
    memo = budget.memo
    start = (nid, xs, ys)
    if start in memo:
        return memo[start]

    def push(key):
        if budget.fuel <= 0:
            raise FuelExhausted(f"fuel exhausted after {budget.steps} rule applications")
        budget.fuel -= 1
        budget.steps += 1
        stack.append((key, _rule(g[key[0]], key[1], key[2], env)))

    stack: list = []
    push(start)
    val = None
    while stack:
        key, gen = stack[-1]
        try:
            req = gen.send(val)
        except StopIteration as stop:
            val = stop.value
            memo[key] = val
            stack.pop()
            continue
        if req in memo:
            val = memo[req]
        else:
            val = None
            push(req)
    return val


def oracle_env(g: ProofGraph, overrides: dict | None = None, fuel: int = DEFAULT_FUEL) -> OracleEnv:
    """Environment for the declared oracles of ``g``: subgraph-backed oracles
    run the evaluator, sources name advice files or builtins.  Oracles with no
    usable source are left out (and raise MissingOracle when reached)."""
    from .prooffmt import load_advice, load_proof

    env = OracleEnv()
    for o in g.oracles:
        if o.subgraph is not None:
            env[o.name] = OracleEntry(subgraph_oracle(o.subgraph, fuel), o.kind)
        elif o.source.endswith(".cbp"):
            try:
                sub = load_proof(o.source)
            except (OSError, ValueError):
                continue
            env[o.name] = OracleEntry(subgraph_oracle(sub, fuel), o.kind)
        elif o.source and o.source != "-":
            try:
                adv = load_advice(o.source)
            except (OSError, ValueError):
                continue
            env[o.name] = OracleEntry(adv, o.kind)
    for k, v in (overrides or {}).items():
        env[k] = v
    return env


def subgraph_oracle(sub: ProofGraph, fuel: int = DEFAULT_FUEL, env: dict | None = None) -> Callable:
    memo: dict = {}

    def call(xs, ys):
        return evaluate(sub, sub.root, xs, ys, oracle_env(sub, env), EvalBudget(fuel, memo))

    return call


# -- relation expansion ------------------------------------------------------


def _witness(n: int) -> int:
    """Smallest value of bit length n."""
    return 0 if n == 0 else 1 << (n - 1)


def expand_relation(r: Callable, k: int, depth: int, name: str = "expansion") -> ProofGraph:
    """Finite truncation of the 0/1/pcond_box tree computing a length relation
    ``r(normals;)`` of ``k`` normal arguments.  Past the depth horizon the tree
    ends in an ``unknown_<j>`` oracle leaf of the remaining arity j."""
    if k < 0 or depth < 0:
        raise ValueError("arity and depth must be non-negative")
    nodes: list[Node] = []
    unknown: set[int] = set()
    counter = iter(range(10**9))

    def fresh() -> str:
        return f"n{next(counter)}"

    # preorder construction with an explicit stack
    def build(lens: tuple[int, ...], j: int, t: int) -> str:
        """Node computing r with lengths ``lens`` fixed, j arguments left,
        and the first remaining argument known to have length >= t."""
        nid = fresh()
        seqt = Sequent(j, 0)
        if j == 0:
            bit = int(r(tuple(_witness(n) for n in lens), ()))
            nodes.append(Node(nid, seqt, RuleTag("one" if bit else "zero")))
            return nid
        if t >= depth:
            unknown.add(j)
            nodes.append(Node(nid, seqt, RuleTag("oracle", f"unknown_{j}")))
            return nid
        idx = len(nodes)
        nodes.append(None)  # placeholder keeps preorder
        a = build(lens + (t,), j - 1, 0)
        b = build(lens, j, t + 1)
        nodes[idx] = Node(nid, seqt, RuleTag("pcond_box"), (a, b))
        return nid

    if k == 0:
        bit = int(r((), ()))
        nodes.append(Node("n0", Sequent(0, 0), RuleTag("one" if bit else "zero")))
    elif depth == 0:
        unknown.add(k)
        nodes.append(Node("n0", Sequent(k, 0), RuleTag("oracle", f"unknown_{k}")))
    else:
        build((), k, 0)
    oracles = tuple(OracleDef(f"unknown_{j}", j, 0, "length-relation", "-") for j in sorted(unknown))
    return ProofGraph(name, tuple(nodes), oracles)


# -- length-determinism probe -------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def _as_callable(f, env, fuel) -> tuple[Callable, int, int]:
    if isinstance(f, ProofGraph):
        seqt = f[f.root].sequent
        e = oracle_env(f, env)
        budget_memo: dict = {}
        return (lambda xs, ys: evaluate(f, f.root, xs, ys, e, EvalBudget(fuel, budget_memo))), seqt.normals, seqt.safes
    raise TypeError("pass a ProofGraph or use arity=")


def probe_length_determined(
    f,
    samples: int = 500,
    arity: tuple[int, int] | None = None,
    max_bits: int = 10,
    seed: int = 0,
    env: dict | None = None,
    fuel: int = DEFAULT_FUEL,
) -> ProbeResult:
    """Sound refuter: looks for two inputs with equal length tuples and
    different outputs.  ``f`` is a proof graph or a callable(normals, safes)
    together with ``arity=(m, n)``."""
    if arity is None:
        call, m, n = _as_callable(f, env, fuel)
    else:
        call, (m, n) = f, arity
    k = m + n

    def split(vals):
        return tuple(vals[:m]), tuple(vals[m:])

    def run(vals):
        return call(*split(vals))

    # exhaustive over all tuples of values below 4 (lengths 0..2)
    seen: dict[tuple, tuple] = {}
    for vals in product(range(4), repeat=k):
        if k > 4:
            break
        key = tuple(length(v) for v in vals)
        out = run(vals)
        if key in seen and seen[key][1] != out:
            return ProbeResult(False, (split(seen[key][0]), split(vals)))
        seen.setdefault(key, (vals, out))
    rng = random.Random(seed)
    for _ in range(samples):
        lens = [rng.randint(0, max_bits) for _ in range(k)]
        a = tuple(_rand_of_len(rng, n) for n in lens)
        b = tuple(_rand_of_len(rng, n) for n in lens)
        if run(a) != run(b):
            return ProbeResult(False, (split(a), split(b)))
    return ProbeResult(True)


def _rand_of_len(rng: random.Random, n: int) -> int:
    if n == 0:
        return 0
    return (1 << (n - 1)) | rng.getrandbits(n - 1) if n > 1 else 1
