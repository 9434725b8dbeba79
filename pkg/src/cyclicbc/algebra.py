"""A two-sorted function algebra with safe recursion on the permutation-of-
prefixes order, its evaluators, growth bounds, and a text syntax.

Terms have explicit arities (m; n).  A recursion ``RecPP(a, h)`` defines
f(x; y) = h(x; y) where inside h the name ``a`` answers f(u; v) when
u is strictly below x and v is below y in the prefix order, and 0
otherwise.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, fields
from functools import lru_cache
from itertools import permutations, product
from typing import Callable

from .evaluator import ArityMismatch, MissingOracle, OracleEnv


class LengthMismatch(ValueError):
    pass


class TermSyntaxError(ValueError):
    pass


class ScopeError(ValueError):
    """A recursion oracle appears where the algebra forbids it."""


def _len(v: int) -> int:
    return v.bit_length()


# -- the prefix order --------------------------------------------------------


def is_prefix(u: int, x: int) -> bool:
    d = _len(x) - _len(u)
    return d >= 0 and (x >> d) == u


def pp_leq(u, x) -> bool:
    """u ⊆ x: some permutation of x has each u_i as a prefix."""
    u, x = tuple(u), tuple(x)
    if len(u) != len(x):
        raise LengthMismatch(f"tuples of length {len(u)} and {len(x)}")
    if all(is_prefix(a, b) for a, b in zip(u, x)):
        return True
    return any(all(is_prefix(a, b) for a, b in zip(u, p)) for p in permutations(x))


def pp_less(u, x) -> bool:
    return pp_leq(u, x) and sum(map(_len, u)) < sum(map(_len, x))


def pp_compare(u, x) -> str:
    if not pp_leq(u, x):
        return "incomparable"
    return "strict" if sum(map(_len, u)) < sum(map(_len, x)) else "nonstrict"


def _prefixes(v: int) -> list[int]:
    return [v >> k for k in range(_len(v) + 1)]


def _below(x: tuple) -> set[tuple]:
    """All u with u ⊆ x."""
    out = set()
    for p in set(permutations(x)):
        out.update(product(*(_prefixes(v) for v in p)))
    return out


def _pp_key(uv):
    u, v = uv
    return (sum(map(_len, u)), sum(map(_len, v)), u, v)


def enumerate_pp(x, y) -> list[tuple[tuple, tuple]]:
    """Every (u, v) with u ⊂ x and v ⊆ y, in an order where anything strictly
    below an element comes before it."""
    x, y = tuple(x), tuple(y)
    sx = sum(map(_len, x))
    us = [u for u in _below(x) if sum(map(_len, u)) < sx]
    vs = list(_below(y))
    return sorted(((u, v) for u in us for v in vs), key=_pp_key)


def pp_successor(x, y) -> Callable:
    """Successor function S over enumerate_pp(x, y), None after the last."""
    items = enumerate_pp(x, y)
    nxt = {a: b for a, b in zip(items, items[1:])}
    return lambda item: nxt.get(item)


def guarded(u, v, X, Y) -> bool:
    return pp_less(u, X) and pp_leq(v, Y)


# -- bounding polynomials ----------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Univariate polynomial with natural coefficients, lowest degree first."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        if any(not isinstance(a, int) or a < 0 for a in c):
            raise ValueError("coefficients must be natural numbers")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls((c,))

    @classmethod
    def var(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly(tuple(p + q for p, q in zip(a, b)))

    __radd__ = __add__

    def __mul__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def __call__(self, n):
        """Value at an integer, or composition with another polynomial."""
        acc = Poly() if isinstance(n, Poly) else 0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("n" if i == 1 else f"n^{i}")
            parts.append(str(c) if not mono else (mono if c == 1 else f"{c}{mono}"))
        return " + ".join(parts)


N_VAR = Poly.var()
ONE_PLUS_N = Poly((1, 1))


# -- terms -------------------------------------------------------------------


class Term:
    """Base class.  Subclasses are frozen dataclasses; the hash is cached so
    that terms can key memo tables cheaply."""

    arity: tuple[int, int]

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__, *(getattr(self, f.name) for f in fields(self))))
            object.__setattr__(self, "_h", h)
        return h


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ArityMismatch(msg)


@dataclass(frozen=True, eq=True)
class Zero(Term):
    arity = (0, 0)
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class S0(Term):
    arity = (0, 1)
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class S1(Term):
    arity = (0, 1)
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Pred(Term):
    arity = (0, 1)
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class Cond(Term):
    """cond(; w, x, y, z): x if w = 0, y if w is even and nonzero, z if odd."""

    arity = (0, 4)
    __hash__ = Term.__hash__


@dataclass(frozen=True, eq=True)
class ProjN(Term):
    m: int
    n: int
    j: int
    __hash__ = Term.__hash__

    def __post_init__(self):
        _need(0 <= self.j < self.m, f"normal projection {self.j} out of range ({self.m};{self.n})")

    @property
    def arity(self):
        return (self.m, self.n)


@dataclass(frozen=True, eq=True)
class ProjS(Term):
    m: int
    n: int
    j: int
    __hash__ = Term.__hash__

    def __post_init__(self):
        _need(0 <= self.j < self.n, f"safe projection {self.j} out of range ({self.m};{self.n})")

    @property
    def arity(self):
        return (self.m, self.n)


@dataclass(frozen=True, eq=True)
class OracleCall(Term):
    """A recursion oracle bound by an enclosing RecPP/RecSim, or else a
    function looked up in the environment."""

    name: str
    m: int
    n: int
    __hash__ = Term.__hash__

    @property
    def arity(self):
        return (self.m, self.n)


@dataclass(frozen=True, eq=True)
class InitialRelation(Term):
    name: str
    m: int
    n: int
    __hash__ = Term.__hash__

    @property
    def arity(self):
        return (self.m, self.n)


@dataclass(frozen=True, eq=True)
class CompSafe(Term):
    """f(x; y) = h(x; y, g(x; y))."""

    g: Term
    h: Term
    __hash__ = Term.__hash__

    def __post_init__(self):
        m, n = self.g.arity
        _need(self.h.arity == (m, n + 1), f"compsafe: g is ({m};{n}), h is {self.h.arity}")

    @property
    def arity(self):
        return self.g.arity


@dataclass(frozen=True, eq=True)
class CompNormal(Term):
    """f(x; y) = h(g(x;), x; y)."""

    g: Term
    h: Term
    __hash__ = Term.__hash__

    def __post_init__(self):
        m, n0 = self.g.arity
        _need(n0 == 0, "compnormal: g must have no safe arguments")
        _need(self.h.arity[0] == m + 1, f"compnormal: g is ({m};0), h is {self.h.arity}")

    @property
    def arity(self):
        return (self.g.arity[0], self.h.arity[1])


@dataclass(frozen=True, eq=True)
class Comp(Term):
    """f(x; y) = h(g_1(x;), ..., g_k(x;); s_1(x; y), ..., s_l(x; y))."""

    h: Term
    normals: tuple[Term, ...]
    safes: tuple[Term, ...]
    m: int
    n: int
    __hash__ = Term.__hash__

    def __post_init__(self):
        object.__setattr__(self, "normals", tuple(self.normals))
        object.__setattr__(self, "safes", tuple(self.safes))
        _need(self.h.arity == (len(self.normals), len(self.safes)), f"comp: head is {self.h.arity}")
        for g in self.normals:
            _need(g.arity == (self.m, 0), f"comp: normal argument has arity {g.arity}, needs ({self.m};0)")
        for s in self.safes:
            _need(s.arity == (self.m, self.n), f"comp: safe argument has arity {s.arity}")

    @property
    def arity(self):
        return (self.m, self.n)


@dataclass(frozen=True, eq=True)
class RecPP(Term):
    name: str
    body: Term
    __hash__ = Term.__hash__

    @property
    def arity(self):
        return self.body.arity


@dataclass(frozen=True, eq=True)
class RecSim(Term):
    """Component ``index`` of a simultaneous recursion."""

    names: tuple[str, ...]
    bodies: tuple[Term, ...]
    index: int = 0
    __hash__ = Term.__hash__

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "bodies", tuple(self.bodies))
        _need(len(self.names) == len(self.bodies) >= 1, "recsim needs one name per body")
        _need(len({b.arity for b in self.bodies}) == 1, "recsim bodies must share an arity")
        _need(0 <= self.index < len(self.bodies), "recsim index out of range")

    @property
    def arity(self):
        return self.bodies[0].arity


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (CompSafe, CompNormal)):
        return (t.g, t.h)
    if isinstance(t, Comp):
        return (t.h, *t.normals, *t.safes)
    if isinstance(t, RecPP):
        return (t.body,)
    if isinstance(t, RecSim):
        return t.bodies
    return ()


def term_size(t: Term) -> int:
    seen: dict[int, int] = {}

    def go(u):
        if id(u) not in seen:
            seen[id(u)] = 1 + sum(go(c) for c in children(u))
        return seen[id(u)]

    return go(t)


@lru_cache(maxsize=None)
def free_calls(t: Term) -> frozenset[str]:
    """Names of OracleCall leaves not bound inside t."""
    if isinstance(t, OracleCall):
        return frozenset({t.name})
    inner = frozenset().union(*(free_calls(c) for c in children(t))) if children(t) else frozenset()
    if isinstance(t, RecPP):
        return inner - {t.name}
    if isinstance(t, RecSim):
        return inner - set(t.names)
    return inner


def check_term(t: Term, bound: dict[str, tuple[int, int]] | None = None) -> None:
    """Scope and arity discipline: recursion oracles are called at their
    recursion's arity and never inside a normal-position argument."""
    bound = dict(bound or {})

    def go(u: Term, bnd: dict, sealed: frozenset):
        # sealed: recursion names bound outside the nearest normal position
        if isinstance(u, OracleCall) and u.name in bnd:
            if u.name in sealed:
                raise ScopeError(f"recursion oracle {u.name} used in a normal position")
            if bnd[u.name] != u.arity:
                raise ArityMismatch(f"{u.name} bound at {bnd[u.name]}, called at {u.arity}")
        elif isinstance(u, CompNormal):
            go(u.g, bnd, frozenset(bnd))
            go(u.h, bnd, sealed)
        elif isinstance(u, Comp):
            go(u.h, bnd, sealed)
            for g in u.normals:
                go(g, bnd, frozenset(bnd))
            for s in u.safes:
                go(s, bnd, sealed)
        elif isinstance(u, RecPP):
            go(u.body, {**bnd, u.name: u.arity}, sealed - {u.name})
        elif isinstance(u, RecSim):
            nb = {**bnd, **{a: u.arity for a in u.names}}
            for b in u.bodies:
                go(b, nb, sealed - set(u.names))
        else:
            for c in children(u):
                go(c, bnd, sealed)

    go(t, bound, frozenset())


# -- helpers for building terms -------------------------------------------------


def numeral(c: int, m: int = 0, n: int = 0) -> Term:
    """The constant c as a term of arity (m; n)."""
    t: Term = Zero()
    bits = bin(c)[2:] if c else ""
    for b in bits:
        t = Comp(S1() if b == "1" else S0(), (), (t,), 0, 0)
    return t if (m, n) == (0, 0) else Comp(t, (), (), m, n)


def weaken(t: Term, m: int, n: int, normals=None, safes=None) -> Term:
    """t re-indexed into arity (m; n): its normal i reads normal
    ``normals[i]`` and its safe j reads safe ``safes[j]``."""
    tm, tn = t.arity
    normals = list(range(tm)) if normals is None else list(normals)
    safes = list(range(tn)) if safes is None else list(safes)
    if (tm, tn) == (m, n) and normals == list(range(m)) and safes == list(range(n)):
        return t
    return Comp(t, tuple(ProjN(m, 0, i) for i in normals), tuple(ProjS(m, n, j) for j in safes), m, n)


def apply_safe(fn: Term, *args: Term) -> Term:
    """fn(; args) for a base function of arity (0; k)."""
    m, n = args[0].arity
    return Comp(fn, (), tuple(args), m, n)


# -- evaluation --------------------------------------------------------------


def _cond(w, x, y, z):
    return x if w == 0 else (y if w % 2 == 0 else z)


_BASE_TYPES = frozenset({Zero, S0, S1, Pred, Cond, ProjN, ProjS, InitialRelation})


def _base(t: Term, xs, ys, env: OracleEnv):
    T = type(t)
    if T is Zero:
        return 0
    if T is S0:
        return 2 * ys[0]
    if T is S1:
        return 2 * ys[0] + 1
    if T is Pred:
        return ys[0] >> 1
    if T is Cond:
        return _cond(*ys)
    if T is ProjN:
        return xs[t.j]
    if T is ProjS:
        return ys[t.j]
    if T is InitialRelation:
        return env.call(t.name, xs, ys)
    return None


def _lookup(binds, name):
    for entry in reversed(binds):
        if entry[0] == name:
            return entry
    return None


def _sig(binds, names) -> tuple:
    """Hashable summary of the bindings a recursion's value depends on."""
    out = []
    for name, rec, idx, X, Y, outer in binds:
        if name in names:
            out.append((name, id(rec), idx, X, Y, _sig(outer, free_calls(rec))))
    return tuple(out)


def _check_args(t: Term, xs, ys):
    if (len(xs), len(ys)) != tuple(t.arity):
        raise ArityMismatch(f"term of arity {t.arity} applied to ({len(xs)};{len(ys)}) arguments")


def eval_term(
    t: Term,
    xs=(),
    ys=(),
    env: OracleEnv | dict | None = None,
    stats: dict | None = None,
    memo: dict | None = None,
) -> int:
    """Direct evaluation with guarded recursion; memoised on exact arguments.

    Passing the same ``memo`` to several calls shares recursion values
    between them; only do so for calls over the same oracle environment."""
    env = env if isinstance(env, OracleEnv) else OracleEnv(env or {})
    xs, ys = tuple(xs), tuple(ys)
    _check_args(t, xs, ys)
    memo = {} if memo is None else memo

    def rule(t: Term, xs, ys, binds):
        v = _base(t, xs, ys, env)
        if v is not None or type(t) in _BASE_TYPES:
            return v
        T = type(t)
        if T is OracleCall:
            b = _lookup(binds, t.name)
            if b is None:
                return env.call(t.name, xs, ys)
            _, rec, idx, X, Y, outer = b
            if not guarded(xs, ys, X, Y):
                return 0
            return (yield ("rec", rec, idx, xs, ys, outer))
        if T is CompSafe:
            a = yield (t.g, xs, ys, binds)
            return (yield (t.h, xs, ys + (a,), binds))
        if T is CompNormal:
            a = yield (t.g, xs, (), binds)
            return (yield (t.h, (a,) + xs, ys, binds))
        if T is Comp:
            ns = []
            for g in t.normals:
                ns.append(_base(g, xs, (), env) if type(g) in _BASE_TYPES else (yield (g, xs, (), binds)))
            ss = []
            for s in t.safes:
                ss.append(_base(s, xs, ys, env) if type(s) in _BASE_TYPES else (yield (s, xs, ys, binds)))
            if type(t.h) in _BASE_TYPES:
                return _base(t.h, tuple(ns), tuple(ss), env)
            return (yield (t.h, tuple(ns), tuple(ss), binds))
        if T is RecPP:
            return (yield ("rec", t, 0, xs, ys, binds))
        if T is RecSim:
            return (yield ("rec", t, t.index, xs, ys, binds))
        raise TypeError(f"not a term: {t!r}")

    def start(req):
        if req[0] == "rec":
            _, rec, idx, u, v, outer = req
            names = (rec.name,) if isinstance(rec, RecPP) else rec.names
            bodies = (rec.body,) if isinstance(rec, RecPP) else rec.bodies
            binds = outer + tuple((a, rec, i, u, v, outer) for i, a in enumerate(names))
            return rule(bodies[idx], u, v, binds)
        return rule(*req)

    free: dict = {}

    def key(req):
        if req[0] == "rec":
            _, rec, idx, u, v, outer = req
            return (id(rec), idx, u, v, _sig(outer, free_calls(rec)))
        t, u, v, binds = req
        if type(t) not in (Comp, CompSafe, CompNormal):
            return None
        fc = free.get(id(t))
        if fc is None:
            fc = free[id(t)] = free_calls(t)
        # compound subterms that call no bound recursion depend on their arguments only
        if not any(b[0] in fc for b in binds):
            return (id(t), u, v)
        return None

    stack = []
    steps = 0
    top = start((t, xs, ys, ()))
    if not hasattr(top, "send"):
        return top
    stack.append((None, top))
    val = None
    while stack:
        k, gen = stack[-1]
        try:
            req = gen.send(val)
        except StopIteration as stop:
            val = stop.value
            stack.pop()
            if k is not None:
                memo[k] = val
            continue
        steps += 1
        if type(req[0]) in _BASE_TYPES:
            val = _base(req[0], req[1], req[2], env)
            continue
        k2 = key(req)
        if k2 is not None and k2 in memo:
            val = memo[k2]
            continue
        sub = start(req)
        if hasattr(sub, "send"):
            stack.append((k2, sub))
            val = None
        else:
            val = sub
            if k2 is not None:
                memo[k2] = val
    if stats is not None:
        stats["steps"] = steps
        stats["memo"] = len(memo)
    return val


def eval_term_table(t: Term, xs=(), ys=(), env: OracleEnv | dict | None = None, stats: dict | None = None) -> int:
    """Evaluation by course-of-values tables: a recursion at (x; y) first
    fills f(u; v) for every (u, v) of enumerate_pp(x, y) in order, each by one
    application of the body, then applies the body once more at (x; y)."""
    env = env if isinstance(env, OracleEnv) else OracleEnv(env or {})
    xs, ys = tuple(xs), tuple(ys)
    _check_args(t, xs, ys)
    tables: dict = {}
    counter = {"entries": 0}

    def ev(t: Term, xs, ys, binds):
        v = _base(t, xs, ys, env)
        if v is not None or type(t) in _BASE_TYPES:
            return v
        T = type(t)
        if T is OracleCall:
            b = _lookup(binds, t.name)
            if b is None:
                return env.call(t.name, xs, ys)
            _, table, idx, X, Y = b
            if not guarded(xs, ys, X, Y):
                return 0
            return table[(idx, xs, ys)]
        if T is CompSafe:
            return ev(t.h, xs, ys + (ev(t.g, xs, ys, binds),), binds)
        if T is CompNormal:
            return ev(t.h, (ev(t.g, xs, (), binds),) + xs, ys, binds)
        if T is Comp:
            ns = tuple(ev(g, xs, (), binds) for g in t.normals)
            ss = tuple(ev(s, xs, ys, binds) for s in t.safes)
            return ev(t.h, ns, ss, binds)
        if T in (RecPP, RecSim):
            names = (t.name,) if T is RecPP else t.names
            bodies = (t.body,) if T is RecPP else t.bodies
            idx = 0 if T is RecPP else t.index
            fc = free_calls(t)
            outer = tuple(e for e in binds if e[0] in fc)
            memo_ok = not outer
            tkey = (id(t), xs, ys)
            if memo_ok and tkey in tables:
                return tables[tkey][(idx, xs, ys)]
            table: dict = {}
            for u, v in enumerate_pp(xs, ys):
                inner = binds + tuple((a, table, i, u, v) for i, a in enumerate(names))
                for i, body in enumerate(bodies):
                    table[(i, u, v)] = ev(body, u, v, inner)
                    counter["entries"] += 1
            inner = binds + tuple((a, table, i, xs, ys) for i, a in enumerate(names))
            for i, body in enumerate(bodies):
                table[(i, xs, ys)] = ev(body, xs, ys, inner)
            if memo_ok:
                tables[tkey] = table
            return table[(idx, xs, ys)]
        raise TypeError(f"not a term: {t!r}")

    out = ev(t, xs, ys, ())
    if stats is not None:
        stats["entries"] = counter["entries"]
    return out


# -- bounds and truncation --------------------------------------------------------


def bound_poly(t: Term) -> Poly:
    """p with |t(x; y)| <= p(sum |x|) + max |y| for all arguments.

    Initial functions and relations get 1 + n, recursion oracles 0, safe
    composition adds, normal composition substitutes n + p_g(n), and a
    recursion over a body bounded by p_h gets (n + 1) p_h(n): each of the at
    most n + 1 nested calls can add p_h of the current length."""
    cache: dict[int, Poly] = {}

    def go(u: Term, bound: frozenset) -> Poly:
        k = (id(u), bound)
        if k in cache:
            return cache[k]
        if isinstance(u, OracleCall):
            p = Poly() if u.name in bound else ONE_PLUS_N
        elif isinstance(u, CompSafe):
            p = go(u.h, bound) + go(u.g, bound)
        elif isinstance(u, CompNormal):
            p = go(u.h, bound)(N_VAR + go(u.g, bound))
        elif isinstance(u, Comp):
            inner = N_VAR
            for g in u.normals:
                inner = inner + go(g, bound)
            p = go(u.h, bound)(inner)
            for s in u.safes:
                p = p + go(s, bound)
        elif isinstance(u, RecPP):
            p = (N_VAR + 1) * go(u.body, bound | {u.name})
        elif isinstance(u, RecSim):
            nb = bound | set(u.names)
            total = Poly()
            for b in u.bodies:
                total = total + go(b, nb)
            p = (N_VAR + 1) * total
        else:
            p = ONE_PLUS_N
        cache[k] = p
        return p

    return go(t, frozenset())


def growth_bound(t: Term, xs, ys) -> int:
    """m_f(x; y) = p_f(sum |x|) + max |y|."""
    return bound_poly(t)(sum(map(_len, xs))) + max(map(_len, ys), default=0)


def truncate_oracle(r: Callable, m: int) -> Callable:
    """r where every argument is shorter than m, 0 elsewhere."""
    if m < 0:
        raise ValueError("bound must be non-negative")

    def cut(xs, ys=()):
        if all(_len(v) < m for v in (*xs, *ys)):
            return r(xs, ys)
        return 0

    return cut


def initial_relations(t: Term) -> set[str]:
    out = set()
    todo = [t]
    seen = set()
    while todo:
        u = todo.pop()
        if id(u) in seen:
            continue
        seen.add(id(u))
        if isinstance(u, InitialRelation):
            out.add(u.name)
        todo.extend(children(u))
    return out


# -- simultaneous recursion -------------------------------------------------------


def rotation(i: int, k: int) -> tuple[int, ...]:
    """The tag list (i, ..., k, 1, ..., i-1), 1-based."""
    if not 1 <= i <= k:
        raise ValueError("rotation index out of range")
    return tuple(range(i, k + 1)) + tuple(range(1, i))


def _and(a: Term, b: Term) -> Term:
    m, n = a.arity
    return Comp(Cond(), (), (a, numeral(0, m, n), numeral(0, m, n), b), m, n)


def equals_const(c: int) -> Term:
    """e(; z) = 1 if z = c else 0, built by peeling bits of c."""
    z = ProjS(0, 1, 0)
    one, zero = numeral(1, 0, 1), numeral(0, 0, 1)
    if c == 0:
        return Comp(Cond(), (), (z, one, zero, zero), 0, 1)
    rest = Comp(equals_const(c >> 1), (), (Comp(Pred(), (), (z,), 0, 1),), 0, 1)
    if c & 1:
        return Comp(Cond(), (), (z, zero, zero, rest), 0, 1)
    return Comp(Cond(), (), (z, zero, rest, zero), 0, 1)


def _substitute_calls(t: Term, mapping: dict[str, Callable[[Term], Term]]) -> Term:
    """Replace OracleCall leaves named in mapping (respecting shadowing)."""
    memo: dict[int, Term] = {}

    def go(u: Term, live: frozenset) -> Term:
        key = (id(u), live)
        if key in memo:
            return memo[key]
        if isinstance(u, OracleCall) and u.name in live:
            out = mapping[u.name](u)
        elif isinstance(u, CompSafe):
            out = CompSafe(go(u.g, live), go(u.h, live))
        elif isinstance(u, CompNormal):
            out = CompNormal(go(u.g, live), go(u.h, live))
        elif isinstance(u, Comp):
            out = Comp(go(u.h, live), tuple(go(g, live) for g in u.normals), tuple(go(s, live) for s in u.safes), u.m, u.n)
        elif isinstance(u, RecPP):
            out = RecPP(u.name, go(u.body, live - {u.name}))
        elif isinstance(u, RecSim):
            inner = live - set(u.names)
            out = RecSim(u.names, tuple(go(b, inner) for b in u.bodies), u.index)
        else:
            out = u
        memo[key] = out
        return out

    return go(t, frozenset(mapping))


def reduce_simultaneous(names, bodies, rec_name: str = "a") -> tuple[Term, ...]:
    """Single-recursion presentation of a simultaneous recursion.

    F(x; y, z) carries k extra safe arguments; at z = rotation(i) it runs
    body i with each call to a_j redirected to F(.; ., rotation(j)).  Returns
    the components f_i(x; y) = F(x; y, rotation(i))."""
    names, bodies = tuple(names), tuple(bodies)
    k = len(bodies)
    if k == 0 or len(names) != k:
        raise ValueError("need one name per body")
    m, n = bodies[0].arity
    if any(b.arity != (m, n) for b in bodies):
        raise ArityMismatch("bodies must share an arity")
    while rec_name in names:
        rec_name += "_"
    wide = (m, n + k)
    tags = [rotation(i, k) for i in range(1, k + 1)]

    def redirect(j: int):
        def make(call: OracleCall) -> Term:
            extra = tuple(numeral(c, m, n) for c in tags[j])
            return Comp(
                OracleCall(rec_name, m, n + k),
                tuple(ProjN(m, 0, i) for i in range(m)),
                tuple(ProjS(m, n, i) for i in range(n)) + extra,
                m,
                n,
            )

        return make

    mapping = {a: redirect(j) for j, a in enumerate(names)}
    dispatch: Term = numeral(0, *wide)
    for i in reversed(range(k)):
        test: Term | None = None
        for j, c in enumerate(tags[i]):
            eq = Comp(equals_const(c), (), (ProjS(m, n + k, n + j),), m, n + k)
            test = eq if test is None else _and(test, eq)
        body = weaken(_substitute_calls(bodies[i], mapping), m, n + k, range(m), range(n))
        dispatch = Comp(Cond(), (), (test, dispatch, dispatch, body), m, n + k)
    F = RecPP(rec_name, dispatch)
    return tuple(
        Comp(
            F,
            tuple(ProjN(m, 0, i) for i in range(m)),
            tuple(ProjS(m, n, i) for i in range(n)) + tuple(numeral(c, m, n) for c in tags[i]),
            m,
            n,
        )
        for i in range(k)
    )


# -- text syntax -------------------------------------------------------------


def serialize_term(t: Term) -> str:
    T = type(t)
    simple = {Zero: "zero", S0: "s0", S1: "s1", Pred: "pred", Cond: "cond"}
    if T in simple:
        return f"({simple[T]})"
    if T is ProjN:
        return f"(projn {t.m} {t.n} {t.j})"
    if T is ProjS:
        return f"(projs {t.m} {t.n} {t.j})"
    if T is OracleCall:
        return f"(oracle {t.name} {t.m} {t.n})"
    if T is InitialRelation:
        return f"(rel {t.name} {t.m} {t.n})"
    if T is CompSafe:
        return f"(compsafe {serialize_term(t.g)} {serialize_term(t.h)})"
    if T is CompNormal:
        return f"(compnormal {serialize_term(t.g)} {serialize_term(t.h)})"
    if T is Comp:
        ns = " ".join(serialize_term(g) for g in t.normals)
        ss = " ".join(serialize_term(s) for s in t.safes)
        return f"(comp {t.m} {t.n} {serialize_term(t.h)} (args{' ' + ns if ns else ''}) (args{' ' + ss if ss else ''}))"
    if T is RecPP:
        return f"(rec {t.name} {serialize_term(t.body)})"
    if T is RecSim:
        bodies = " ".join(serialize_term(b) for b in t.bodies)
        return f"(recsim {t.index} (names {' '.join(t.names)}) {bodies})"
    raise TypeError(f"not a term: {t!r}")


def _tokens(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_term(text: str) -> Term:
    toks = _tokens(text)
    pos = 0

    def nat(tok: str) -> int:
        if not tok.isdigit():
            raise TermSyntaxError(f"expected a natural number, got {tok!r}")
        return int(tok)

    def take() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise TermSyntaxError("unexpected end of input")
        pos += 1
        return toks[pos - 1]

    def expect(tok: str):
        got = take()
        if got != tok:
            raise TermSyntaxError(f"expected {tok!r}, got {got!r}")

    def group(head: str) -> list:
        expect("(")
        expect(head)
        out = []
        while toks[pos] != ")" if pos < len(toks) else False:
            out.append(term() if toks[pos] == "(" else take())
        expect(")")
        return out

    def term() -> Term:
        expect("(")
        head = take()
        simple = {"zero": Zero, "s0": S0, "s1": S1, "pred": Pred, "cond": Cond}
        try:
            if head in simple:
                out = simple[head]()
            elif head in ("projn", "projs"):
                m, n, j = nat(take()), nat(take()), nat(take())
                out = (ProjN if head == "projn" else ProjS)(m, n, j)
            elif head in ("oracle", "rel"):
                name, m, n = take(), nat(take()), nat(take())
                out = (OracleCall if head == "oracle" else InitialRelation)(name, m, n)
            elif head in ("compsafe", "compnormal"):
                g, h = term(), term()
                out = (CompSafe if head == "compsafe" else CompNormal)(g, h)
            elif head == "comp":
                m, n = nat(take()), nat(take())
                h = term()
                ns, ss = group("args"), group("args")
                out = Comp(h, tuple(ns), tuple(ss), m, n)
            elif head == "rec":
                name = take()
                out = RecPP(name, term())
            elif head == "recsim":
                idx = nat(take())
                names = group("names")
                bodies = []
                while pos < len(toks) and toks[pos] == "(":
                    bodies.append(term())
                out = RecSim(tuple(names), tuple(bodies), idx)
            else:
                raise TermSyntaxError(f"unknown constructor {head!r}")
        except ArityMismatch as exc:
            raise TermSyntaxError(str(exc)) from exc
        expect(")")
        return out

    if not toks:
        raise TermSyntaxError("empty input")
    out = term()
    if pos != len(toks):
        raise TermSyntaxError("trailing input after term")
    return out


def random_args(rng: random.Random, m: int, n: int, bits: int) -> tuple[tuple, tuple]:
    return (
        tuple(rng.getrandbits(rng.randint(0, bits)) for _ in range(m)),
        tuple(rng.getrandbits(rng.randint(0, bits)) for _ in range(n)),
    )
