import random
from functools import lru_cache
from itertools import product

import pytest

from cyclicbc.algebra import (
    S0,
    S1,
    Comp,
    CompNormal,
    CompSafe,
    Cond,
    InitialRelation,
    LengthMismatch,
    OracleCall,
    Poly,
    Pred,
    ProjN,
    ProjS,
    RecPP,
    RecSim,
    ScopeError,
    TermSyntaxError,
    Zero,
    bound_poly,
    check_term,
    enumerate_pp,
    equals_const,
    eval_term,
    eval_term_table,
    growth_bound,
    numeral,
    parse_term,
    pp_compare,
    pp_leq,
    pp_less,
    random_args,
    reduce_simultaneous,
    rotation,
    serialize_term,
    truncate_oracle,
    weaken,
)
from cyclicbc.evaluator import ArityMismatch, MissingOracle
from cyclicbc.prooffmt import load_advice

X, Y = ProjN(1, 1, 0), ProjS(1, 1, 0)
PX = Comp(Pred(), (), (ProjN(1, 0, 0),), 1, 0)


def call(name):
    return Comp(OracleCall(name, 1, 1), (PX,), (Y,), 1, 1)


def succ(bit, t):
    return Comp(S1() if bit else S0(), (), (t,), 1, 1)


def cond(w, a, b, c):
    return Comp(Cond(), (), (w, a, b, c), 1, 1)


# f(x; y) = y followed by the bits of x
DOUBLE_ADD = RecPP("a", cond(X, Y, succ(0, call("a")), succ(1, call("a"))))
# guarded call at the same arguments contributes 0
SELF_CALL = RecPP("a", succ(1, Comp(OracleCall("a", 1, 1), (ProjN(1, 0, 0),), (Y,), 1, 1)))
RELATION = InitialRelation("r", 1, 0)


@pytest.mark.parametrize(
    "u, x, want",
    [([5], [5], "nonstrict"), ([1, 2], [2, 5], "strict"), ([3], [5], "incomparable"), ([2, 1], [2, 5], "strict"), ([], [], "nonstrict")],
)
def test_pp_compare(u, x, want):
    assert pp_compare(u, x) == want


def test_pp_compare_length_mismatch():
    with pytest.raises(LengthMismatch):
        pp_compare([1], [1, 2])


def _brute_leq(u, x):
    from itertools import permutations

    def prefixes(v):
        out = {v}
        while v:
            v >>= 1
            out.add(v)
        return out

    return any(all(a in prefixes(b) for a, b in zip(u, p)) for p in permutations(x))


def test_pp_order_matches_brute_force():
    vals = range(8)
    for u in product(vals, repeat=2):
        for x in product(vals, repeat=2):
            leq = _brute_leq(u, x)
            assert pp_leq(u, x) == leq
            strict = leq and sum(v.bit_length() for v in u) < sum(v.bit_length() for v in x)
            assert pp_less(u, x) == strict


def test_enumerate_pp_examples():
    assert enumerate_pp([2], []) == [((0,), ()), ((1,), ())]
    assert enumerate_pp([], []) == []
    assert enumerate_pp([1], [1]) == [((0,), (0,)), ((0,), (1,))]


def test_enumerate_pp_size_and_order():
    from math import factorial, prod

    rng = random.Random(5)
    for _ in range(25):
        xs = tuple(rng.getrandbits(rng.randint(0, 5)) for _ in range(rng.randint(0, 2)))
        ys = tuple(rng.getrandbits(rng.randint(0, 5)) for _ in range(rng.randint(0, 2)))
        got = enumerate_pp(xs, ys)
        assert len(got) == len(set(got))
        bound = prod(v.bit_length() + 1 for v in xs) * factorial(len(xs)) * prod(v.bit_length() + 1 for v in ys) * factorial(len(ys))
        assert len(got) <= bound
        for u, v in got:
            assert pp_less(u, xs) and pp_leq(v, ys)
        pos = {e: i for i, e in enumerate(got)}
        for (u, v), i in pos.items():
            for (u2, v2), j in pos.items():
                if pp_less(u2, u) and pp_leq(v2, v):
                    assert j < i


def test_enumerate_pp_size_exhaustive():
    from math import factorial, prod

    def bound(xs, ys):
        return prod(v.bit_length() + 1 for v in xs) * factorial(len(xs)) * prod(v.bit_length() + 1 for v in ys) * factorial(len(ys))

    # every (1;1) and (2;0) tuple of values up to 8 bits
    for a, b in product(range(256), repeat=2):
        for xs, ys in (((a,), (b,)), ((a, b), ())):
            assert len(enumerate_pp(xs, ys)) <= bound(xs, ys)


def test_double_and_add():
    assert eval_term(DOUBLE_ADD, (5,), (0,)) == 5
    assert eval_term_table(DOUBLE_ADD, (5,), (0,)) == 5
    rng = random.Random(0)
    for _ in range(50):
        x, y = rng.getrandbits(10), rng.getrandbits(6)
        want = (y << x.bit_length()) | x if x else y
        assert eval_term(DOUBLE_ADD, (x,), (y,)) == eval_term_table(DOUBLE_ADD, (x,), (y,)) == want


def test_guarded_self_call_is_zero():
    assert eval_term(SELF_CALL, (6,), (3,)) == 1
    assert eval_term_table(SELF_CALL, (6,), (3,)) == 1


def test_initial_relation_reads_env():
    env = {"r": load_advice("builtin:parity-len")}
    assert eval_term(RELATION, (4,), (), env) == 1
    assert eval_term_table(RELATION, (4,), (), env) == 1
    with pytest.raises(MissingOracle):
        eval_term(RELATION, (4,), ())


def test_arity_checked():
    with pytest.raises(ArityMismatch):
        eval_term(DOUBLE_ADD, (1, 2), ())
    with pytest.raises(ArityMismatch):
        Comp(S0(), (), (), 0, 0)


def test_scope_discipline():
    check_term(DOUBLE_ADD)
    leaked = RecPP("a", Comp(OracleCall("f", 1, 1), (Comp(OracleCall("a", 1, 0), (PX,), (), 1, 0),), (Y,), 1, 1))
    with pytest.raises(ScopeError):
        check_term(leaked)
    # a recursion wholly inside a normal argument may call itself
    inner = RecPP("b", Comp(Cond(), (), (ProjN(1, 0, 0), numeral(0, 1, 0), Comp(OracleCall("b", 1, 0), (PX,), (), 1, 0), numeral(1, 1, 0)), 1, 0))
    check_term(Comp(OracleCall("f", 1, 1), (inner,), (Y,), 1, 1))


def test_bound_poly_clauses():
    assert bound_poly(S0()) == Poly((1, 1))
    assert bound_poly(RecPP("a", S1())) == Poly((1, 2, 1))
    assert bound_poly(CompSafe(S0(), ProjS(0, 2, 1))) == Poly((2, 2))
    assert bound_poly(OracleCall("free", 0, 1)) == Poly((1, 1))
    assert bound_poly(RecPP("a", OracleCall("a", 0, 1))) == Poly()


def test_bound_poly_normal_composition():
    g = Comp(S0(), (), (ProjN(1, 0, 0),), 1, 0)
    h = ProjN(2, 0, 0)
    assert bound_poly(CompNormal(g, h)) == Poly((1, 1))(Poly((0, 1)) + bound_poly(g))


def test_growth_bound_holds():
    rng = random.Random(1)
    for t in (DOUBLE_ADD, SELF_CALL):
        for _ in range(100):
            xs, ys = random_args(rng, 1, 1, 12)
            assert eval_term(t, xs, ys).bit_length() <= growth_bound(t, xs, ys)


def test_truncate_oracle():
    r = load_advice("builtin:parity-len")
    cut = truncate_oracle(r, 3)
    assert cut((0b11,)) == r((0b11,)) == 0
    assert cut((0b1,)) == 1
    assert cut((0b111,)) == 0 and r((0b111,)) == 1
    zero = truncate_oracle(r, 0)
    assert all(zero((x,)) == 0 for x in range(20))
    with pytest.raises(ValueError):
        truncate_oracle(r, -1)


def test_rotation():
    assert rotation(2, 3) == (2, 3, 1)
    assert rotation(1, 1) == (1,)
    with pytest.raises(ValueError):
        rotation(0, 2)


def test_equals_const():
    for c in range(9):
        t = equals_const(c)
        assert [eval_term(t, (), (z,)) for z in range(12)] == [int(z == c) for z in range(12)]


def test_reduce_single_recursion():
    (f,) = reduce_simultaneous(["a"], [DOUBLE_ADD.body])
    for x, y in product(range(16), range(4)):
        assert eval_term(f, (x,), (y,)) == eval_term(DOUBLE_ADD, (x,), (y,))


# a mutual pair: f1 appends x's bits with the last one flipped at every other step
H1 = cond(X, Y, succ(0, call("a2")), succ(1, call("a2")))
H2 = cond(X, succ(1, Y), succ(1, call("a1")), succ(0, call("a1")))


@lru_cache(maxsize=None)
def f1(x, y):
    return y if x == 0 else 2 * f2(x >> 1, y) + (x & 1)


@lru_cache(maxsize=None)
def f2(x, y):
    return 2 * y + 1 if x == 0 else 2 * f1(x >> 1, y) + 1 - (x & 1)


def test_simultaneous_direct():
    for i, f in enumerate((f1, f2)):
        t = RecSim(("a1", "a2"), (H1, H2), i)
        for x, y in product(range(32), range(8)):
            assert eval_term(t, (x,), (y,)) == f(x, y)


def test_reduce_simultaneous_pair():
    g1, g2 = reduce_simultaneous(["a1", "a2"], [H1, H2])
    for x, y in product(range(32), range(8)):
        assert eval_term(g1, (x,), (y,)) == f1(x, y)
        assert eval_term(g2, (x,), (y,)) == f2(x, y)


def test_weaken_and_numeral():
    assert eval_term(numeral(13, 2, 1), (5, 6), (7,)) == 13
    t = weaken(ProjS(0, 1, 0), 2, 2, (), (1,))
    assert eval_term(t, (1, 2), (3, 4)) == 4


@pytest.mark.parametrize("t", [DOUBLE_ADD, SELF_CALL, RELATION, Zero(), CompSafe(S0(), ProjS(0, 2, 1)), RecSim(("a1", "a2"), (H1, H2), 1)])
def test_serialize_round_trip(t):
    assert parse_term(serialize_term(t)) == t


@pytest.mark.parametrize("text", ["", "(frob)", "(comp 1 0 (zero)", "(projn 1 0 3)"])
def test_parse_errors(text):
    with pytest.raises((TermSyntaxError, ArityMismatch)):
        parse_term(text)


def test_poly_arithmetic():
    p = Poly((1, 1))
    assert (p * p)(3) == 16
    assert str(p * p) == "1 + 2n + n^2"
    assert p(Poly((0, 2))) == Poly((1, 2))
    with pytest.raises(ValueError):
        Poly((-1,))


def test_shared_memo_matches_fresh_evaluation():
    g1, g2 = reduce_simultaneous(["a1", "a2"], [H1, H2])
    memo: dict = {}
    for x, y in product(range(16), range(4)):
        assert eval_term(g1, (x,), (y,), memo=memo) == eval_term(g1, (x,), (y,))
        assert eval_term(g2, (x,), (y,), memo=memo) == f2(x, y)
