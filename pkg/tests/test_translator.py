import random

import pytest

from conftest import PROOFS, fixture_graph
from cyclicbc.algebra import Zero, check_term, eval_term
from cyclicbc.checker import CB, REJECTED, NotProgressing, classify
from cyclicbc.evaluator import evaluate, oracle_env
from cyclicbc.kernel import BOX, Node, ProofGraph, RuleTag, seq
from cyclicbc.translator import (
    ClassificationError,
    NotCycleNormal,
    cutbox_star,
    cycle_nf,
    srec_to_cycle,
    structure_check,
    translate,
)
from derivations import append_derivation, append_value, nested_derivation, nested_value


def test_cycle_nf_C():
    a = cycle_nf(fixture_graph("C"))
    assert a.buds == {("si0", 0), ("si1", 0), ("so0", 0), ("so1", 0)}
    assert set(a.companion.values()) == {"inner", "outer"}
    assert a.close["outer"] == {"outer", "inner"}
    assert not a.open["outer"]
    assert a.open["inner"] == set()
    assert a.open["condo"] == {("so0", 0), ("so1", 0)}


def test_cycle_nf_acyclic():
    g = fixture_graph("I").subgraph("boxr")
    a = cycle_nf(g)
    assert a.buds == frozenset()
    assert a.as_dict()["buds"] == []


def test_cycle_nf_rejects_repeated_coderivation():
    # the two dis nodes unfold to the same infinite tree
    g = ProofGraph(
        "twice",
        (
            Node("d1", seq(0, 1), RuleTag("dis"), ("a",)),
            Node("a", seq(0, 1), RuleTag("s0"), ("d2",)),
            Node("d2", seq(0, 1), RuleTag("dis"), ("b",)),
            Node("b", seq(0, 1), RuleTag("s0"), ("d2",)),
        ),
    )
    with pytest.raises(NotCycleNormal) as err:
        cycle_nf(g)
    assert err.value.pair is not None


def test_structure_check():
    assert structure_check(cycle_nf(fixture_graph("C"))).ok
    r = structure_check(cycle_nf(fixture_graph("R")))
    assert not r.ok and any("cut_box" in f for f in r.failures())
    e = structure_check(cycle_nf(fixture_graph("E")))
    assert not e.ok and any("right premise of cut_n" in f for f in e.failures())


def test_cutbox_star_rejects_non_progressing():
    with pytest.raises(NotProgressing):
        cutbox_star(fixture_graph("I"), "dis")


def test_cutbox_star_no_safe_context_is_identity():
    g = fixture_graph("I")
    assert cutbox_star(g, "boxr") == g.subgraph("boxr")


def test_cutbox_star_drops_safe_arguments():
    g = ProofGraph(
        "b",
        (
            Node("b", seq(1, 1, BOX), RuleTag("w_n"), ("b1",)),
            Node("b1", seq(1, 0, BOX), RuleTag("box_r"), ("c",)),
            Node("c", seq(1, 0), RuleTag("box_l"), ("s",)),
            Node("s", seq(0, 1), RuleTag("s1"), ("ax",)),
            Node("ax", seq(0, 1), RuleTag("id")),
        ),
    )
    star = cutbox_star(g, "b")
    assert star[star.root].sequent == seq(1, 0, BOX)
    for x in range(8):
        for y in range(0, 50, 7):
            assert evaluate(star, None, [x], []) == evaluate(g, None, [x], [y]) == 2 * x + 1


def test_translate_C():
    t = translate(fixture_graph("C"))
    check_term(t)
    assert eval_term(t, (2, 3), (1,)) == 30


def test_translate_P():
    t = translate(fixture_graph("P"))
    assert [eval_term(t, (x,), ()) for x in (6, 5, 2)] == [1, 1, 0]


def test_translate_A_with_oracle():
    g = fixture_graph("A")
    t = translate(g)
    env = oracle_env(g)
    for x in range(40):
        assert eval_term(t, (x,), (), env) == evaluate(g, None, [x], [], env)


def test_translate_single_leaf():
    g = ProofGraph("z", (Node("z", seq(0, 0), RuleTag("zero")),))
    assert translate(g) == Zero()


def test_translate_rejects_srec():
    with pytest.raises(ClassificationError):
        translate(append_derivation())


@pytest.mark.parametrize("name", PROOFS)
def test_translate_rejects_what_classify_rejects(name):
    g = fixture_graph(name)
    if classify(g).classification == REJECTED:
        with pytest.raises(ClassificationError):
            translate(g)
    else:
        check_term(translate(g))


def test_srec_to_cycle_append():
    g = srec_to_cycle(append_derivation())
    assert not any(nd.rule.kind == "srec" for nd in g.nodes)
    assert classify(g).classification == CB
    t = translate(g)
    rng = random.Random(2)
    for _ in range(100):
        x, y = rng.getrandbits(10), rng.getrandbits(10)
        want = append_value(x, y)
        assert evaluate(g, None, [x], [y]) == want
        assert eval_term(t, (x,), (y,)) == want


def test_srec_to_cycle_without_srec_is_unchanged():
    g = fixture_graph("C")
    assert srec_to_cycle(g) is g


def test_srec_to_cycle_nested():
    g = srec_to_cycle(nested_derivation())
    assert classify(g).classification == CB
    t = translate(g)
    for x in range(8):
        for w in range(6):
            assert eval_term(t, (x, w), (3,)) == evaluate(g, None, [x, w], [3]) == nested_value(x, w, 3)
