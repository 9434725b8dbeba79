import pytest

from conftest import PROOFS, fixture_graph
from cyclicbc.kernel import (
    BOX,
    EQUAL,
    SMALLER,
    IncompatibleSequent,
    Node,
    ProofGraph,
    RuleTag,
    ancestry_edges,
    position_map,
    rule_signature,
    seq,
    unfold,
    validate_graph,
)


def test_cond_box_signature():
    assert rule_signature(RuleTag("cond_box"), seq(1, 0)) == [seq(0, 0), seq(1, 0), seq(1, 0)]


def test_dis_repeats_conclusion():
    assert rule_signature(RuleTag("dis"), seq(2, 1)) == [seq(2, 1)]


def test_box_r_needs_modal_context():
    with pytest.raises(IncompatibleSequent):
        rule_signature(RuleTag("box_r"), seq(2, 1, BOX))
    assert rule_signature(RuleTag("box_r"), seq(2, 0, BOX)) == [seq(2, 0)]


@pytest.mark.parametrize(
    "rule, conclusion",
    [("id", seq(1, 1)), ("zero", seq(0, 1)), ("w_n", seq(1, 0)), ("w_box", seq(0, 2)), ("cond_n", seq(1, 0))],
)
def test_signature_rejects(rule, conclusion):
    with pytest.raises(IncompatibleSequent):
        rule_signature(RuleTag(rule), conclusion)


def test_swap_index_bounds():
    assert rule_signature(RuleTag("e_box", 0), seq(2, 0)) == [seq(2, 0)]
    with pytest.raises(IncompatibleSequent):
        rule_signature(RuleTag("e_box", 1), seq(2, 0))


def test_ruletag_validation():
    with pytest.raises(ValueError):
        RuleTag("bogus")
    with pytest.raises(ValueError):
        RuleTag("e_n")
    with pytest.raises(ValueError):
        RuleTag("s0", 1)


@pytest.mark.parametrize("name", PROOFS)
def test_fixtures_validate(name):
    g = fixture_graph(name)
    assert validate_graph(g) == []
    for nd in g.nodes:
        assert [g[p].sequent for p in nd.premises] == rule_signature(nd.rule, nd.sequent)


def test_arity_violation():
    g = ProofGraph("bad", (Node("c", seq(0, 0), RuleTag("cut_n"), ("z",)), Node("z", seq(0, 0), RuleTag("zero"))))
    kinds = {(d.node, d.kind) for d in validate_graph(g)}
    assert ("c", "arity") in kinds


def test_cycle_without_dis():
    g = ProofGraph("bad", (Node("a", seq(0, 1), RuleTag("s0"), ("b",)), Node("b", seq(0, 1), RuleTag("s1"), ("a",))))
    assert any(d.kind == "missing-dis" for d in validate_graph(g))


def test_dis_without_bud_and_unreachable():
    g = ProofGraph(
        "bad",
        (Node("d", seq(0, 0), RuleTag("dis"), ("z",)), Node("z", seq(0, 0), RuleTag("zero")), Node("u", seq(0, 0), RuleTag("one"))),
    )
    kinds = {d.kind for d in validate_graph(g)}
    assert {"dis", "unreachable"} <= kinds


def test_cond_box_progress_point():
    m = {src: (dst, flag) for src, dst, flag in position_map(RuleTag("cond_box"), seq(1, 0), 1)}
    assert m == {("box", 0): (("box", 0), SMALLER)}
    m0 = position_map(RuleTag("cond_box"), seq(1, 0), 0)
    assert m0 == ()


def test_dis_identity_map():
    m = position_map(RuleTag("dis"), seq(2, 1), 0)
    assert all(src == dst and flag == EQUAL for src, dst, flag in m)
    assert len(m) == 3


def test_box_l_moves_to_safe():
    m = {src: dst for src, dst, _ in position_map(RuleTag("box_l"), seq(1, 0), 0)}
    assert m[("box", 0)] == ("safe", 0)


def test_ancestry_edges_cover_premises():
    g = fixture_graph("C")
    for nd in g.nodes:
        edges = ancestry_edges(g, nd.id)
        assert [e.premise for e in edges] == list(nd.premises)


def test_unfold_I_repeats_loop():
    g = fixture_graph("I")
    t = unfold(g, g.root, 3)
    assert t.depth() == 4
    deeper = unfold(g, g.root, 12)
    nodes = []

    def walk(u):
        nodes.append(u.node)
        for c in u.children:
            walk(c)

    walk(deeper)
    assert nodes.count("cut") >= 2


def test_unfold_depth_zero():
    g = fixture_graph("C")
    t = unfold(g, g.root, 0)
    assert t.children == [] and t.node == g.root


@pytest.mark.parametrize("name", PROOFS)
def test_unfold_prefix_stable(name):
    g = fixture_graph(name)
    for d in range(5):
        assert unfold(g, g.root, d + 1).truncate(d).shape() == unfold(g, g.root, d).shape()


def test_unfold_C_children_are_cond_premises():
    g = fixture_graph("C")
    t = unfold(g, g.root, 2)
    cond = t.children[0]
    assert cond.rule.kind == "cond_box"
    assert [c.node for c in cond.children] == list(g[cond.node].premises)


def test_subgraph_rejects_escaping_back_edge():
    g = fixture_graph("C")
    inner = g["inner"]
    with pytest.raises(ValueError):
        g.subgraph(inner.premises[0])
