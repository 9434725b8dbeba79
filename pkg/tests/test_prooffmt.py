import random

import pytest

from conftest import FIXTURES, PROOFS, fixture_graph
from cyclicbc.kernel import validate_graph
from cyclicbc.prooffmt import (
    AdviceSource,
    DanglingId,
    FormatError,
    Netlist,
    ProofDocument,
    ProofSyntaxError,
    UnknownBuiltin,
    UnknownRule,
    load_advice,
    parse_advice,
    parse_netlist,
    parse_proof,
    serialize_advice,
    serialize_netlist,
    serialize_proof,
)

I_TEXT = (FIXTURES / "I.cbp").read_text()


def test_parse_I():
    doc = parse_proof(I_TEXT)
    assert doc.name == "I"
    assert len(doc.nodes) == 8
    assert doc.back_references() == [("weak", "dis")]
    kinds = {nd.rule.kind for nd in doc.nodes}
    assert {"cut_box", "box_r", "box_l", "s1", "id", "dis"} <= kinds


@pytest.mark.parametrize("text", ["", "   \n# only a comment\n"])
def test_empty_input(text):
    with pytest.raises(ProofSyntaxError):
        parse_proof(text)


def test_dangling_premise():
    with pytest.raises(DanglingId):
        parse_proof("proof x\nnode a seq 0 1 N rule s0 prem b\n")


def test_unknown_rule():
    with pytest.raises(UnknownRule):
        parse_proof("proof x\nnode a seq 0 0 N rule frob\n")


@pytest.mark.parametrize(
    "line",
    [
        "node a seq x 0 N rule zero",
        "node a seq 0 0 M rule zero",
        "node a seq 2 0 N rule e_box",
        "node a seq 0 0 N rule zero extra",
        "widget a",
    ],
)
def test_syntax_errors(line):
    with pytest.raises(ProofSyntaxError):
        parse_proof("proof x\n" + line + "\n")


def test_back_reference_must_hit_dis():
    text = "proof x\nnode a seq 0 1 N rule s0 prem b\nnode b seq 0 1 N rule s1 prem a\n"
    with pytest.raises(ProofSyntaxError):
        parse_proof(text)


@pytest.mark.parametrize("name", PROOFS)
def test_round_trip(name):
    text = (FIXTURES / f"{name}.cbp").read_text()
    doc = parse_proof(text)
    again = parse_proof(serialize_proof(doc))
    assert again == doc
    assert validate_graph(doc.to_graph()) == []


def test_round_trip_from_graph():
    g = fixture_graph("C")
    doc = ProofDocument.from_graph(g)
    assert parse_proof(serialize_proof(g)) == doc


def test_comments_dropped():
    plain = parse_proof(I_TEXT)
    noisy = "# header\n" + "\n".join(line + "   # note" for line in I_TEXT.splitlines()) + "\n\n"
    assert parse_proof(noisy) == plain


def test_relative_oracle_source_resolved():
    g = fixture_graph("A")
    (r,) = g.oracles
    assert r.source.endswith("ones.adv")
    assert load_advice(r.source)((5,)) == 1


def test_advice_table():
    adv = parse_advice("0 -> 1\n1 -> 0\ndefault 0")
    assert adv((0,)) == 1
    assert adv((1,)) == 0
    assert adv((6,)) == 0
    assert adv.arity == 1


def test_advice_default_when_absent():
    assert parse_advice("3 -> 1\n").lookup((2,)) == 0


def test_builtin_parity_len():
    adv = load_advice("builtin:parity-len")
    assert adv.lookup((5,)) == 1
    assert adv((0b11111,)) == 1
    assert adv((0b11,)) == 0


def test_builtin_unknown():
    with pytest.raises(UnknownBuiltin):
        load_advice("builtin:nope")


@pytest.mark.parametrize("text", ["x -> 2", "1 -> 2", "1 2 -> 1\n3 -> 0", "default 2", "1 -> 1\n1 -> 0"])
def test_advice_format_errors(text):
    with pytest.raises(FormatError):
        parse_advice(text)


def test_advice_round_trip():
    for path in FIXTURES.glob("*.adv"):
        adv = load_advice(path)
        assert parse_advice(serialize_advice(adv)) == adv


def test_advice_length_determined():
    rng = random.Random(3)
    for path in [*FIXTURES.glob("*.adv"), "builtin:parity-len", "builtin:halting-stub"]:
        adv = load_advice(path)
        k = adv.arity or 1
        for _ in range(200):
            lens = [rng.randint(0, 9) for _ in range(k)]
            a = tuple(rng.getrandbits(n) | (1 << (n - 1)) if n else 0 for n in lens)
            b = tuple(rng.getrandbits(n) | (1 << (n - 1)) if n else 0 for n in lens)
            assert adv(a) == adv(b)


def test_advice_is_frozen():
    adv = AdviceSource((((1,), 1),), 0)
    with pytest.raises(AttributeError):
        adv.default = 1


NET = """\
inputs 2
gate g0 and x0 x1
gate g1 not g0
output g1
"""


def test_netlist_round_trip():
    net = parse_netlist(NET)
    assert net == Netlist(2, (("g0", "and", ("x0", "x1")), ("g1", "not", ("g0",))), "g1")
    assert parse_netlist(serialize_netlist(net)) == net


@pytest.mark.parametrize(
    "text",
    [
        "inputs 1\ngate g0 and x0\noutput g0",
        "inputs 1\ngate g0 not g1\ngate g1 not x0\noutput g0",
        "inputs 1\ngate g0 xor x0 x0\noutput g0",
        "inputs 1\noutput g9",
        "gate g0 c1\noutput g0",
    ],
)
def test_netlist_errors(text):
    with pytest.raises(FormatError):
        parse_netlist(text)
